//! Small feed-forward scorer with a sigmoid output, trained by mini-batch SGD
//! on binary cross-entropy.

use super::{HeuristicError, TrainingExample};
use rand::seq::SliceRandom;
use rand::Rng;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

const FORMAT_HEADER: &str = "ramsey-mlp";
const FORMAT_VERSION: u32 = 1;

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::Relu),
            "tanh" => Some(Activation::Tanh),
            _ => None,
        }
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of `sigmoid(z)` against `y`, in a form that stays
/// finite for large `|z|`.
#[inline]
fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, PartialEq)]
struct Dense {
    inputs: usize,
    outputs: usize,
    /// Row-major `outputs x inputs`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Dense {
    fn glorot<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let weights = (0..inputs * outputs).map(|_| rng.random_range(-limit..=limit)).collect();
        Dense { inputs, outputs, weights, bias: vec![0.0; outputs] }
    }

    fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (row, b) in self.weights.chunks_exact(self.inputs).zip(&self.bias) {
            out.push(row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b);
        }
    }
}

/// Gradients laid out like the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    weights: Vec<Vec<f64>>,
    bias: Vec<Vec<f64>>,
}

impl Gradients {
    /// Flattened in the same order as [`MlpModel::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.bias) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }
}

/// Summary of one call to [`MlpModel::train`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs: usize,
    pub examples: usize,
    /// Mean loss over the examples before the first update.
    pub initial_loss: f64,
    /// Mean loss over the examples after the last update.
    pub final_loss: f64,
}

/// Feed-forward network `input -> hidden... -> 1` with sigmoid output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layers: Vec<Dense>,
    activation: Activation,
    learning_rate: f64,
}

impl MlpModel {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(
        input_dim: usize,
        hidden: &[usize],
        activation: Activation,
        learning_rate: f64,
        rng: &mut R,
    ) -> Result<Self, HeuristicError> {
        if input_dim == 0 || hidden.contains(&0) {
            return Err(HeuristicError::BadArchitecture(format!("zero-width layer in {input_dim} -> {hidden:?} -> 1")));
        }
        if !(learning_rate.is_finite() && learning_rate > 0.0) {
            return Err(HeuristicError::BadArchitecture(format!("learning rate {learning_rate} must be positive")));
        }
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden);
        dims.push(1);
        let layers = dims.windows(2).map(|w| Dense::glorot(w[0], w[1], rng)).collect();
        Ok(MlpModel { layers, activation, learning_rate })
    }

    /// Model with every weight and bias zero; it scores 0.5 everywhere.
    pub fn zeros(input_dim: usize, hidden: &[usize], activation: Activation) -> Self {
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden);
        dims.push(1);
        let layers = dims
            .windows(2)
            .map(|w| Dense { inputs: w[0], outputs: w[1], weights: vec![0.0; w[0] * w[1]], bias: vec![0.0; w[1]] })
            .collect();
        MlpModel { layers, activation, learning_rate: 1e-3 }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    /// Layer widths from input to output.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim()];
        d.extend(self.layers.iter().map(|l| l.outputs));
        d
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn set_learning_rate(&mut self, lr: f64) {
        self.learning_rate = lr;
    }

    fn check_input(&self, x: &[f64]) -> Result<(), HeuristicError> {
        if x.len() != self.input_dim() {
            return Err(HeuristicError::ArityMismatch { expected: self.input_dim(), found: x.len() });
        }
        Ok(())
    }

    /// Pre-sigmoid output.
    pub fn logit(&self, x: &[f64]) -> Result<f64, HeuristicError> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.affine(&cur, &mut next);
            if i < last {
                for z in next.iter_mut() {
                    *z = self.activation.apply(*z);
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur[0])
    }

    /// Score in `(0, 1)`. Saturated outputs are pinned to the nearest
    /// representable value inside the interval.
    pub fn forward(&self, x: &[f64]) -> Result<f64, HeuristicError> {
        Ok(sigmoid(self.logit(x)?).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
    }

    /// Mean cross-entropy over `batch`.
    pub fn loss(&self, batch: &[TrainingExample]) -> Result<f64, HeuristicError> {
        let mut total = 0.0;
        for ex in batch {
            total += bce_with_logit(self.logit(ex.features.values())?, ex.label);
        }
        Ok(total / batch.len() as f64)
    }

    /// Mean loss over `batch` and its gradient with respect to every parameter.
    pub fn loss_and_gradients(&self, batch: &[TrainingExample]) -> Result<(f64, Gradients), HeuristicError> {
        let mut grads = Gradients {
            weights: self.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            bias: self.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        };
        let last = self.layers.len() - 1;
        let mut total = 0.0;
        // Per layer: pre-activations and outputs.
        let mut pre: Vec<Vec<f64>> = vec![Vec::new(); self.layers.len()];
        let mut post: Vec<Vec<f64>> = vec![Vec::new(); self.layers.len()];
        for ex in batch {
            let x = ex.features.values();
            self.check_input(x)?;
            for i in 0..self.layers.len() {
                let input = if i == 0 { x } else { &post[i - 1] };
                let mut z = Vec::new();
                self.layers[i].affine(input, &mut z);
                let a = if i < last { z.iter().map(|&v| self.activation.apply(v)).collect() } else { z.clone() };
                pre[i] = z;
                post[i] = a;
            }
            let logit = post[last][0];
            total += bce_with_logit(logit, ex.label);

            // dL/dlogit for sigmoid + cross-entropy.
            let mut delta = vec![sigmoid(logit) - ex.label];
            for i in (0..self.layers.len()).rev() {
                let layer = &self.layers[i];
                let input = if i == 0 { x } else { &post[i - 1] };
                for (o, d) in delta.iter().enumerate() {
                    grads.bias[i][o] += d;
                    let row = &mut grads.weights[i][o * layer.inputs..(o + 1) * layer.inputs];
                    for (g, v) in row.iter_mut().zip(input) {
                        *g += d * v;
                    }
                }
                if i > 0 {
                    let mut prev = vec![0.0; layer.inputs];
                    for (o, d) in delta.iter().enumerate() {
                        let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                        for (p, w) in prev.iter_mut().zip(row) {
                            *p += d * w;
                        }
                    }
                    for (j, p) in prev.iter_mut().enumerate() {
                        *p *= self.activation.derivative(pre[i - 1][j], post[i - 1][j]);
                    }
                    delta = prev;
                }
            }
        }
        let scale = 1.0 / batch.len() as f64;
        for g in grads.weights.iter_mut().chain(grads.bias.iter_mut()) {
            for v in g.iter_mut() {
                *v *= scale;
            }
        }
        Ok((total * scale, grads))
    }

    /// All parameters, layer by layer: weights (row-major) then biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    /// Inverse of [`parameters`](Self::parameters).
    pub fn set_parameters(&mut self, params: &[f64]) -> Result<(), HeuristicError> {
        let expected: usize = self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum();
        if params.len() != expected {
            return Err(HeuristicError::ArityMismatch { expected, found: params.len() });
        }
        let mut rest = params;
        for l in &mut self.layers {
            let (w, tail) = rest.split_at(l.weights.len());
            l.weights.copy_from_slice(w);
            let (b, tail) = tail.split_at(l.bias.len());
            l.bias.copy_from_slice(b);
            rest = tail;
        }
        Ok(())
    }

    fn apply(&mut self, grads: &Gradients) {
        let lr = self.learning_rate;
        for (l, (gw, gb)) in self.layers.iter_mut().zip(grads.weights.iter().zip(&grads.bias)) {
            for (w, g) in l.weights.iter_mut().zip(gw) {
                *w -= lr * g;
            }
            for (b, g) in l.bias.iter_mut().zip(gb) {
                *b -= lr * g;
            }
        }
    }

    /// `epochs` passes of mini-batch SGD; examples are reshuffled every epoch.
    ///
    /// On divergence the model is left as it was before the call.
    pub fn train<R: Rng + ?Sized>(
        &mut self,
        examples: &[TrainingExample],
        epochs: usize,
        batch_size: usize,
        rng: &mut R,
    ) -> Result<TrainReport, HeuristicError> {
        if examples.is_empty() {
            return Err(HeuristicError::NoExamples);
        }
        if batch_size == 0 {
            return Err(HeuristicError::BadTrainingSetup("batch size must be at least 1".into()));
        }
        let initial_loss = self.loss(examples)?;
        if epochs == 0 {
            return Ok(TrainReport { epochs, examples: examples.len(), initial_loss, final_loss: initial_loss });
        }
        let mut work = self.clone();
        let mut order: Vec<usize> = (0..examples.len()).collect();
        let mut batch = Vec::with_capacity(batch_size);
        for _ in 0..epochs {
            order.shuffle(rng);
            for chunk in order.chunks(batch_size) {
                batch.clear();
                batch.extend(chunk.iter().map(|&i| examples[i].clone()));
                let (loss, grads) = work.loss_and_gradients(&batch)?;
                if !loss.is_finite() {
                    return Err(HeuristicError::Diverged(loss));
                }
                work.apply(&grads);
            }
        }
        let final_loss = work.loss(examples)?;
        if !final_loss.is_finite() || work.parameters().iter().any(|p| !p.is_finite()) {
            return Err(HeuristicError::Diverged(final_loss));
        }
        *self = work;
        Ok(TrainReport { epochs, examples: examples.len(), initial_loss, final_loss })
    }

    /// Text serialization; every `f64` is written in shortest round-trip form.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut s = String::new();
        writeln!(s, "{FORMAT_HEADER} {FORMAT_VERSION}").unwrap();
        writeln!(s, "activation {}", self.activation.name()).unwrap();
        writeln!(s, "learning_rate {:?}", self.learning_rate).unwrap();
        let dims: Vec<String> = self.dims().iter().map(|d| d.to_string()).collect();
        writeln!(s, "dims {}", dims.join(" ")).unwrap();
        for l in &self.layers {
            for row in l.weights.chunks_exact(l.inputs) {
                let vals: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
                writeln!(s, "w {}", vals.join(" ")).unwrap();
            }
            let vals: Vec<String> = l.bias.iter().map(|v| format!("{v:?}")).collect();
            writeln!(s, "b {}", vals.join(" ")).unwrap();
        }
        w.write_all(s.as_bytes())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self, HeuristicError> {
        let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| -> Result<(usize, String), HeuristicError> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i, l)),
                Some((i, Err(e))) => Err(HeuristicError::BadModelFile { line: i, reason: e.to_string() }),
                None => Err(HeuristicError::BadModelFile { line: 0, reason: format!("missing {what}") }),
            }
        };
        let bad = |line: usize, reason: &str| HeuristicError::BadModelFile { line, reason: reason.to_string() };

        let (i, header) = next("header")?;
        if header.trim() != format!("{FORMAT_HEADER} {FORMAT_VERSION}") {
            return Err(bad(i, "unsupported header"));
        }
        let field = |line: &str, key: &str| line.strip_prefix(key).map(|r| r.trim().to_string());
        let (i, l) = next("activation")?;
        let activation = field(&l, "activation ")
            .and_then(|a| Activation::parse(&a))
            .ok_or_else(|| bad(i, "bad activation"))?;
        let (i, l) = next("learning_rate")?;
        let learning_rate: f64 = field(&l, "learning_rate ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(i, "bad learning_rate"))?;
        let (i, l) = next("dims")?;
        let dims: Vec<usize> = field(&l, "dims ")
            .map(|v| v.split_whitespace().map(|d| d.parse()).collect::<Result<Vec<_>, _>>())
            .and_then(Result::ok)
            .ok_or_else(|| bad(i, "bad dims"))?;
        if dims.len() < 2 || *dims.last().unwrap() != 1 || dims.contains(&0) {
            return Err(bad(i, "dims must be positive and end in 1"));
        }
        let mut parse_row = |key: &str, len: usize| -> Result<Vec<f64>, HeuristicError> {
            let (i, l) = next(key)?;
            let vals: Vec<f64> = l
                .strip_prefix(key)
                .map(|r| r.split_whitespace().map(|v| v.parse::<f64>()).collect::<Result<Vec<_>, _>>())
                .and_then(Result::ok)
                .ok_or_else(|| bad(i, &format!("bad `{}` row", key.trim())))?;
            if vals.len() != len || vals.iter().any(|v| !v.is_finite()) {
                return Err(bad(i, &format!("expected {len} finite values")));
            }
            Ok(vals)
        };
        let mut layers = Vec::new();
        for w in dims.windows(2) {
            let (inputs, outputs) = (w[0], w[1]);
            let mut weights = Vec::with_capacity(inputs * outputs);
            for _ in 0..outputs {
                weights.extend(parse_row("w ", inputs)?);
            }
            let bias = parse_row("b ", outputs)?;
            layers.push(Dense { inputs, outputs, weights, bias });
        }
        Ok(MlpModel { layers, activation, learning_rate })
    }

    pub fn from_text(text: &str) -> Result<Self, HeuristicError> {
        Self::read_from(text.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::FeatureVector;
    use crate::census::ClassCounts;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example(values: Vec<f64>, label: f64) -> TrainingExample {
        TrainingExample::new(FeatureVector::from_raw(values, true), label)
    }

    #[test]
    fn zero_model_scores_half() {
        let m = MlpModel::zeros(14, &[36, 12], Activation::Relu);
        assert_eq!(m.forward(&[3.0; 14]).unwrap(), 0.5);
        assert_eq!(m.dims(), vec![14, 36, 12, 1]);
        assert!(matches!(m.forward(&[1.0; 11]), Err(HeuristicError::ArityMismatch { expected: 14, found: 11 })));
    }

    #[test]
    fn hand_computed_two_two_one() {
        let mut m = MlpModel::zeros(2, &[2], Activation::Relu);
        // hidden: h0 = relu(0.5 x0 - 1.0 x1 + 0.1), h1 = relu(-0.3 x0 + 0.8 x1 - 0.2)
        // out: z = 1.5 h0 - 2.0 h1 + 0.25
        m.set_parameters(&[0.5, -1.0, -0.3, 0.8, 0.1, -0.2, 1.5, -2.0, 0.25]).unwrap();
        let (x0, x1) = (2.0, 0.5);
        let h0 = (0.5 * x0 - 1.0 * x1 + 0.1f64).max(0.0);
        let h1 = (-0.3 * x0 + 0.8 * x1 - 0.2f64).max(0.0);
        let z = 1.5 * h0 - 2.0 * h1 + 0.25;
        let want = 1.0 / (1.0 + (-z).exp());
        assert!((m.forward(&[x0, x1]).unwrap() - want).abs() < 1e-15);
        assert!((h0 - 0.6).abs() < 1e-12 && h1 == 0.0);
    }

    #[test]
    fn outputs_stay_in_open_interval() {
        let m = MlpModel::new(11, &[36, 12], Activation::Relu, 1e-3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        for scale in [0.0, 1.0, 1e3, 1e6] {
            let p = m.forward(&[scale; 11]).unwrap();
            assert!(p > 0.0 && p < 1.0, "{p}");
            let q = m.forward(&[-scale; 11]).unwrap();
            assert!(q > 0.0 && q < 1.0, "{q}");
        }
        let loss = bce_with_logit(800.0, 0.0);
        assert!(loss.is_finite() && (loss - 800.0).abs() < 1e-9);
    }

    #[test]
    fn gradient_matches_central_differences_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = MlpModel::new(3, &[4], Activation::Tanh, 1e-3, &mut rng).unwrap();
        let batch = vec![example(vec![0.3, -1.2, 0.7], 1.0), example(vec![1.0, 0.1, -0.4], 0.0)];
        let (_, g) = m.loss_and_gradients(&batch).unwrap();
        let analytic = g.flatten();
        let base = m.parameters();
        let h = 1e-5;
        for i in 0..base.len() {
            let mut p = base.clone();
            p[i] += h;
            let mut plus = m.clone();
            plus.set_parameters(&p).unwrap();
            p[i] -= 2.0 * h;
            let mut minus = m.clone();
            minus.set_parameters(&p).unwrap();
            let fd = (plus.loss(&batch).unwrap() - minus.loss(&batch).unwrap()) / (2.0 * h);
            assert!((fd - analytic[i]).abs() < 1e-8, "param {i}: {fd} vs {}", analytic[i]);
        }
    }

    #[test]
    fn repeated_positive_example_rises_toward_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut m = MlpModel::new(4, &[6], Activation::Relu, 0.05, &mut rng).unwrap();
        let ex = vec![example(vec![0.2, 0.4, -0.1, 1.0], 1.0); 4];
        let mut prev_score = m.forward(ex[0].features.values()).unwrap();
        let mut prev_loss = m.loss(&ex).unwrap();
        for _ in 0..50 {
            let report = m.train(&ex, 1, 4, &mut rng).unwrap();
            let score = m.forward(ex[0].features.values()).unwrap();
            assert!(score > prev_score);
            assert!(report.final_loss < prev_loss);
            prev_score = score;
            prev_loss = report.final_loss;
        }
        assert!(prev_score > 0.9);
    }

    #[test]
    fn training_rejects_bad_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut m = MlpModel::new(2, &[2], Activation::Relu, 1e-3, &mut rng).unwrap();
        assert!(matches!(m.train(&[], 1, 1, &mut rng), Err(HeuristicError::NoExamples)));
        let ex = vec![example(vec![1.0, 2.0], 1.0)];
        assert!(m.train(&ex, 1, 0, &mut rng).is_err());
        let before = m.clone();
        m.set_learning_rate(1e300);
        let huge = vec![example(vec![1e200, -1e200], 0.0)];
        assert!(matches!(m.train(&huge, 3, 1, &mut rng), Err(HeuristicError::Diverged(_))));
        m.set_learning_rate(before.learning_rate());
        assert_eq!(m, before);
    }

    #[test]
    fn training_is_reproducible() {
        let data: Vec<TrainingExample> = (0..30)
            .map(|i| example(vec![i as f64 / 30.0, (i % 3) as f64, 1.0], (i % 2) as f64))
            .collect();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let mut m = MlpModel::new(3, &[5, 3], Activation::Relu, 0.01, &mut rng).unwrap();
            m.train(&data, 5, 4, &mut rng).unwrap();
            m.parameters()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn serialization_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = MlpModel::new(14, &[32, 16], Activation::Relu, 3e-4, &mut rng).unwrap();
        let back = MlpModel::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        let counts = ClassCounts([1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11]);
        let x = FeatureVector::scaled(&counts, 8, 3, 4).unwrap();
        assert_eq!(back.forward(x.values()).unwrap().to_bits(), m.forward(x.values()).unwrap().to_bits());
    }

    #[test]
    fn malformed_model_files() {
        assert!(MlpModel::from_text("").is_err());
        assert!(MlpModel::from_text("ramsey-mlp 2\n").is_err());
        let good = MlpModel::zeros(2, &[2], Activation::Tanh).to_text();
        let truncated: String = good.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(MlpModel::from_text(&truncated).is_err());
        let corrupted = good.replacen("w 0.0 0.0", "w 0.0 nope", 1);
        assert!(matches!(MlpModel::from_text(&corrupted), Err(HeuristicError::BadModelFile { line: 5, .. })));
    }
}
