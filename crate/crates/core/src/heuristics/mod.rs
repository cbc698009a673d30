//! Candidate scoring: uniform random, induced 4-path count, and the trainable
//! MLP scorers over unscaled or scaled census features.

pub mod mlp;
pub mod pretrain;
pub mod reward;

pub use mlp::{Activation, Gradients, MlpModel, TrainReport};
pub use pretrain::{load_pretrain_csv, pretrain, write_pretrain_csv, PretrainRow};
pub use reward::RewardState;

use crate::census::{Census, CensusError, ClassId, FeatureVector, SCALED_LEN, UNSCALED_LEN};
use crate::verifier::RamseyParams;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HeuristicError {
    #[error("feature length {found} does not match expected {expected}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("{0} needs a model")]
    MissingModel(HeuristicKind),
    #[error("bad model architecture: {0}")]
    BadArchitecture(String),
    #[error("no training examples")]
    NoExamples,
    #[error("bad training setup: {0}")]
    BadTrainingSetup(String),
    #[error("training diverged (loss = {0})")]
    Diverged(f64),
    #[error("model file line {line}: {reason}")]
    BadModelFile { line: usize, reason: String },
    #[error("pretraining data {path} line {line}: {reason}")]
    BadPretrainRow { path: String, line: usize, reason: String },
    #[error("pretraining data {path}: {source}")]
    PretrainIo { path: String, source: std::io::Error },
    #[error(transparent)]
    Census(#[from] CensusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HeuristicKind {
    #[serde(rename = "RANDOM")]
    Random,
    #[serde(rename = "4PATH")]
    FourPath,
    #[serde(rename = "DNN")]
    Dnn,
    #[serde(rename = "SCALED_DNN")]
    ScaledDnn,
}

impl HeuristicKind {
    pub fn is_trainable(self) -> bool {
        matches!(self, HeuristicKind::Dnn | HeuristicKind::ScaledDnn)
    }

    /// Model input width, for the trainable kinds.
    pub fn input_dim(self) -> Option<usize> {
        match self {
            HeuristicKind::Dnn => Some(UNSCALED_LEN),
            HeuristicKind::ScaledDnn => Some(SCALED_LEN),
            _ => None,
        }
    }

    pub fn uses_scaled_features(self) -> bool {
        self == HeuristicKind::ScaledDnn
    }

    pub fn name(self) -> &'static str {
        match self {
            HeuristicKind::Random => "RANDOM",
            HeuristicKind::FourPath => "4PATH",
            HeuristicKind::Dnn => "DNN",
            HeuristicKind::ScaledDnn => "SCALED_DNN",
        }
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HeuristicKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "RANDOM" => Ok(HeuristicKind::Random),
            "4PATH" | "FOURPATH" => Ok(HeuristicKind::FourPath),
            "DNN" => Ok(HeuristicKind::Dnn),
            "SCALED_DNN" | "SDNN" => Ok(HeuristicKind::ScaledDnn),
            _ => Err(format!("unknown heuristic `{s}` (expected RANDOM, 4PATH, DNN or SCALED_DNN)")),
        }
    }
}

/// A feature vector with its target likelihood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub features: FeatureVector,
    pub label: f64,
}

impl TrainingExample {
    pub fn new(features: FeatureVector, label: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&label));
        TrainingExample { features, label }
    }
}

/// Scores `features` under `kind`.
///
/// `4PATH` reads the raw P4 count, which is slot 5 of the unscaled vector; for
/// scaled input use [`Heuristic::score`] with the census instead.
pub fn score_features<R: Rng + ?Sized>(
    kind: HeuristicKind,
    model: Option<&MlpModel>,
    features: &FeatureVector,
    rng: &mut R,
) -> Result<f64, HeuristicError> {
    match kind {
        HeuristicKind::Random => Ok(rng.random::<f64>()),
        HeuristicKind::FourPath => {
            if features.is_scaled() || features.len() != UNSCALED_LEN {
                return Err(HeuristicError::ArityMismatch { expected: UNSCALED_LEN, found: features.len() });
            }
            Ok(features.values()[ClassId::P4.index()])
        }
        HeuristicKind::Dnn | HeuristicKind::ScaledDnn => {
            let model = model.ok_or(HeuristicError::MissingModel(kind))?;
            let expected = kind.input_dim().unwrap();
            if features.len() != expected {
                return Err(HeuristicError::ArityMismatch { expected, found: features.len() });
            }
            model.forward(features.values())
        }
    }
}

/// A heuristic together with the model it needs, if any.
#[derive(Debug, Clone, PartialEq)]
pub enum Heuristic {
    Random,
    FourPath,
    Dnn(MlpModel),
    ScaledDnn(MlpModel),
}

impl Heuristic {
    /// Pairs `kind` with `model`, checking the model's input width.
    pub fn new(kind: HeuristicKind, model: Option<MlpModel>) -> Result<Self, HeuristicError> {
        let check = |m: MlpModel| -> Result<MlpModel, HeuristicError> {
            let expected = kind.input_dim().unwrap();
            if m.input_dim() != expected {
                return Err(HeuristicError::ArityMismatch { expected, found: m.input_dim() });
            }
            Ok(m)
        };
        match kind {
            HeuristicKind::Random => Ok(Heuristic::Random),
            HeuristicKind::FourPath => Ok(Heuristic::FourPath),
            HeuristicKind::Dnn => Ok(Heuristic::Dnn(check(model.ok_or(HeuristicError::MissingModel(kind))?)?)),
            HeuristicKind::ScaledDnn => {
                Ok(Heuristic::ScaledDnn(check(model.ok_or(HeuristicError::MissingModel(kind))?)?))
            }
        }
    }

    pub fn kind(&self) -> HeuristicKind {
        match self {
            Heuristic::Random => HeuristicKind::Random,
            Heuristic::FourPath => HeuristicKind::FourPath,
            Heuristic::Dnn(_) => HeuristicKind::Dnn,
            Heuristic::ScaledDnn(_) => HeuristicKind::ScaledDnn,
        }
    }

    pub fn model(&self) -> Option<&MlpModel> {
        match self {
            Heuristic::Dnn(m) | Heuristic::ScaledDnn(m) => Some(m),
            _ => None,
        }
    }

    pub fn model_mut(&mut self) -> Option<&mut MlpModel> {
        match self {
            Heuristic::Dnn(m) | Heuristic::ScaledDnn(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_trainable(&self) -> bool {
        self.kind().is_trainable()
    }

    /// Features this heuristic's model consumes (scaled only for SCALED_DNN).
    pub fn features(&self, census: &Census, params: &RamseyParams) -> Result<FeatureVector, HeuristicError> {
        Ok(FeatureVector::from_census(census, params.s, params.t, self.kind().uses_scaled_features())?)
    }

    pub fn score<R: Rng + ?Sized>(
        &self,
        census: &Census,
        params: &RamseyParams,
        rng: &mut R,
    ) -> Result<f64, HeuristicError> {
        match self {
            Heuristic::Random => Ok(rng.random::<f64>()),
            Heuristic::FourPath => Ok(census.get(ClassId::P4) as f64),
            Heuristic::Dnn(m) | Heuristic::ScaledDnn(m) => m.forward(self.features(census, params)?.values()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::full_census;
    use crate::graph::Graph;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn four_path_examples() {
        let params = RamseyParams::new(3, 3, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c5 = full_census(&Graph::cycle(5).unwrap());
        assert_eq!(Heuristic::FourPath.score(&c5, &params, &mut rng).unwrap(), 5.0);
        let empty = full_census(&Graph::new(5).unwrap());
        assert_eq!(Heuristic::FourPath.score(&empty, &params, &mut rng).unwrap(), 0.0);
        let f = FeatureVector::unscaled(c5.counts());
        assert_eq!(score_features(HeuristicKind::FourPath, None, &f, &mut rng).unwrap(), 5.0);
        let scaled = FeatureVector::scaled(c5.counts(), 5, 3, 3).unwrap();
        assert!(score_features(HeuristicKind::FourPath, None, &scaled, &mut rng).is_err());
    }

    #[test]
    fn random_is_seeded() {
        let params = RamseyParams::new(3, 3, 5).unwrap();
        let c = full_census(&Graph::new(5).unwrap());
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let a = Heuristic::Random.score(&c, &params, &mut rng).unwrap();
            let b = Heuristic::Random.score(&c, &params, &mut rng).unwrap();
            (a, b)
        };
        let (a, b) = draw();
        assert_ne!(a, b);
        assert!((0.0..1.0).contains(&a) && (0.0..1.0).contains(&b));
        assert_eq!(draw(), (a, b));
    }

    #[test]
    fn dnn_arity_is_checked() {
        let m = MlpModel::zeros(14, &[36, 12], Activation::Relu);
        assert!(Heuristic::new(HeuristicKind::Dnn, Some(m.clone())).is_err());
        assert!(Heuristic::new(HeuristicKind::ScaledDnn, None).is_err());
        let h = Heuristic::new(HeuristicKind::ScaledDnn, Some(m)).unwrap();
        let params = RamseyParams::new(3, 3, 5).unwrap();
        let c5 = full_census(&Graph::cycle(5).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(h.score(&c5, &params, &mut rng).unwrap(), 0.5);
        let unscaled = FeatureVector::unscaled(c5.counts());
        assert!(matches!(
            score_features(HeuristicKind::ScaledDnn, h.model(), &unscaled, &mut rng),
            Err(HeuristicError::ArityMismatch { expected: 14, found: 11 })
        ));
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("4PATH".parse::<HeuristicKind>().unwrap(), HeuristicKind::FourPath);
        assert_eq!("scaled_dnn".parse::<HeuristicKind>().unwrap(), HeuristicKind::ScaledDnn);
        assert!("GREEDY".parse::<HeuristicKind>().is_err());
    }

    #[test]
    fn four_path_is_isomorphism_invariant() {
        let params = RamseyParams::new(4, 4, 14).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for seed in 0..50 {
            let g = Graph::random_seeded(14, 0.5, seed).unwrap();
            let mut perm: Vec<usize> = (0..14).collect();
            perm.shuffle(&mut rng);
            let h = g.permute(&perm).unwrap();
            let a = Heuristic::FourPath.score(&full_census(&g), &params, &mut rng).unwrap();
            let b = Heuristic::FourPath.score(&full_census(&h), &params, &mut rng).unwrap();
            assert_eq!(a, b);
        }
    }
}
