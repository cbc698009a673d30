//! Counterexample checks for `R(s, t, n)`.

use crate::census::{Census, ClassId};
use crate::graph::{Graph, MAX_VERTICES};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifierError {
    #[error("invalid Ramsey parameters s = {s}, t = {t}, n = {n}: need s >= 2, t >= 2, 1 <= n <= {MAX_VERTICES}")]
    BadParams { s: usize, t: usize, n: usize },
    #[error("edge bound table line {line}: {reason}")]
    BadTableLine { line: usize, reason: String },
    #[error("reading edge bound table: {0}")]
    Io(#[from] std::io::Error),
}

/// Target clique order `s`, independent set order `t`, graph order `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RamseyParams {
    pub s: usize,
    pub t: usize,
    pub n: usize,
}

impl RamseyParams {
    pub fn new(s: usize, t: usize, n: usize) -> Result<Self, VerifierError> {
        if s < 2 || t < 2 || n == 0 || n > MAX_VERTICES {
            return Err(VerifierError::BadParams { s, t, n });
        }
        Ok(RamseyParams { s, t, n })
    }

    /// Same `(s, t)` for a different graph order.
    pub fn with_order(self, n: usize) -> Result<Self, VerifierError> {
        Self::new(self.s, self.t, n)
    }
}

/// Depth-first search for `k` mutually "adjacent" vertices, where adjacency
/// is given by `nbr`. Vertices are tried in ascending order of `nbr` degree;
/// the search stops at the first witness.
fn has_k_set(n: usize, k: usize, nbr: impl Fn(usize) -> u64) -> bool {
    if k == 0 {
        return true;
    }
    if k > n {
        return false;
    }
    if k == 1 {
        return true;
    }
    let sets: Vec<u64> = (0..n).map(&nbr).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (sets[v].count_ones(), v));

    fn extend(sets: &[u64], mut cand: u64, need: usize) -> bool {
        if need == 0 {
            return true;
        }
        while cand != 0 {
            if (cand.count_ones() as usize) < need {
                return false;
            }
            let w = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            if extend(sets, cand & sets[w], need - 1) {
                return true;
            }
        }
        false
    }

    let mut remaining: u64 = crate::graph::low_mask(n);
    for v in order {
        remaining &= !(1u64 << v);
        let cand = sets[v] & remaining;
        if (cand.count_ones() as usize) >= k - 1 && extend(&sets, cand, k - 1) {
            return true;
        }
    }
    false
}

/// Whether `g` contains a complete subgraph on `k` vertices.
pub fn has_clique(g: &Graph, k: usize) -> bool {
    has_k_set(g.order(), k, |v| g.neighbors(v))
}

/// Whether `g` contains `k` pairwise non-adjacent vertices.
pub fn has_independent_set(g: &Graph, k: usize) -> bool {
    has_k_set(g.order(), k, |v| g.non_neighbors(v))
}

/// Lower bound on the edge count of any `R(3, t, n)` counterexample, from the
/// two closed forms `e(3, k+1, n) >= (40n - 91k) / 6` and
/// `e(3, k+1, n) >= 6n - 13k` with `k = t - 1`.
pub fn min_edges_bound(t: usize, n: usize) -> u64 {
    debug_assert!(t >= 2);
    let k = t as i64 - 1;
    let n = n as i64;
    let first = (40 * n - 91 * k).div_euclid(6) + i64::from((40 * n - 91 * k).rem_euclid(6) != 0);
    let second = 6 * n - 13 * k;
    first.max(second).max(0) as u64
}

/// User-supplied exact values of `e(3, t, n)` keyed by `(t, n)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeBoundTable {
    entries: HashMap<(usize, usize), u64>,
}

impl EdgeBoundTable {
    /// Parses lines `t n e_min`; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, VerifierError> {
        let mut entries = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: &str| VerifierError::BadTableLine { line: i + 1, reason: reason.to_string() };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(bad("expected three integers `k n e_min`"));
            }
            let parse = |s: &str| s.parse::<u64>().map_err(|_| bad("not a non-negative integer"));
            let (t, n, e) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
            entries.insert((t as usize, n as usize), e);
        }
        Ok(EdgeBoundTable { entries })
    }

    pub fn load(path: &Path) -> Result<Self, VerifierError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, t: usize, n: usize) -> Option<u64> {
        self.entries.get(&(t, n)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// How a verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Counterexample,
    /// An `s`-clique is visible in the census.
    CliqueInCensus,
    /// A `t`-independent set is visible in the census.
    IndependentSetInCensus,
    /// Too few edges for an `R(3, t, n)` counterexample.
    BelowEdgeBound,
    CliqueFound,
    IndependentSetFound,
}

impl Verdict {
    pub fn is_counterexample(self) -> bool {
        self == Verdict::Counterexample
    }

    /// Whether the verdict required an exhaustive search.
    pub fn enumerated(self) -> bool {
        matches!(self, Verdict::Counterexample | Verdict::CliqueFound | Verdict::IndependentSetFound)
    }
}

/// Decides `R(s, t, n)` counterexamples for a fixed parameter set.
#[derive(Debug, Clone)]
pub struct Verifier {
    params: RamseyParams,
    table: Option<EdgeBoundTable>,
}

impl Verifier {
    pub fn new(params: RamseyParams) -> Self {
        Verifier { params, table: None }
    }

    pub fn with_table(params: RamseyParams, table: EdgeBoundTable) -> Self {
        Verifier { params, table: Some(table) }
    }

    pub fn params(&self) -> RamseyParams {
        self.params
    }

    /// Edge lower bound in effect for `(3, t, n)`, table entries overriding
    /// the closed forms when larger.
    pub fn edge_bound(&self) -> u64 {
        let formula = min_edges_bound(self.params.t, self.params.n);
        let table = self.table.as_ref().and_then(|t| t.get(self.params.t, self.params.n));
        table.map_or(formula, |e| e.max(formula))
    }

    /// Full decision with the path taken. `census` must be the census of `g`.
    pub fn check(&self, g: &Graph, census: &Census) -> Verdict {
        debug_assert_eq!(g.order(), self.params.n);
        debug_assert_eq!(census.order(), g.order());
        let RamseyParams { s, t, n } = self.params;
        // With n >= 4, a k-set for k <= 4 exists iff some quadruple shows it.
        let census_usable = n >= 4;
        if census_usable && s <= 4 && clique_in_census(census, s) {
            return Verdict::CliqueInCensus;
        }
        if census_usable && t <= 4 && clique_in_census_complement(census, t) {
            return Verdict::IndependentSetInCensus;
        }
        if census_usable && s <= 4 && t <= 4 {
            return Verdict::Counterexample;
        }
        if s == 3 && (g.edge_count() as u64) < self.edge_bound() {
            return Verdict::BelowEdgeBound;
        }
        if !(census_usable && s <= 4) && has_clique(g, s) {
            return Verdict::CliqueFound;
        }
        if !(census_usable && t <= 4) && has_independent_set(g, t) {
            return Verdict::IndependentSetFound;
        }
        Verdict::Counterexample
    }

    pub fn is_counterexample(&self, g: &Graph, census: &Census) -> bool {
        self.check(g, census).is_counterexample()
    }
}

fn clique_in_census(census: &Census, k: usize) -> bool {
    let c = census.counts();
    match k {
        0 | 1 => true,
        2 => c[ClassId::E4] < census_total(census),
        3 => ClassId::ALL.iter().any(|&id| id.has_triangle() && c[id] > 0),
        4 => c[ClassId::K4] > 0,
        _ => unreachable!("census only resolves cliques up to 4"),
    }
}

fn clique_in_census_complement(census: &Census, k: usize) -> bool {
    let c = census.counts();
    match k {
        0 | 1 => true,
        2 => c[ClassId::K4] < census_total(census),
        3 => ClassId::ALL.iter().any(|&id| id.complement().has_triangle() && c[id] > 0),
        4 => c[ClassId::E4] > 0,
        _ => unreachable!("census only resolves independent sets up to 4"),
    }
}

fn census_total(census: &Census) -> u64 {
    census.counts().total()
}

/// Direct check by enumeration only, bypassing the census and edge bounds.
pub fn is_counterexample_by_search(g: &Graph, s: usize, t: usize) -> bool {
    !has_clique(g, s) && !has_independent_set(g, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::full_census;
    use crate::graph::all_pairs;

    /// Largest clique and independent set, by checking every vertex subset.
    fn brute_force_numbers(g: &Graph) -> (usize, usize) {
        let n = g.order();
        let (mut omega, mut alpha) = (0, 0);
        for subset in 0u64..(1 << n) {
            let members: Vec<usize> = (0..n).filter(|&v| subset >> v & 1 == 1).collect();
            let size = members.len();
            let pairs = members.iter().enumerate().flat_map(|(i, &a)| members[i + 1..].iter().map(move |&b| (a, b)));
            let (mut all_adj, mut none_adj) = (true, true);
            for (a, b) in pairs {
                if g.has_edge(a, b) {
                    none_adj = false;
                } else {
                    all_adj = false;
                }
            }
            if all_adj {
                omega = omega.max(size);
            }
            if none_adj {
                alpha = alpha.max(size);
            }
        }
        (omega, alpha)
    }

    pub(crate) fn paley17() -> Graph {
        let residues: Vec<usize> = (1..17).map(|x| x * x % 17).collect();
        let edges = all_pairs(17)
            .into_iter()
            .filter(|e| residues.contains(&((e.v() - e.u()) % 17)))
            .map(|e| e.endpoints());
        Graph::from_edges(17, edges).unwrap()
    }

    #[test]
    fn clique_examples() {
        assert!(has_clique(&Graph::complete(5).unwrap(), 5));
        assert!(!has_clique(&Graph::complete(5).unwrap(), 6));
        assert!(!has_clique(&Graph::cycle(5).unwrap(), 3));
        assert!(has_clique(&Graph::cycle(5).unwrap(), 2));
        assert!(has_clique(&Graph::new(3).unwrap(), 1));
    }

    #[test]
    fn independent_set_examples() {
        assert!(has_independent_set(&Graph::new(5).unwrap(), 3));
        assert!(!has_independent_set(&Graph::cycle(5).unwrap(), 3));
        assert!(!has_independent_set(&Graph::complete(6).unwrap(), 2));
    }

    #[test]
    fn paley17_has_no_k4_or_i4() {
        let p = paley17();
        assert_eq!(p.edge_count(), 68);
        // Brute force over all C(17, 4) quadruples.
        let mut mono = 0;
        for a in 0..17 {
            for b in a + 1..17 {
                for c in b + 1..17 {
                    for d in c + 1..17 {
                        let q = [a, b, c, d];
                        let e = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).filter(|&(i, j)| p.has_edge(q[i], q[j])).count();
                        if e == 0 || e == 6 {
                            mono += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(mono, 0);
        assert!(!has_clique(&p, 4));
        assert!(!has_independent_set(&p, 4));
        assert!(has_clique(&p, 3));
        let v = Verifier::new(RamseyParams::new(4, 4, 17).unwrap());
        assert!(v.is_counterexample(&p, &full_census(&p)));
    }

    #[test]
    fn edge_bounds() {
        assert_eq!(min_edges_bound(7, 21), 49);
        assert_eq!(min_edges_bound(4, 8), 9);
        assert_eq!(min_edges_bound(9, 5), 0);
        assert_eq!(min_edges_bound(3, 1), 0);
    }

    #[test]
    fn table_overrides_only_when_larger() {
        let table = EdgeBoundTable::parse("# t n e\n7 21 60\n4 8 3\n").unwrap();
        assert_eq!(table.len(), 2);
        let v = Verifier::with_table(RamseyParams::new(3, 7, 21).unwrap(), table.clone());
        assert_eq!(v.edge_bound(), 60);
        let v = Verifier::with_table(RamseyParams::new(3, 4, 8).unwrap(), table);
        assert_eq!(v.edge_bound(), 9);
        assert!(matches!(EdgeBoundTable::parse("1 2"), Err(VerifierError::BadTableLine { line: 1, .. })));
        assert!(matches!(EdgeBoundTable::parse("\n1 2 x"), Err(VerifierError::BadTableLine { line: 2, .. })));
    }

    #[test]
    fn small_examples() {
        let c5 = Graph::cycle(5).unwrap();
        let v = Verifier::new(RamseyParams::new(3, 3, 5).unwrap());
        assert!(v.is_counterexample(&c5, &full_census(&c5)));
        assert_eq!(brute_force_numbers(&c5), (2, 2));
        let k4 = Graph::complete(4).unwrap();
        let v = Verifier::new(RamseyParams::new(3, 3, 4).unwrap());
        assert_eq!(v.check(&k4, &full_census(&k4)), Verdict::CliqueInCensus);
        assert!(RamseyParams::new(1, 3, 4).is_err());
        assert!(RamseyParams::new(3, 3, 0).is_err());
    }

    #[test]
    fn census_path_never_enumerates_for_small_orders() {
        for seed in 0..200 {
            let g = Graph::random_seeded(10, 0.5, seed).unwrap();
            let c = full_census(&g);
            for s in 2..=4 {
                for t in 2..=4 {
                    let verdict = Verifier::new(RamseyParams::new(s, t, 10).unwrap()).check(&g, &c);
                    assert!(!verdict.enumerated() || verdict == Verdict::Counterexample);
                }
            }
        }
    }

    #[test]
    fn matches_subset_brute_force_n6_exhaustive() {
        let pairs = all_pairs(6);
        for bits in 0u32..(1 << pairs.len()) {
            let g = Graph::from_edges(6, pairs.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, e)| e.endpoints())).unwrap();
            let c = full_census(&g);
            let (omega, alpha) = brute_force_numbers(&g);
            for s in 2..=5 {
                for t in 2..=5 {
                    let want = omega < s && alpha < t;
                    let v = Verifier::new(RamseyParams::new(s, t, 6).unwrap());
                    assert_eq!(v.is_counterexample(&g, &c), want, "{g:?} s={s} t={t}");
                }
            }
        }
    }

    #[test]
    fn duality_and_monotonicity() {
        for seed in 0..300 {
            let n = 5 + (seed as usize % 8);
            let g = Graph::random_seeded(n, 0.5, seed).unwrap();
            let h = g.complement();
            let (gc, hc) = (full_census(&g), full_census(&h));
            for s in 2..=6 {
                for t in 2..=6 {
                    let a = Verifier::new(RamseyParams::new(s, t, n).unwrap()).is_counterexample(&g, &gc);
                    let b = Verifier::new(RamseyParams::new(t, s, n).unwrap()).is_counterexample(&h, &hc);
                    assert_eq!(a, b);
                }
            }
            for e in all_pairs(n) {
                let flipped = g.flip_edge(e).unwrap();
                for k in 2..=5 {
                    if g.has_edge(e.u(), e.v()) {
                        // Removing an edge keeps independent sets.
                        assert!(!has_independent_set(&g, k) || has_independent_set(&flipped, k));
                    } else {
                        // Adding an edge keeps cliques.
                        assert!(!has_clique(&g, k) || has_clique(&flipped, k));
                    }
                }
            }
        }
    }

    #[test]
    fn edge_bound_is_sound_on_small_graphs() {
        // Every triangle-free graph without a t-independent set meets the bound.
        for n in 1..=7usize {
            let pairs = all_pairs(n);
            for bits in 0u32..(1 << pairs.len()) {
                let g = Graph::from_edges(n, pairs.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, e)| e.endpoints())).unwrap();
                if has_clique(&g, 3) {
                    continue;
                }
                for t in 2..=9 {
                    if !has_independent_set(&g, t) {
                        assert!(g.edge_count() as u64 >= min_edges_bound(t, n), "{g:?} t={t}");
                    }
                }
            }
        }
    }
}
