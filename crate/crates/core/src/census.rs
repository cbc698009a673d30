//! Counts of the 11 isomorphism classes of 4-vertex induced subgraphs.
//!
//! A labeled quadruple `(a, b, c, d)` is summarized by a 6-bit edge mask with
//! bit layout `ab, ac, ad, bc, bd, cd` (bit 0 first). A 64-entry table built on
//! first use maps every mask to its class by canonicalizing over all 24
//! relabelings.

use crate::graph::{Edge, Graph};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Index, IndexMut};
use std::sync::OnceLock;
use thiserror::Error;

/// Isomorphism class of a graph on four vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassId {
    E4,
    K2,
    TwoK2,
    P3,
    K3,
    P4,
    Claw,
    C4,
    Paw,
    Diamond,
    K4,
}

pub const NUM_CLASSES: usize = 11;

impl ClassId {
    /// Fixed ordering used by every vector, key, and file.
    pub const ALL: [ClassId; NUM_CLASSES] = [
        ClassId::E4,
        ClassId::K2,
        ClassId::TwoK2,
        ClassId::P3,
        ClassId::K3,
        ClassId::P4,
        ClassId::Claw,
        ClassId::C4,
        ClassId::Paw,
        ClassId::Diamond,
        ClassId::K4,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Short name used in CLI output.
    pub fn name(self) -> &'static str {
        match self {
            ClassId::E4 => "E4",
            ClassId::K2 => "K2",
            ClassId::TwoK2 => "2K2",
            ClassId::P3 => "P3",
            ClassId::K3 => "K3",
            ClassId::P4 => "P4",
            ClassId::Claw => "Claw",
            ClassId::C4 => "C4",
            ClassId::Paw => "Paw",
            ClassId::Diamond => "Diamond",
            ClassId::K4 => "K4",
        }
    }

    /// Column name used in CSV headers.
    pub fn column(self) -> &'static str {
        match self {
            ClassId::E4 => "e4",
            ClassId::K2 => "k2",
            ClassId::TwoK2 => "two_k2",
            ClassId::P3 => "p3",
            ClassId::K3 => "k3",
            ClassId::P4 => "p4",
            ClassId::Claw => "claw",
            ClassId::C4 => "c4",
            ClassId::Paw => "paw",
            ClassId::Diamond => "diamond",
            ClassId::K4 => "k4",
        }
    }

    /// Class of the complementary 4-vertex graph.
    pub fn complement(self) -> ClassId {
        match self {
            ClassId::E4 => ClassId::K4,
            ClassId::K2 => ClassId::Diamond,
            ClassId::TwoK2 => ClassId::C4,
            ClassId::P3 => ClassId::Paw,
            ClassId::K3 => ClassId::Claw,
            ClassId::P4 => ClassId::P4,
            ClassId::Claw => ClassId::K3,
            ClassId::C4 => ClassId::TwoK2,
            ClassId::Paw => ClassId::P3,
            ClassId::Diamond => ClassId::K2,
            ClassId::K4 => ClassId::E4,
        }
    }

    /// Whether a graph of this class contains a triangle.
    pub fn has_triangle(self) -> bool {
        matches!(self, ClassId::K3 | ClassId::Paw | ClassId::Diamond | ClassId::K4)
    }

    /// Identifies a class from its edge count and sorted degree sequence.
    fn from_shape(edges: u32, degrees: [u32; 4]) -> ClassId {
        match (edges, degrees) {
            (0, _) => ClassId::E4,
            (1, _) => ClassId::K2,
            (2, [1, 1, 1, 1]) => ClassId::TwoK2,
            (2, _) => ClassId::P3,
            (3, [0, 2, 2, 2]) => ClassId::K3,
            (3, [1, 1, 1, 3]) => ClassId::Claw,
            (3, _) => ClassId::P4,
            (4, [2, 2, 2, 2]) => ClassId::C4,
            (4, _) => ClassId::Paw,
            (5, _) => ClassId::Diamond,
            _ => ClassId::K4,
        }
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Vertex pairs of a quadruple in mask bit order.
pub const QUAD_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

const fn pair_bit(a: usize, b: usize) -> u8 {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        _ => 5,
    }
}

/// Mask obtained by relabeling position `i` as `perm[i]`.
pub fn permute_mask(mask: u8, perm: [usize; 4]) -> u8 {
    let mut out = 0;
    for (bit, &(a, b)) in QUAD_PAIRS.iter().enumerate() {
        if mask >> bit & 1 == 1 {
            out |= 1 << pair_bit(perm[a], perm[b]);
        }
    }
    out
}

pub(crate) fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if (0..4).all(|i| (0..i).all(|j| p[i] != p[j])) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

fn build_table() -> [ClassId; 64] {
    let perms = permutations4();
    let mut table = [ClassId::E4; 64];
    for mask in 0u8..64 {
        let canonical = perms.iter().map(|&p| permute_mask(mask, p)).min().unwrap();
        let mut degrees = [0u32; 4];
        for (bit, &(a, b)) in QUAD_PAIRS.iter().enumerate() {
            if canonical >> bit & 1 == 1 {
                degrees[a] += 1;
                degrees[b] += 1;
            }
        }
        degrees.sort_unstable();
        table[mask as usize] = ClassId::from_shape(canonical.count_ones(), degrees);
    }
    table
}

/// The mask-to-class table.
pub fn class_table() -> &'static [ClassId; 64] {
    static TABLE: OnceLock<[ClassId; 64]> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

#[inline]
fn classify_mask(mask: u8) -> ClassId {
    class_table()[mask as usize]
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CensusError {
    #[error("quadruple vertices must be distinct and below {n}: {vertices:?}")]
    BadQuad { vertices: [usize; 4], n: usize },
    #[error("scaled features need at least 4 vertices, got {0}")]
    TooFewVertices(usize),
}

#[inline]
fn bit_of(g: &Graph, a: usize, b: usize) -> u8 {
    g.has_edge(a, b) as u8
}

#[inline]
fn quad_mask(g: &Graph, q: [usize; 4]) -> u8 {
    let mut m = 0;
    for (bit, &(i, j)) in QUAD_PAIRS.iter().enumerate() {
        m |= bit_of(g, q[i], q[j]) << bit;
    }
    m
}

/// Class of the subgraph induced by four distinct vertices.
pub fn classify_quad(g: &Graph, a: usize, b: usize, c: usize, d: usize) -> Result<ClassId, CensusError> {
    let q = [a, b, c, d];
    let n = g.order();
    let distinct = (0..4).all(|i| (0..i).all(|j| q[i] != q[j]));
    if !distinct || q.iter().any(|&x| x >= n) {
        return Err(CensusError::BadQuad { vertices: q, n });
    }
    Ok(classify_mask(quad_mask(g, q)))
}

/// Raw counts per class, in [`ClassId::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct ClassCounts(pub [u64; NUM_CLASSES]);

impl ClassCounts {
    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn as_array(&self) -> &[u64; NUM_CLASSES] {
        &self.0
    }

    /// Counts with each class replaced by its complement class.
    pub fn complemented(&self) -> ClassCounts {
        let mut out = ClassCounts::default();
        for c in ClassId::ALL {
            out[c.complement()] = self[c];
        }
        out
    }
}

impl Index<ClassId> for ClassCounts {
    type Output = u64;
    fn index(&self, c: ClassId) -> &u64 {
        &self.0[c.index()]
    }
}

impl IndexMut<ClassId> for ClassCounts {
    fn index_mut(&mut self, c: ClassId) -> &mut u64 {
        &mut self.0[c.index()]
    }
}

/// Identity of a census used for deduplication: the 11 raw counts.
pub type CensusKey = ClassCounts;

/// Census of a whole graph. Counts always sum to `C(n, 4)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Census {
    n: usize,
    counts: ClassCounts,
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

impl Census {
    /// Builds a census from raw counts; `None` if they break the sum rule.
    pub fn from_counts(n: usize, counts: ClassCounts) -> Option<Census> {
        (counts.total() == binomial(n as u64, 4)).then_some(Census { n, counts })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn counts(&self) -> &ClassCounts {
        &self.counts
    }

    #[inline]
    pub fn key(&self) -> CensusKey {
        self.counts
    }

    #[inline]
    pub fn get(&self, c: ClassId) -> u64 {
        self.counts[c]
    }
}

/// Census by classifying all `C(n, 4)` quadruples.
pub fn full_census(g: &Graph) -> Census {
    let n = g.order();
    let mut counts = ClassCounts::default();
    let table = class_table();
    for a in 0..n {
        for b in (a + 1)..n {
            let ab = bit_of(g, a, b);
            for c in (b + 1)..n {
                let abc = ab | bit_of(g, a, c) << 1 | bit_of(g, b, c) << 3;
                let (na, nb, nc) = (g.neighbors(a), g.neighbors(b), g.neighbors(c));
                for d in (c + 1)..n {
                    let m = abc
                        | ((na >> d & 1) as u8) << 2
                        | ((nb >> d & 1) as u8) << 4
                        | ((nc >> d & 1) as u8) << 5;
                    counts.0[table[m as usize] as usize] += 1;
                }
            }
        }
    }
    Census { n, counts }
}

/// Counts over the `C(n-2, 2)` quadruples that contain both `u` and `v`.
pub fn local_census(g: &Graph, u: usize, v: usize) -> ClassCounts {
    debug_assert!(u != v);
    let n = g.order();
    let table = class_table();
    let uv = bit_of(g, u, v);
    let (nu, nv) = (g.neighbors(u), g.neighbors(v));
    let mut counts = ClassCounts::default();
    for w in (0..n).filter(|&w| w != u && w != v) {
        let uvw = uv | ((nu >> w & 1) as u8) << 1 | ((nv >> w & 1) as u8) << 3;
        for x in ((w + 1)..n).filter(|&x| x != u && x != v) {
            let m = uvw
                | ((nu >> x & 1) as u8) << 2
                | ((nv >> x & 1) as u8) << 4
                | bit_of(g, w, x) << 5;
            counts.0[table[m as usize] as usize] += 1;
        }
    }
    counts
}

/// Census of `g` with `e` toggled, given the census of `g`.
///
/// Only quadruples containing both endpoints change class, so this does
/// `O(n^2)` classifications instead of `O(n^4)`.
pub fn census_after_flip(g: &Graph, census: &Census, e: Edge) -> Census {
    debug_assert_eq!(g.order(), census.n);
    let (u, v) = e.endpoints();
    let n = g.order();
    let table = class_table();
    let uv = bit_of(g, u, v);
    let (nu, nv) = (g.neighbors(u), g.neighbors(v));
    let mut counts = census.counts;
    for w in (0..n).filter(|&w| w != u && w != v) {
        let rest_w = ((nu >> w & 1) as u8) << 1 | ((nv >> w & 1) as u8) << 3;
        for x in ((w + 1)..n).filter(|&x| x != u && x != v) {
            let rest = rest_w
                | ((nu >> x & 1) as u8) << 2
                | ((nv >> x & 1) as u8) << 4
                | bit_of(g, w, x) << 5;
            let before = table[(rest | uv) as usize];
            let after = table[(rest | (uv ^ 1)) as usize];
            if before != after {
                counts[before] -= 1;
                counts[after] += 1;
            }
        }
    }
    Census { n, counts }
}

/// Flips `e` and returns the new graph with its incrementally updated census.
pub fn update_census(g: &Graph, census: &Census, e: Edge) -> (Graph, Census) {
    let updated = census_after_flip(g, census, e);
    let mut h = g.clone();
    h.toggle(e);
    (h, updated)
}

/// Model input built from a census.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    values: Vec<f64>,
    scaled: bool,
}

/// Length of the scaled vector: 11 normalized counts plus `n, s, t`.
pub const SCALED_LEN: usize = NUM_CLASSES + 3;
/// Length of the unscaled vector: 11 raw counts.
pub const UNSCALED_LEN: usize = NUM_CLASSES;

impl FeatureVector {
    pub fn scaled(counts: &ClassCounts, n: usize, s: usize, t: usize) -> Result<Self, CensusError> {
        if n < 4 {
            return Err(CensusError::TooFewVertices(n));
        }
        let total = binomial(n as u64, 4) as f64;
        let mut values: Vec<f64> = counts.0.iter().map(|&c| c as f64 / total).collect();
        values.extend([n as f64, s as f64, t as f64]);
        Ok(FeatureVector { values, scaled: true })
    }

    pub fn unscaled(counts: &ClassCounts) -> Self {
        FeatureVector { values: counts.0.iter().map(|&c| c as f64).collect(), scaled: false }
    }

    pub fn from_census(census: &Census, s: usize, t: usize, scaled: bool) -> Result<Self, CensusError> {
        if scaled {
            Self::scaled(&census.counts, census.n, s, t)
        } else {
            Ok(Self::unscaled(&census.counts))
        }
    }

    /// Wraps precomputed values, e.g. rows loaded from disk.
    pub fn from_raw(values: Vec<f64>, scaled: bool) -> Self {
        FeatureVector { values, scaled }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::all_pairs;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn counts_of(pairs: &[(ClassId, u64)]) -> ClassCounts {
        let mut c = ClassCounts::default();
        for &(k, v) in pairs {
            c[k] = v;
        }
        c
    }

    #[test]
    fn table_orbits_have_expected_sizes() {
        // Independent of the table: group masks by orbit under relabeling.
        let perms = permutations4();
        let mut orbit_sizes: Vec<(u8, usize)> = Vec::new();
        for mask in 0u8..64 {
            let rep = perms.iter().map(|&p| permute_mask(mask, p)).min().unwrap();
            match orbit_sizes.iter_mut().find(|(r, _)| *r == rep) {
                Some((_, n)) => *n += 1,
                None => orbit_sizes.push((rep, 1)),
            }
        }
        assert_eq!(orbit_sizes.len(), 11);
        let table = class_table();
        let mut per_class = [0usize; NUM_CLASSES];
        for m in 0..64 {
            per_class[table[m].index()] += 1;
        }
        assert_eq!(per_class, [1, 6, 3, 12, 4, 12, 4, 3, 12, 6, 1]);
        // Each orbit maps to one class and each class to one orbit.
        for (rep, size) in orbit_sizes {
            let class = table[rep as usize];
            assert_eq!(per_class[class.index()], size, "{class}");
        }
    }

    #[test]
    fn complement_pairing_matches_table() {
        let table = class_table();
        for m in 0..64usize {
            assert_eq!(table[m].complement(), table[m ^ 63]);
        }
    }

    #[test]
    fn classify_examples() {
        let k4 = Graph::complete(4).unwrap();
        assert_eq!(classify_quad(&k4, 0, 1, 2, 3).unwrap(), ClassId::K4);
        let e = Graph::new(6).unwrap();
        assert_eq!(classify_quad(&e, 5, 0, 3, 2).unwrap(), ClassId::E4);
        let c5 = Graph::cycle(5).unwrap();
        assert_eq!(classify_quad(&c5, 0, 1, 2, 3).unwrap(), ClassId::P4);
        assert!(classify_quad(&c5, 0, 1, 1, 3).is_err());
        assert!(classify_quad(&c5, 0, 1, 2, 5).is_err());
        let claw = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(classify_quad(&claw, 3, 2, 1, 0).unwrap(), ClassId::Claw);
        let paw = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        assert_eq!(classify_quad(&paw, 0, 1, 2, 3).unwrap(), ClassId::Paw);
    }

    #[test]
    fn full_census_examples() {
        let e6 = full_census(&Graph::new(6).unwrap());
        assert_eq!(*e6.counts(), counts_of(&[(ClassId::E4, 15)]));
        let k5 = full_census(&Graph::complete(5).unwrap());
        assert_eq!(*k5.counts(), counts_of(&[(ClassId::K4, 5)]));
        let c5 = full_census(&Graph::cycle(5).unwrap());
        assert_eq!(*c5.counts(), counts_of(&[(ClassId::P4, 5)]));
        let small = full_census(&Graph::complete(3).unwrap());
        assert_eq!(small.counts().total(), 0);
    }

    #[test]
    fn local_census_examples() {
        assert_eq!(local_census(&Graph::new(5).unwrap(), 0, 1), counts_of(&[(ClassId::E4, 3)]));
        assert_eq!(local_census(&Graph::complete(5).unwrap(), 0, 1), counts_of(&[(ClassId::K4, 3)]));
        assert_eq!(local_census(&Graph::cycle(5).unwrap(), 0, 1), counts_of(&[(ClassId::P4, 3)]));
    }

    #[test]
    fn update_examples() {
        let g = Graph::new(5).unwrap();
        let (h, c) = update_census(&g, &full_census(&g), g.edge(0, 1).unwrap());
        assert_eq!(h.edge_count(), 1);
        assert_eq!(*c.counts(), counts_of(&[(ClassId::E4, 2), (ClassId::K2, 3)]));

        let c5 = Graph::cycle(5).unwrap();
        let base = full_census(&c5);
        let e = c5.edge(0, 2).unwrap();
        let (h, c) = update_census(&c5, &base, e);
        assert_eq!(c, full_census(&h));
        let (back, c_back) = update_census(&h, &c, e);
        assert_eq!(back, c5);
        assert_eq!(c_back, base);
    }

    #[test]
    fn update_matches_algorithm_two_form() {
        // census' = census + local(G') - local(G)
        let g = Graph::random_seeded(12, 0.5, 99).unwrap();
        let census = full_census(&g);
        for e in all_pairs(12) {
            let (h, fast) = update_census(&g, &census, e);
            let before = local_census(&g, e.u(), e.v());
            let after = local_census(&h, e.u(), e.v());
            let mut slow = *census.counts();
            for c in ClassId::ALL {
                slow[c] = slow[c] + after[c] - before[c];
            }
            assert_eq!(*fast.counts(), slow);
        }
    }

    #[test]
    fn features() {
        let e6 = full_census(&Graph::new(6).unwrap());
        let f = FeatureVector::from_census(&e6, 3, 3, true).unwrap();
        let mut want = vec![0.0; 14];
        want[0] = 1.0;
        want[11..].copy_from_slice(&[6.0, 3.0, 3.0]);
        assert_eq!(f.values(), want.as_slice());

        let c5 = full_census(&Graph::cycle(5).unwrap());
        let f = FeatureVector::from_census(&c5, 3, 3, true).unwrap();
        assert_eq!(f.values()[ClassId::P4.index()], 1.0);
        assert_eq!(f.values()[..11].iter().sum::<f64>(), 1.0);

        let k5 = full_census(&Graph::complete(5).unwrap());
        let f = FeatureVector::from_census(&k5, 3, 3, false).unwrap();
        assert_eq!(f.len(), 11);
        assert_eq!(f.values()[ClassId::K4.index()], 5.0);

        let tiny = full_census(&Graph::new(3).unwrap());
        assert_eq!(FeatureVector::from_census(&tiny, 3, 3, true), Err(CensusError::TooFewVertices(3)));
    }

    #[test]
    fn sum_rule_constructor() {
        assert!(Census::from_counts(5, counts_of(&[(ClassId::P4, 5)])).is_some());
        assert!(Census::from_counts(5, counts_of(&[(ClassId::P4, 4)])).is_none());
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
        (1usize..=max_n, any::<u64>(), 0.0f64..=1.0)
            .prop_map(|(n, seed, p)| Graph::random_seeded(n, p, seed).unwrap())
    }

    proptest! {
        #[test]
        fn chained_updates_match_recount(g in arb_graph(30), seed in any::<u64>()) {
            prop_assume!(g.order() >= 2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pairs = all_pairs(g.order());
            let (mut g, mut c) = (g.clone(), full_census(&g));
            for _ in 0..20 {
                let e = pairs[rng.random_range(0..pairs.len())];
                let (h, hc) = update_census(&g, &c, e);
                prop_assert_eq!(hc, full_census(&h));
                g = h;
                c = hc;
            }
        }

        #[test]
        fn invariant_under_relabeling(g in arb_graph(20), seed in any::<u64>()) {
            let mut perm: Vec<usize> = (0..g.order()).collect();
            perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(full_census(&g.permute(&perm).unwrap()), full_census(&g));
        }

        #[test]
        fn complement_duality(g in arb_graph(20)) {
            let c = full_census(&g);
            prop_assert_eq!(*full_census(&g.complement()).counts(), c.counts().complemented());
        }

        #[test]
        fn sum_rules(g in arb_graph(25), a in 0usize..25, b in 0usize..25) {
            let n = g.order() as u64;
            prop_assert_eq!(full_census(&g).counts().total(), binomial(n, 4));
            let (a, b) = (a % g.order(), b % g.order());
            prop_assume!(a != b);
            prop_assert_eq!(local_census(&g, a, b).total(), binomial(n - 2, 2));
        }

        #[test]
        fn scaled_features_form_distribution(g in arb_graph(20)) {
            prop_assume!(g.order() >= 4);
            let f = FeatureVector::from_census(&full_census(&g), 4, 5, true).unwrap();
            let head = &f.values()[..11];
            prop_assert!(head.iter().all(|&x| (0.0..=1.0).contains(&x)));
            prop_assert!((head.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
