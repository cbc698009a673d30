//! Undirected simple graphs stored as one `u64` neighbor bitset per vertex.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Largest order representable with single-word bitsets.
pub const MAX_VERTICES: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("graph order {0} exceeds the supported maximum of {MAX_VERTICES}")]
    TooManyVertices(usize),
    #[error("edge ({u}, {v}) is out of range for a graph on {n} vertices")]
    EdgeOutOfRange { u: usize, v: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("permutation is not a bijection on 0..{0}")]
    NotABijection(usize),
    #[error("edge probability {0} is outside [0, 1]")]
    BadProbability(f64),
}

/// Unordered vertex pair, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    u: usize,
    v: usize,
}

impl Edge {
    /// Builds an edge from two distinct endpoints in either order.
    pub fn new(a: usize, b: usize) -> Result<Self, GraphError> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Edge { u: a, v: b }),
            std::cmp::Ordering::Greater => Ok(Edge { u: b, v: a }),
            std::cmp::Ordering::Equal => Err(GraphError::SelfLoop(a)),
        }
    }

    #[inline]
    pub fn u(self) -> usize {
        self.u
    }

    #[inline]
    pub fn v(self) -> usize {
        self.v
    }

    #[inline]
    pub fn endpoints(self) -> (usize, usize) {
        (self.u, self.v)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

/// All `n(n-1)/2` pairs in lexicographic order.
pub fn all_pairs(n: usize) -> Vec<Edge> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in (u + 1)..n {
            out.push(Edge { u, v });
        }
    }
    out
}

#[inline]
pub(crate) fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// An undirected simple graph on vertices `0..n`.
///
/// `adj[v]` holds the neighbor set of `v`; bit `v` is never set and the
/// relation is kept symmetric by every mutator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<u64>,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn new(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        if n > MAX_VERTICES {
            return Err(GraphError::TooManyVertices(n));
        }
        Ok(Graph { n, adj: vec![0; n] })
    }

    pub fn complete(n: usize) -> Result<Self, GraphError> {
        Ok(Self::new(n)?.complement())
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::new(n)?;
        for (a, b) in edges {
            let e = g.edge(a, b)?;
            g.set_edge(e, true);
        }
        Ok(g)
    }

    /// Cycle `0 - 1 - ... - (n-1) - 0`.
    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    /// Each pair is an edge independently with probability `p`.
    pub fn random<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Self, GraphError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(GraphError::BadProbability(p));
        }
        let mut g = Self::new(n)?;
        for e in all_pairs(n) {
            if rng.random_bool(p) {
                g.set_edge(e, true);
            }
        }
        Ok(g)
    }

    pub fn random_seeded(n: usize, p: f64, seed: u64) -> Result<Self, GraphError> {
        Self::random(n, p, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Validated edge inside this graph.
    pub fn edge(&self, a: usize, b: usize) -> Result<Edge, GraphError> {
        if a >= self.n || b >= self.n {
            return Err(GraphError::EdgeOutOfRange { u: a, v: b, n: self.n });
        }
        Edge::new(a, b)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        debug_assert!(u < self.n && v < self.n);
        (self.adj[u] >> v) & 1 == 1
    }

    /// Neighbor bitset of `v`.
    #[inline]
    pub fn neighbors(&self, v: usize) -> u64 {
        self.adj[v]
    }

    /// Non-neighbor bitset of `v`, excluding `v` itself.
    #[inline]
    pub fn non_neighbors(&self, v: usize) -> u64 {
        !self.adj[v] & low_mask(self.n) & !(1u64 << v)
    }

    #[inline]
    pub fn degree(&self, v: usize) -> u32 {
        self.adj[v].count_ones()
    }

    pub fn degrees(&self) -> Vec<u32> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.n).flat_map(move |u| {
            let mut higher = self.adj[u] & !low_mask(u + 1);
            std::iter::from_fn(move || {
                if higher == 0 {
                    return None;
                }
                let v = higher.trailing_zeros() as usize;
                higher &= higher - 1;
                Some(Edge { u, v })
            })
        })
    }

    pub(crate) fn set_edge(&mut self, e: Edge, present: bool) {
        debug_assert!(e.v < self.n);
        if present {
            self.adj[e.u] |= 1 << e.v;
            self.adj[e.v] |= 1 << e.u;
        } else {
            self.adj[e.u] &= !(1 << e.v);
            self.adj[e.v] &= !(1 << e.u);
        }
    }

    /// Toggles `e` in place. The edge must come from a graph of the same order.
    #[inline]
    pub fn toggle(&mut self, e: Edge) {
        debug_assert!(e.v < self.n);
        self.adj[e.u] ^= 1 << e.v;
        self.adj[e.v] ^= 1 << e.u;
    }

    /// Copy of this graph with the adjacency of `e` toggled.
    pub fn flip_edge(&self, e: Edge) -> Result<Graph, GraphError> {
        if e.v >= self.n {
            return Err(GraphError::EdgeOutOfRange { u: e.u, v: e.v, n: self.n });
        }
        let mut g = self.clone();
        g.toggle(e);
        Ok(g)
    }

    pub fn complement(&self) -> Graph {
        let full = low_mask(self.n);
        let adj = (0..self.n)
            .map(|v| !self.adj[v] & full & !(1u64 << v))
            .collect();
        Graph { n: self.n, adj }
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Graph, GraphError> {
        if perm.len() != self.n {
            return Err(GraphError::NotABijection(self.n));
        }
        let mut seen = 0u64;
        for &p in perm {
            if p >= self.n || seen & (1 << p) != 0 {
                return Err(GraphError::NotABijection(self.n));
            }
            seen |= 1 << p;
        }
        let mut g = Graph { n: self.n, adj: vec![0; self.n] };
        for e in self.edges() {
            g.set_edge(Edge::new(perm[e.u], perm[e.v]).expect("bijection"), true);
        }
        Ok(g)
    }

    /// This graph plus one isolated vertex labeled `n`.
    pub fn with_extra_vertex(&self) -> Result<Graph, GraphError> {
        if self.n + 1 > MAX_VERTICES {
            return Err(GraphError::TooManyVertices(self.n + 1));
        }
        let mut adj = self.adj.clone();
        adj.push(0);
        Ok(Graph { n: self.n + 1, adj })
    }

    /// Subgraph induced by `keep`, relabeled `0..keep.len()` in the given order.
    pub fn induced(&self, keep: &[usize]) -> Result<Graph, GraphError> {
        let mut g = Graph::new(keep.len())?;
        for (i, &a) in keep.iter().enumerate() {
            if a >= self.n {
                return Err(GraphError::EdgeOutOfRange { u: a, v: a, n: self.n });
            }
            for (j, &b) in keep.iter().enumerate().skip(i + 1) {
                if a == b {
                    return Err(GraphError::NotABijection(keep.len()));
                }
                if self.has_edge(a, b) {
                    g.set_edge(Edge { u: i, v: j }, true);
                }
            }
        }
        Ok(g)
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges().map(|e| e.endpoints()).collect::<Vec<_>>())
            .finish()
    }
}
