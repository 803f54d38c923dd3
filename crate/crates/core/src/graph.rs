//! Simple undirected graphs on dense vertex indices, and `G(n,p)` sampling.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::rng::{self, GameRng};

pub type Vertex = u32;

/// An unordered vertex pair stored canonically as `(min, max)`.
///
/// The derived ordering is lexicographic on that pair, which is the
/// tie-breaking order used by every strategy in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "[Vertex; 2]", try_from = "[Vertex; 2]")]
pub struct Edge {
    u: Vertex,
    v: Vertex,
}

impl Edge {
    /// Panics on a self-loop; use [`Edge::try_new`] for untrusted input.
    pub fn new(a: Vertex, b: Vertex) -> Self {
        Self::try_new(a, b).expect("self-loop edge")
    }

    pub fn try_new(a: Vertex, b: Vertex) -> Result<Self, GraphError> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Edge { u: a, v: b }),
            std::cmp::Ordering::Greater => Ok(Edge { u: b, v: a }),
            std::cmp::Ordering::Equal => Err(GraphError::SelfLoop(a)),
        }
    }

    pub fn u(self) -> Vertex {
        self.u
    }

    pub fn v(self) -> Vertex {
        self.v
    }

    pub fn ends(self) -> (Vertex, Vertex) {
        (self.u, self.v)
    }

    pub fn touches(self, x: Vertex) -> bool {
        self.u == x || self.v == x
    }

    pub fn shares_vertex(self, other: Edge) -> bool {
        self.touches(other.u) || self.touches(other.v)
    }

    /// The endpoint that is not `x`. Only meaningful when `self.touches(x)`.
    pub fn other(self, x: Vertex) -> Vertex {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

impl From<Edge> for [Vertex; 2] {
    fn from(e: Edge) -> Self {
        [e.u, e.v]
    }
}

impl TryFrom<[Vertex; 2]> for Edge {
    type Error = GraphError;
    fn try_from(p: [Vertex; 2]) -> Result<Self, Self::Error> {
        Edge::try_new(p[0], p[1])
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.u, self.v)
    }
}

/// Adjacency stored as one bit row per vertex; `n` up to a few thousand
/// keeps this at a few megabytes even for dense graphs.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
    edge_count: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edge_count)
            .finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Graph {
            n,
            words,
            rows: vec![0; n * words],
            edge_count: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n as Vertex {
            for v in u + 1..n as Vertex {
                g.insert(u, v);
            }
        }
        g
    }

    /// Builds a graph from an edge list, rejecting loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut g = Graph::empty(n);
        for (a, b) in edges {
            g.check_vertex(a)?;
            g.check_vertex(b)?;
            let e = Edge::try_new(a, b)?;
            if g.has_edge(e.u, e.v) {
                return Err(GraphError::DuplicateEdge(e));
            }
            g.insert(e.u, e.v);
        }
        Ok(g)
    }

    fn insert(&mut self, u: Vertex, v: Vertex) {
        let (u, v) = (u as usize, v as usize);
        self.rows[u * self.words + v / 64] |= 1 << (v % 64);
        self.rows[v * self.words + u / 64] |= 1 << (u % 64);
        self.edge_count += 1;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<(), GraphError> {
        if (v as usize) < self.n {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { vertex: v, n: self.n })
        }
    }

    #[inline]
    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        if u == v || u as usize >= self.n || v as usize >= self.n {
            return false;
        }
        let (u, v) = (u as usize, v as usize);
        self.rows[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.has_edge(e.u, e.v)
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    fn row(&self, v: Vertex) -> &[u64] {
        let s = v as usize * self.words;
        &self.rows[s..s + self.words]
    }

    /// Neighbours of `v` in increasing order.
    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.row(v).iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                Some(wi as Vertex * 64 + b)
            })
        })
    }

    /// All edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.n as Vertex).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&v| v > u)
                .map(move |v| Edge { u, v })
        })
    }

    /// True iff every pair of `s` is adjacent. Duplicates in `s` are ignored.
    pub fn is_clique(&self, s: &[Vertex]) -> Result<bool, GraphError> {
        for &v in s {
            self.check_vertex(v)?;
        }
        for (i, &a) in s.iter().enumerate() {
            for &b in &s[i + 1..] {
                if a != b && !self.has_edge(a, b) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// True iff every vertex of `a` is adjacent to every vertex of `b`.
    pub fn is_complete_bipartite(&self, a: &[Vertex], b: &[Vertex]) -> bool {
        a.iter().all(|&x| b.iter().all(|&y| self.has_edge(x, y)))
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n,
            edges: self.edges().map(Into::into).collect(),
        }
    }

    pub fn from_json(j: &GraphJson) -> Result<Self, GraphError> {
        Graph::from_edges(j.n, j.edges.iter().map(|p| (p[0], p[1])))
    }
}

/// Wire form: `{"n": int, "edges": [[u,v],...]}`, `u < v`, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[Vertex; 2]>,
}

/// Samples `G(n,p)`: pairs `(u,v)`, `u < v`, are visited in lexicographic
/// order and each is kept when one [`rng::bernoulli`] draw succeeds.
pub fn sample_gnp(n: usize, p: f64, seed: u64) -> Graph {
    let mut r = rng::rng_from_seed(seed);
    sample_gnp_with(n, p, &mut r)
}

pub fn sample_gnp_with(n: usize, p: f64, r: &mut GameRng) -> Graph {
    let mut g = Graph::empty(n);
    for u in 0..n as Vertex {
        for v in u + 1..n as Vertex {
            if rng::bernoulli(r, p) {
                g.insert(u, v);
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_is_canonical() {
        assert_eq!(Edge::new(5, 2), Edge::new(2, 5));
        assert_eq!(Edge::new(5, 2).ends(), (2, 5));
        assert!(Edge::try_new(3, 3).is_err());
        assert!(Edge::new(0, 9) < Edge::new(1, 2));
    }

    #[test]
    fn gnp_extremes() {
        let k5 = sample_gnp(5, 1.0, 17);
        assert_eq!(k5.edge_count(), 10);
        assert_eq!(k5, Graph::complete(5));
        assert_eq!(sample_gnp(5, 0.0, 17).edge_count(), 0);
        for n in 1..40 {
            assert_eq!(sample_gnp(n, 1.0, n as u64).edge_count(), n * (n - 1) / 2);
        }
    }

    #[test]
    fn gnp_edge_count_within_five_sd() {
        let g = sample_gnp(1000, 0.5, 2024);
        let pairs = 1000.0 * 999.0 / 2.0;
        let mean = pairs * 0.5;
        let sd = (pairs * 0.25f64).sqrt();
        assert!((mean - 249_750.0).abs() < 1e-9);
        assert!((sd - 353.4).abs() < 0.1);
        assert!((g.edge_count() as f64 - mean).abs() < 5.0 * sd);
    }

    #[test]
    fn gnp_is_reproducible() {
        let a = sample_gnp(120, 0.3, 7);
        let b = sample_gnp(120, 0.3, 7);
        let c = sample_gnp(120, 0.3, 8);
        assert_eq!(a.to_json(), b.to_json());
        assert_ne!(a.to_json(), c.to_json());
    }

    #[test]
    fn clique_checks() {
        let k5 = Graph::complete(5);
        assert!(k5.is_clique(&[0, 2, 4]).unwrap());
        assert!(!Graph::empty(5).is_clique(&[1, 3]).unwrap());
        assert!(k5.is_clique(&[0, 7]).is_err());
    }

    #[test]
    fn clique_matches_pair_enumeration() {
        let g = sample_gnp(30, 0.5, 11);
        let mut r = rng::rng_from_seed(3);
        for _ in 0..200 {
            let mut s: Vec<Vertex> = (0..30).collect();
            rng::shuffle(&mut r, &mut s);
            s.truncate(4);
            let mut brute = true;
            for i in 0..4 {
                for j in 0..4 {
                    if i != j && !g.edges().any(|e| e == Edge::new(s[i], s[j])) {
                        brute = false;
                    }
                }
            }
            assert_eq!(g.is_clique(&s).unwrap(), brute);
        }
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(matches!(Graph::from_edges(3, [(0, 0)]), Err(GraphError::SelfLoop(0))));
        assert!(matches!(
            Graph::from_edges(3, [(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(_))
        ));
        assert!(matches!(
            Graph::from_edges(3, [(0, 3)]),
            Err(GraphError::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn json_is_sorted_and_round_trips() {
        let g = Graph::from_edges(4, [(3, 1), (0, 2), (1, 0)]).unwrap();
        let j = g.to_json();
        assert_eq!(j.edges, vec![[0, 1], [0, 2], [1, 3]]);
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(text, r#"{"n":4,"edges":[[0,1],[0,2],[1,3]]}"#);
        assert_eq!(Graph::from_json(&j).unwrap(), g);
    }

    #[test]
    fn neighbors_sorted() {
        let g = Graph::from_edges(70, [(3, 69), (3, 1), (3, 64)]).unwrap();
        assert_eq!(g.neighbors(3).collect::<Vec<_>>(), vec![1, 64, 69]);
        assert_eq!(g.degree(3), 3);
    }
}
