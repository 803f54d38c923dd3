//! Exact matching oracles.
//!
//! General graphs use Edmonds' blossom algorithm (one rooted search per
//! exposed vertex). Bipartite instances use Kuhn's augmenting paths.
//! [`IncrementalMatching`] keeps a maximum matching of a growing edge set
//! and reports whether each insertion increased its size; this is what the
//! referee uses for per-move wasted flags and win detection.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::MatchingError;
use crate::graph::{Edge, Vertex};

const NONE: usize = usize::MAX;

/// A set of pairwise-disjoint edges, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    edges: Vec<Edge>,
}

impl Matching {
    pub fn from_edges(mut edges: Vec<Edge>) -> Option<Self> {
        edges.sort();
        let m = Matching { edges };
        m.is_valid().then_some(m)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn covers(&self, v: Vertex) -> bool {
        self.edges.iter().any(|e| e.touches(v))
    }

    pub fn is_valid(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges.iter().all(|e| seen.insert(e.u()) && seen.insert(e.v()))
    }
}

/// Reusable workspace for rooted blossom searches on a graph with
/// vertices `0..n` given as adjacency lists.
struct Blossom {
    p: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
    mark: Vec<bool>,
    queue: VecDeque<usize>,
}

impl Blossom {
    fn new(n: usize) -> Self {
        Blossom {
            p: vec![NONE; n],
            base: (0..n).collect(),
            used: vec![false; n],
            in_blossom: vec![false; n],
            mark: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn lca(&mut self, mate: &[usize], mut a: usize, mut b: usize) -> usize {
        self.mark.iter_mut().for_each(|m| *m = false);
        loop {
            a = self.base[a];
            self.mark[a] = true;
            if mate[a] == NONE {
                break;
            }
            a = self.p[mate[a]];
        }
        loop {
            b = self.base[b];
            if self.mark[b] {
                return b;
            }
            b = self.p[mate[b]];
        }
    }

    fn mark_path(&mut self, mate: &[usize], mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[mate[v]]] = true;
            self.p[v] = child;
            child = mate[v];
            v = self.p[mate[v]];
        }
    }

    /// Searches for an augmenting path from `root` and applies it.
    fn augment_from(&mut self, adj: &[Vec<usize>], mate: &mut [usize], root: usize) -> bool {
        let n = adj.len();
        self.used.iter_mut().for_each(|u| *u = false);
        self.p.iter_mut().for_each(|p| *p = NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.queue.clear();
        self.used[root] = true;
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for &to in &adj[v] {
                if self.base[v] == self.base[to] || mate[v] == to {
                    continue;
                }
                if to == root || (mate[to] != NONE && self.p[mate[to]] != NONE) {
                    let cur = self.lca(mate, v, to);
                    self.in_blossom.iter_mut().for_each(|b| *b = false);
                    self.mark_path(mate, v, cur, to);
                    self.mark_path(mate, to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.p[to] == NONE {
                    self.p[to] = v;
                    if mate[to] == NONE {
                        let mut v = to;
                        while v != NONE {
                            let pv = self.p[v];
                            let next = mate[pv];
                            mate[v] = pv;
                            mate[pv] = v;
                            v = next;
                        }
                        return true;
                    }
                    self.used[mate[to]] = true;
                    self.queue.push_back(mate[to]);
                }
            }
        }
        false
    }
}

/// Maximum matching of adjacency lists over `0..n`, starting from `mate`
/// (which must already be a valid matching).
fn maximize(adj: &[Vec<usize>], mate: &mut [usize]) {
    let mut b = Blossom::new(adj.len());
    for v in 0..adj.len() {
        if mate[v] == NONE {
            b.augment_from(adj, mate, v);
        }
    }
}

fn greedy(adj: &[Vec<usize>], mate: &mut [usize]) {
    for v in 0..adj.len() {
        if mate[v] == NONE {
            if let Some(&u) = adj[v].iter().find(|&&u| mate[u] == NONE) {
                mate[v] = u;
                mate[u] = v;
            }
        }
    }
}

/// Maximum-cardinality matching of the given edge set over vertices
/// `0..n`. Exact.
pub fn max_matching(n: usize, edges: &[Edge]) -> Matching {
    let mut adj = vec![Vec::new(); n];
    for e in edges {
        adj[e.u() as usize].push(e.v() as usize);
        adj[e.v() as usize].push(e.u() as usize);
    }
    let mut mate = vec![NONE; n];
    greedy(&adj, &mut mate);
    maximize(&adj, &mut mate);
    let mut out = Vec::new();
    for (v, &m) in mate.iter().enumerate() {
        if m != NONE && v < m {
            out.push(Edge::new(v as Vertex, m as Vertex));
        }
    }
    Matching { edges: out }
}

/// Size of a maximum matching of an edge set on arbitrary vertex labels.
pub fn matching_number(edges: &[Edge]) -> usize {
    let (local, n) = relabel(edges);
    max_matching(n, &local).len()
}

fn relabel(edges: &[Edge]) -> (Vec<Edge>, usize) {
    let mut verts: Vec<Vertex> = edges.iter().flat_map(|e| [e.u(), e.v()]).collect();
    verts.sort_unstable();
    verts.dedup();
    let idx = |x: Vertex| verts.binary_search(&x).unwrap() as Vertex;
    let local = edges.iter().map(|e| Edge::new(idx(e.u()), idx(e.v()))).collect();
    (local, verts.len())
}

/// True iff `edges` restricted to `target` contain a matching covering
/// every vertex of `target`.
pub fn has_perfect_matching_of(edges: &[Edge], target: &[Vertex]) -> Result<bool, MatchingError> {
    if target.len() % 2 == 1 {
        return Err(MatchingError::OddTarget(target.len()));
    }
    let mut t = target.to_vec();
    t.sort_unstable();
    t.dedup();
    let inside: Vec<Edge> = edges
        .iter()
        .copied()
        .filter(|e| t.binary_search(&e.u()).is_ok() && t.binary_search(&e.v()).is_ok())
        .collect();
    Ok(2 * matching_number(&inside) == t.len())
}

/// Maximum bipartite matching by Kuhn's algorithm. Entry `i` of the result
/// is the right index matched to left vertex `i`.
pub fn bipartite_max_matching(
    left: usize,
    right: usize,
    adj: impl Fn(usize, usize) -> bool,
) -> Vec<Option<usize>> {
    let lists: Vec<Vec<usize>> = (0..left)
        .map(|i| (0..right).filter(|&j| adj(i, j)).collect())
        .collect();
    let mut match_r = vec![NONE; right];
    let mut seen = vec![false; right];

    fn try_kuhn(v: usize, lists: &[Vec<usize>], seen: &mut [bool], match_r: &mut [usize]) -> bool {
        for &to in &lists[v] {
            if !seen[to] {
                seen[to] = true;
                if match_r[to] == NONE || try_kuhn(match_r[to], lists, seen, match_r) {
                    match_r[to] = v;
                    return true;
                }
            }
        }
        false
    }

    for v in 0..left {
        seen.iter_mut().for_each(|s| *s = false);
        try_kuhn(v, &lists, &mut seen, &mut match_r);
    }
    let mut out = vec![None; left];
    for (j, &i) in match_r.iter().enumerate() {
        if i != NONE {
            out[i] = Some(j);
        }
    }
    out
}

/// A matching saturating the left side (`left <= right`), if one exists.
pub fn bipartite_saturating_matching(
    left: usize,
    right: usize,
    adj: impl Fn(usize, usize) -> bool,
) -> Result<Vec<usize>, MatchingError> {
    if left > right {
        return Err(MatchingError::SizeMismatch { left, right });
    }
    bipartite_max_matching(left, right, adj)
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or(MatchingError::NoPerfectMatching)
}

/// Perfect matching between `left` and `right` under the pair predicate.
/// Entry `i` of the result is the index in `right` matched to `left[i]`.
pub fn bipartite_perfect_matching<L, R>(
    left: &[L],
    right: &[R],
    adj: impl Fn(&L, &R) -> bool,
) -> Result<Vec<usize>, MatchingError> {
    if left.len() != right.len() {
        return Err(MatchingError::SizeMismatch { left: left.len(), right: right.len() });
    }
    bipartite_saturating_matching(left.len(), right.len(), |i, j| adj(&left[i], &right[j]))
}

/// A maximum matching of a growing edge set on vertices `0..n`.
#[derive(Clone, Debug)]
pub struct IncrementalMatching {
    adj: Vec<Vec<Vertex>>,
    mate: Vec<usize>,
    size: usize,
    local: Vec<usize>,
}

impl IncrementalMatching {
    pub fn new(n: usize) -> Self {
        IncrementalMatching {
            adj: vec![Vec::new(); n],
            mate: vec![NONE; n],
            size: 0,
            local: vec![NONE; n],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn is_perfect(&self) -> bool {
        2 * self.size == self.adj.len()
    }

    pub fn mate(&self, v: Vertex) -> Option<Vertex> {
        let m = self.mate[v as usize];
        (m != NONE).then_some(m as Vertex)
    }

    pub fn is_covered(&self, v: Vertex) -> bool {
        self.mate[v as usize] != NONE
    }

    pub fn matching(&self) -> Matching {
        let edges = (0..self.adj.len())
            .filter(|&v| self.mate[v] != NONE && v < self.mate[v])
            .map(|v| Edge::new(v as Vertex, self.mate[v] as Vertex))
            .collect();
        Matching { edges }
    }

    /// Would inserting `e` increase the matching number? Does not modify
    /// the structure.
    pub fn would_increase(&self, e: Edge) -> bool {
        self.clone().insert(e)
    }

    /// Inserts `e` and returns whether the maximum matching grew.
    ///
    /// The matching grows iff some maximum matching of the old graph misses
    /// both endpoints, i.e. iff removing `a`, `b` and re-maximizing inside
    /// their component loses nothing. That is decided on a local copy of
    /// the component so the global state is only touched on success.
    pub fn insert(&mut self, e: Edge) -> bool {
        let (a, b) = (e.u() as usize, e.v() as usize);
        self.adj[a].push(b as Vertex);
        self.adj[b].push(a as Vertex);
        if self.mate[a] == NONE && self.mate[b] == NONE {
            self.mate[a] = b;
            self.mate[b] = a;
            self.size += 1;
            return true;
        }

        let mut comp = vec![a];
        self.local[a] = 0;
        let mut head = 0;
        while head < comp.len() {
            let v = comp[head];
            head += 1;
            for &w in &self.adj[v] {
                let w = w as usize;
                if self.local[w] == NONE {
                    self.local[w] = comp.len();
                    comp.push(w);
                }
            }
        }

        let c = comp.len();
        let (la, lb) = (self.local[a], self.local[b]);
        let mut adj = vec![Vec::new(); c];
        for (i, &v) in comp.iter().enumerate() {
            if i == la || i == lb {
                continue;
            }
            for &w in &self.adj[v] {
                let j = self.local[w as usize];
                if j != la && j != lb {
                    adj[i].push(j);
                }
            }
        }
        let mut mate: Vec<usize> = comp
            .iter()
            .map(|&v| match self.mate[v] {
                NONE => NONE,
                m => self.local[m],
            })
            .collect();
        let mut freed = Vec::new();
        for l in [la, lb] {
            let m = mate[l];
            if m != NONE {
                freed.push(m);
                mate[m] = NONE;
                mate[l] = NONE;
            }
        }
        let need = freed.len();
        let mut roots = freed.clone();
        roots.extend((0..c).filter(|&i| mate[i] == NONE && i != la && i != lb && !freed.contains(&i)));

        let mut gained = 0;
        let mut bl = Blossom::new(c);
        for r in roots {
            if gained == need {
                break;
            }
            if mate[r] == NONE && bl.augment_from(&adj, &mut mate, r) {
                gained += 1;
            }
        }

        let grew = gained == need;
        if grew {
            for (i, &v) in comp.iter().enumerate() {
                self.mate[v] = match mate[i] {
                    NONE => NONE,
                    m => comp[m],
                };
            }
            self.mate[a] = b;
            self.mate[b] = a;
            self.size += 1;
        }
        for &v in &comp {
            self.local[v] = NONE;
        }
        grew
    }
}
