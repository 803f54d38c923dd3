//! Cyclic clique partitions.
//!
//! [`greedy_clique_partition`] grows `k` disjoint cliques round by round,
//! one vertex per clique per round via a bipartite perfect matching, and
//! fixes parity in a final round that attaches adjacent vertex pairs.
//! [`cyclic_partition`] splits every clique into two halves, orders the
//! cliques along a Hamilton cycle of the "R_i fully joined to L_j" digraph
//! and emits the halves in that order, so every two consecutive parts
//! (cyclically) span a clique.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, Vertex};
use crate::matching::{bipartite_perfect_matching, bipartite_saturating_matching};
use crate::rng::{self, GameRng};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionConfig {
    /// Target size `s` of the greedy cliques; parts are about `s/2`.
    pub clique_size: usize,
    /// Smallest part the engine accepts for play.
    pub min_subboard_size: usize,
    pub max_retries: u32,
    /// Expansion budget of one Hamilton cycle search.
    pub hamilton_budget: u64,
}

pub const DEFAULT_MIN_SUBBOARD: usize = 8;

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            clique_size: 2 * DEFAULT_MIN_SUBBOARD,
            min_subboard_size: DEFAULT_MIN_SUBBOARD,
            max_retries: 8,
            hamilton_budget: 200_000,
        }
    }
}

impl PartitionConfig {
    /// Default scale for `n` vertices: `2⌈ln^{1/3} n / 2⌉`, floored at twice
    /// the minimum part size.
    pub fn for_n(n: usize) -> Self {
        let scale = (n.max(2) as f64).ln().cbrt();
        let s = 2 * ((scale / 2.0).ceil() as usize);
        PartitionConfig {
            clique_size: s.max(2 * DEFAULT_MIN_SUBBOARD),
            ..Default::default()
        }
    }

    pub fn with_clique_size(mut self, s: usize) -> Self {
        self.clique_size = s;
        self
    }

    pub fn validate(&self) -> Result<(), PartitionFailure> {
        if self.clique_size < 4 || self.clique_size % 2 == 1 {
            return Err(PartitionFailure::new("config", format!("clique size {} must be even and at least 4", self.clique_size)));
        }
        if self.min_subboard_size < 2 {
            return Err(PartitionFailure::new("config", "min_subboard_size must be at least 2"));
        }
        Ok(())
    }

    /// Inclusive part-size range a partition built with this config may have.
    pub fn part_size_bounds(&self) -> (usize, usize) {
        let h = self.clique_size / 2;
        (h.saturating_sub(2).max(1), h + 2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("partition failed at {stage}: {detail}")]
pub struct PartitionFailure {
    pub stage: String,
    pub detail: String,
}

impl PartitionFailure {
    pub fn new(stage: impl Into<String>, detail: impl Into<String>) -> Self {
        PartitionFailure { stage: stage.into(), detail: detail.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    L,
    R,
}

/// Which greedy clique a part came from and which half it is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfMark {
    pub clique: usize,
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub parts: Vec<Vec<Vertex>>,
    pub half_marks: Vec<HalfMark>,
}

/// Wire form `{"parts": [[v,...],...], "t": int}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionJson {
    pub parts: Vec<Vec<Vertex>>,
    pub t: usize,
}

impl Partition {
    pub fn t(&self) -> usize {
        self.parts.len()
    }

    pub fn to_json(&self) -> PartitionJson {
        PartitionJson { parts: self.parts.clone(), t: self.parts.len() }
    }

    pub fn from_json(j: &PartitionJson) -> Result<Self, PartitionFailure> {
        if j.t != j.parts.len() {
            return Err(PartitionFailure::new("parse", format!("t = {} but {} parts", j.t, j.parts.len())));
        }
        Ok(Partition { parts: j.parts.clone(), half_marks: Vec::new() })
    }
}

/// Rounds and clique count derived from `n` and the clique size:
/// `k = ⌈n/s⌉` cliques, `r = ⌈n/k⌉` rounds, of which the first `b` (the
/// largest even number ≤ r−1) are plain extension rounds.
pub fn greedy_shape(n: usize, s: usize) -> (usize, usize, usize) {
    let k = n.div_ceil(s).max(1);
    let r = n.div_ceil(k);
    let b = if r >= 3 && (r - 2) % 2 == 1 { r - 1 } else { r.saturating_sub(2) };
    (k, r, b)
}

/// Greedy clique partition over vertices in index order.
pub fn greedy_clique_partition(g: &Graph, cfg: &PartitionConfig) -> Result<Vec<Vec<Vertex>>, PartitionFailure> {
    let order: Vec<Vertex> = (0..g.n() as Vertex).collect();
    greedy_with_order(g, cfg, &order)
}

/// Greedy clique partition where the blocks `U_1, U_2, ...` are taken from
/// `order` in sequence.
pub fn greedy_with_order(g: &Graph, cfg: &PartitionConfig, order: &[Vertex]) -> Result<Vec<Vec<Vertex>>, PartitionFailure> {
    cfg.validate()?;
    let n = order.len();
    let (k, r, b) = greedy_shape(n, cfg.clique_size);
    if b < 2 {
        return Err(PartitionFailure::new("config", format!("n = {n} gives only {r} rounds")));
    }
    let block = |i: usize| &order[(i - 1) * k..i * k];

    let mut cliques: Vec<Vec<Vertex>> = block(1).iter().map(|&v| vec![v]).collect();
    for round in 2..=b {
        let u = block(round);
        let m = bipartite_perfect_matching(&cliques, u, |c, &x| c.iter().all(|&y| g.has_edge(x, y)))
            .map_err(|_| PartitionFailure::new(format!("round {round}"), format!("no perfect matching between {k} cliques and the next block")))?;
        for (c, j) in cliques.iter_mut().zip(m) {
            c.push(u[j]);
        }
    }

    // Parity repair: pair the leftover vertices across an equitable split
    // and attach each pair (or the single unpaired vertex) to its own clique.
    let rest = &order[b * k..];
    let (x, y) = rest.split_at(rest.len() / 2);
    let pair = bipartite_saturating_matching(x.len(), y.len(), |i, j| g.has_edge(x[i], y[j]))
        .map_err(|_| PartitionFailure::new("pairing", format!("no matching saturating {} leftover vertices", x.len())))?;
    let mut z: Vec<Vec<Vertex>> = x.iter().zip(&pair).map(|(&a, &j)| vec![a, y[j]]).collect();
    let mut used = vec![false; y.len()];
    pair.iter().for_each(|&j| used[j] = true);
    z.extend(y.iter().zip(&used).filter(|(_, &u)| !u).map(|(&v, _)| vec![v]));
    if z.len() > cliques.len() {
        return Err(PartitionFailure::new("attach", format!("{} leftover groups for {} cliques", z.len(), cliques.len())));
    }
    let att = bipartite_saturating_matching(z.len(), cliques.len(), |i, j| {
        z[i].iter().all(|&a| cliques[j].iter().all(|&c| g.has_edge(a, c)))
    })
    .map_err(|_| PartitionFailure::new("attach", "leftover pairs cannot all be attached"))?;
    for (grp, j) in z.into_iter().zip(att) {
        cliques[j].extend(grp);
    }
    for c in &mut cliques {
        c.sort_unstable();
    }
    Ok(cliques)
}

/// Splits a clique into halves `(L, R)` with `||L|-|R|| ≤ 2`, both even,
/// except that the last clique may have odd `R`.
pub fn even_half_split(clique: &[Vertex], is_last: bool) -> Result<(Vec<Vertex>, Vec<Vertex>), PartitionFailure> {
    let m = clique.len();
    if m < 4 {
        return Err(PartitionFailure::new("split", format!("clique of size {m} is too small")));
    }
    if m % 2 == 1 && !is_last {
        return Err(PartitionFailure::new("split", format!("odd clique of size {m} is not last")));
    }
    let l = if m % 2 == 1 {
        if (m / 2) % 2 == 0 { m / 2 } else { m / 2 + 1 }
    } else if (m / 2) % 2 == 0 {
        m / 2
    } else {
        m / 2 - 1
    };
    Ok((clique[..l].to_vec(), clique[l..].to_vec()))
}

/// Nodes are the split cliques; arc `i → j` iff every vertex of `R_i` is
/// adjacent to every vertex of `L_j`.
#[derive(Clone, Debug)]
pub struct CliqueDigraph {
    pub nodes: Vec<(Vec<Vertex>, Vec<Vertex>)>,
    pub out: Vec<Vec<usize>>,
}

impl CliqueDigraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn has_arc(&self, i: usize, j: usize) -> bool {
        self.out[i].binary_search(&j).is_ok()
    }

    pub fn from_arcs(n: usize, arcs: &[(usize, usize)]) -> Self {
        let mut out = vec![Vec::new(); n];
        for &(i, j) in arcs {
            out[i].push(j);
        }
        for o in &mut out {
            o.sort_unstable();
            o.dedup();
        }
        CliqueDigraph { nodes: vec![(Vec::new(), Vec::new()); n], out }
    }
}

pub fn build_clique_digraph(g: &Graph, halves: &[(Vec<Vertex>, Vec<Vertex>)]) -> CliqueDigraph {
    let out = (0..halves.len())
        .map(|i| {
            (0..halves.len())
                .filter(|&j| j != i && g.is_complete_bipartite(&halves[i].1, &halves[j].0))
                .collect()
        })
        .collect();
    CliqueDigraph { nodes: halves.to_vec(), out }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("no Hamilton cycle found")]
pub struct NoHamiltonCycle;

/// Directed Hamilton cycle by backtracking from node 0, trying successors
/// with the fewest onward options first and pruning any unvisited node that
/// has lost all possible predecessors or successors. Up to four restarts
/// with shuffled tie-breaks, each limited to `budget` expansions.
pub fn find_hamilton_cycle(d: &CliqueDigraph, budget: u64, rng: &mut GameRng) -> Result<Vec<usize>, NoHamiltonCycle> {
    let n = d.len();
    if n == 0 {
        return Err(NoHamiltonCycle);
    }
    if n == 1 {
        return Ok(vec![0]);
    }
    let mut inn = vec![Vec::new(); n];
    for (i, o) in d.out.iter().enumerate() {
        for &j in o {
            inn[j].push(i);
        }
    }
    if (0..n).any(|v| d.out[v].is_empty() || inn[v].is_empty()) {
        return Err(NoHamiltonCycle);
    }
    let mut tie: Vec<u64> = vec![0; n];
    for attempt in 0..4 {
        if attempt > 0 {
            tie.iter_mut().for_each(|t| *t = rand::RngCore::next_u64(rng));
        }
        let mut s = HamSearch::new(d, &inn, &tie, budget);
        if let Some(c) = s.run() {
            return Ok(c);
        }
    }
    Err(NoHamiltonCycle)
}

struct HamSearch<'a> {
    d: &'a CliqueDigraph,
    inn: &'a [Vec<usize>],
    tie: &'a [u64],
    visited: Vec<bool>,
    in_left: Vec<usize>,
    out_left: Vec<usize>,
    path: Vec<usize>,
    budget: u64,
}

impl<'a> HamSearch<'a> {
    fn new(d: &'a CliqueDigraph, inn: &'a [Vec<usize>], tie: &'a [u64], budget: u64) -> Self {
        let n = d.len();
        HamSearch {
            d,
            inn,
            tie,
            visited: vec![false; n],
            in_left: inn.iter().map(|v| v.len()).collect(),
            out_left: d.out.iter().map(|v| v.len()).collect(),
            path: Vec::with_capacity(n),
            budget,
        }
    }

    fn run(&mut self) -> Option<Vec<usize>> {
        self.visited[0] = true;
        self.path.push(0);
        // Node 0 stays a valid successor (closing the cycle) but stops being
        // a predecessor for anything except via the final step's choice.
        self.dfs().then(|| self.path.clone())
    }

    /// `in_left[v]`: predecessors of unvisited `v` among unvisited nodes and
    /// the path's head. `out_left[v]`: successors of `v` among unvisited
    /// nodes and node 0.
    fn step(&mut self, cur: usize, next: usize) -> bool {
        let mut ok = true;
        for &w in &self.d.out[cur] {
            if w != next {
                self.in_left[w] -= 1;
                if !self.visited[w] && self.in_left[w] == 0 {
                    ok = false;
                }
            }
        }
        self.visited[next] = true;
        for &w in &self.inn[next] {
            self.out_left[w] -= 1;
            if !self.visited[w] && self.out_left[w] == 0 {
                ok = false;
            }
        }
        self.path.push(next);
        ok
    }

    fn unstep(&mut self, cur: usize, next: usize) {
        self.path.pop();
        for &w in &self.inn[next] {
            self.out_left[w] += 1;
        }
        self.visited[next] = false;
        for &w in &self.d.out[cur] {
            if w != next {
                self.in_left[w] += 1;
            }
        }
    }

    fn dfs(&mut self) -> bool {
        let n = self.d.len();
        let cur = *self.path.last().unwrap();
        if self.path.len() == n {
            return self.d.has_arc(cur, 0);
        }
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        let mut cand: Vec<usize> = self.d.out[cur].iter().copied().filter(|&w| !self.visited[w]).collect();
        cand.sort_by_key(|&w| (self.out_left[w], self.tie[w], w));
        for next in cand {
            if self.step(cur, next) && self.dfs() {
                return true;
            }
            self.unstep(cur, next);
            if self.budget == 0 {
                return false;
            }
        }
        false
    }
}

/// One full partition attempt. `retry_seed` drives the vertex order of the
/// greedy rounds and the Hamilton search tie-breaks.
pub fn cyclic_partition(g: &Graph, cfg: &PartitionConfig, retry_seed: u64) -> Result<Partition, PartitionFailure> {
    let mut r = rng::rng_from_seed(rng::derive_seed(retry_seed, rng::stream::PARTITION));
    let mut order: Vec<Vertex> = (0..g.n() as Vertex).collect();
    rng::shuffle(&mut r, &mut order);
    let cliques = greedy_with_order(g, cfg, &order)?;

    let odd: Vec<usize> = (0..cliques.len()).filter(|&i| cliques[i].len() % 2 == 1).collect();
    if odd.len() > 1 {
        return Err(PartitionFailure::new("split", format!("{} odd cliques", odd.len())));
    }
    let halves = cliques
        .iter()
        .enumerate()
        .map(|(i, c)| even_half_split(c, odd.contains(&i)))
        .collect::<Result<Vec<_>, _>>()?;
    let d = build_clique_digraph(g, &halves);
    let mut hr = rng::rng_from_seed(rng::derive_seed(retry_seed, rng::stream::HAMILTON));
    let mut cycle = find_hamilton_cycle(&d, cfg.hamilton_budget, &mut hr)
        .map_err(|_| PartitionFailure::new("hamilton", format!("no Hamilton cycle in the {}-node clique digraph", d.len())))?;
    if let Some(&o) = odd.first() {
        let at = cycle.iter().position(|&c| c == o).unwrap();
        let len = cycle.len();
        cycle.rotate_left((at + 1) % len);
    }

    let mut parts = Vec::with_capacity(2 * cycle.len());
    let mut half_marks = Vec::with_capacity(2 * cycle.len());
    for &c in &cycle {
        let (l, rr) = &halves[c];
        for (side, h) in [(Side::L, l), (Side::R, rr)] {
            let mut h = h.clone();
            h.sort_unstable();
            parts.push(h);
            half_marks.push(HalfMark { clique: c, side });
        }
    }
    Ok(Partition { parts, half_marks })
}

/// Runs [`cyclic_partition`] with up to `cfg.max_retries` derived retry
/// seeds. Returns the partition and the number of attempts used.
pub fn partition_with_retries(g: &Graph, cfg: &PartitionConfig, seed: u64) -> Result<(Partition, u32), PartitionFailure> {
    let mut last = PartitionFailure::new("config", "max_retries is 0");
    for attempt in 0..cfg.max_retries {
        match cyclic_partition(g, cfg, rng::derive_seed(seed, attempt as u64)) {
            Ok(p) => return Ok((p, attempt + 1)),
            Err(e) if e.stage == "config" => return Err(e),
            Err(e) => last = e,
        }
    }
    Err(last)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub checks: Vec<Check>,
}

impl PartitionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

pub fn verify_partition(g: &Graph, part: &Partition, cfg: &PartitionConfig) -> PartitionReport {
    let n = g.n();
    let mut checks = Vec::new();
    let mut push = |name: &str, bad: Vec<String>| {
        checks.push(Check {
            name: name.to_string(),
            passed: bad.is_empty(),
            detail: bad.into_iter().take(5).collect::<Vec<_>>().join("; "),
        });
    };

    let mut seen = vec![0usize; n];
    let mut bad = Vec::new();
    for p in &part.parts {
        for &v in p {
            match seen.get_mut(v as usize) {
                Some(c) => *c += 1,
                None => bad.push(format!("vertex {v} out of range")),
            }
        }
    }
    bad.extend((0..n).filter(|&v| seen[v] != 1).map(|v| format!("vertex {v} appears {} times", seen[v])));
    push("disjoint_cover", bad);

    let clique = |s: &[Vertex]| g.is_clique(s).unwrap_or(false);
    push(
        "cliques",
        (0..part.t()).filter(|&i| !clique(&part.parts[i])).map(|i| format!("part {i}")).collect(),
    );

    let t = part.t();
    let bad = (0..t)
        .filter(|&i| {
            let j = (i + 1) % t;
            !clique(&part.parts[i]) || !clique(&part.parts[j]) || !g.is_complete_bipartite(&part.parts[i], &part.parts[j])
        })
        .map(|i| format!("parts {i},{}", (i + 1) % t))
        .collect();
    push("cyclic_unions", bad);

    let bad = (0..t)
        .filter(|&i| part.parts[i].len() % 2 == 1 && (i + 1 < t || n % 2 == 0))
        .map(|i| format!("part {i} has odd size {}", part.parts[i].len()))
        .collect();
    push("parity", bad);

    let odd = part.parts.iter().filter(|p| p.len() % 2 == 1).count();
    push("single_odd_part", if odd > 1 { vec![format!("{odd} odd parts")] } else { vec![] });

    let (lo, hi) = cfg.part_size_bounds();
    let bad = (0..t)
        .filter(|&i| !(lo..=hi).contains(&part.parts[i].len()))
        .map(|i| format!("part {i} has size {} outside {lo}..={hi}", part.parts[i].len()))
        .collect();
    push("size_bounds", bad);

    PartitionReport { checks }
}
