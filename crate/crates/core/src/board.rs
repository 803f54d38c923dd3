//! Ownership state of a game in progress.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::BoardError;
use crate::graph::{Edge, Graph, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Red,
    Blue,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Red => Player::Blue,
            Player::Blue => Player::Red,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Player::Red => "red",
            Player::Blue => "blue",
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Owner {
    Free,
    Red,
    Blue,
}

impl From<Player> for Owner {
    fn from(p: Player) -> Self {
        match p {
            Player::Red => Owner::Red,
            Player::Blue => Owner::Blue,
        }
    }
}

/// The graph plus who owns which edge. Unclaimed graph edges are free;
/// only claimed edges are stored.
#[derive(Clone, Debug)]
pub struct Board {
    graph: Arc<Graph>,
    claimed: HashMap<Edge, Player>,
    adj: [Vec<Vec<Vertex>>; 2],
    history: Vec<(Player, Edge)>,
}

fn slot(p: Player) -> usize {
    match p {
        Player::Red => 0,
        Player::Blue => 1,
    }
}

impl Board {
    pub fn new(graph: Arc<Graph>) -> Self {
        let n = graph.n();
        Board {
            graph,
            claimed: HashMap::new(),
            adj: [vec![Vec::new(); n], vec![Vec::new(); n]],
            history: Vec::new(),
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn owner(&self, e: Edge) -> Result<Owner, BoardError> {
        if !self.graph.contains(e) {
            return Err(BoardError::NotAnEdge(e));
        }
        Ok(self.claimed.get(&e).map_or(Owner::Free, |&p| p.into()))
    }

    pub fn owned_by(&self, e: Edge) -> Option<Player> {
        self.claimed.get(&e).copied()
    }

    /// Free graph edge between `a` and `b`.
    pub fn is_free(&self, a: Vertex, b: Vertex) -> bool {
        a != b && self.graph.has_edge(a, b) && !self.claimed.contains_key(&Edge::new(a, b))
    }

    pub fn is_free_edge(&self, e: Edge) -> bool {
        self.is_free(e.u(), e.v())
    }

    pub fn has(&self, p: Player, a: Vertex, b: Vertex) -> bool {
        a != b && self.claimed.get(&Edge::new(a, b)) == Some(&p)
    }

    /// Claims without checking turn order (used for handicap setups).
    pub fn claim(&mut self, p: Player, e: Edge) -> Result<(), BoardError> {
        match self.owner(e)? {
            Owner::Free => {}
            _ => return Err(BoardError::AlreadyClaimed(e)),
        }
        self.claimed.insert(e, p);
        self.adj[slot(p)][e.u() as usize].push(e.v());
        self.adj[slot(p)][e.v() as usize].push(e.u());
        self.history.push((p, e));
        Ok(())
    }

    /// Claims in strict alternation, Red first.
    pub fn play(&mut self, p: Player, e: Edge) -> Result<(), BoardError> {
        if p != self.to_move() {
            return Err(BoardError::OutOfTurn(p.name()));
        }
        self.claim(p, e)
    }

    pub fn to_move(&self) -> Player {
        if self.history.len() % 2 == 0 {
            Player::Red
        } else {
            Player::Blue
        }
    }

    pub fn history(&self) -> &[(Player, Edge)] {
        &self.history
    }

    pub fn claimed_count(&self) -> usize {
        self.claimed.len()
    }

    pub fn free_count(&self) -> usize {
        self.graph.edge_count() - self.claimed.len()
    }

    pub fn neighbors(&self, p: Player, v: Vertex) -> &[Vertex] {
        &self.adj[slot(p)][v as usize]
    }

    pub fn degree(&self, p: Player, v: Vertex) -> usize {
        self.adj[slot(p)][v as usize].len()
    }

    /// Edges of `p`, in claim order.
    pub fn edges_of(&self, p: Player) -> Vec<Edge> {
        self.history.iter().filter(|(q, _)| *q == p).map(|&(_, e)| e).collect()
    }

    /// Edges of `p` with both endpoints in `set`, sorted.
    pub fn edges_within(&self, p: Player, set: &[Vertex]) -> Vec<Edge> {
        let mut s = set.to_vec();
        s.sort_unstable();
        let mut out = Vec::new();
        for &v in &s {
            for &w in self.neighbors(p, v) {
                if v < w && s.binary_search(&w).is_ok() {
                    out.push(Edge::new(v, w));
                }
            }
        }
        out.sort();
        out
    }

    /// Degree of `v` in `p`'s graph counting only neighbours in `set`.
    pub fn degree_within(&self, p: Player, v: Vertex, set: &[Vertex]) -> usize {
        self.neighbors(p, v).iter().filter(|w| set.contains(w)).count()
    }
}
