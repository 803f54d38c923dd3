//! Blue move generators.
//!
//! Every generator returns a free edge or an error; none of them passes.
//! The blocker, vertex attacker and fast matcher read Red's orchestrator
//! state to pick their targets.

use std::sync::mpsc::Receiver;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::board::{Board, Player};
use crate::error::AdversaryError;
use crate::graph::{Edge, Vertex};
use crate::matching::{has_perfect_matching_of, IncrementalMatching};
use crate::orchestrator::{RedState, Status};
use crate::rng::{self, GameRng};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdversaryKind {
    Random,
    Blocker,
    FastMatcher,
    VertexAttacker {
        /// 1-based subboard to attack first; the highest inactive one if
        /// absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        board: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vertex: Option<Vertex>,
    },
    Scripted {
        moves: Vec<Edge>,
    },
    Remote,
}

impl AdversaryKind {
    pub fn name(&self) -> &'static str {
        match self {
            AdversaryKind::Random => "random",
            AdversaryKind::Blocker => "blocker",
            AdversaryKind::FastMatcher => "fast_matcher",
            AdversaryKind::VertexAttacker { .. } => "vertex_attacker",
            AdversaryKind::Scripted { .. } => "scripted",
            AdversaryKind::Remote => "remote",
        }
    }

    /// Parses the names accepted on the command line.
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "random" => AdversaryKind::Random,
            "blocker" => AdversaryKind::Blocker,
            "fast_matcher" | "fast-matcher" => AdversaryKind::FastMatcher,
            "vertex_attacker" | "vertex-attacker" => AdversaryKind::VertexAttacker { board: None, vertex: None },
            _ => return None,
        })
    }

    /// The four generators the acceptance run uses.
    pub fn standard() -> Vec<AdversaryKind> {
        vec![
            AdversaryKind::Random,
            AdversaryKind::Blocker,
            AdversaryKind::FastMatcher,
            AdversaryKind::VertexAttacker { board: None, vertex: None },
        ]
    }
}

/// A running generator: the kind plus its random stream and cursors.
pub struct Adversary {
    kind: AdversaryKind,
    rng: GameRng,
    cursor: usize,
    seen: usize,
    matching: Option<IncrementalMatching>,
    target: Option<(usize, Vertex)>,
    remote: Option<Receiver<Edge>>,
    remote_timeout: Option<Duration>,
}

impl Adversary {
    pub fn new(kind: AdversaryKind, seed: u64) -> Self {
        Adversary {
            kind,
            rng: rng::rng_from_seed(seed),
            cursor: 0,
            seen: 0,
            matching: None,
            target: None,
            remote: None,
            remote_timeout: None,
        }
    }

    /// A remote generator fed by `rx`; `timeout` bounds each wait.
    pub fn remote(rx: Receiver<Edge>, timeout: Option<Duration>) -> Self {
        Adversary { remote: Some(rx), remote_timeout: timeout, ..Adversary::new(AdversaryKind::Remote, 0) }
    }

    pub fn kind(&self) -> &AdversaryKind {
        &self.kind
    }

    pub fn blue_next(&mut self, board: &Board, red: &RedState) -> Result<Edge, AdversaryError> {
        if board.free_count() == 0 {
            return Err(AdversaryError::NoFreeEdge);
        }
        match self.kind.clone() {
            AdversaryKind::Random => self.random(board),
            AdversaryKind::Blocker => self.blocker(board, red),
            AdversaryKind::FastMatcher => self.fast_matcher(board),
            AdversaryKind::VertexAttacker { board: b, vertex } => self.vertex_attacker(board, red, b, vertex),
            AdversaryKind::Scripted { moves } => {
                let e = *moves.get(self.cursor).ok_or(AdversaryError::ScriptExhausted)?;
                self.cursor += 1;
                if board.is_free_edge(e) {
                    Ok(e)
                } else {
                    Err(AdversaryError::IllegalScriptedMove(e))
                }
            }
            AdversaryKind::Remote => {
                let rx = self.remote.as_ref().ok_or(AdversaryError::Disconnected)?;
                match self.remote_timeout {
                    Some(t) => rx.recv_timeout(t).map_err(|_| AdversaryError::Disconnected),
                    None => rx.recv().map_err(|_| AdversaryError::Disconnected),
                }
            }
        }
    }

    /// Uniform free edge: rejection sampling over vertex pairs, then a scan.
    fn random(&mut self, board: &Board) -> Result<Edge, AdversaryError> {
        let n = board.n();
        for _ in 0..4096 {
            let a = rng::index(&mut self.rng, n) as Vertex;
            let b = rng::index(&mut self.rng, n) as Vertex;
            if board.is_free(a, b) {
                return Ok(Edge::new(a, b));
            }
        }
        let free: Vec<Edge> = board.graph().edges().filter(|&e| board.is_free_edge(e)).collect();
        self.pick(&free).ok_or(AdversaryError::NoFreeEdge)
    }

    fn pick(&mut self, v: &[Edge]) -> Option<Edge> {
        (!v.is_empty()).then(|| v[rng::index(&mut self.rng, v.len())])
    }

    /// Blocks a completing edge on Red's current subboard, else joins two
    /// clean Red-uncovered vertices there, else plays at random.
    fn blocker(&mut self, board: &Board, red: &RedState) -> Result<Edge, AdversaryError> {
        if let Some(i) = red.current_board() {
            let vs = &red.boards[i].vertices;
            let rfree: Vec<Vertex> = vs.iter().copied().filter(|&v| board.degree_within(Player::Red, v, vs) == 0).collect();
            let red_edges = board.edges_within(Player::Red, vs);
            if rfree.len() == 2 && board.is_free(rfree[0], rfree[1]) {
                let mut r = red_edges.clone();
                let e = Edge::new(rfree[0], rfree[1]);
                r.push(e);
                if has_perfect_matching_of(&r, vs).unwrap_or(false) {
                    return Ok(e);
                }
            }
            if rfree.len() <= 4 {
                if let Some(e) = completing(board, vs, &red_edges) {
                    return Ok(e);
                }
            }
            let clean: Vec<Vertex> = rfree.iter().copied().filter(|&v| board.degree_within(Player::Blue, v, vs) == 0).collect();
            let cands = pairs_free(board, &clean);
            if let Some(e) = self.pick(&cands) {
                return Ok(e);
            }
            if let Some(e) = self.pick(&pairs_free(board, &rfree)) {
                return Ok(e);
            }
        }
        self.random(board)
    }

    /// Claims an edge between two vertices its own maximum matching leaves
    /// uncovered, so every move grows Blue's matching while that is
    /// possible.
    fn fast_matcher(&mut self, board: &Board) -> Result<Edge, AdversaryError> {
        let n = board.n();
        let m = self.matching.get_or_insert_with(|| IncrementalMatching::new(n));
        for &(p, e) in &board.history()[self.seen..] {
            if p == Player::Blue {
                m.insert(e);
            }
        }
        self.seen = board.history().len();
        let exposed: Vec<Vertex> = (0..n as Vertex).filter(|&v| !m.is_covered(v)).collect();
        if exposed.len() >= 2 {
            for _ in 0..256 {
                let a = exposed[rng::index(&mut self.rng, exposed.len())];
                let b = exposed[rng::index(&mut self.rng, exposed.len())];
                if board.is_free(a, b) {
                    return Ok(Edge::new(a, b));
                }
            }
            if let Some(e) = self.pick(&pairs_free(board, &exposed)) {
                return Ok(e);
            }
            // No direct edge: any free edge at an exposed vertex that still
            // grows the matching through an augmenting path.
            let m = self.matching.as_ref().unwrap();
            for &a in &exposed {
                for b in board.graph().neighbors(a) {
                    let e = Edge::new(a, b);
                    if board.is_free_edge(e) && m.would_increase(e) {
                        return Ok(e);
                    }
                }
            }
        }
        self.random(board)
    }

    /// Builds a Blue star at one vertex of an inactive subboard until Red
    /// answers there, then moves to the next inactive subboard.
    fn vertex_attacker(
        &mut self,
        board: &Board,
        red: &RedState,
        first: Option<usize>,
        vertex: Option<Vertex>,
    ) -> Result<Edge, AdversaryError> {
        let inactive = |i: usize| red.boards.get(i).is_some_and(|b| b.status == Status::Inactive);
        if self.target.is_some_and(|(i, _)| !inactive(i)) {
            self.target = None;
        }
        if self.target.is_none() {
            let pinned = first.map(|b| b.saturating_sub(1)).filter(|&i| inactive(i) && self.cursor == 0);
            let i = pinned.or_else(|| (0..red.t()).rev().find(|&i| inactive(i)));
            if let Some(i) = i {
                let vs = &red.boards[i].vertices;
                let v = vertex.filter(|v| pinned.is_some() && vs.contains(v)).unwrap_or(vs[0]);
                self.target = Some((i, v));
            }
            self.cursor += 1;
        }
        if let Some((i, v)) = self.target {
            let vs = red.boards[i].vertices.clone();
            let spokes: Vec<Edge> = vs.iter().filter(|&&w| board.is_free(v, w)).map(|&w| Edge::new(v, w)).collect();
            if let Some(e) = spokes.first() {
                return Ok(*e);
            }
            self.target = None;
        }
        self.random(board)
    }
}

fn pairs_free(board: &Board, set: &[Vertex]) -> Vec<Edge> {
    let mut out = Vec::new();
    for (i, &a) in set.iter().enumerate() {
        for &b in &set[i + 1..] {
            if board.is_free(a, b) {
                out.push(Edge::new(a, b));
            }
        }
    }
    out
}

/// First free edge of `vs` completing Red's perfect matching of `vs`.
fn completing(board: &Board, vs: &[Vertex], red: &[Edge]) -> Option<Edge> {
    pairs_free(board, vs).into_iter().find(|&e| {
        let mut r = red.to_vec();
        r.push(e);
        has_perfect_matching_of(&r, vs).unwrap_or(false)
    })
}
