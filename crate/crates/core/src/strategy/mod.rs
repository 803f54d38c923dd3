//! Red's move generators on a single complete subboard `H`.
//!
//! [`weak`] is the Maker strategy that builds a perfect matching of `K_m`
//! within `m/2+1` moves against any opponent. [`astrong`] is the staged
//! strategy that builds a perfect matching of `H` within `|H|/2+2` moves
//! without wasting more moves than Blue, given that Blue has touched `H` but
//! owns at most one edge inside it. [`finisher`] is a small search used only
//! when a staged plan cannot continue.

pub mod astrong;
pub mod finisher;
pub mod forced;
pub mod harness;
pub mod weak;

use serde::{Deserialize, Serialize};

use crate::board::{Board, Player};
use crate::graph::{Edge, Vertex};
use crate::matching::{has_perfect_matching_of, matching_number};

pub use astrong::{astrong_next, stage2_keep_distinct, stage3_finish, stage_m_next, AStrongState, HView, Kind};
pub use finisher::finisher_next;
pub use forced::forced_finish;
pub use weak::{sweak_next, WeakState};

/// Coarse position inside a plan, recorded in move annotations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    I,
    II,
    III,
    M,
    Weak,
    Import,
    Fallback,
    Done,
}

impl Stage {
    pub fn tag(self) -> &'static str {
        match self {
            Stage::I => "I",
            Stage::II => "II",
            Stage::III => "III",
            Stage::M => "M",
            Stage::Weak => "weak",
            Stage::Import => "import",
            Stage::Fallback => "fallback",
            Stage::Done => "done",
        }
    }
}

/// A Red move together with the stage that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub edge: Edge,
    pub stage: Stage,
}

impl Step {
    pub fn new(edge: Edge, stage: Stage) -> Self {
        Step { edge, stage }
    }
}

pub(crate) fn contains(set: &[Vertex], v: Vertex) -> bool {
    set.binary_search(&v).is_ok()
}

pub(crate) fn sorted(mut v: Vec<Vertex>) -> Vec<Vertex> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Vertices of `h` with a Blue edge inside `h` and no Red edge inside `h`.
pub fn h_distinct(board: &Board, h: &[Vertex]) -> Vec<Vertex> {
    h.iter()
        .copied()
        .filter(|&v| board.degree_within(Player::Blue, v, h) >= 1 && board.degree_within(Player::Red, v, h) == 0)
        .collect()
}

pub fn count_h_distinct(board: &Board, h: &[Vertex]) -> usize {
    h_distinct(board, h).len()
}

/// Vertices of `h` without a Red edge inside `h`.
pub(crate) fn red_free(board: &Board, h: &[Vertex]) -> Vec<Vertex> {
    h.iter().copied().filter(|&v| board.degree_within(Player::Red, v, h) == 0).collect()
}

pub(crate) fn red_has_pm(board: &Board, set: &[Vertex]) -> bool {
    set.len() % 2 == 0 && has_perfect_matching_of(&board.edges_within(Player::Red, set), set).unwrap_or(false)
}

/// Largest Blue degree inside `h`.
pub(crate) fn blue_max_degree(board: &Board, h: &[Vertex]) -> usize {
    h.iter().map(|&v| board.degree_within(Player::Blue, v, h)).max().unwrap_or(0)
}

/// `e(B[set]) − ν(B[set])`.
pub fn wasted_within(board: &Board, p: Player, set: &[Vertex]) -> usize {
    let e = board.edges_within(p, set);
    e.len() - matching_number(&e)
}

/// Free edges with both ends in `set`, lexicographic.
pub(crate) fn free_edges_within(board: &Board, set: &[Vertex]) -> Vec<Edge> {
    let mut out = Vec::new();
    for (i, &a) in set.iter().enumerate() {
        for &b in &set[i + 1..] {
            if board.is_free(a, b) {
                out.push(Edge::new(a, b));
            }
        }
    }
    out.sort();
    out
}
