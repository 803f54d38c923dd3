//! Exact minimax for the strong perfect matching game on `K_2`, `K_4`,
//! `K_6`, and a cross-check of the referee's win detection against the
//! solver's own terminal test.
//!
//! A position is the pair (Red edge set, Blue edge set), stored in base 3
//! over the `C(m,2)` edges, so values fit in one dense byte array.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Board, Player};
use crate::graph::{Edge, Graph, Vertex};
use crate::matching::IncrementalMatching;

/// Largest clique the solver accepts.
pub const MAX_SOLVER_M: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GameValue {
    BlueWin,
    Draw,
    RedWin,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("K_{0} is beyond the solver budget (even m ≤ {MAX_SOLVER_M})")]
    BudgetExceeded(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub m: usize,
    pub value: GameValue,
    pub positions: usize,
}

struct Small {
    m: usize,
    edges: Vec<Edge>,
    /// Perfect matchings of `K_m` as edge bitmasks.
    pms: Vec<u32>,
    pow3: Vec<usize>,
}

impl Small {
    fn new(m: usize) -> Result<Small, SolverError> {
        if m == 0 || m % 2 == 1 || m > MAX_SOLVER_M {
            return Err(SolverError::BudgetExceeded(m));
        }
        let mut edges = Vec::new();
        for a in 0..m as Vertex {
            for b in a + 1..m as Vertex {
                edges.push(Edge::new(a, b));
            }
        }
        let e = edges.len();
        // Brute force over edge subsets of size m/2.
        let pms = (0u32..1 << e)
            .filter(|&mask| mask.count_ones() as usize == m / 2)
            .filter(|&mask| {
                let mut cover = 0u32;
                for (i, ed) in edges.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        let bits = 1 << ed.u() | 1 << ed.v();
                        if cover & bits != 0 {
                            return false;
                        }
                        cover |= bits;
                    }
                }
                true
            })
            .collect();
        let pow3 = (0..=e).map(|i| 3usize.pow(i as u32)).collect();
        Ok(Small { m, edges, pms, pow3 })
    }

    fn index(&self, red: u32, blue: u32) -> usize {
        (0..self.edges.len())
            .map(|i| self.pow3[i] * if red >> i & 1 == 1 { 1 } else if blue >> i & 1 == 1 { 2 } else { 0 })
            .sum()
    }

    fn has_pm(&self, mask: u32) -> bool {
        self.pms.iter().any(|&pm| pm & mask == pm)
    }

    /// The solver's terminal test.
    fn terminal(&self, red: u32, blue: u32) -> Option<GameValue> {
        if self.has_pm(red) {
            Some(GameValue::RedWin)
        } else if self.has_pm(blue) {
            Some(GameValue::BlueWin)
        } else if (red | blue).count_ones() as usize == self.edges.len() {
            Some(GameValue::Draw)
        } else {
            None
        }
    }
}

const UNKNOWN: u8 = u8::MAX;

fn encode(v: GameValue) -> u8 {
    v as u8
}

fn decode(b: u8) -> GameValue {
    match b {
        0 => GameValue::BlueWin,
        1 => GameValue::Draw,
        _ => GameValue::RedWin,
    }
}

fn value(s: &Small, memo: &mut [u8], red: u32, blue: u32, explored: &mut usize) -> GameValue {
    let idx = s.index(red, blue);
    if memo[idx] != UNKNOWN {
        return decode(memo[idx]);
    }
    *explored += 1;
    let v = match s.terminal(red, blue) {
        Some(v) => v,
        None => {
            let red_to_move = red.count_ones() == blue.count_ones();
            let free = !(red | blue) & ((1u32 << s.edges.len()) - 1);
            let mut best = if red_to_move { GameValue::BlueWin } else { GameValue::RedWin };
            let mut bits = free;
            while bits != 0 {
                let b = bits & bits.wrapping_neg();
                bits &= bits - 1;
                let child = if red_to_move { value(s, memo, red | b, blue, explored) } else { value(s, memo, red, blue | b, explored) };
                if red_to_move {
                    best = best.max(child);
                    if best == GameValue::RedWin {
                        break;
                    }
                } else {
                    best = best.min(child);
                    if best == GameValue::BlueWin {
                        break;
                    }
                }
            }
            best
        }
    };
    memo[idx] = encode(v);
    v
}

/// Game value of the strong game on `K_m` with Red moving first.
pub fn solve_small_strong_game(m: usize) -> Result<Solution, SolverError> {
    let s = Small::new(m)?;
    let mut memo = vec![UNKNOWN; s.pow3[s.edges.len()]];
    let mut positions = 0;
    let value = value(&s, &mut memo, 0, 0, &mut positions);
    Ok(Solution { m: s.m, value, positions })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub positions: usize,
    pub terminal_positions: usize,
    pub disagreements: Vec<String>,
}

/// Walks every position reachable in play on `K_m` and compares the
/// solver's terminal test with the referee's: a board plus incremental
/// maximum matchings, ending the game on the first perfect matching or
/// when no edge is free.
pub fn referee_agreement(m: usize) -> Result<AgreementReport, SolverError> {
    let s = Small::new(m)?;
    let graph = Arc::new(Graph::complete(m));
    let mut seen = vec![false; s.pow3[s.edges.len()]];
    let mut rep = AgreementReport::default();

    struct Ref {
        board: Board,
        red: IncrementalMatching,
        blue: IncrementalMatching,
    }

    fn referee_label(r: &Ref) -> Option<GameValue> {
        if r.red.is_perfect() {
            Some(GameValue::RedWin)
        } else if r.blue.is_perfect() {
            Some(GameValue::BlueWin)
        } else if r.board.free_count() == 0 {
            Some(GameValue::Draw)
        } else {
            None
        }
    }

    fn walk(s: &Small, seen: &mut [bool], r: &Ref, red: u32, blue: u32, rep: &mut AgreementReport) {
        let idx = s.index(red, blue);
        if seen[idx] {
            return;
        }
        seen[idx] = true;
        rep.positions += 1;
        let ours = s.terminal(red, blue);
        let theirs = referee_label(r);
        if ours != theirs {
            rep.disagreements.push(format!("red {red:#b} blue {blue:#b}: solver {ours:?}, referee {theirs:?}"));
        }
        if ours.is_some() {
            rep.terminal_positions += 1;
            return;
        }
        let mover = r.board.to_move();
        for (i, &e) in s.edges.iter().enumerate() {
            let b = 1u32 << i;
            if (red | blue) & b != 0 {
                continue;
            }
            let mut next = Ref { board: r.board.clone(), red: r.red.clone(), blue: r.blue.clone() };
            next.board.play(mover, e).expect("free edge");
            match mover {
                Player::Red => {
                    next.red.insert(e);
                    walk(s, seen, &next, red | b, blue, rep);
                }
                Player::Blue => {
                    next.blue.insert(e);
                    walk(s, seen, &next, red, blue | b, rep);
                }
            }
        }
    }

    let root = Ref { board: Board::new(graph), red: IncrementalMatching::new(m), blue: IncrementalMatching::new(m) };
    walk(&s, &mut seen, &root, 0, 0, &mut rep);
    Ok(rep)
}
