//! Playouts of the single-board strategies against local opponents, with
//! the invariant checks the test suite and acceptance run rely on.

use std::sync::Arc;

use crate::board::{Board, Player};
use crate::error::StrategyError;
use crate::graph::{Edge, Graph, Vertex};
use crate::rng::{self, GameRng};
use crate::strategy::astrong::{astrong_next, AStrongState, HView};
use crate::strategy::weak::{sweak_next, weak_complete, WeakState};
use crate::strategy::{count_h_distinct, free_edges_within, red_free, red_has_pm, wasted_within, Stage};

/// A Blue move generator for a single-board playout. Gets the board and
/// `H`; `None` means Blue passes (only used when nothing is free).
pub type LocalBlue<'a> = Box<dyn FnMut(&Board, &[Vertex]) -> Option<Edge> + 'a>;

fn all_free(board: &Board) -> Vec<Edge> {
    board.graph().edges().filter(|&e| board.is_free_edge(e)).collect()
}

fn pick(r: &mut GameRng, v: &[Edge]) -> Option<Edge> {
    (!v.is_empty()).then(|| v[rng::index(r, v.len())])
}

/// Free edges that would complete Red's perfect matching of `h`.
pub fn completing_edges(board: &Board, h: &[Vertex]) -> Vec<Edge> {
    let red = board.edges_within(Player::Red, h);
    free_edges_within(board, h)
        .into_iter()
        .filter(|&f| {
            let mut r = red.clone();
            r.push(f);
            crate::matching::has_perfect_matching_of(&r, h).unwrap_or(false)
        })
        .collect()
}

pub fn random_blue<'a>(seed: u64) -> LocalBlue<'a> {
    let mut r = rng::rng_from_seed(seed);
    Box::new(move |b: &Board, _h: &[Vertex]| pick(&mut r, &all_free(b)))
}

/// Blocks a completing edge if Red has one, otherwise joins two clean
/// Red-uncovered vertices of `H` (making two distinct vertices at once).
pub fn blocker_blue<'a>(seed: u64) -> LocalBlue<'a> {
    let mut r = rng::rng_from_seed(seed);
    Box::new(move |b: &Board, h: &[Vertex]| {
        if let Some(&e) = completing_edges(b, h).first() {
            return Some(e);
        }
        let clean: Vec<Vertex> = red_free(b, h).into_iter().filter(|&v| b.degree_within(Player::Blue, v, h) == 0).collect();
        pick(&mut r, &free_edges_within(b, &clean)).or_else(|| pick(&mut r, &all_free(b)))
    })
}

/// Plays away from `H` until Red is about to finish, then blocks every
/// completing edge it can: the `xy`, `xv`, `wy` line of Stage III.
pub fn late_blocker_blue<'a>(seed: u64) -> LocalBlue<'a> {
    let mut r = rng::rng_from_seed(seed);
    Box::new(move |b: &Board, h: &[Vertex]| {
        if let Some(&e) = completing_edges(b, h).first() {
            return Some(e);
        }
        let outside: Vec<Edge> = all_free(b).into_iter().filter(|e| !(h.contains(&e.u()) && h.contains(&e.v()))).collect();
        pick(&mut r, &outside).or_else(|| pick(&mut r, &all_free(b)))
    })
}

/// Grows a Blue star at an uncovered vertex of `H`, which forces Stage M.
pub fn star_blue<'a>(seed: u64) -> LocalBlue<'a> {
    let mut r = rng::rng_from_seed(seed);
    Box::new(move |b: &Board, h: &[Vertex]| {
        let free = red_free(b, h);
        let hub = free.iter().copied().max_by_key(|&v| (b.degree_within(Player::Blue, v, h), std::cmp::Reverse(v)));
        if let Some(c) = hub {
            let spokes: Vec<Edge> = free.iter().filter(|&&w| w != c && b.is_free(c, w)).map(|&w| Edge::new(c, w)).collect();
            if let Some(e) = pick(&mut r, &spokes) {
                return Some(e);
            }
        }
        pick(&mut r, &all_free(b))
    })
}

/// Plays only edges outside `E(H)`.
pub fn quiet_blue<'a>(seed: u64) -> LocalBlue<'a> {
    let mut r = rng::rng_from_seed(seed);
    Box::new(move |b: &Board, h: &[Vertex]| {
        let outside: Vec<Edge> = all_free(b).into_iter().filter(|e| !(h.contains(&e.u()) && h.contains(&e.v()))).collect();
        pick(&mut r, &outside)
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LemmaReport {
    pub red_moves: usize,
    pub red_wasted: usize,
    pub blue_wasted: usize,
    pub completed: bool,
    /// Stage-II positions checked for the distinct invariant.
    pub checked_positions: usize,
    pub violations: Vec<String>,
    pub stages: Vec<Stage>,
}

impl LemmaReport {
    pub fn fallback_moves(&self) -> usize {
        self.stages.iter().filter(|&&s| s == Stage::Fallback).count()
    }
}

/// Plays the staged strategy on `H = {0..m-1}` inside `K_{m+extra}` after
/// Blue's `setup` edges, until Red owns a perfect matching of `H`.
pub fn lemma_playout(m: usize, extra: usize, setup: &[Edge], blue: &mut LocalBlue<'_>) -> Result<LemmaReport, StrategyError> {
    let mut board = Board::new(Arc::new(Graph::complete(m + extra)));
    for &e in setup {
        board.claim(Player::Blue, e).map_err(|e| StrategyError::PreconditionViolated(e.to_string()))?;
    }
    let h: Vec<Vertex> = (0..m as Vertex).collect();
    let mut st = AStrongState::new(HView::new(h.clone()));
    let mut rep = LemmaReport::default();
    let mut seen_one = false;
    let cap = m + 8;
    while !red_has_pm(&board, &h) {
        if rep.red_moves >= cap {
            return Ok(rep);
        }
        let s = astrong_next(&board, &mut st)?;
        board.claim(Player::Red, s.edge).map_err(|e| StrategyError::NoLegalMove(e.to_string()))?;
        rep.red_moves += 1;
        rep.stages.push(s.stage);
        if matches!(s.stage, Stage::I | Stage::II) {
            rep.checked_positions += 1;
            let red = board.edges_within(Player::Red, &h);
            let is_matching = h.iter().all(|&v| board.degree_within(Player::Red, v, &h) <= 1);
            if !is_matching || red.len() != rep.red_moves {
                rep.violations.push(format!("after Red move {}: {} Red edges, matching = {is_matching}", rep.red_moves, red.len()));
            }
            let d = count_h_distinct(&board, &h);
            if d > 1 {
                rep.violations.push(format!("after Red move {}: {d} distinct vertices", rep.red_moves));
            }
            if seen_one && d != 1 {
                rep.violations.push(format!("after Red move {}: distinct count fell to {d}", rep.red_moves));
            }
            seen_one |= d == 1;
        }
        if red_has_pm(&board, &h) {
            break;
        }
        if let Some(e) = blue(&board, &h) {
            board.claim(Player::Blue, e).map_err(|e| StrategyError::NoLegalMove(format!("blue: {e}")))?;
        }
    }
    rep.completed = true;
    rep.red_wasted = wasted_within(&board, Player::Red, &h);
    let everything: Vec<Vertex> = (0..(m + extra) as Vertex).collect();
    rep.blue_wasted = wasted_within(&board, Player::Blue, &everything);
    Ok(rep)
}

/// Maker-first weak game on `K_m`; returns Maker's move count.
pub fn weak_playout(m: usize, blue: &mut LocalBlue<'_>) -> Result<usize, StrategyError> {
    let mut board = Board::new(Arc::new(Graph::complete(m)));
    let h: Vec<Vertex> = (0..m as Vertex).collect();
    let mut st = WeakState::new(h.clone());
    let mut moves = 0;
    loop {
        let s = sweak_next(&board, &mut st)?;
        board.claim(Player::Red, s.edge).map_err(|e| StrategyError::NoLegalMove(e.to_string()))?;
        moves += 1;
        if finished(&board, &st, m) {
            return Ok(moves);
        }
        if let Some(e) = blue(&board, &h) {
            board.claim(Player::Blue, e).map_err(|e| StrategyError::NoLegalMove(format!("blue: {e}")))?;
        }
    }
}

fn finished(board: &Board, st: &WeakState, m: usize) -> bool {
    if m % 2 == 0 {
        weak_complete(board, st)
    } else {
        st.done
    }
}

/// Largest Maker move count over every Breaker line on `K_m`.
pub fn weak_exhaustive(m: usize) -> Result<usize, String> {
    fn go(board: &Board, st: &WeakState, m: usize, moves: usize) -> Result<usize, String> {
        let mut b = board.clone();
        let mut st = st.clone();
        let s = sweak_next(&b, &mut st).map_err(|e| format!("{e} after {:?}", b.history()))?;
        b.claim(Player::Red, s.edge).map_err(|e| e.to_string())?;
        let moves = moves + 1;
        if finished(&b, &st, m) {
            return Ok(moves);
        }
        let mut worst = moves;
        let free = all_free(&b);
        if free.is_empty() {
            return Err(format!("board exhausted after {:?}", b.history()));
        }
        for e in free {
            let mut bb = b.clone();
            bb.claim(Player::Blue, e).unwrap();
            worst = worst.max(go(&bb, &st, m, moves)?);
        }
        Ok(worst)
    }
    let board = Board::new(Arc::new(Graph::complete(m)));
    go(&board, &WeakState::new((0..m as Vertex).collect()), m, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_six() {
        assert_eq!(weak_exhaustive(6), Ok(4));
    }

    #[test]
    fn quiet_lemma_run() {
        let rep = lemma_playout(16, 2, &[Edge::new(2, 9)], &mut quiet_blue(1)).unwrap();
        assert_eq!(rep.red_moves, 8);
        assert_eq!(rep.red_wasted, 0);
        assert!(rep.violations.is_empty());
    }
}
