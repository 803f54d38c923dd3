//! Maker's fast strategy for the weak perfect matching game on a clique.
//!
//! Red first builds a cherry `a–c–b` (one deliberate spare move), then
//! matches the remaining uncovered vertices two at a time. The last
//! uncovered vertex `x` is joined to `a` or `b`, whichever is free: with `c`
//! matched to the other leaf either choice completes the matching, so Blue
//! cannot block both. Matching moves keep at most one "marked" vertex, one
//! with a Blue edge to another uncovered vertex or to a leaf, and cover
//! marked vertices first, so the final `x` always has both leaf edges free.
//!
//! On an even clique this takes `m/2+1` moves for `m ≥ 6`; on an odd clique
//! the plan skips the cherry and leaves one vertex uncovered after
//! `⌊m/2⌋` moves. The cherry base can be borrowed from an existing Red
//! edge, which saves the first move.

use crate::board::{Board, Player};
use crate::error::StrategyError;
use crate::graph::{Edge, Vertex};
use crate::strategy::{contains, free_edges_within, red_has_pm, sorted, Stage, Step};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cherry {
    pub center: Vertex,
    pub leaves: [Vertex; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakState {
    /// Vertex set whose perfect matching is the goal.
    pub target: Vec<Vertex>,
    /// Vertices this plan still has to cover.
    pub scope: Vec<Vertex>,
    /// Red edges that may serve as the cherry base.
    pub base_pool: Vec<Edge>,
    pub base: Option<Edge>,
    pub cherry: Option<Cherry>,
    pub moves: usize,
    pub done: bool,
}

impl WeakState {
    /// Fresh plan on a clique with no Red edges.
    pub fn new(h: Vec<Vertex>) -> Self {
        let h = sorted(h);
        WeakState { target: h.clone(), scope: h, base_pool: Vec::new(), base: None, cherry: None, moves: 0, done: false }
    }

    /// Plan covering `scope` inside `target`, where the rest of `target` is
    /// already matched by Red and any edge of `pool` may be the cherry base.
    pub fn borrowing(target: Vec<Vertex>, scope: Vec<Vertex>, pool: Vec<Edge>) -> Self {
        WeakState {
            target: sorted(target),
            scope: sorted(scope),
            base_pool: pool,
            base: None,
            cherry: None,
            moves: 0,
            done: false,
        }
    }

    fn uncovered(&self, board: &Board) -> Vec<Vertex> {
        self.scope
            .iter()
            .copied()
            .filter(|&v| board.degree_within(Player::Red, v, &self.target) == 0)
            .collect()
    }
}

/// `(marked, bad)` for the uncovered set `f` once `leaves` are fixed: a
/// vertex is marked if it has a Blue edge into `f ∪ leaves`, bad if into
/// `leaves`.
fn score(board: &Board, f: &[Vertex], leaves: &[Vertex]) -> (usize, usize) {
    let mut marked = 0;
    let mut bad = 0;
    for &v in f {
        let nb = board.neighbors(Player::Blue, v);
        let to_leaf = nb.iter().any(|w| leaves.contains(w));
        if to_leaf {
            bad += 1;
        }
        if to_leaf || nb.iter().any(|&w| w != v && contains(f, w)) {
            marked += 1;
        }
    }
    (marked, bad)
}

fn without(f: &[Vertex], drop: &[Vertex]) -> Vec<Vertex> {
    f.iter().copied().filter(|v| !drop.contains(v)).collect()
}

/// Best matching move inside `f`.
fn matching_move(board: &Board, f: &[Vertex], leaves: &[Vertex]) -> Option<Edge> {
    free_edges_within(board, f)
        .into_iter()
        .min_by_key(|e| (score(board, &without(f, &[e.u(), e.v()]), leaves), *e))
}

/// Best cherry `(center, other leaf, new leaf)` over the given base edges.
fn best_cherry(board: &Board, f: &[Vertex], bases: &[Edge]) -> Option<((usize, usize), Edge, Cherry)> {
    let mut best: Option<((usize, usize), Edge, Cherry)> = None;
    for &base in bases {
        for (c, a) in [(base.u(), base.v()), (base.v(), base.u())] {
            for &b in f {
                if b == c || b == a || !board.is_free(c, b) {
                    continue;
                }
                let s = score(board, &without(f, &[b, c, a]), &[a, b]);
                let ch = Cherry { center: c, leaves: [a, b] };
                let key = (s, Edge::new(c, b));
                if best.as_ref().is_none_or(|(bs, be, _)| key < (*bs, *be)) {
                    best = Some((s, Edge::new(c, b), ch));
                }
            }
        }
    }
    best
}

/// Next Maker move. Every returned edge is free; the state assumes it is
/// claimed before the next call.
pub fn sweak_next(board: &Board, st: &mut WeakState) -> Result<Step, StrategyError> {
    if st.done {
        return Err(StrategyError::NoLegalMove("weak plan already finished".into()));
    }
    let f = st.uncovered(board);
    let step = weak_move(board, st, &f)?;
    st.moves += 1;
    Ok(Step::new(step, Stage::Weak))
}

fn weak_move(board: &Board, st: &mut WeakState, f: &[Vertex]) -> Result<Edge, StrategyError> {
    let exhausted = || StrategyError::NoLegalMove("every edge the weak plan needs is taken".into());

    if let Some(ch) = st.cherry {
        let f = without(f, &[ch.center, ch.leaves[0], ch.leaves[1]]);
        return match f.len() {
            0 => Err(StrategyError::Parity("cherry plan has no vertex left".into())),
            1 => {
                let x = f[0];
                let e = ch.leaves.iter().copied().find(|&l| board.is_free(x, l)).map(|l| Edge::new(x, l)).ok_or_else(exhausted)?;
                st.done = true;
                Ok(e)
            }
            _ => matching_move(board, &f, &ch.leaves).ok_or_else(exhausted),
        };
    }

    // Two vertices left and their edge finishes the target: take it.
    if f.len() == 2 && board.is_free(f[0], f[1]) {
        let e = Edge::new(f[0], f[1]);
        let mut red = board.edges_within(Player::Red, &st.target);
        red.push(e);
        if crate::matching::has_perfect_matching_of(&red, &st.target).unwrap_or(false) {
            st.done = true;
            return Ok(e);
        }
    }

    if f.len() % 2 == 1 && st.base.is_none() && st.base_pool.is_empty() {
        if f.len() < 3 {
            return Err(StrategyError::Parity("odd plan has nothing left to match".into()));
        }
        let e = matching_move(board, f, &[]).ok_or_else(exhausted)?;
        if f.len() == 3 {
            st.done = true;
        }
        return Ok(e);
    }

    if st.base.is_none() && st.base_pool.is_empty() {
        // First move: the base edge whose best follow-up cherry is cleanest.
        let mut best: Option<((usize, usize), Edge)> = None;
        for e in free_edges_within(board, f) {
            let s = best_cherry(board, f, &[e]).map_or((usize::MAX, usize::MAX), |x| x.0);
            if best.is_none_or(|(bs, be)| (s, e) < (bs, be)) {
                best = Some((s, e));
            }
        }
        let (_, e) = best.ok_or_else(exhausted)?;
        st.base = Some(e);
        return Ok(e);
    }

    let bases: Vec<Edge> = st.base.iter().copied().chain(st.base_pool.iter().copied()).filter(|&e| board.owned_by(e) == Some(Player::Red)).collect();
    let (_, e, ch) = best_cherry(board, f, &bases).ok_or_else(exhausted)?;
    st.base = Some(Edge::new(ch.center, ch.leaves[0]));
    st.cherry = Some(ch);
    Ok(e)
}

/// True once Red owns a perfect matching of the plan's target.
pub fn weak_complete(board: &Board, st: &WeakState) -> bool {
    red_has_pm(board, &st.target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use std::sync::Arc;

    fn kboard(m: usize) -> Board {
        Board::new(Arc::new(Graph::complete(m)))
    }

    #[test]
    fn two_vertices_take_the_edge() {
        let mut b = kboard(2);
        let mut st = WeakState::new(vec![0, 1]);
        let s = sweak_next(&b, &mut st).unwrap();
        assert_eq!(s.edge, Edge::new(0, 1));
        b.claim(Player::Red, s.edge).unwrap();
        assert!(st.done && weak_complete(&b, &st));
    }

    #[test]
    fn quiet_opponent_six() {
        let mut b = kboard(6);
        let mut st = WeakState::new((0..6).collect());
        let mut n = 0;
        while !weak_complete(&b, &st) {
            let s = sweak_next(&b, &mut st).unwrap();
            b.claim(Player::Red, s.edge).unwrap();
            n += 1;
        }
        assert_eq!(n, 4);
    }

    #[test]
    fn final_vertex_double_threat() {
        // Cherry 1-0-2, uncovered {3}: Blue has 3-1, so Red must take 3-2.
        let mut b = kboard(4);
        for e in [(0, 1), (0, 2)] {
            b.claim(Player::Red, Edge::new(e.0, e.1)).unwrap();
        }
        b.claim(Player::Blue, Edge::new(1, 3)).unwrap();
        let mut st = WeakState::new((0..4).collect());
        st.base = Some(Edge::new(0, 1));
        st.cherry = Some(Cherry { center: 0, leaves: [1, 2] });
        let s = sweak_next(&b, &mut st).unwrap();
        assert_eq!(s.edge, Edge::new(2, 3));
        b.claim(Player::Red, s.edge).unwrap();
        assert!(weak_complete(&b, &st));
    }

    #[test]
    fn borrowed_base_covers_two_left() {
        // Target 0..6 with Red matching 0-1, 2-3; scope {4,5}; 4-5 blocked.
        let mut b = kboard(6);
        b.claim(Player::Red, Edge::new(0, 1)).unwrap();
        b.claim(Player::Red, Edge::new(2, 3)).unwrap();
        b.claim(Player::Blue, Edge::new(4, 5)).unwrap();
        let mut st = WeakState::borrowing((0..6).collect(), vec![4, 5], vec![Edge::new(0, 1), Edge::new(2, 3)]);
        let mut n = 0;
        while !weak_complete(&b, &st) {
            let s = sweak_next(&b, &mut st).unwrap();
            b.claim(Player::Red, s.edge).unwrap();
            n += 1;
        }
        assert_eq!(n, 2);
    }

    #[test]
    fn odd_clique_leaves_one() {
        let mut b = kboard(7);
        let mut st = WeakState::new((0..7).collect());
        let mut n = 0;
        while !st.done {
            let s = sweak_next(&b, &mut st).unwrap();
            b.claim(Player::Red, s.edge).unwrap();
            n += 1;
        }
        assert_eq!(n, 3);
    }
}
