//! Fallback search for finishing a perfect matching of a small clique once
//! a staged plan cannot continue.
//!
//! Takes a completing edge if there is one, then a move from the exact
//! three-move search; otherwise prefers an edge after
//! which two or more different edges would complete (Blue can block only
//! one); otherwise the edge with the largest matching gain and the most
//! follow-ups.

use crate::board::{Board, Player};
use crate::error::StrategyError;
use crate::graph::{Edge, Vertex};
use crate::matching::matching_number;
use crate::strategy::{forced_finish, free_edges_within, Stage, Step};

/// Above this many candidate edges the two-ply count is skipped.
const LOOKAHEAD_LIMIT: usize = 160;

fn nu_with(red: &[Edge], extra: &[Edge]) -> usize {
    let mut all = red.to_vec();
    all.extend_from_slice(extra);
    matching_number(&all)
}

pub fn finisher_next(board: &Board, target: &[Vertex]) -> Result<Step, StrategyError> {
    let red = board.edges_within(Player::Red, target);
    let need = target.len() / 2;
    let nu = matching_number(&red);
    let cands = free_edges_within(board, target);
    if cands.is_empty() {
        return Err(StrategyError::NoLegalMove(format!("no free edge inside a {}-vertex target", target.len())));
    }
    let gains: Vec<usize> = cands.iter().map(|&f| nu_with(&red, &[f]) - nu).collect();
    if let Some(i) = (0..cands.len()).find(|&i| nu + gains[i] == need) {
        return Ok(Step::new(cands[i], Stage::Fallback));
    }
    if let Some((e, _)) = forced_finish(board, target, 3) {
        return Ok(Step::new(e, Stage::Fallback));
    }

    let lookahead = cands.len() <= LOOKAHEAD_LIMIT;
    let mut best: Option<((usize, usize, usize), Edge)> = None;
    for (i, &f) in cands.iter().enumerate() {
        let after = nu + gains[i];
        let (threats, follow) = if lookahead {
            let mut threats = 0;
            let mut follow = 0;
            for &g in &cands {
                if g == f {
                    continue;
                }
                let v = nu_with(&red, &[f, g]);
                if v == need {
                    threats += 1;
                }
                if v > after {
                    follow += 1;
                }
            }
            (threats.min(2), follow)
        } else {
            (0, 0)
        };
        let key = (threats, gains[i], follow);
        if best.is_none_or(|(bk, _)| key > bk) {
            best = Some((key, f));
        }
    }
    Ok(Step::new(best.unwrap().1, Stage::Fallback))
}
