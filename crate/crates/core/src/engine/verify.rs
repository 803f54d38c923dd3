//! Transcript verification by replay.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::board::Player;
use crate::engine::transcript::{header_digest, move_digest, Ending, Transcript};
use crate::engine::Game;
use crate::error::AdversaryError;
use crate::matching::max_matching;
use crate::partition::Partition;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub issues: Vec<String>,
    pub plies_checked: usize,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Parses and verifies JSON-lines text.
pub fn verify_jsonl(text: &str) -> VerifyReport {
    match Transcript::from_jsonl(text) {
        Ok(tr) => verify_transcript(&tr),
        Err(e) => VerifyReport { issues: vec![format!("parse: {e}")], plies_checked: 0 },
    }
}

/// Replays `tr` from its header: checks the digest chain, turn order and
/// legality, re-runs Red against the recorded Blue moves and compares every
/// record, then recomputes the result and checks it against a
/// from-scratch matching oracle.
pub fn verify_transcript(tr: &Transcript) -> VerifyReport {
    let mut rep = VerifyReport::default();
    let mut chain = header_digest(&tr.header);
    for m in &tr.moves {
        let d = move_digest(&chain, m);
        if d != m.digest {
            rep.issues.push(format!("ply {}: digest mismatch", m.ply));
            break;
        }
        chain = d;
    }

    let graph = match Game::graph_of(&tr.header) {
        Ok(g) => Arc::new(g),
        Err(e) => {
            rep.issues.push(e.to_string());
            return rep;
        }
    };
    if graph.n() != tr.header.n {
        rep.issues.push(format!("graph has {} vertices, header says {}", graph.n(), tr.header.n));
        return rep;
    }
    let part = match Partition::from_json(&tr.header.partition) {
        Ok(p) => p,
        Err(e) => {
            rep.issues.push(e.to_string());
            return rep;
        }
    };
    let mut game = match Game::new(graph.clone(), &part, tr.header.clone()) {
        Ok(g) => g,
        Err(e) => {
            rep.issues.push(e.to_string());
            return rep;
        }
    };

    for (i, m) in tr.moves.iter().enumerate() {
        if m.ply != i + 1 {
            rep.issues.push(format!("ply {} recorded at position {}", m.ply, i + 1));
            return rep;
        }
        let expected = if i % 2 == 0 { Player::Red } else { Player::Blue };
        if m.mover != expected {
            rep.issues.push(format!("ply {}: {} moved out of turn", m.ply, m.mover));
            return rep;
        }
        if game.is_over() {
            rep.issues.push(format!("ply {}: move after the game ended", m.ply));
            return rep;
        }
        let replayed = match m.mover {
            Player::Red => match game.red_turn() {
                Ok(Some(r)) => r.clone(),
                Ok(None) => {
                    rep.issues.push(format!("ply {}: red forfeits on replay", m.ply));
                    return rep;
                }
                Err(e) => {
                    rep.issues.push(format!("ply {}: {e}", m.ply));
                    return rep;
                }
            },
            Player::Blue => match game.blue_turn(m.edge) {
                Ok(r) => r.clone(),
                Err(e) => {
                    rep.issues.push(format!("ply {}: legality: {e}", m.ply));
                    return rep;
                }
            },
        };
        rep.plies_checked += 1;
        if replayed.edge != m.edge {
            rep.issues.push(format!("ply {}: red plays {} on replay, transcript has {}", m.ply, replayed.edge, m.edge));
            return rep;
        }
        if replayed.wasted != m.wasted {
            rep.issues.push(format!("ply {}: wasted flag mismatch", m.ply));
        }
        if replayed.annotation != m.annotation || replayed.board != m.board || replayed.ledger_flip != m.ledger_flip {
            rep.issues.push(format!("ply {}: annotation mismatch", m.ply));
        }
        if replayed.digest != m.digest && rep.issues.is_empty() {
            rep.issues.push(format!("ply {}: digest mismatch on replay", m.ply));
        }
    }

    if !game.is_over() {
        match tr.result.ending {
            Ending::Resigned => game.resign(if tr.result.winner.is_player(Player::Red) { Player::Blue } else { Player::Red }),
            Ending::Aborted => game.abort(&AdversaryError::Disconnected),
            _ => {}
        }
    }
    let Some(res) = game.result().cloned() else {
        rep.issues.push("transcript ends before the game does".into());
        return rep;
    };
    let mut expect = tr.result.clone();
    if res.ending == Ending::Aborted {
        expect.detail = res.detail.clone();
    }
    if res.winner != tr.result.winner || res.ending != tr.result.ending {
        rep.issues.push(format!("result mismatch: replay gives {:?}/{:?}", res.winner, res.ending));
    }
    if res.red_moves != tr.result.red_moves || res.blue_moves != tr.result.blue_moves {
        rep.issues.push("move counts mismatch".into());
    }
    if res.red_wasted_total != tr.result.red_wasted_total || res.blue_wasted_total != tr.result.blue_wasted_total {
        rep.issues.push("wasted totals mismatch".into());
    }
    if res.per_board_ledgers != tr.result.per_board_ledgers {
        rep.issues.push("per-board ledger mismatch".into());
    }
    if res.budget != tr.result.budget || res.fallback_moves != tr.result.fallback_moves || res.detail != expect.detail {
        rep.issues.push("result fields mismatch".into());
    }

    // Independent oracle on the final position.
    let n = tr.header.n;
    for p in [Player::Red, Player::Blue] {
        let edges: Vec<_> = tr.moves.iter().filter(|m| m.mover == p).map(|m| m.edge).collect();
        let nu = max_matching(n, &edges).len();
        let total = if p == Player::Red { tr.result.red_wasted_total } else { tr.result.blue_wasted_total };
        if edges.len() - nu != total {
            rep.issues.push(format!("{p} wasted total disagrees with the matching oracle"));
        }
        let flags = tr.moves.iter().filter(|m| m.mover == p && m.wasted).count();
        if flags != total {
            rep.issues.push(format!("{p} wasted flags sum to {flags}, total is {total}"));
        }
        let perfect = 2 * nu == n;
        let won = tr.result.ending == Ending::Matching && tr.result.winner.is_player(p);
        if perfect != won {
            rep.issues.push(format!("{p} perfect matching = {perfect} but winner is {:?}", tr.result.winner));
        }
        if won {
            let before = max_matching(n, &edges[..edges.len() - 1]).len();
            if 2 * before == n {
                rep.issues.push(format!("{p} already had a perfect matching before the last ply"));
            }
        }
    }
    rep
}

impl crate::engine::transcript::Winner {
    fn is_player(self, p: Player) -> bool {
        use crate::engine::transcript::Winner;
        matches!((self, p), (Winner::Red, Player::Red) | (Winner::Blue, Player::Blue))
    }
}
