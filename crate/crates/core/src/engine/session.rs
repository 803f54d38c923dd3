//! Line-delimited JSON sessions over TCP where the remote party plays Blue.
//!
//! Client messages: `new_game`, `move`, `resign`, `probe`. Server messages:
//! `state`, `probe`, `error`, `game_over`. One game per session at a time;
//! a connection is dropped after `max_errors` consecutive errors. The
//! message fields are documented in `docs/protocol.md`.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::adversary::AdversaryKind;
use crate::board::Player;
use crate::engine::transcript::{GameConfig, Header, MoveRecord, Versions};
use crate::engine::{EngineError, Game};
use crate::graph::{sample_gnp, Edge, Vertex};
use crate::partition::{partition_with_retries, PartitionConfig};
use crate::rng::{derive_seed, stream};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub max_n: usize,
    pub max_errors: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { max_n: 4096, max_errors: 5 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum ClientMsg {
    NewGame {
        n: usize,
        p: f64,
        seed: u64,
        #[serde(default)]
        clique_size: Option<usize>,
        #[serde(default)]
        min_subboard_size: Option<usize>,
    },
    Move {
        edge: [Vertex; 2],
    },
    Resign,
    Probe {
        edge: [Vertex; 2],
    },
}

pub mod codes {
    pub const ILLEGAL_MOVE: &str = "ILLEGAL_MOVE";
    pub const NO_GAME: &str = "NO_GAME";
    pub const BAD_MESSAGE: &str = "BAD_MESSAGE";
    pub const GAME_OVER: &str = "GAME_OVER";
    pub const BAD_CONFIG: &str = "BAD_CONFIG";
    pub const TOO_MANY_ERRORS: &str = "TOO_MANY_ERRORS";
}

/// One connection's state, independent of the transport.
pub struct Session {
    cfg: SessionConfig,
    game: Option<Game>,
    /// Records already sent to the client.
    sent: usize,
    errors: usize,
}

fn error(code: &str, message: impl Into<String>) -> Value {
    json!({"type": "error", "code": code, "message": message.into()})
}

impl Session {
    pub fn new(cfg: SessionConfig) -> Self {
        Session { cfg, game: None, sent: 0, errors: 0 }
    }

    /// The session has seen too many consecutive errors and must close.
    pub fn should_close(&self) -> bool {
        self.errors >= self.cfg.max_errors
    }

    pub fn game(&self) -> Option<&Game> {
        self.game.as_ref()
    }

    /// Handles one client line and returns the server's replies.
    pub fn handle(&mut self, line: &str) -> Vec<Value> {
        let out = match serde_json::from_str::<ClientMsg>(line) {
            Ok(msg) => self.dispatch(msg),
            Err(e) => vec![error(codes::BAD_MESSAGE, e.to_string())],
        };
        if out.iter().any(|v| v["type"] == "error") {
            self.errors += 1;
            if self.should_close() {
                let mut out = out;
                out.push(error(codes::TOO_MANY_ERRORS, format!("{} consecutive errors, closing", self.errors)));
                return out;
            }
        } else {
            self.errors = 0;
        }
        out
    }

    fn dispatch(&mut self, msg: ClientMsg) -> Vec<Value> {
        match msg {
            ClientMsg::NewGame { n, p, seed, clique_size, min_subboard_size } => self.new_game(n, p, seed, clique_size, min_subboard_size),
            ClientMsg::Move { edge } => {
                let Some(game) = self.game.as_mut() else {
                    return vec![error(codes::NO_GAME, "no game in progress")];
                };
                if game.is_over() {
                    return vec![error(codes::GAME_OVER, "the game is over")];
                }
                let e = match Edge::try_new(edge[0], edge[1]) {
                    Ok(e) if (e.v() as usize) < game.board.n() => e,
                    _ => return vec![error(codes::ILLEGAL_MOVE, format!("{edge:?} is not an edge"))],
                };
                if let Err(err) = game.blue_turn(e) {
                    return vec![error(codes::ILLEGAL_MOVE, err.to_string())];
                }
                if !game.is_over() {
                    let _ = game.red_turn();
                }
                self.after_ply()
            }
            ClientMsg::Resign => {
                let Some(game) = self.game.as_mut() else {
                    return vec![error(codes::NO_GAME, "no game in progress")];
                };
                if game.is_over() {
                    return vec![error(codes::GAME_OVER, "the game is over")];
                }
                game.resign(Player::Blue);
                self.after_ply()
            }
            ClientMsg::Probe { edge } => {
                let Some(game) = self.game.as_ref() else {
                    return vec![error(codes::NO_GAME, "no game in progress")];
                };
                let e = match Edge::try_new(edge[0], edge[1]) {
                    Ok(e) if (e.v() as usize) < game.board.n() => e,
                    _ => return vec![error(codes::BAD_MESSAGE, format!("{edge:?} is not a vertex pair"))],
                };
                let free = game.board.is_free_edge(e);
                vec![json!({
                    "type": "probe",
                    "edge": e,
                    "free": free,
                    "wasted": free && game.would_waste(Player::Blue, e),
                })]
            }
        }
    }

    fn new_game(&mut self, n: usize, p: f64, seed: u64, clique_size: Option<usize>, min_sub: Option<usize>) -> Vec<Value> {
        if n == 0 || n > self.cfg.max_n || n % 2 == 1 || !(0.0..=1.0).contains(&p) {
            return vec![error(codes::BAD_CONFIG, format!("need even 0 < n ≤ {} and p in [0,1]", self.cfg.max_n))];
        }
        let mut cfg = PartitionConfig::default();
        if let Some(s) = clique_size {
            cfg.clique_size = s;
        }
        if let Some(m) = min_sub {
            cfg.min_subboard_size = m;
        }
        let g = Arc::new(sample_gnp(n, p, seed));
        let (part, attempts) = match partition_with_retries(&g, &cfg, derive_seed(seed, stream::PARTITION)) {
            Ok(x) => x,
            Err(e) => return vec![error(codes::BAD_CONFIG, e.to_string())],
        };
        let header = Header {
            n,
            p,
            seed,
            partition: part.to_json(),
            config: GameConfig {
                clique_size: cfg.clique_size,
                min_subboard_size: cfg.min_subboard_size,
                partition_attempts: attempts,
                adversary_seed: 0,
            },
            adversary: AdversaryKind::Remote,
            versions: Versions::current(),
            graph: None,
        };
        let mut game = match Game::new(g.clone(), &part, header) {
            Ok(game) => game,
            Err(EngineError::Rejected(e)) => return vec![error(codes::BAD_CONFIG, e.to_string())],
            Err(e) => return vec![error(codes::BAD_CONFIG, e.to_string())],
        };
        let _ = game.red_turn();
        self.game = Some(game);
        self.sent = 0;
        let mut out = self.after_ply();
        if let Some(first) = out.first_mut() {
            first["graph"] = serde_json::to_value(g.to_json()).expect("graph serializes");
        }
        out
    }

    /// `state` with the records since the last message, then `game_over`
    /// if the game ended.
    fn after_ply(&mut self) -> Vec<Value> {
        let game = self.game.as_ref().expect("game exists");
        let fresh: Vec<MoveRecord> = game.moves()[self.sent..].to_vec();
        self.sent = game.moves().len();
        let mut out = vec![state_message(game, &fresh)];
        if let Some(tr) = game.transcript() {
            out.push(json!({"type": "game_over", "result": tr.result, "transcript": tr.to_jsonl()}));
        }
        out
    }
}

fn state_message(game: &Game, fresh: &[MoveRecord]) -> Value {
    let red = &game.red;
    let boards: Vec<Value> = red
        .boards
        .iter()
        .enumerate()
        .map(|(i, b)| {
            json!({
                "board": i + 1,
                "vertices": b.vertices,
                "status": b.status,
                "dangerous": b.dangerous,
                "strategy": b.chosen.map(|c| c.tag()),
                "w": b.w,
                "blue_wasted": b.blue_wasted,
                "red_wasted": crate::strategy::wasted_within(&game.board, Player::Red, &b.vertices),
                "traps": b.traps(),
            })
        })
        .collect();
    json!({
        "type": "state",
        "ply": game.moves().len(),
        "to_move": if game.is_over() { Value::Null } else { json!(game.to_move()) },
        "partition": game.header().partition,
        "red_edges": game.board.edges_of(Player::Red),
        "blue_edges": game.board.edges_of(Player::Blue),
        "current_board": red.current_board().map(|i| i + 1),
        "boards": boards,
        "moves": fresh,
    })
}

/// Serves one connection until the peer closes or errors pile up.
pub fn handle_connection<R: BufRead, W: Write>(reader: R, mut writer: W, cfg: SessionConfig) -> io::Result<()> {
    let mut session = Session::new(cfg);
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for msg in session.handle(&line) {
            serde_json::to_writer(&mut writer, &msg)?;
            writer.write_all(b"\n")?;
        }
        writer.flush()?;
        if session.should_close() {
            break;
        }
    }
    Ok(())
}

fn serve_stream(stream: TcpStream, cfg: SessionConfig) {
    let Ok(read) = stream.try_clone() else { return };
    let _ = handle_connection(BufReader::new(read), io::BufWriter::new(stream), cfg);
}

/// Binds `addr` and serves sessions on background threads, one per
/// connection. Returns the bound address and the accept loop's handle.
pub fn spawn_server(addr: &str, cfg: SessionConfig) -> io::Result<(SocketAddr, JoinHandle<()>)> {
    let listener = TcpListener::bind(addr)?;
    let local = listener.local_addr()?;
    let handle = thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            let cfg = cfg.clone();
            thread::spawn(move || serve_stream(stream, cfg));
        }
    });
    Ok((local, handle))
}

/// Serves forever on `addr`.
pub fn serve_session(addr: &str, cfg: SessionConfig) -> io::Result<()> {
    let (_, handle) = spawn_server(addr, cfg)?;
    handle.join().map_err(|_| io::Error::other("accept loop panicked"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn first_game(s: &mut Session) -> Vec<Value> {
        s.handle(r#"{"type":"new_game","n":128,"p":0.99,"seed":3}"#)
    }

    #[test]
    fn new_game_sends_graph_and_red_move() {
        let mut s = Session::new(SessionConfig::default());
        let out = first_game(&mut s);
        assert_eq!(out[0]["type"], "state", "{}", out[0]);
        assert!(out[0]["graph"]["edges"].as_array().unwrap().len() > 1000);
        assert_eq!(out[0]["moves"].as_array().unwrap().len(), 1);
        assert_eq!(out[0]["moves"][0]["annotation"]["strategy"], "empty");
        assert_eq!(out[0]["to_move"], "blue");
    }

    #[test]
    fn illegal_move_leaves_state_unchanged() {
        let mut s = Session::new(SessionConfig::default());
        let out = first_game(&mut s);
        let red = out[0]["moves"][0]["edge"].to_string();
        let out = s.handle(&format!(r#"{{"type":"move","edge":{red}}}"#));
        assert_eq!(out[0]["code"], codes::ILLEGAL_MOVE);
        assert_eq!(s.game().unwrap().moves().len(), 1);
    }

    #[test]
    fn errors_without_a_game_and_repeated_errors_close() {
        let mut s = Session::new(SessionConfig::default());
        assert_eq!(s.handle(r#"{"type":"resign"}"#)[0]["code"], codes::NO_GAME);
        assert_eq!(s.handle("not json")[0]["code"], codes::BAD_MESSAGE);
        for _ in 0..2 {
            s.handle("{}");
        }
        assert!(!s.should_close());
        let out = s.handle("{}");
        assert!(s.should_close());
        assert_eq!(out.last().unwrap()["code"], codes::TOO_MANY_ERRORS);
    }

    #[test]
    fn resign_ends_with_transcript() {
        let mut s = Session::new(SessionConfig::default());
        first_game(&mut s);
        let out = s.handle(r#"{"type":"resign"}"#);
        assert_eq!(out[1]["type"], "game_over");
        assert_eq!(out[1]["result"]["winner"], "red");
        let text = out[1]["transcript"].as_str().unwrap();
        assert!(crate::engine::verify_jsonl(text).is_clean());
        assert_eq!(s.handle(r#"{"type":"move","edge":[0,1]}"#)[0]["code"], codes::GAME_OVER);
    }
}
