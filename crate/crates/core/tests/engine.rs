use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;

use serde_json::{json, Value};

use pmgame::adversary::AdversaryKind;
use pmgame::engine::session::{spawn_server, SessionConfig};
use pmgame::engine::{sampled_game, verify_jsonl, verify_transcript, GameSpec, Transcript, Winner};
use pmgame::matching::max_matching;
use pmgame::{Edge, Player};

#[test]
fn same_spec_same_transcript() {
    for adv in AdversaryKind::standard() {
        let spec = GameSpec::new(256, 0.99, 5, adv);
        let a = sampled_game(&spec).unwrap().2.to_jsonl();
        let b = sampled_game(&spec).unwrap().2.to_jsonl();
        assert_eq!(a, b);
    }
}

#[test]
fn scripted_replay_of_a_blocker_game_is_identical() {
    let spec = GameSpec::new(256, 0.99, 11, AdversaryKind::Blocker);
    let (_, _, tr) = sampled_game(&spec).unwrap();
    let blue: Vec<Edge> = tr.moves.iter().filter(|m| m.mover == Player::Blue).map(|m| m.edge).collect();
    let scripted = GameSpec::new(256, 0.99, 11, AdversaryKind::Scripted { moves: blue });
    let (_, _, again) = sampled_game(&scripted).unwrap();
    // Digests differ: the header names the adversary.
    let strip = |t: &Transcript| t.moves.iter().map(|m| (m.edge, m.wasted, m.annotation.clone(), m.board, m.ledger_flip)).collect::<Vec<_>>();
    assert_eq!(strip(&again), strip(&tr));
    assert_eq!(again.result, tr.result);
}

/// Recomputes both players' matching numbers after every ply and checks
/// the game stopped on exactly the ply where Red first had a perfect
/// matching.
fn shadow_pass(tr: &Transcript) {
    let n = tr.header.n;
    let mut red = Vec::new();
    let mut blue = Vec::new();
    for (i, m) in tr.moves.iter().enumerate() {
        let mine = if m.mover == Player::Red { &mut red } else { &mut blue };
        let before = max_matching(n, mine).len();
        mine.push(m.edge);
        let after = max_matching(n, mine).len();
        assert_eq!(m.wasted, after == before, "ply {}", m.ply);
        let last = i + 1 == tr.moves.len();
        assert_eq!(2 * after == n, last && m.mover == Player::Red, "ply {}", m.ply);
    }
}

#[test]
fn every_adversary_loses_and_every_transcript_verifies() {
    for adv in AdversaryKind::standard() {
        for seed in 0..3 {
            let (_, part, tr) = sampled_game(&GameSpec::new(512, 0.97, seed, adv.clone())).unwrap();
            assert_eq!(tr.result.winner, Winner::Red, "{} seed {seed}: {:?}", adv.name(), tr.result.detail);
            assert!(tr.result.red_moves <= 512 / 2 + 4 * part.t());
            let rep = verify_transcript(&tr);
            assert!(rep.is_clean(), "{:?}", rep.issues);
            shadow_pass(&tr);
        }
    }
}

#[test]
fn round_trip_through_text() {
    let (_, _, tr) = sampled_game(&GameSpec::new(128, 0.99, 2, AdversaryKind::FastMatcher)).unwrap();
    let back = Transcript::from_jsonl(&tr.to_jsonl()).unwrap();
    assert_eq!(back, tr);
}

struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    fn send(&mut self, v: Value) {
        writeln!(self.writer, "{v}").unwrap();
    }

    fn recv(&mut self) -> Value {
        let mut line = String::new();
        self.reader.read_line(&mut line).unwrap();
        serde_json::from_str(&line).unwrap_or_else(|e| panic!("{e}: {line:?}"))
    }
}

#[test]
fn full_game_over_tcp() {
    let (addr, _h) = spawn_server("127.0.0.1:0", SessionConfig::default()).unwrap();
    let s = TcpStream::connect(addr).unwrap();
    let mut c = Client { reader: BufReader::new(s.try_clone().unwrap()), writer: s };

    c.send(json!({"type": "new_game", "n": 128, "p": 0.99, "seed": 4}));
    let first = c.recv();
    assert_eq!(first["type"], "state");
    let edges: Vec<[u64; 2]> = serde_json::from_value(first["graph"]["edges"].clone()).unwrap();
    let mut taken: HashSet<[u64; 2]> = HashSet::new();
    let note = |v: &Value, taken: &mut HashSet<[u64; 2]>| {
        for m in v["moves"].as_array().unwrap() {
            let e: [u64; 2] = serde_json::from_value(m["edge"].clone()).unwrap();
            taken.insert(e);
        }
    };
    note(&first, &mut taken);

    let mut red_replies = 0;
    let mut annotated = 0;
    let over = loop {
        let e = *edges.iter().find(|e| !taken.contains(*e)).expect("a free edge");
        c.send(json!({"type": "probe", "edge": e}));
        let probe = c.recv();
        assert_eq!(probe["free"], true);
        c.send(json!({"type": "move", "edge": e}));
        let st = c.recv();
        assert_eq!(st["type"], "state", "{st}");
        note(&st, &mut taken);
        for m in st["moves"].as_array().unwrap() {
            if m["mover"] == "red" {
                red_replies += 1;
                annotated += m["annotation"].is_object() as usize;
            }
        }
        if st["to_move"].is_null() {
            break c.recv();
        }
    };
    assert!(red_replies >= 10);
    assert_eq!(annotated, red_replies);
    assert_eq!(over["type"], "game_over");
    assert_eq!(over["result"]["winner"], "red");

    let text = over["transcript"].as_str().unwrap();
    assert!(verify_jsonl(text).is_clean());
    let tr = Transcript::from_jsonl(text).unwrap();
    assert_eq!(serde_json::to_value(&tr.result).unwrap(), over["result"]);

    c.send(json!({"type": "move", "edge": [0, 1]}));
    assert_eq!(c.recv()["code"], "GAME_OVER");
}

#[test]
fn tcp_session_closes_after_repeated_errors() {
    let (addr, _h) = spawn_server("127.0.0.1:0", SessionConfig { max_n: 256, max_errors: 3 }).unwrap();
    let s = TcpStream::connect(addr).unwrap();
    let mut c = Client { reader: BufReader::new(s.try_clone().unwrap()), writer: s };
    c.send(json!({"type": "new_game", "n": 1024, "p": 0.99, "seed": 1}));
    assert_eq!(c.recv()["code"], "BAD_CONFIG");
    c.send(json!({"type": "move", "edge": [0, 1]}));
    assert_eq!(c.recv()["code"], "NO_GAME");
    c.send(json!({"type": "dance"}));
    assert_eq!(c.recv()["code"], "BAD_MESSAGE");
    assert_eq!(c.recv()["code"], "TOO_MANY_ERRORS");
    let mut rest = String::new();
    assert_eq!(c.reader.read_line(&mut rest).unwrap(), 0, "connection should be closed");
}
