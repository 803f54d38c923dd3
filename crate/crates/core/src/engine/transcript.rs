//! Transcript records and their JSON-lines encoding.
//!
//! A transcript is one `header` line, one `move` line per ply and one
//! `result` line. Every move carries a SHA-256 chain digest over the header
//! and all earlier moves, and every line must be the canonical compact
//! serialization of its parsed value, so any edit to a line is caught by
//! parsing, the canonical check, the digest chain or the replay.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversary::AdversaryKind;
use crate::board::Player;
use crate::graph::{Edge, GraphJson, Vertex};
use crate::orchestrator::{Annotation, Status};
use crate::partition::PartitionJson;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Versions {
    pub engine: String,
    pub format: u32,
}

impl Versions {
    pub fn current() -> Self {
        Versions { engine: env!("CARGO_PKG_VERSION").to_string(), format: FORMAT_VERSION }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub clique_size: usize,
    pub min_subboard_size: usize,
    /// Partition attempts used before one succeeded.
    pub partition_attempts: u32,
    pub adversary_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub n: usize,
    pub p: f64,
    /// Seed of the sampled graph; ignored when `graph` is present.
    pub seed: u64,
    pub partition: PartitionJson,
    pub config: GameConfig,
    pub adversary: AdversaryKind,
    pub versions: Versions,
    /// Explicit graph for games not played on a sampled `G(n,p)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveRecord {
    /// 1-based.
    pub ply: usize,
    pub mover: Player,
    pub edge: Edge,
    /// The move did not grow the mover's maximum matching.
    pub wasted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<Annotation>,
    /// For Blue: 1-based subboard containing the edge, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub board: Option<usize>,
    /// For Blue: subboard whose ledger bit this move set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ledger_flip: Option<usize>,
    pub digest: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    Red,
    Blue,
    Draw,
    Forfeit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ending {
    /// A player completed a perfect matching.
    Matching,
    /// No free edge left.
    Exhausted,
    Forfeit,
    Resigned,
    /// Blue's generator failed (script exhausted, disconnected).
    Aborted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoardLedger {
    /// 1-based.
    pub board: usize,
    pub size: usize,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    pub w: u8,
    pub red_wasted: usize,
    pub blue_wasted: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub imported: Vec<Vertex>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameResult {
    pub winner: Winner,
    pub ending: Ending,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub red_moves: usize,
    pub blue_moves: usize,
    pub red_wasted_total: usize,
    pub blue_wasted_total: usize,
    /// `n/2 + 4t`.
    pub budget: usize,
    pub fallback_moves: usize,
    pub per_board_ledgers: Vec<BoardLedger>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    pub header: Header,
    pub moves: Vec<MoveRecord>,
    pub result: GameResult,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Line {
    Header(Header),
    Move(MoveRecord),
    Result(GameResult),
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    use std::fmt::Write;
    let mut s = String::with_capacity(2 * bytes.len());
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Digest the chain starts from.
pub fn header_digest(h: &Header) -> String {
    hex(&Sha256::digest(serde_json::to_string(h).expect("header serializes").as_bytes()))
}

/// Digest of `rec` (its own `digest` field ignored) chained onto `prev`.
pub fn move_digest(prev: &str, rec: &MoveRecord) -> String {
    let mut r = rec.clone();
    r.digest.clear();
    let mut h = Sha256::new();
    h.update(prev.as_bytes());
    h.update(b"|");
    h.update(serde_json::to_string(&r).expect("move serializes").as_bytes());
    hex(&h.finalize())
}

impl Transcript {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |l: Line| {
            out.push_str(&serde_json::to_string(&l).expect("line serializes"));
            out.push('\n');
        };
        push(Line::Header(self.header.clone()));
        for m in &self.moves {
            push(Line::Move(m.clone()));
        }
        push(Line::Result(self.result.clone()));
        out
    }

    /// Parses a transcript, rejecting malformed, misplaced or non-canonical
    /// lines.
    pub fn from_jsonl(text: &str) -> Result<Transcript, String> {
        let mut header = None;
        let mut moves = Vec::new();
        let mut result = None;
        for (i, raw) in text.lines().enumerate() {
            if raw.is_empty() {
                continue;
            }
            let line: Line = serde_json::from_str(raw).map_err(|e| format!("line {}: {e}", i + 1))?;
            let canon = serde_json::to_string(&line).map_err(|e| format!("line {}: {e}", i + 1))?;
            if canon != raw {
                return Err(format!("line {}: not in canonical form", i + 1));
            }
            match line {
                Line::Header(h) if header.is_none() && moves.is_empty() => header = Some(h),
                Line::Move(m) if header.is_some() && result.is_none() => moves.push(m),
                Line::Result(r) if header.is_some() && result.is_none() => result = Some(r),
                _ => return Err(format!("line {}: out of place", i + 1)),
            }
        }
        Ok(Transcript {
            header: header.ok_or("missing header line")?,
            moves,
            result: result.ok_or("missing result line")?,
        })
    }

    pub fn red_moves(&self) -> usize {
        self.moves.iter().filter(|m| m.mover == Player::Red).count()
    }
}
