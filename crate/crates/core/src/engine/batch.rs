//! Batch simulation over a grid of `(n, p, seed, adversary)`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::AdversaryKind;
use crate::engine::transcript::Winner;
use crate::engine::{sampled_game, verify_transcript, EngineError, GameSpec};
use crate::partition::{verify_partition, PartitionConfig};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchConfig {
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub p: Vec<f64>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub adversaries: Vec<AdversaryKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clique_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_subboard_size: Option<usize>,
    /// Replay every transcript through the verifier.
    #[serde(default)]
    pub verify: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRow {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub adversary: String,
    pub partition_ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// All partition checks passed (only for successful partitions).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition_checks: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winner: Option<Winner>,
    pub t: usize,
    pub red_moves: usize,
    pub budget: usize,
    pub red_wasted: usize,
    pub blue_wasted: usize,
    pub fallback_moves: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
    pub millis: u128,
}

impl GameRow {
    pub fn slack(&self) -> i64 {
        self.budget as i64 - self.red_moves as i64
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub games: usize,
    pub partition_ok: usize,
    pub partition_rate: f64,
    pub red_wins: usize,
    pub forfeits: usize,
    pub other_results: usize,
    pub partition_check_failures: usize,
    pub verify_failures: usize,
    /// Smallest `n/2 + 4t − red_moves` over won games.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_slack: Option<i64>,
    /// Largest `red_wasted − blue_wasted` over played games.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_wasted_delta: Option<i64>,
    pub max_red_moves: usize,
    pub fallback_moves: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub rows: Vec<GameRow>,
    pub summary: Summary,
}

impl BatchReport {
    /// Every partition-successful game was won by Red and every check
    /// passed.
    pub fn all_good(&self) -> bool {
        let s = &self.summary;
        s.red_wins == s.partition_ok && s.partition_check_failures == 0 && s.verify_failures == 0
    }

    /// Per-combination table: `n p adversary games partition_ok red_wins
    /// min_slack max_moves`.
    pub fn table(&self) -> String {
        let mut keys: Vec<(usize, String, String)> = Vec::new();
        for r in &self.rows {
            let k = (r.n, format!("{}", r.p), r.adversary.clone());
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        let mut out = format!("{:>6} {:>6} {:>16} {:>6} {:>8} {:>8} {:>9} {:>9}\n", "n", "p", "adversary", "games", "part_ok", "red_win", "min_slack", "max_moves");
        for (n, p, a) in keys {
            let rows: Vec<&GameRow> = self.rows.iter().filter(|r| r.n == n && format!("{}", r.p) == p && r.adversary == a).collect();
            let ok = rows.iter().filter(|r| r.partition_ok).count();
            let wins = rows.iter().filter(|r| r.winner == Some(Winner::Red)).count();
            let slack = rows.iter().filter(|r| r.winner == Some(Winner::Red)).map(|r| r.slack()).min();
            let moves = rows.iter().map(|r| r.red_moves).max().unwrap_or(0);
            out.push_str(&format!(
                "{n:>6} {p:>6} {a:>16} {:>6} {ok:>8} {wins:>8} {:>9} {moves:>9}\n",
                rows.len(),
                slack.map_or("-".into(), |s| s.to_string())
            ));
        }
        out
    }
}

impl BatchConfig {
    pub fn specs(&self) -> Vec<GameSpec> {
        let mut cfg = PartitionConfig::default();
        if let Some(s) = self.clique_size {
            cfg.clique_size = s;
        }
        if let Some(m) = self.min_subboard_size {
            cfg.min_subboard_size = m;
        }
        let mut out = Vec::new();
        for &n in &self.n {
            for &p in &self.p {
                for adv in &self.adversaries {
                    for &seed in &self.seeds {
                        out.push(GameSpec { n, p, seed, adversary: adv.clone(), partition: cfg.clone() });
                    }
                }
            }
        }
        out
    }
}

/// Plays one game and summarizes it.
pub fn run_row(spec: &GameSpec, verify: bool) -> GameRow {
    let start = Instant::now();
    let mut row = GameRow {
        n: spec.n,
        p: spec.p,
        seed: spec.seed,
        adversary: spec.adversary.name().to_string(),
        partition_ok: false,
        error: None,
        partition_checks: None,
        winner: None,
        t: 0,
        red_moves: 0,
        budget: 0,
        red_wasted: 0,
        blue_wasted: 0,
        fallback_moves: 0,
        verified: None,
        millis: 0,
    };
    match sampled_game(spec) {
        Ok((g, part, tr)) => {
            row.partition_ok = true;
            row.partition_checks = Some(verify_partition(&g, &part, &spec.partition).all_passed());
            row.t = part.t();
            row.winner = Some(tr.result.winner);
            row.red_moves = tr.result.red_moves;
            row.budget = tr.result.budget;
            row.red_wasted = tr.result.red_wasted_total;
            row.blue_wasted = tr.result.blue_wasted_total;
            row.fallback_moves = tr.result.fallback_moves;
            if tr.result.winner != Winner::Red {
                row.error = tr.result.detail.clone();
            }
            if verify {
                row.verified = Some(verify_transcript(&tr).is_clean());
            }
        }
        Err(EngineError::Partition(e)) => row.error = Some(e.to_string()),
        Err(e) => {
            row.partition_ok = true;
            row.error = Some(e.to_string());
        }
    }
    row.millis = start.elapsed().as_millis();
    row
}

pub fn simulate_batch(cfg: &BatchConfig) -> BatchReport {
    let rows: Vec<GameRow> = cfg.specs().par_iter().map(|s| run_row(s, cfg.verify)).collect();
    let summary = summarize(&rows);
    BatchReport { rows, summary }
}

pub fn summarize(rows: &[GameRow]) -> Summary {
    let played: Vec<&GameRow> = rows.iter().filter(|r| r.partition_ok).collect();
    let won: Vec<&GameRow> = played.iter().copied().filter(|r| r.winner == Some(Winner::Red)).collect();
    Summary {
        games: rows.len(),
        partition_ok: played.len(),
        partition_rate: if rows.is_empty() { 0.0 } else { played.len() as f64 / rows.len() as f64 },
        red_wins: won.len(),
        forfeits: played.iter().filter(|r| r.winner == Some(Winner::Forfeit)).count(),
        other_results: played.len() - won.len(),
        partition_check_failures: played.iter().filter(|r| r.partition_checks == Some(false)).count(),
        verify_failures: played.iter().filter(|r| r.verified == Some(false)).count(),
        min_slack: won.iter().map(|r| r.slack()).min(),
        max_wasted_delta: played.iter().map(|r| r.red_wasted as i64 - r.blue_wasted as i64).max(),
        max_red_moves: played.iter().map(|r| r.red_moves).max().unwrap_or(0),
        fallback_moves: played.iter().map(|r| r.fallback_moves).sum(),
    }
}
