use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pmgame::adversary::AdversaryKind;
use pmgame::engine::batch::{simulate_batch, BatchConfig};
use pmgame::engine::session::{serve_session, SessionConfig};
use pmgame::engine::solver::{referee_agreement, solve_small_strong_game, GameValue};
use pmgame::engine::{sampled_game, verify_jsonl, verify_transcript, EngineError, GameSpec, Winner};
use pmgame::graph::{sample_gnp, Graph, GraphJson};
use pmgame::partition::{partition_with_retries, verify_partition, PartitionConfig};
use pmgame::rng::{derive_seed, stream};

#[derive(Parser)]
#[command(name = "pmgame", version, about = "Strong perfect matching game on G(n,p): Red's strategy, referee and oracles")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample G(n,p) and print it as JSON.
    Sample {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build and verify a cyclic clique partition.
    Partition {
        #[command(flatten)]
        g: GraphArgs,
        /// Read the graph from a file written by `sample` instead.
        #[arg(long, conflicts_with_all = ["n", "p"])]
        graph: Option<PathBuf>,
        #[command(flatten)]
        part: PartArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play one game and write its transcript.
    Play {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long, default_value = "random", value_parser = parse_adversary)]
        adversary: AdversaryKind,
        #[command(flatten)]
        part: PartArgs,
        /// Transcript path (JSON lines).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replay the transcript through the verifier before exiting.
        #[arg(long)]
        verify: bool,
    },
    /// Run a grid of games from a JSON config file.
    Batch {
        config: PathBuf,
        /// Write the full report (rows and summary) as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a transcript and report any inconsistency.
    Verify { transcript: PathBuf },
    /// Exact game value on K_m, m ∈ {2, 4, 6}, and the referee cross-check.
    Solve {
        #[arg(long, default_value_t = 4)]
        m: usize,
    },
    /// Host interactive games over line-delimited JSON on TCP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        bind: String,
        #[arg(long, default_value_t = SessionConfig::default().max_n)]
        max_n: usize,
        #[arg(long, default_value_t = SessionConfig::default().max_errors)]
        max_errors: usize,
    },
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PartArgs {
    /// Greedy clique size s (even).
    #[arg(long)]
    clique_size: Option<usize>,
    #[arg(long)]
    min_subboard_size: Option<usize>,
}

impl GraphArgs {
    fn np(&self) -> Result<(usize, f64), Fail> {
        match (self.n, self.p) {
            (Some(n), Some(p)) if (0.0..=1.0).contains(&p) => Ok((n, p)),
            (Some(_), Some(p)) => Err(usage(format!("p must lie in [0,1], got {p}"))),
            _ => Err(usage("--n and --p are required")),
        }
    }
}

impl PartArgs {
    fn config(&self) -> PartitionConfig {
        let mut cfg = PartitionConfig::default();
        if let Some(s) = self.clique_size {
            cfg.clique_size = s;
        }
        if let Some(m) = self.min_subboard_size {
            cfg.min_subboard_size = m;
        }
        cfg
    }
}

fn parse_adversary(s: &str) -> Result<AdversaryKind, String> {
    AdversaryKind::parse(s).ok_or_else(|| format!("unknown adversary {s:?} (random, blocker, fast_matcher, vertex_attacker)"))
}

enum Fail {
    Check(String),
    Usage(String),
}

fn usage(e: impl ToString) -> Fail {
    Fail::Usage(e.to_string())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Fail> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            let mut so = io::stdout().lock();
            so.write_all(text.as_bytes()).and_then(|_| so.write_all(b"\n")).map_err(usage)
        }
    }
}

fn read(p: &Path) -> Result<String, Fail> {
    fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn run(cmd: Cmd) -> Result<(), Fail> {
    match cmd {
        Cmd::Sample { g, out } => {
            let (n, p) = g.np()?;
            let graph = sample_gnp(n, p, g.seed);
            emit(out.as_deref(), &serde_json::to_string(&graph.to_json()).map_err(usage)?)
        }
        Cmd::Partition { g, graph, part, out } => {
            let graph = match graph {
                Some(path) => {
                    let j: GraphJson = serde_json::from_str(&read(&path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                    Graph::from_json(&j).map_err(usage)?
                }
                None => {
                    let (n, p) = g.np()?;
                    sample_gnp(n, p, g.seed)
                }
            };
            let cfg = part.config();
            cfg.validate().map_err(usage)?;
            match partition_with_retries(&graph, &cfg, derive_seed(g.seed, stream::PARTITION)) {
                Ok((pt, attempts)) => {
                    let rep = verify_partition(&graph, &pt, &cfg);
                    let body = serde_json::json!({ "partition": pt.to_json(), "attempts": attempts, "checks": rep.checks });
                    emit(out.as_deref(), &serde_json::to_string(&body).map_err(usage)?)?;
                    if rep.all_passed() {
                        Ok(())
                    } else {
                        Err(Fail::Check(format!("partition checks failed: {}", rep.failed().join(", "))))
                    }
                }
                Err(e) => Err(Fail::Check(format!("PartitionFailure: {e}"))),
            }
        }
        Cmd::Play { g, adversary, part, out, verify } => {
            let (n, p) = g.np()?;
            if n == 0 || n % 2 == 1 {
                return Err(usage(format!("n must be even and positive, got {n}")));
            }
            let cfg = part.config();
            cfg.validate().map_err(usage)?;
            let spec = GameSpec { n, p, seed: g.seed, adversary, partition: cfg };
            let (_, _, tr) = match sampled_game(&spec) {
                Ok(x) => x,
                Err(EngineError::Partition(e)) => return Err(Fail::Check(format!("PartitionFailure: {e}"))),
                Err(e) => return Err(Fail::Check(e.to_string())),
            };
            if let Some(path) = &out {
                emit(Some(path), &tr.to_jsonl())?;
            }
            let r = &tr.result;
            eprintln!(
                "winner {:?} ({:?}) red_moves {} budget {} red_wasted {} blue_wasted {} fallback {}",
                r.winner, r.ending, r.red_moves, r.budget, r.red_wasted_total, r.blue_wasted_total, r.fallback_moves
            );
            if out.is_none() {
                emit(None, &serde_json::to_string(r).map_err(usage)?)?;
            }
            if verify {
                let rep = verify_transcript(&tr);
                if !rep.is_clean() {
                    return Err(Fail::Check(format!("verify: {}", rep.issues.join("; "))));
                }
            }
            if r.winner == Winner::Red {
                Ok(())
            } else {
                Err(Fail::Check(format!("winner is {:?}: {}", r.winner, r.detail.clone().unwrap_or_default())))
            }
        }
        Cmd::Batch { config, out } => {
            let cfg: BatchConfig = serde_json::from_str(&read(&config)?).map_err(|e| usage(format!("{}: {e}", config.display())))?;
            let rep = simulate_batch(&cfg);
            print!("{}", rep.table());
            let s = &rep.summary;
            println!(
                "games {} partition_ok {} ({:.1}%) red_wins {} forfeits {} other {} min_slack {} max_wasted_delta {} fallback_moves {}",
                s.games,
                s.partition_ok,
                100.0 * s.partition_rate,
                s.red_wins,
                s.forfeits,
                s.other_results,
                s.min_slack.map_or("-".into(), |v| v.to_string()),
                s.max_wasted_delta.map_or("-".into(), |v| v.to_string()),
                s.fallback_moves
            );
            if let Some(path) = &out {
                emit(Some(path), &serde_json::to_string_pretty(&rep).map_err(usage)?)?;
            }
            if rep.all_good() {
                Ok(())
            } else {
                Err(Fail::Check("some partition-successful game was not a clean Red win".into()))
            }
        }
        Cmd::Verify { transcript } => {
            let rep = verify_jsonl(&read(&transcript)?);
            if rep.is_clean() {
                println!("ok: {} plies checked", rep.plies_checked);
                Ok(())
            } else {
                for i in &rep.issues {
                    println!("{i}");
                }
                Err(Fail::Check(format!("{} issue(s)", rep.issues.len())))
            }
        }
        Cmd::Solve { m } => {
            let sol = solve_small_strong_game(m).map_err(usage)?;
            let agree = referee_agreement(m).map_err(usage)?;
            println!(
                "K_{}: {:?} ({} positions); referee agreement on {} positions, {} terminal, {} disagreements",
                m,
                sol.value,
                sol.positions,
                agree.positions,
                agree.terminal_positions,
                agree.disagreements.len()
            );
            if sol.value == GameValue::BlueWin || !agree.disagreements.is_empty() {
                Err(Fail::Check("solver check failed".into()))
            } else {
                Ok(())
            }
        }
        Cmd::Serve { bind, max_n, max_errors } => {
            eprintln!("listening on {bind}");
            serve_session(&bind, SessionConfig { max_n, max_errors }).map_err(usage)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(1)
        }
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
