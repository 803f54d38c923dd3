//! One line per acceptance criterion; exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use pmgame::adversary::AdversaryKind;
use pmgame::engine::batch::{simulate_batch, BatchConfig, BatchReport};
use pmgame::engine::solver::{referee_agreement, solve_small_strong_game, GameValue};
use pmgame::engine::{sampled_game, verify_jsonl, verify_transcript, GameSpec, Transcript, Winner};
use pmgame::matching::max_matching;
use pmgame::rng;
use pmgame::strategy::harness::{
    blocker_blue, late_blocker_blue, lemma_playout, random_blue, star_blue, weak_exhaustive, weak_playout, LocalBlue,
};
use pmgame::{Edge, Graph, Vertex};

const NS: [usize; 3] = [1024, 2048, 4096];
const PS: [f64; 2] = [0.97, 0.99];
const SEEDS: u64 = 9;
const CLIQUE: usize = 16;
const MIN_PARTITION_RATE: f64 = 0.95;
const RUNTIME_LIMIT_S: f64 = 600.0;
const LEMMA_PLAYOUTS: usize = 500;
const LEMMA_MAX_MOVES: usize = 10;
const MATCHING_INSTANCES: usize = 1000;
const MUTATIONS_PER_TRANSCRIPT: usize = 60;

struct Line {
    ok: bool,
    name: &'static str,
    detail: String,
}

fn line(ok: bool, name: &'static str, detail: String) -> Line {
    Line { ok, name, detail }
}

fn batch() -> (BatchReport, f64) {
    let cfg = BatchConfig {
        n: NS.to_vec(),
        p: PS.to_vec(),
        seeds: (0..SEEDS).collect(),
        adversaries: AdversaryKind::standard(),
        clique_size: Some(CLIQUE),
        min_subboard_size: None,
        verify: true,
    };
    let t = Instant::now();
    let rep = simulate_batch(&cfg);
    (rep, t.elapsed().as_secs_f64())
}

fn end_to_end(rep: &BatchReport, secs: f64) -> Line {
    let s = &rep.summary;
    let ok = s.games >= 200 && s.partition_rate >= MIN_PARTITION_RATE && s.red_wins == s.partition_ok && s.forfeits == 0 && secs <= RUNTIME_LIMIT_S;
    let failures: Vec<String> = rep
        .rows
        .iter()
        .filter(|r| r.partition_ok && r.winner != Some(Winner::Red))
        .take(3)
        .map(|r| format!("n={} p={} seed={} {}: {:?} {:?}", r.n, r.p, r.seed, r.adversary, r.winner, r.error))
        .collect();
    line(
        ok,
        "end-to-end win",
        format!(
            "{} games, partition {}/{} ({:.1}% ≥ {:.0}%), Red wins {}/{}, forfeits {}, fallback moves {}, {:.1}s ≤ {RUNTIME_LIMIT_S}s{}",
            s.games,
            s.partition_ok,
            s.games,
            100.0 * s.partition_rate,
            100.0 * MIN_PARTITION_RATE,
            s.red_wins,
            s.partition_ok,
            s.forfeits,
            s.fallback_moves,
            secs,
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn budget(rep: &BatchReport) -> Line {
    let won: Vec<_> = rep.rows.iter().filter(|r| r.winner == Some(Winner::Red)).collect();
    let over = won.iter().filter(|r| r.red_moves > r.budget).count();
    let worst = won.iter().min_by_key(|r| r.slack());
    line(
        over == 0 && !won.is_empty(),
        "move budget n/2+4t",
        format!(
            "{} won games, {over} over budget, min slack {} ({}), max Red moves {}",
            won.len(),
            worst.map_or(0, |r| r.slack()),
            worst.map_or(String::new(), |r| format!("n={} {} seed {}: {} of {}", r.n, r.adversary, r.seed, r.red_moves, r.budget)),
            rep.summary.max_red_moves
        ),
    )
}

fn partition(rep: &BatchReport) -> Line {
    let ok_rows: Vec<_> = rep.rows.iter().filter(|r| r.partition_ok).collect();
    let bad = ok_rows.iter().filter(|r| r.partition_checks != Some(true)).count();
    line(
        bad == 0 && !ok_rows.is_empty(),
        "partition correctness",
        format!("{} successful partitions, {bad} failing verify_partition", ok_rows.len()),
    )
}

fn setups(seed: u64) -> Vec<Vec<Edge>> {
    let mut r = rng::rng_from_seed(seed);
    let a = rng::index(&mut r, 16) as Vertex;
    let mut b = rng::index(&mut r, 16) as Vertex;
    if b == a {
        b = (a + 1) % 16;
    }
    // One Blue edge inside H, or Blue touching H from outside only.
    vec![vec![Edge::new(a, b)], vec![Edge::new(a, 16)], vec![Edge::new(a, 16), Edge::new(b, 17)]]
}

fn lemma_and_distinct(games: &[Transcript]) -> (Line, Line) {
    let mut runs = 0;
    let mut bad = Vec::new();
    let mut max_moves = 0;
    let mut positions = 0;
    let mut violations = Vec::new();
    let mut seed = 0u64;
    while runs < LEMMA_PLAYOUTS {
        for setup in setups(seed) {
            let blues: Vec<(&str, LocalBlue<'static>)> = vec![
                ("random", random_blue(seed)),
                ("blocker", blocker_blue(seed)),
                ("double_block", late_blocker_blue(seed)),
                ("star", star_blue(seed)),
            ];
            for (name, mut blue) in blues {
                runs += 1;
                match lemma_playout(16, 2, &setup, &mut blue) {
                    Ok(rep) => {
                        max_moves = max_moves.max(rep.red_moves);
                        positions += rep.checked_positions;
                        if !rep.completed || rep.red_moves > LEMMA_MAX_MOVES || rep.red_wasted > rep.blue_wasted {
                            bad.push(format!("{name} seed {seed} {setup:?}: moves {} rw {} bw {}", rep.red_moves, rep.red_wasted, rep.blue_wasted));
                        }
                        violations.extend(rep.violations.into_iter().map(|v| format!("{name} seed {seed}: {v}")));
                    }
                    Err(e) => bad.push(format!("{name} seed {seed}: {e}")),
                }
            }
        }
        seed += 1;
    }
    let lemma = line(
        bad.is_empty(),
        "staged strategy bound on K_16",
        format!("{runs} playouts (random, blocker, double-block, star), max Red moves {max_moves} ≤ {LEMMA_MAX_MOVES}, {} failing{}", bad.len(), bad.first().map_or(String::new(), |b| format!("; {b}"))),
    );
    // The same bound in full games, read off Red's Stage II annotations.
    let mut annotated = 0;
    for tr in games {
        for m in &tr.moves {
            if let Some(a) = m.annotation.as_ref().filter(|a| a.stage == "II") {
                annotated += 1;
                if a.distinct.is_some_and(|d| d > 1) {
                    violations.push(format!("game seed {} ply {}: {:?} distinct", tr.header.seed, m.ply, a.distinct));
                }
            }
        }
    }
    let distinct = line(
        violations.is_empty() && positions > 0 && annotated > 0,
        "distinct-vertex invariant",
        format!(
            "{positions} Stage I/II playout positions and {annotated} Stage II game moves, {} violations{}",
            violations.len(),
            violations.first().map_or(String::new(), |v| format!("; {v}"))
        ),
    );
    (lemma, distinct)
}

fn weak() -> Line {
    let mut lines = 0;
    let mut bad = Vec::new();
    for m in (6..=20).step_by(2) {
        for seed in 0..40 {
            for mut blue in [random_blue(seed), blocker_blue(seed), star_blue(seed)] {
                lines += 1;
                match weak_playout(m, &mut blue) {
                    Ok(k) if k <= m / 2 + 1 => {}
                    Ok(k) => bad.push(format!("m={m} seed {seed}: {k} moves")),
                    Err(e) => bad.push(format!("m={m} seed {seed}: {e}")),
                }
            }
        }
    }
    let mut exhaustive = Vec::new();
    for m in [6, 8] {
        match weak_exhaustive(m) {
            Ok(k) if k <= m / 2 + 1 => exhaustive.push(format!("K_{m} worst {k}")),
            Ok(k) => bad.push(format!("exhaustive K_{m}: worst {k}")),
            Err(e) => bad.push(format!("exhaustive K_{m}: {e}")),
        }
    }
    line(
        bad.is_empty(),
        "weak strategy bound m/2+1",
        format!("{lines} sampled lines on m = 6..20, exhaustive {}, {} failing{}", exhaustive.join(", "), bad.len(), bad.first().map_or(String::new(), |b| format!("; {b}"))),
    )
}

fn brute(edges: &[Edge]) -> usize {
    match edges.split_first() {
        None => 0,
        Some((e, rest)) => {
            let keep: Vec<Edge> = rest.iter().copied().filter(|f| !f.shares_vertex(*e)).collect();
            brute(rest).max(1 + brute(&keep))
        }
    }
}

fn matching_oracle() -> Line {
    let mut r = rng::rng_from_seed(2024);
    let mut bad = Vec::new();
    for i in 0..MATCHING_INSTANCES {
        let n = 1 + rng::index(&mut r, 10);
        let p = [0.1, 0.25, 0.4, 0.6, 0.9][i % 5];
        let g = pmgame::graph::sample_gnp_with(n, p, &mut r);
        let es: Vec<Edge> = g.edges().collect();
        let m = max_matching(n, &es);
        if !m.is_valid() || m.len() != brute(&es) || !m.edges().iter().all(|e| g.contains(*e)) {
            bad.push(format!("n={n} {es:?}"));
        }
    }
    let path = |k: u32| (0..k - 1).map(|i| Edge::new(i, i + 1)).collect::<Vec<_>>();
    let mut petersen = Vec::new();
    for i in 0..5 {
        petersen.push(Edge::new(i, (i + 1) % 5));
        petersen.push(Edge::new(i, i + 5));
        petersen.push(Edge::new(5 + i, 5 + (i + 2) % 5));
    }
    let named: Vec<(&str, usize, Vec<Edge>, usize)> = vec![
        ("P_2", 2, path(2), 1),
        ("P_5", 5, path(5), 2),
        ("P_10", 10, path(10), 5),
        ("K_4", 4, Graph::complete(4).edges().collect(), 2),
        ("Petersen", 10, petersen, 5),
    ];
    for (name, n, es, want) in &named {
        let got = max_matching(*n, es).len();
        if got != *want || brute(es) != *want {
            bad.push(format!("{name}: {got}, expected {want}"));
        }
    }
    line(
        bad.is_empty(),
        "matching oracle equivalence",
        format!("{MATCHING_INSTANCES} random graphs on ≤ 10 vertices plus {} named instances (Petersen → 5), {} disagreements", named.len(), bad.len()),
    )
}

fn solver() -> Line {
    let mut parts = Vec::new();
    let mut ok = true;
    for m in [2, 4, 6] {
        match solve_small_strong_game(m) {
            Ok(s) => {
                ok &= s.value != GameValue::BlueWin;
                parts.push(format!("K_{m} {:?}", s.value));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("K_{m}: {e}"));
            }
        }
    }
    for m in [4, 6] {
        match referee_agreement(m) {
            Ok(a) => {
                ok &= a.disagreements.is_empty();
                parts.push(format!("K_{m} referee agrees on {} terminal positions, {} disagreements", a.terminal_positions, a.disagreements.len()));
            }
            Err(e) => {
                ok = false;
                parts.push(e.to_string());
            }
        }
    }
    line(ok, "small-board solver and referee", parts.join(", "))
}

fn games() -> Vec<Transcript> {
    let mut out = Vec::new();
    for (i, adv) in AdversaryKind::standard().into_iter().enumerate() {
        for seed in 0..2u64 {
            out.push(sampled_game(&GameSpec::new(1024, PS[(i + seed as usize) % 2], 100 + seed, adv.clone())).expect("game").2);
        }
    }
    out
}

fn replay(rep: &BatchReport, games: &[Transcript]) -> Line {
    let verified = rep.rows.iter().filter(|r| r.verified.is_some()).count();
    let unclean = rep.rows.iter().filter(|r| r.verified == Some(false)).count();
    let mut r = rng::rng_from_seed(77);
    let mut mutated = 0;
    let mut missed = Vec::new();
    let mut extra_unclean = 0;
    for tr in games {
        if !verify_transcript(tr).is_clean() {
            extra_unclean += 1;
        }
        let text = tr.to_jsonl();
        let lines: Vec<&str> = text.lines().collect();
        for _ in 0..MUTATIONS_PER_TRANSCRIPT {
            let li = 1 + rng::index(&mut r, lines.len() - 2);
            let mut bytes = lines[li].as_bytes().to_vec();
            let bi = rng::index(&mut r, bytes.len());
            bytes[bi] ^= 1 << rng::index(&mut r, 7);
            let mut all: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
            all[li] = String::from_utf8_lossy(&bytes).into_owned();
            mutated += 1;
            if verify_jsonl(&all.join("\n")).is_clean() {
                missed.push(format!("{} seed {} line {li} byte {bi}", tr.header.adversary.name(), tr.header.seed));
            }
        }
    }
    line(
        unclean == 0 && extra_unclean == 0 && missed.is_empty() && verified > 0,
        "replay determinism",
        format!(
            "{} transcripts replayed clean ({unclean} unclean), {mutated} single-bit move mutations, {} undetected{}",
            verified + games.len() - extra_unclean,
            missed.len(),
            missed.first().map_or(String::new(), |m| format!("; {m}"))
        ),
    )
}

fn main() -> ExitCode {
    let t = Instant::now();
    let (rep, secs) = batch();
    print!("{}", rep.table());
    let sample = games();
    let (lemma, distinct) = lemma_and_distinct(&sample);
    let lines = vec![
        end_to_end(&rep, secs),
        budget(&rep),
        lemma,
        distinct,
        weak(),
        partition(&rep),
        matching_oracle(),
        solver(),
        replay(&rep, &sample),
    ];
    let mut failed = 0;
    for l in &lines {
        println!("{} {}: {}", if l.ok { "PASS" } else { "FAIL" }, l.name, l.detail);
        failed += !l.ok as usize;
    }
    println!("acceptance: {}/{} criteria passed in {:.1}s", lines.len() - failed, lines.len(), t.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
