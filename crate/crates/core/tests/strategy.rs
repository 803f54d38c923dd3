use pmgame::rng;
use pmgame::strategy::harness::{
    blocker_blue, late_blocker_blue, lemma_playout, quiet_blue, random_blue, star_blue, weak_exhaustive, weak_playout, LocalBlue,
};
use pmgame::strategy::Stage;
use pmgame::Edge;

fn setups(seed: u64) -> Vec<Vec<Edge>> {
    let mut r = rng::rng_from_seed(seed);
    let a = rng::index(&mut r, 16) as u32;
    let mut b = rng::index(&mut r, 16) as u32;
    if b == a {
        b = (a + 1) % 16;
    }
    vec![vec![Edge::new(a, b)], vec![Edge::new(a, 16)], vec![Edge::new(a, 16), Edge::new(b, 17)]]
}

fn blues(seed: u64) -> Vec<(&'static str, LocalBlue<'static>)> {
    vec![
        ("random", random_blue(seed)),
        ("blocker", blocker_blue(seed)),
        ("late_blocker", late_blocker_blue(seed)),
        ("star", star_blue(seed)),
    ]
}

#[test]
fn lemma_bound_and_ledger_over_many_playouts() {
    let mut runs = 0;
    let mut stage_m = 0;
    for seed in 0..45u64 {
        for setup in setups(seed) {
            for (name, mut blue) in blues(seed) {
                let rep = lemma_playout(16, 2, &setup, &mut blue).unwrap();
                runs += 1;
                assert!(rep.completed, "{name} {setup:?} seed {seed}: {rep:?}");
                assert!(rep.red_moves <= 10, "{name} {setup:?} seed {seed}: {rep:?}");
                assert!(rep.red_wasted <= rep.blue_wasted, "{name} {setup:?} seed {seed}: {rep:?}");
                assert!(rep.violations.is_empty(), "{name} {setup:?} seed {seed}: {:?}", rep.violations);
                assert_eq!(rep.fallback_moves(), 0, "{name} {setup:?} seed {seed}: {rep:?}");
                stage_m += rep.stages.contains(&Stage::M) as usize;
            }
        }
    }
    assert!(runs >= 500);
    assert!(stage_m > 0, "no playout reached stage M");
}

#[test]
fn quiet_blue_gives_a_clean_eight() {
    for seed in 0..20 {
        for setup in setups(seed) {
            let rep = lemma_playout(16, 2, &setup, &mut quiet_blue(seed)).unwrap();
            assert_eq!(rep.red_moves, 8);
            assert_eq!(rep.red_wasted, 0);
        }
    }
}

#[test]
fn weak_bound_exhaustive_small() {
    assert_eq!(weak_exhaustive(6), Ok(4));
    assert_eq!(weak_exhaustive(8), Ok(5));
}

#[test]
fn weak_bound_random_and_blocking() {
    for m in (6..=20).step_by(2) {
        for seed in 0..30 {
            for mut blue in [random_blue(seed), blocker_blue(seed), star_blue(seed)] {
                let moves = weak_playout(m, &mut blue).unwrap();
                assert!(moves <= m / 2 + 1, "m={m} seed={seed}: {moves}");
            }
        }
    }
}

#[test]
fn weak_odd_leaves_one_vertex() {
    for m in [5usize, 7, 9] {
        for seed in 0..10 {
            assert_eq!(weak_playout(m, &mut blocker_blue(seed)).unwrap(), m / 2);
        }
    }
}
