//! Exact search for a Red perfect matching of a small vertex set that Blue
//! cannot prevent within three more Red moves.
//!
//! Red's edges inside the target are kept as bitmask adjacency. Once Red
//! has no perfect matching of `T`, a free pair `ab` completes one iff Red
//! has a perfect matching of `T − a − b`, which does not depend on `ab`.
//! That makes "how many completing edges would this move leave" cheap, and
//! a win within three moves reduces to one Blue reply that must hit every
//! two-threat follow-up.

use crate::board::{Board, Player};
use crate::graph::{Edge, Vertex};

/// Largest target the search accepts.
pub const FORCED_LIMIT: usize = 32;

/// Above this many free pairs only finishes within two moves are searched.
const DEEP_LIMIT: usize = 120;

struct Local {
    verts: Vec<Vertex>,
    full: u32,
}

fn pm(red: &[u32], mask: u32) -> bool {
    if mask == 0 {
        return true;
    }
    let a = mask.trailing_zeros() as usize;
    let rest = mask & !(1 << a);
    let mut nb = red[a] & rest;
    while nb != 0 {
        let b = nb.trailing_zeros();
        if pm(red, rest & !(1 << b)) {
            return true;
        }
        nb &= nb - 1;
    }
    false
}

fn with(red: &[u32], (a, b): (u8, u8)) -> Vec<u32> {
    let mut r = red.to_vec();
    r[a as usize] |= 1 << b;
    r[b as usize] |= 1 << a;
    r
}

fn completers(red: &[u32], full: u32, free: &[(u8, u8)]) -> Vec<usize> {
    (0..free.len())
        .filter(|&i| {
            let (a, b) = free[i];
            pm(red, full & !(1 << a) & !(1 << b))
        })
        .collect()
}

/// A move after which Blue cannot stop Red completing on the next move,
/// and every such move with its completing edges, for the caller that needs
/// them all.
fn two_threats(red: &[u32], full: u32, free: &[(u8, u8)]) -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    for g in 0..free.len() {
        let r = with(red, free[g]);
        let rest: Vec<(u8, u8)> = free.iter().enumerate().filter(|&(i, _)| i != g).map(|(_, &p)| p).collect();
        let c: Vec<usize> = completers(&r, full, &rest).into_iter().map(|i| if i >= g { i + 1 } else { i }).collect();
        if c.len() >= 2 {
            out.push((g, c));
        }
    }
    out
}

fn win2(red: &[u32], full: u32, free: &[(u8, u8)]) -> Option<usize> {
    if let Some(&c) = completers(red, full, free).first() {
        return Some(c);
    }
    two_threats(red, full, free).first().map(|(g, _)| *g)
}

fn remove(free: &[(u8, u8)], i: usize) -> Vec<(u8, u8)> {
    let mut f = free.to_vec();
    f.remove(i);
    f
}

fn win3(red: &[u32], full: u32, free: &[(u8, u8)]) -> Option<usize> {
    if let Some(g) = win2(red, full, free) {
        return Some(g);
    }
    for e in 0..free.len() {
        let r = with(red, free[e]);
        let fe = remove(free, e);
        let c = completers(&r, full, &fe);
        match c.len() {
            0 => {}
            1 => {
                if win2(&r, full, &remove(&fe, c[0])).is_some() {
                    return Some(e);
                }
                continue;
            }
            _ => return Some(e),
        }
        // Blue's reply is free; it must hit every two-threat follow-up.
        let good = two_threats(&r, full, &fe);
        if good.is_empty() {
            continue;
        }
        let hits = |f: usize, (g, cs): &(usize, Vec<usize>)| f == *g || (cs.len() == 2 && cs.contains(&f));
        let mut killers: Vec<usize> = std::iter::once(good[0].0).chain(if good[0].1.len() == 2 { good[0].1.clone() } else { vec![] }).collect();
        killers.retain(|&f| good.iter().all(|x| hits(f, x)));
        if killers.is_empty() {
            return Some(e);
        }
    }
    None
}

impl Local {
    fn new(target: &[Vertex]) -> Option<Local> {
        if target.len() > FORCED_LIMIT || target.len() % 2 == 1 {
            return None;
        }
        let mut verts = target.to_vec();
        verts.sort_unstable();
        verts.dedup();
        let full = if verts.len() == 32 { u32::MAX } else { (1u32 << verts.len()) - 1 };
        Some(Local { verts, full })
    }

    fn idx(&self, v: Vertex) -> Option<u8> {
        self.verts.binary_search(&v).ok().map(|i| i as u8)
    }
}

/// A Red move on `target` that completes a perfect matching within
/// `max_moves ≤ 3` Red moves whatever Blue does, with the number of moves
/// needed. `None` if Red already has one, or no such move exists.
pub fn forced_finish(board: &Board, target: &[Vertex], max_moves: usize) -> Option<(Edge, usize)> {
    let loc = Local::new(target)?;
    let k = loc.verts.len();
    let mut red = vec![0u32; k];
    for e in board.edges_within(Player::Red, &loc.verts) {
        let (a, b) = (loc.idx(e.u())?, loc.idx(e.v())?);
        red[a as usize] |= 1 << b;
        red[b as usize] |= 1 << a;
    }
    if pm(&red, loc.full) {
        return None;
    }
    let mut free = Vec::new();
    for (i, &a) in loc.verts.iter().enumerate() {
        for (j, &b) in loc.verts.iter().enumerate().skip(i + 1) {
            if board.is_free(a, b) {
                free.push((i as u8, j as u8));
            }
        }
    }
    let edge = |i: usize| Edge::new(loc.verts[free[i].0 as usize], loc.verts[free[i].1 as usize]);
    if let Some(&c) = completers(&red, loc.full, &free).first() {
        return Some((edge(c), 1));
    }
    if max_moves >= 2 {
        if let Some((g, _)) = two_threats(&red, loc.full, &free).first() {
            return Some((edge(*g), 2));
        }
    }
    if max_moves >= 3 && free.len() <= DEEP_LIMIT {
        if let Some(e) = win3(&red, loc.full, &free) {
            return Some((edge(e), 3));
        }
    }
    None
}
