//! The staged strategy for building a perfect matching of a clique `H` that
//! Blue has already touched.
//!
//! Stage I claims one edge chosen around Blue's position: next to Blue's
//! edge inside `H` if there is one, otherwise away from a trap vertex `u`
//! that Blue has touched from outside. Stage II adds one matching edge per
//! move while keeping at most one H-distinct vertex (uncovered by Red,
//! touched by Blue inside `H`). Stage III covers the last two vertices with
//! at most three edges. If Blue has a vertex of degree two inside `H` at the
//! checkpoint, Stage M hands the uncovered vertices to the weak strategy.

use serde::{Deserialize, Serialize};

use crate::board::{Board, Player};
use crate::error::StrategyError;
use crate::graph::{Edge, Vertex};
use crate::strategy::finisher::finisher_next;
use crate::strategy::forced::forced_finish;
use crate::strategy::weak::{sweak_next, WeakState};
use crate::strategy::{blue_max_degree, contains, h_distinct, red_free, red_has_pm, sorted, Stage, Step};

/// Which opening the plan uses: the trap-aware one, or the plain one used
/// on boards Blue has not touched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Strong,
    Empty,
}

/// The subboard as the strategy sees it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HView {
    pub h: Vec<Vertex>,
    /// Vertices Stage I–II may cover; `H` minus the trap until the trap is
    /// lifted.
    pub u: Vec<Vertex>,
    pub trap: Option<Vertex>,
    /// Clique containing `H` from which Stage III may borrow Red edges.
    pub scope: Vec<Vertex>,
}

impl HView {
    pub fn new(h: Vec<Vertex>) -> Self {
        let h = sorted(h);
        HView { u: h.clone(), scope: h.clone(), h, trap: None }
    }

    pub fn with_scope(h: Vec<Vertex>, scope: Vec<Vertex>) -> Self {
        let mut v = HView::new(h);
        v.scope = sorted(scope);
        v
    }

    pub fn m(&self) -> usize {
        self.h.len()
    }

    fn restrict(&mut self, trap: Vertex) {
        self.trap = Some(trap);
        self.u = self.h.iter().copied().filter(|&v| v != trap).collect();
    }

    fn lift(&mut self) {
        self.u = self.h.clone();
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Maneuver {
    x: Vertex,
    y: Vertex,
    u: Vertex,
    v: Vertex,
    w: Vertex,
    z: Vertex,
    step: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AStrongState {
    pub view: HView,
    pub kind: Kind,
    pub stage: Stage,
    /// Red moves made by this plan.
    pub j: usize,
    pub distinct_watch: Option<Vertex>,
    /// Whether the distinct count has reached one.
    pub reached_one: bool,
    pub weak: Option<WeakState>,
    fixed_trap: Option<Vertex>,
    checkpoint_done: bool,
    maneuver: Option<Maneuver>,
    /// Stage III is following the exact short search instead of a maneuver.
    searching: bool,
}

impl AStrongState {
    pub fn new(view: HView) -> Self {
        AStrongState {
            view,
            kind: Kind::Strong,
            stage: Stage::I,
            j: 0,
            distinct_watch: None,
            reached_one: false,
            weak: None,
            fixed_trap: None,
            checkpoint_done: false,
            maneuver: None,
            searching: false,
        }
    }

    /// Stage I uses `trap` instead of searching for a touched vertex.
    pub fn with_trap(view: HView, trap: Vertex) -> Self {
        AStrongState { fixed_trap: Some(trap), ..AStrongState::new(view) }
    }

    pub fn empty(view: HView) -> Self {
        AStrongState { kind: Kind::Empty, ..AStrongState::new(view) }
    }

    /// Continues in Stage II after `j` Red edges were placed by someone else.
    pub fn resume(view: HView, kind: Kind, j: usize, watch: Option<Vertex>) -> Self {
        let mut st = AStrongState { kind, j, ..AStrongState::new(view) };
        st.distinct_watch = watch;
        if watch.is_some() {
            st.reached_one = true;
            st.view.lift();
        }
        st.advance_after_matching_move();
        st
    }

    pub fn m(&self) -> usize {
        self.view.m()
    }

    /// Red move after which Stage M may be entered.
    pub fn checkpoint(&self) -> usize {
        self.m() / 4 + 2
    }

    fn advance_after_matching_move(&mut self) {
        self.stage = if self.j + 1 >= self.m() / 2 { Stage::III } else { Stage::II };
    }

    /// The plan has claimed its last edge, or Red already owns a perfect
    /// matching of `H`.
    pub fn is_complete(&self, board: &Board) -> bool {
        self.stage == Stage::Done
            || red_has_pm(board, &self.view.h)
            || (self.stage == Stage::Fallback && red_has_pm(board, &self.fallback_target(board)))
    }

    /// `H` if no Red edge leaves it inside the scope, else the whole scope.
    fn fallback_target(&self, board: &Board) -> Vec<Vertex> {
        let leaves = self.view.h.iter().any(|&v| {
            board.neighbors(Player::Red, v).iter().any(|&w| !contains(&self.view.h, w) && contains(&self.view.scope, w))
        });
        if leaves || self.view.h.len() % 2 == 1 {
            self.view.scope.clone()
        } else {
            self.view.h.clone()
        }
    }

    /// Whether Stage III has already started rerouting.
    pub fn in_maneuver(&self) -> bool {
        self.maneuver.is_some()
    }

    /// Adds imported vertices to `H`, `U` and the scope.
    pub fn absorb(&mut self, vs: &[Vertex]) {
        for set in [&mut self.view.h, &mut self.view.u, &mut self.view.scope] {
            set.extend_from_slice(vs);
            set.sort_unstable();
            set.dedup();
        }
    }

    /// Marks the plan finished after an edge placed by the caller.
    pub fn finish(&mut self) {
        self.stage = Stage::Done;
    }

    /// Restarts Stage III from scratch, for a caller that changed `H`.
    pub fn restart_stage3(&mut self) {
        self.maneuver = None;
        self.stage = Stage::III;
    }

    pub fn maneuver_vertices(&self) -> Option<[Vertex; 6]> {
        self.maneuver.map(|m| [m.x, m.y, m.u, m.v, m.w, m.z])
    }
}

/// Next Red move on `H`. Failures inside Stages II, III and M switch the
/// plan to the fallback finisher instead of surfacing.
pub fn astrong_next(board: &Board, st: &mut AStrongState) -> Result<Step, StrategyError> {
    let res = match st.stage {
        Stage::I => return stage1(board, st),
        Stage::II => {
            let cp = st.checkpoint();
            if !st.checkpoint_done && st.j == cp && cp < st.m() / 2 {
                st.checkpoint_done = true;
                if blue_max_degree(board, &st.view.h) > 1 {
                    enter_stage_m(board, st);
                    return astrong_next(board, st);
                }
            }
            stage2_keep_distinct(board, st)
        }
        Stage::III => stage3_finish(board, st),
        Stage::M => stage_m_next(board, st),
        Stage::Fallback => {
            let target = st.fallback_target(board);
            return finisher_next(board, &target).inspect(|_| st.j += 1);
        }
        Stage::Done | Stage::Weak | Stage::Import => {
            return Err(StrategyError::NoLegalMove(format!("plan is in stage {}", st.stage.tag())))
        }
    };
    match res {
        Ok(s) => Ok(s),
        Err(StrategyError::PreconditionViolated(e)) => Err(StrategyError::PreconditionViolated(e)),
        Err(_) => {
            st.stage = Stage::Fallback;
            astrong_next(board, st)
        }
    }
}

fn smallest_free<I: IntoIterator<Item = (Vertex, Vertex)>>(board: &Board, pairs: I) -> Option<Edge> {
    pairs.into_iter().filter(|&(a, b)| board.is_free(a, b)).map(|(a, b)| Edge::new(a, b)).min()
}

fn pairs_within(set: &[Vertex]) -> Vec<(Vertex, Vertex)> {
    let mut out = Vec::new();
    for (i, &a) in set.iter().enumerate() {
        for &b in &set[i + 1..] {
            out.push((a, b));
        }
    }
    out
}

fn pairs_between(a: &[Vertex], b: &[Vertex]) -> Vec<(Vertex, Vertex)> {
    a.iter().flat_map(|&x| b.iter().filter(move |&&y| y != x).map(move |&y| (x, y))).collect()
}

fn stage1(board: &Board, st: &mut AStrongState) -> Result<Step, StrategyError> {
    let h = st.view.h.clone();
    if h.len() < 2 {
        return Err(StrategyError::PreconditionViolated(format!("|H| = {}", h.len())));
    }
    let free = red_free(board, &h);
    let edge = match st.kind {
        Kind::Empty => smallest_free(board, pairs_within(&free)),
        Kind::Strong => {
            let inside = board.edges_within(Player::Blue, &h);
            match inside.as_slice() {
                [xy] => {
                    let (x, y) = xy.ends();
                    let z: Vec<Vertex> = free.iter().copied().filter(|&z| z != x && z != y).collect();
                    let mut cands = Vec::new();
                    for end in [x, y] {
                        if contains(&free, end) {
                            cands.extend(z.iter().map(|&z| (end, z)));
                        }
                    }
                    let e = smallest_free(board, cands);
                    if let Some(e) = e {
                        let other = if e.touches(x) { y } else { x };
                        if contains(&free, other) {
                            st.distinct_watch = Some(other);
                            st.reached_one = true;
                        }
                    }
                    e
                }
                [] => {
                    let trap = st
                        .fixed_trap
                        .or_else(|| h.iter().copied().find(|&v| board.degree(Player::Blue, v) >= 1))
                        .ok_or_else(|| StrategyError::PreconditionViolated("no vertex of H is touched by Blue".into()))?;
                    st.view.restrict(trap);
                    let allowed: Vec<Vertex> = free.iter().copied().filter(|&v| v != trap).collect();
                    smallest_free(board, pairs_within(&allowed))
                }
                _ => {
                    return Err(StrategyError::PreconditionViolated(format!("Blue owns {} edges inside H", inside.len())))
                }
            }
        }
    };
    let edge = match edge {
        Some(e) => e,
        None => {
            st.stage = Stage::Fallback;
            return astrong_next(board, st);
        }
    };
    st.j = 1;
    if h.len() == 2 {
        st.stage = Stage::Done;
    } else {
        st.advance_after_matching_move();
    }
    Ok(Step::new(edge, Stage::I))
}

/// One Stage II move: extend Red's matching by an edge that leaves at most
/// one H-distinct vertex.
pub fn stage2_keep_distinct(board: &Board, st: &mut AStrongState) -> Result<Step, StrategyError> {
    let h = &st.view.h;
    let d = h_distinct(board, h);
    let free = red_free(board, h);
    let clean: Vec<Vertex> = free.iter().copied().filter(|v| !d.contains(v)).collect();
    let allowed: Vec<Vertex> = clean.iter().copied().filter(|&v| contains(&st.view.u, v)).collect();
    let exhausted = |what: &str| StrategyError::CaseExhausted(format!("{what} with D = {d:?}"));

    let (edge, keep) = match d.len() {
        0 => (smallest_free(board, pairs_within(&allowed)).ok_or_else(|| exhausted("no clean edge"))?, None),
        1 => (smallest_free(board, pairs_within(&clean)).ok_or_else(|| exhausted("no clean edge"))?, Some(d[0])),
        2 => {
            let keeps: Vec<Vertex> = match (st.distinct_watch, st.view.trap) {
                (Some(w), _) if d.contains(&w) => vec![w],
                (_, Some(t)) if d.contains(&t) => vec![t],
                _ => d.clone(),
            };
            keeps
                .iter()
                .filter_map(|&k| {
                    let w = if d[0] == k { d[1] } else { d[0] };
                    smallest_free(board, pairs_between(&[w], &allowed)).map(|e| (e, Some(k)))
                })
                .min()
                .ok_or_else(|| exhausted("cannot cover the new distinct vertex"))?
        }
        3 => {
            let old = st.distinct_watch.filter(|w| d.contains(w)).ok_or_else(|| exhausted("three new distinct vertices"))?;
            let new: Vec<Vertex> = d.iter().copied().filter(|&v| v != old).collect();
            let e = smallest_free(board, pairs_between(&[old], &new)).ok_or_else(|| exhausted("both old-new edges taken"))?;
            let rest = if e.touches(new[0]) { new[1] } else { new[0] };
            (e, Some(rest))
        }
        _ => return Err(exhausted("too many distinct vertices")),
    };
    if let Some(k) = keep {
        st.distinct_watch = Some(k);
        st.reached_one = true;
        st.view.lift();
    }
    st.j += 1;
    st.advance_after_matching_move();
    Ok(Step::new(edge, Stage::II))
}

/// Red edges `uv` inside `set` whose ends have no other Red edge in `scope`.
fn matching_edges(board: &Board, set: &[Vertex], scope: &[Vertex], skip: &[Vertex]) -> Vec<Edge> {
    board
        .edges_within(Player::Red, set)
        .into_iter()
        .filter(|e| !skip.contains(&e.u()) && !skip.contains(&e.v()))
        .filter(|e| board.degree_within(Player::Red, e.u(), scope) == 1 && board.degree_within(Player::Red, e.v(), scope) == 1)
        .collect()
}

fn select_pair(board: &Board, st: &AStrongState, x: Vertex, y: Vertex) -> Option<Maneuver> {
    let skip = [x, y];
    let mut cands = matching_edges(board, &st.view.h, &st.view.scope, &skip);
    if st.view.scope.len() > st.view.h.len() {
        let inner = cands.clone();
        cands.extend(matching_edges(board, &st.view.scope, &st.view.scope, &skip).into_iter().filter(|e| !inner.contains(e)));
    }
    for (i, &e1) in cands.iter().enumerate() {
        for &e2 in &cands[i + 1..] {
            let six = [x, y, e1.u(), e1.v(), e2.u(), e2.v()];
            let ok = (0..6).all(|a| {
                (a + 1..6).all(|b| {
                    let (p, q) = (six[a], six[b]);
                    ((p, q) == (x, y) || (p, q) == (y, x)) || (board.graph().has_edge(p, q) && !board.has(Player::Blue, p, q))
                })
            });
            if ok {
                return Some(Maneuver { x, y, u: e1.u(), v: e1.v(), w: e2.u(), z: e2.v(), step: 0 });
            }
        }
    }
    None
}

/// Stage III: cover the two vertices `x, y` left uncovered. Claims `xy`
/// when free; otherwise reroutes through two Red edges `uv, wz` with `yu`,
/// then `xv` or `xz`, then `wy` or `wv`.
pub fn stage3_finish(board: &Board, st: &mut AStrongState) -> Result<Step, StrategyError> {
    if st.searching {
        return searched(board, st).ok_or_else(|| StrategyError::NoLegalMove("no forced finish left".into()));
    }
    let Some(mv) = st.maneuver else {
        let free = red_free(board, &st.view.h);
        let [a, b] = free[..] else {
            return Err(StrategyError::SelectionFailure(format!("{} uncovered vertices in stage III", free.len())));
        };
        if board.is_free(a, b) {
            st.j += 1;
            st.stage = Stage::Done;
            return Ok(Step::new(Edge::new(a, b), Stage::III));
        }
        let pick = |v: Vertex| st.distinct_watch == Some(v) || st.view.trap == Some(v);
        let (x, y) = if pick(b) && !pick(a) {
            (b, a)
        } else if pick(a) || board.degree_within(Player::Blue, a, &st.view.h) >= board.degree_within(Player::Blue, b, &st.view.h) {
            (a, b)
        } else {
            (b, a)
        };
        let Some(mv) = select_pair(board, st, x, y).or_else(|| select_pair(board, st, y, x)) else {
            st.searching = true;
            return searched(board, st).ok_or_else(|| StrategyError::SelectionFailure(format!("no Red pair around {x},{y}")));
        };
        st.maneuver = Some(Maneuver { step: 1, ..mv });
        st.j += 1;
        return Ok(Step::new(Edge::new(mv.y, mv.u), Stage::III));
    };
    let blocked = || StrategyError::NoLegalMove("stage III threats all blocked".into());
    let edge = match mv.step {
        1 if board.is_free(mv.x, mv.v) => {
            st.stage = Stage::Done;
            Edge::new(mv.x, mv.v)
        }
        1 if board.is_free(mv.x, mv.z) => {
            st.maneuver = Some(Maneuver { step: 2, ..mv });
            Edge::new(mv.x, mv.z)
        }
        2 => {
            let e = [(mv.w, mv.y), (mv.w, mv.v)].into_iter().find(|&(p, q)| board.is_free(p, q)).ok_or_else(blocked)?;
            st.stage = Stage::Done;
            Edge::new(e.0, e.1)
        }
        _ => {
            st.maneuver = None;
            st.searching = true;
            return searched(board, st).ok_or_else(blocked);
        }
    };
    st.j += 1;
    Ok(Step::new(edge, Stage::III))
}

/// A move from the exact search for a perfect matching of `H` that Blue
/// cannot stop within three Red moves.
fn searched(board: &Board, st: &mut AStrongState) -> Option<Step> {
    let (e, d) = forced_finish(board, &st.view.h, 3)?;
    st.j += 1;
    if d == 1 {
        st.stage = Stage::Done;
        st.searching = false;
    }
    Some(Step::new(e, Stage::III))
}

fn enter_stage_m(board: &Board, st: &mut AStrongState) {
    let h = st.view.h.clone();
    let ih = red_free(board, &h);
    let pool = board.edges_within(Player::Red, &h);
    st.weak = Some(WeakState::borrowing(h, ih, pool));
    st.stage = Stage::M;
}

/// Stage M: the weak strategy on the Red-uncovered part of `H`, borrowing
/// one of Red's matching edges as the cherry base.
pub fn stage_m_next(board: &Board, st: &mut AStrongState) -> Result<Step, StrategyError> {
    let weak = st.weak.as_mut().ok_or_else(|| StrategyError::Parity("stage M without a weak plan".into()))?;
    if weak.scope.len() % 2 == 1 {
        return Err(StrategyError::Parity(format!("|I_H| = {} is odd", weak.scope.len())));
    }
    let s = sweak_next(board, weak)?;
    if weak.done {
        st.stage = Stage::Done;
    }
    st.j += 1;
    Ok(Step::new(s.edge, Stage::M))
}
