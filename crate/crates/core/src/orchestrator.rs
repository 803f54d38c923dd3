//! Red's global strategy: plays one subboard of a cyclic partition at a
//! time, answers Blue's attacks on untouched subboards as they happen, and
//! keeps a per-subboard ledger of Blue's wasted moves.
//!
//! Dispatch on every Red turn:
//! 1. Blue's last edge lies in a dangerous subboard: answer there.
//! 2. Otherwise continue on the smallest active subboard.
//! 3. Otherwise open the first subboard that is not yet safe, choosing the
//!    empty, trap or final-board plan from Blue's position on it.

use serde::{Deserialize, Serialize};

use crate::board::{Board, Player};
use crate::error::StrategyError;
use crate::graph::{Edge, Vertex};
use crate::matching::{has_perfect_matching_of, matching_number};
use crate::partition::Partition;
use crate::strategy::{
    astrong_next, contains, finisher_next, h_distinct, red_has_pm, sorted, sweak_next, wasted_within, AStrongState, HView,
    Kind, Stage, Step, WeakState,
};

/// Largest subboard on which the dangerous split is found by enumeration.
const SPLIT_ENUM_LIMIT: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Inactive,
    Active,
    Safe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chosen {
    Empty,
    Trap,
    Dangerous,
    WeakFinal,
    AstrongFinal,
}

impl Chosen {
    pub fn tag(self) -> &'static str {
        match self {
            Chosen::Empty => "empty",
            Chosen::Trap => "trap",
            Chosen::Dangerous => "dangerous",
            Chosen::WeakFinal => "weak_final",
            Chosen::AstrongFinal => "astrong_final",
        }
    }
}

#[derive(Clone, Debug)]
struct Import {
    c: Vertex,
    d: Vertex,
    p: Vertex,
    q: Vertex,
}

#[derive(Clone, Debug)]
struct EmptyPlan {
    inner: AStrongState,
    import: Option<Import>,
    import_tried: bool,
}

#[derive(Clone, Debug)]
struct SplitPlan {
    u_set: Vec<Vertex>,
    w_set: Vec<Vertex>,
    u: AStrongState,
    w: Option<AStrongState>,
}

#[derive(Clone, Debug)]
enum Plan {
    None,
    Empty(Box<EmptyPlan>),
    Strong(Box<AStrongState>),
    Split(Box<SplitPlan>),
    Weak(Box<WeakState>),
    /// Final board, Blue owns a perfect matching of the rest: Red opened
    /// with `ab` and waits for Blue's reply.
    FinalAb(Edge),
    Finisher,
}

#[derive(Clone, Debug)]
pub struct SubboardState {
    pub vertices: Vec<Vertex>,
    pub status: Status,
    pub dangerous: bool,
    pub chosen: Option<Chosen>,
    /// 1 once Blue has wasted a move inside this subboard.
    pub w: u8,
    pub blue_wasted: usize,
    pub imported: Vec<Vertex>,
    plan: Plan,
}

impl SubboardState {
    fn new(vertices: Vec<Vertex>) -> Self {
        SubboardState {
            vertices: sorted(vertices),
            status: Status::Inactive,
            dangerous: false,
            chosen: None,
            w: 0,
            blue_wasted: 0,
            imported: Vec::new(),
            plan: Plan::None,
        }
    }

    /// Trap vertices of the plans running on this subboard.
    pub fn traps(&self) -> Vec<Vertex> {
        match &self.plan {
            Plan::Empty(ep) => ep.inner.view.trap.into_iter().collect(),
            Plan::Strong(st) => st.view.trap.into_iter().collect(),
            Plan::Split(sp) => sp.u.view.trap.into_iter().chain(sp.w.as_ref().and_then(|w| w.view.trap)).collect(),
            _ => Vec::new(),
        }
    }

    pub fn plan_name(&self) -> &'static str {
        match self.plan {
            Plan::None => "none",
            Plan::Empty(_) => "empty",
            Plan::Strong(_) => "astrong",
            Plan::Split(_) => "split",
            Plan::Weak(_) => "weak",
            Plan::FinalAb(_) => "final_ab",
            Plan::Finisher => "finisher",
        }
    }
}

/// Per-move record attached to Red's moves in the transcript.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotation {
    /// 1-based subboard index.
    pub board: usize,
    pub strategy: String,
    pub stage: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distinct: Option<usize>,
    pub dangerous: bool,
    /// 1-based subboards whose ledger bit is set.
    pub w: Vec<usize>,
    pub red_wasted: usize,
    pub blue_wasted: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub import: Option<[Vertex; 2]>,
    #[serde(default)]
    pub fallback: bool,
}

#[derive(Clone, Debug)]
pub struct RedMove {
    pub edge: Edge,
    pub annotation: Annotation,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RedError {
    #[error("red forfeits: {0}")]
    Forfeit(String),
    #[error("configuration rejected: {0}")]
    ConfigurationRejected(String),
}

#[derive(Clone, Debug)]
pub struct RedState {
    pub boards: Vec<SubboardState>,
    board_of: Vec<usize>,
    pub forfeit_budget: usize,
    pub moves_made: usize,
    pub fallback_moves: usize,
}

impl RedState {
    /// Rejects partitions that do not cover `0..n` or have a part smaller
    /// than `min_size`.
    pub fn new(partition: &Partition, n: usize, min_size: usize) -> Result<Self, RedError> {
        if n % 2 == 1 {
            return Err(RedError::ConfigurationRejected(format!("n = {n} is odd")));
        }
        let mut board_of = vec![usize::MAX; n];
        for (i, part) in partition.parts.iter().enumerate() {
            if part.len() < min_size {
                return Err(RedError::ConfigurationRejected(format!(
                    "part {} has {} vertices, below the minimum {min_size}",
                    i + 1,
                    part.len()
                )));
            }
            for &v in part {
                let slot = board_of.get_mut(v as usize).ok_or_else(|| RedError::ConfigurationRejected(format!("vertex {v} out of range")))?;
                if *slot != usize::MAX {
                    return Err(RedError::ConfigurationRejected(format!("vertex {v} in two parts")));
                }
                *slot = i;
            }
        }
        if let Some(v) = board_of.iter().position(|&b| b == usize::MAX) {
            return Err(RedError::ConfigurationRejected(format!("vertex {v} is in no part")));
        }
        let t = partition.parts.len();
        Ok(RedState {
            boards: partition.parts.iter().cloned().map(SubboardState::new).collect(),
            board_of,
            forfeit_budget: n / 2 + 4 * t,
            moves_made: 0,
            fallback_moves: 0,
        })
    }

    pub fn t(&self) -> usize {
        self.boards.len()
    }

    pub fn board_of(&self, v: Vertex) -> usize {
        self.board_of[v as usize]
    }

    /// Subboard whose edges contain `e`, if both ends share one.
    pub fn board_containing(&self, e: Edge) -> Option<usize> {
        let i = self.board_of(e.u());
        (i == self.board_of(e.v())).then_some(i)
    }

    /// Subboard Red will play on next unless Blue makes another one
    /// dangerous.
    pub fn current_board(&self) -> Option<usize> {
        self.boards
            .iter()
            .position(|b| b.status == Status::Active)
            .or_else(|| self.boards.iter().position(|b| b.status != Status::Safe))
    }

    pub fn red_first_move(&mut self, board: &Board) -> Result<RedMove, RedError> {
        self.check_budget()?;
        self.boards[0].chosen = Some(Chosen::Empty);
        self.boards[0].plan = Plan::Empty(Box::new(EmptyPlan {
            inner: AStrongState::empty(HView::new(self.boards[0].vertices.clone())),
            import: None,
            import_tried: false,
        }));
        self.play_on(board, 0, None)
    }

    /// Red's answer to Blue's `blue` edge, which must already be on `board`.
    pub fn red_respond(&mut self, board: &Board, blue: Edge) -> Result<RedMove, RedError> {
        self.check_budget()?;
        self.update_wasted_ledger(board, blue);
        if let Some(i) = self.board_containing(blue) {
            if self.boards[i].dangerous && self.boards[i].status != Status::Safe {
                if matches!(self.boards[i].plan, Plan::None) {
                    self.boards[i].chosen = Some(Chosen::Dangerous);
                    return self.open_dangerous(board, i);
                }
                return self.play_on(board, i, Some(blue));
            }
        }
        if let Some(i) = self.boards.iter().position(|b| b.status == Status::Active) {
            return self.play_on(board, i, Some(blue));
        }
        let k = self
            .boards
            .iter()
            .position(|b| b.status != Status::Safe)
            .ok_or_else(|| RedError::Forfeit("every subboard is safe but the game is not over".into()))?;
        self.open(board, k)
    }

    /// Records Red's `edge` after the referee has claimed it.
    pub fn commit(&mut self, board: &Board, edge: Edge) {
        self.moves_made += 1;
        let (a, b) = (self.board_of(edge.u()), self.board_of(edge.v()));
        self.refresh(board, a);
        if b != a {
            self.refresh(board, b);
        }
    }

    /// Updates the ledger after Blue's `edge`; returns the subboards whose
    /// bit flipped to 1.
    pub fn update_wasted_ledger(&mut self, board: &Board, edge: Edge) -> Vec<usize> {
        match self.board_containing(edge) {
            Some(i) => self.recount(board, i).into_iter().collect(),
            None => Vec::new(),
        }
    }

    fn recount(&mut self, board: &Board, i: usize) -> Option<usize> {
        let sb = &mut self.boards[i];
        sb.blue_wasted = wasted_within(board, Player::Blue, &sb.vertices);
        if sb.blue_wasted > 0 && sb.w == 0 {
            sb.w = 1;
            if sb.status == Status::Inactive {
                sb.dangerous = true;
            }
            return Some(i);
        }
        None
    }

    fn refresh(&mut self, board: &Board, i: usize) {
        let sb = &mut self.boards[i];
        sb.status = if red_has_pm(board, &sb.vertices) {
            sb.dangerous = false;
            Status::Safe
        } else if sb.vertices.iter().any(|&v| board.degree_within(Player::Red, v, &sb.vertices) > 0) {
            Status::Active
        } else {
            Status::Inactive
        };
    }

    fn check_budget(&self) -> Result<(), RedError> {
        if self.moves_made >= self.forfeit_budget {
            return Err(RedError::Forfeit(format!("move budget {} spent", self.forfeit_budget)));
        }
        Ok(())
    }

    /// Rule 3: choose a plan for subboard `k`, all earlier ones being safe.
    fn open(&mut self, board: &Board, k: usize) -> Result<RedMove, RedError> {
        let t = self.t();
        let vs = self.boards[k].vertices.clone();
        let inside = board.edges_within(Player::Blue, &vs).len();
        let touched = vs.iter().any(|&v| board.degree(Player::Blue, v) > 0);
        let last = k + 1 == t;
        if k == 0 || (!last && inside == 0) {
            self.boards[k].chosen = Some(Chosen::Empty);
            self.boards[k].plan = Plan::Empty(Box::new(EmptyPlan {
                inner: AStrongState::empty(HView::new(vs)),
                import: None,
                import_tried: false,
            }));
            return self.play_on(board, k, None);
        }
        if !last || touched {
            self.boards[k].chosen = Some(Chosen::Trap);
            if inside >= 2 {
                return self.open_dangerous(board, k);
            }
            self.boards[k].plan = Plan::Strong(Box::new(AStrongState::new(HView::new(vs))));
            return self.play_on(board, k, None);
        }
        let rest: Vec<Vertex> = (0..board.n() as Vertex).filter(|v| !contains(&vs, *v)).collect();
        let rest_edges = board.edges_of(Player::Blue);
        let blue_pm_rest = has_perfect_matching_of(&rest_edges, &rest).unwrap_or(false);
        if !blue_pm_rest {
            self.boards[k].chosen = Some(Chosen::WeakFinal);
            self.boards[k].plan = Plan::Weak(Box::new(WeakState::new(vs)));
            return self.play_on(board, k, None);
        }
        self.boards[k].chosen = Some(Chosen::AstrongFinal);
        let ab = crate::strategy::free_edges_within(board, &vs)
            .into_iter()
            .next()
            .ok_or_else(|| RedError::Forfeit("final subboard has no free edge".into()))?;
        self.boards[k].plan = Plan::FinalAb(ab);
        Ok(self.annotate(board, k, Step::new(ab, Stage::I), None))
    }

    /// First answer on a subboard where Blue owns two or more edges: the
    /// path shortcut when Blue's edges form a single path `x–y–z`,
    /// otherwise the split into two halves.
    fn open_dangerous(&mut self, board: &Board, i: usize) -> Result<RedMove, RedError> {
        let vs = self.boards[i].vertices.clone();
        let blue = board.edges_within(Player::Blue, &vs);
        if let [e1, e2] = blue[..] {
            if e1.shares_vertex(e2) {
                let y = if e2.touches(e1.u()) { e1.u() } else { e1.v() };
                let (x, z) = (e1.other(y), e2.other(y));
                if board.is_free(x, z) {
                    self.boards[i].plan = Plan::Strong(Box::new(AStrongState::resume(HView::new(vs), Kind::Strong, 1, Some(y))));
                    return Ok(self.annotate(board, i, Step::new(Edge::new(x, z), Stage::I), None));
                }
            }
        }
        match split_board(board, &vs) {
            Ok((u_set, w_set)) => {
                let mut u = AStrongState::new(HView::with_scope(u_set.clone(), vs.clone()));
                match astrong_next(board, &mut u) {
                    Ok(step) => {
                        let anchor = u.distinct_watch.or(u.view.trap);
                        let w = Some(w_plan(board, &w_set, &vs, anchor, step.edge));
                        self.boards[i].plan = Plan::Split(Box::new(SplitPlan { u_set, w_set, u, w }));
                        Ok(self.annotate(board, i, step, None))
                    }
                    Err(_) => self.fall_back(board, i),
                }
            }
            Err(_) => self.fall_back(board, i),
        }
    }

    fn fall_back(&mut self, board: &Board, i: usize) -> Result<RedMove, RedError> {
        self.boards[i].plan = Plan::Finisher;
        let step = finisher_next(board, &self.boards[i].vertices).map_err(|e| RedError::Forfeit(e.to_string()))?;
        Ok(self.annotate(board, i, step, None))
    }

    fn play_on(&mut self, board: &Board, i: usize, last_blue: Option<Edge>) -> Result<RedMove, RedError> {
        let mut plan = std::mem::replace(&mut self.boards[i].plan, Plan::None);
        let res = self.run_plan(board, i, &mut plan, last_blue);
        self.boards[i].plan = plan;
        match res {
            Ok((step, import)) if board.is_free_edge(step.edge) => Ok(self.annotate(board, i, step, import)),
            _ => self.fall_back(board, i),
        }
    }

    fn run_plan(
        &mut self,
        board: &Board,
        i: usize,
        plan: &mut Plan,
        last_blue: Option<Edge>,
    ) -> Result<(Step, Option<[Vertex; 2]>), StrategyError> {
        let vs = self.boards[i].vertices.clone();
        match plan {
            Plan::None => Err(StrategyError::NoLegalMove("subboard has no plan".into())),
            Plan::Empty(ep) => self.empty_next(board, i, ep),
            Plan::Strong(st) => astrong_next(board, st).map(|s| (s, None)),
            Plan::Weak(ws) => sweak_next(board, ws).map(|s| (s, None)),
            Plan::Split(sp) => split_next(board, sp, last_blue).map(|s| (s, None)),
            Plan::FinalAb(ab) => {
                let ab = *ab;
                let inside = last_blue.is_some_and(|e| contains(&vs, e.u()) && contains(&vs, e.v()));
                *plan = if inside {
                    Plan::Strong(Box::new(AStrongState::resume(HView::new(vs.clone()), Kind::Strong, 1, None)))
                } else {
                    let scope = vs.iter().copied().filter(|&v| !ab.touches(v)).collect();
                    Plan::Weak(Box::new(WeakState::borrowing(vs.clone(), scope, vec![ab])))
                };
                self.run_plan(board, i, plan, last_blue)
            }
            Plan::Finisher => finisher_next(board, &vs).map(|s| (s, None)),
        }
    }

    /// The empty-board plan, with Stage III taken over when the last two
    /// vertices `c, d` are blocked: import a pair from the next subboard
    /// when that subboard is untouched by Red.
    fn empty_next(&mut self, board: &Board, i: usize, ep: &mut EmptyPlan) -> Result<(Step, Option<[Vertex; 2]>), StrategyError> {
        if let Some(imp) = ep.import.take() {
            if board.is_free(imp.d, imp.q) {
                ep.inner.finish();
                return Ok((Step::new(Edge::new(imp.d, imp.q), Stage::Import), None));
            }
            ep.inner.restart_stage3();
            return astrong_next(board, &mut ep.inner).map(|s| (s, None));
        }
        if ep.inner.stage == Stage::III && !ep.inner.in_maneuver() && !ep.import_tried {
            let free = crate::strategy::red_free(board, &ep.inner.view.h);
            if let [c, d] = free[..] {
                if board.is_free(c, d) {
                    ep.inner.finish();
                    return Ok((Step::new(Edge::new(c, d), Stage::III), None));
                }
                let next = i + 1;
                if next < self.t() && self.boards[next].status == Status::Inactive {
                    ep.import_tried = true;
                    if let Some(imp) = choose_import(board, &self.boards[i].vertices, &self.boards[next].vertices, c, d) {
                        let step = Step::new(Edge::new(imp.c, imp.p), Stage::Import);
                        let pair = [imp.p, imp.q];
                        self.move_vertices(board, next, i, &pair);
                        ep.inner.absorb(&pair);
                        ep.import = Some(imp);
                        return Ok((step, Some(pair)));
                    }
                }
            }
        }
        astrong_next(board, &mut ep.inner).map(|s| (s, None))
    }

    fn move_vertices(&mut self, board: &Board, from: usize, to: usize, vs: &[Vertex]) {
        for &v in vs {
            self.board_of[v as usize] = to;
        }
        self.boards[from].vertices.retain(|v| !vs.contains(v));
        let dst = &mut self.boards[to];
        dst.vertices.extend_from_slice(vs);
        dst.vertices.sort_unstable();
        dst.imported.extend_from_slice(vs);
        self.recount(board, from);
        self.recount(board, to);
    }

    fn annotate(&mut self, board: &Board, i: usize, step: Step, import: Option<[Vertex; 2]>) -> RedMove {
        let sb = &self.boards[i];
        let fallback = step.stage == Stage::Fallback || matches!(sb.plan, Plan::Finisher);
        if fallback {
            self.fallback_moves += 1;
        }
        let sb = &self.boards[i];
        let strategy = if matches!(sb.plan, Plan::Finisher) { "finisher" } else { sb.chosen.map_or("none", Chosen::tag) };
        // Fields describe the position after the move.
        let inside = contains(&sb.vertices, step.edge.u()) && contains(&sb.vertices, step.edge.v());
        let distinct = match &sb.plan {
            Plan::Empty(_) | Plan::Strong(_) | Plan::Split(_) => {
                Some(h_distinct(board, &sb.vertices).into_iter().filter(|&v| !(inside && step.edge.touches(v))).count())
            }
            _ => None,
        };
        let mut red = board.edges_within(Player::Red, &sb.vertices);
        if inside {
            red.push(step.edge);
        }
        let red_wasted = red.len() - matching_number(&red);
        let annotation = Annotation {
            board: i + 1,
            strategy: strategy.to_string(),
            stage: step.stage.tag().to_string(),
            distinct,
            dangerous: sb.dangerous,
            w: self.boards.iter().enumerate().filter(|(_, b)| b.w == 1).map(|(j, _)| j + 1).collect(),
            red_wasted,
            blue_wasted: sb.blue_wasted,
            import,
            fallback,
        };
        RedMove { edge: step.edge, annotation }
    }

    /// The annotation fields describing the whole state, for callers that
    /// want a snapshot between moves.
    pub fn snapshot_annotations(&self) -> Vec<(usize, Status, u8, usize)> {
        self.boards.iter().enumerate().map(|(i, b)| (i + 1, b.status, b.w, b.blue_wasted)).collect()
    }
}

/// Splits `vs` into halves `U`, `W` of even sizes differing by at most two
/// with at most one Blue edge inside a half; that edge, if any, goes to `U`.
/// Among admissible splits the one with fewest inside edges is taken.
pub fn split_board(board: &Board, vs: &[Vertex]) -> Result<(Vec<Vertex>, Vec<Vertex>), StrategyError> {
    let m = vs.len();
    if m > SPLIT_ENUM_LIMIT {
        return Err(StrategyError::SplitInfeasible(format!("{m} vertices is above the enumeration limit")));
    }
    let sizes: Vec<usize> = if m % 4 == 0 {
        vec![m / 2]
    } else if m % 2 == 0 {
        vec![m / 2 - 1, m / 2 + 1]
    } else {
        vec![m / 2, m / 2 + 1]
    };
    let blue: Vec<(u32, u32)> = board
        .edges_within(Player::Blue, vs)
        .iter()
        .map(|e| (vs.binary_search(&e.u()).unwrap() as u32, vs.binary_search(&e.v()).unwrap() as u32))
        .collect();
    let inside_of = |mask: u32| blue.iter().filter(|&&(a, b)| (mask >> a & 1) == (mask >> b & 1)).count();
    let mut best: Option<(usize, u32)> = None;
    for &k in &sizes {
        if k == 0 {
            continue;
        }
        let mut mask: u32 = (1u32 << k) - 1;
        let limit: u32 = 1u32 << m;
        while mask < limit {
            let inside = inside_of(mask);
            if best.is_none_or(|(bi, _)| inside < bi) {
                best = Some((inside, mask));
                if inside == 0 {
                    break;
                }
            }
            let c = mask & mask.wrapping_neg();
            let r = mask + c;
            mask = (((r ^ mask) >> 2) / c) | r;
        }
        if best.is_some_and(|(bi, _)| bi == 0) {
            break;
        }
    }
    let (inside, mut mask) = best.ok_or_else(|| StrategyError::SplitInfeasible("no sizes".into()))?;
    if inside > 1 {
        return Err(StrategyError::SplitInfeasible(format!("every split keeps {inside} Blue edges inside")));
    }
    if inside == 1 {
        let (a, _) = blue.iter().copied().find(|&(a, b)| (mask >> a & 1) == (mask >> b & 1)).unwrap();
        if mask >> a & 1 == 0 {
            mask = !mask & ((1u32 << m) - 1);
        }
    }
    let (u, w): (Vec<(usize, &Vertex)>, Vec<(usize, &Vertex)>) = vs.iter().enumerate().partition(|(j, _)| mask >> j & 1 == 1);
    Ok((u.into_iter().map(|(_, &v)| v).collect(), w.into_iter().map(|(_, &v)| v).collect()))
}

/// Plan for the second half: a trap `w` not joined by Blue to the first
/// half's anchor, preferring one Blue has touched.
fn w_plan(board: &Board, w_set: &[Vertex], scope: &[Vertex], anchor: Option<Vertex>, first: Edge) -> AStrongState {
    let view = HView::with_scope(w_set.to_vec(), scope.to_vec());
    if !board.edges_within(Player::Blue, w_set).is_empty() {
        return AStrongState::new(view);
    }
    let ok = |w: Vertex| anchor.is_none_or(|u| !board.has(Player::Blue, u, w)) && !first.touches(w);
    let trap = w_set
        .iter()
        .copied()
        .filter(|&w| ok(w))
        .min_by_key(|&w| (board.degree(Player::Blue, w) == 0, w))
        .unwrap_or(w_set[0]);
    AStrongState::with_trap(view, trap)
}

/// Routes a split subboard's move: to the half Blue just played in, else
/// to `U` until it is done, else to `W`.
fn split_next(board: &Board, sp: &mut SplitPlan, last_blue: Option<Edge>) -> Result<Step, StrategyError> {
    let inside = |set: &[Vertex]| last_blue.is_some_and(|e| contains(set, e.u()) && contains(set, e.v()));
    let u_done = sp.u.is_complete(board);
    let w_done = sp.w.as_ref().is_some_and(|w| w.is_complete(board));
    let to_u = if inside(&sp.u_set) && !u_done {
        true
    } else if inside(&sp.w_set) && !w_done {
        false
    } else {
        !u_done
    };
    if to_u {
        return astrong_next(board, &mut sp.u);
    }
    if w_done {
        return Err(StrategyError::NoLegalMove("both halves finished but the subboard is not".into()));
    }
    let w = sp.w.get_or_insert_with(|| AStrongState::new(HView::with_scope(sp.w_set.clone(), sp.u.view.scope.clone())));
    astrong_next(board, w)
}

/// Pair `p, q` of the next subboard with `cp`, `dq` free and `q` sending
/// fewer than `|V_i|/4` Blue edges into `V_i`. Prefers vertices Blue has not
/// touched inside their own subboard.
fn choose_import(board: &Board, here: &[Vertex], next: &[Vertex], c: Vertex, d: Vertex) -> Option<Import> {
    if next.len() < here.len().min(6) + 2 {
        return None;
    }
    let m = here.len();
    let mut best: Option<((usize, usize, Vertex, Vertex, Vertex), Import)> = None;
    for (c, d) in [(c, d), (d, c)] {
        for &p in next {
            if !board.is_free(c, p) {
                continue;
            }
            for &q in next {
                if q == p || !board.is_free(d, q) {
                    continue;
                }
                let into = board.degree_within(Player::Blue, q, here);
                if 4 * into >= m {
                    continue;
                }
                let local = board.degree_within(Player::Blue, p, next) + board.degree_within(Player::Blue, q, next);
                let key = (local, into, c, p, q);
                if best.as_ref().is_none_or(|(bk, _)| key < *bk) {
                    best = Some((key, Import { c, d, p, q }));
                }
            }
        }
    }
    best.map(|(_, imp)| imp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::partition::Partition;
    use std::sync::Arc;

    fn parts(t: usize, size: usize) -> Partition {
        Partition {
            parts: (0..t).map(|i| ((i * size) as Vertex..((i + 1) * size) as Vertex).collect()).collect(),
            half_marks: Vec::new(),
        }
    }

    fn kboard(n: usize) -> Board {
        Board::new(Arc::new(Graph::complete(n)))
    }

    fn red(st: &mut RedState, b: &mut Board, mv: RedMove) -> Edge {
        b.play(Player::Red, mv.edge).unwrap();
        st.commit(b, mv.edge);
        mv.edge
    }

    #[test]
    fn rejects_small_parts_and_odd_n() {
        assert!(matches!(RedState::new(&parts(2, 4), 8, 8), Err(RedError::ConfigurationRejected(_))));
        assert!(RedState::new(&parts(2, 4), 8, 4).is_ok());
        let mut p = parts(2, 4);
        p.parts[1].pop();
        assert!(RedState::new(&p, 7, 2).is_err());
    }

    #[test]
    fn first_move_is_empty_on_board_one() {
        let b = kboard(16);
        let mut st = RedState::new(&parts(2, 8), 16, 8).unwrap();
        let mv = st.red_first_move(&b).unwrap();
        assert_eq!(mv.annotation.board, 1);
        assert_eq!(mv.annotation.strategy, "empty");
        assert_eq!(mv.annotation.stage, "I");
        assert!(contains(&st.boards[0].vertices, mv.edge.u()) && contains(&st.boards[0].vertices, mv.edge.v()));
    }

    #[test]
    fn ledger_flips_once_on_a_path() {
        let mut b = kboard(16);
        let mut st = RedState::new(&parts(2, 8), 16, 8).unwrap();
        let e = st.red_first_move(&b).unwrap();
        red(&mut st, &mut b, e);
        b.play(Player::Blue, Edge::new(8, 9)).unwrap();
        assert!(st.update_wasted_ledger(&b, Edge::new(8, 9)).is_empty());
        let mv = st.red_respond(&b, Edge::new(8, 9)).unwrap();
        red(&mut st, &mut b, mv);
        b.play(Player::Blue, Edge::new(9, 10)).unwrap();
        assert_eq!(st.update_wasted_ledger(&b, Edge::new(9, 10)), vec![1]);
        assert!(st.boards[1].dangerous);
        assert_eq!(st.boards[1].w, 1);
        // A second waste does not flip again.
        b.play(Player::Red, Edge::new(0, 15)).unwrap();
        b.play(Player::Blue, Edge::new(8, 10)).unwrap();
        assert!(st.update_wasted_ledger(&b, Edge::new(8, 10)).is_empty());
        assert_eq!(st.boards[1].blue_wasted, 2);
    }

    #[test]
    fn cross_edges_do_not_touch_the_ledger() {
        let mut b = kboard(16);
        let mut st = RedState::new(&parts(2, 8), 16, 8).unwrap();
        b.play(Player::Red, Edge::new(0, 1)).unwrap();
        b.play(Player::Blue, Edge::new(2, 9)).unwrap();
        assert!(st.update_wasted_ledger(&b, Edge::new(2, 9)).is_empty());
        assert_eq!(st.boards[1].blue_wasted, 0);
    }

    #[test]
    fn dangerous_path_gets_its_chord() {
        let mut b = kboard(24);
        let mut st = RedState::new(&parts(3, 8), 24, 8).unwrap();
        let e = st.red_first_move(&b).unwrap();
        red(&mut st, &mut b, e);
        b.play(Player::Blue, Edge::new(16, 17)).unwrap();
        let mv = st.red_respond(&b, Edge::new(16, 17)).unwrap();
        assert_eq!(mv.annotation.board, 1);
        red(&mut st, &mut b, mv);
        b.play(Player::Blue, Edge::new(17, 18)).unwrap();
        let mv = st.red_respond(&b, Edge::new(17, 18)).unwrap();
        assert_eq!(mv.edge, Edge::new(16, 18));
        assert_eq!(mv.annotation.board, 3);
        assert_eq!(mv.annotation.strategy, "dangerous");
        assert!(mv.annotation.dangerous);
        assert_eq!(mv.annotation.w, vec![3]);
    }

    #[test]
    fn dangerous_split_when_not_a_path() {
        let mut b = kboard(24);
        let mut st = RedState::new(&parts(3, 8), 24, 8).unwrap();
        let e = st.red_first_move(&b).unwrap();
        red(&mut st, &mut b, e);
        for (x, y) in [(16, 17), (18, 19)] {
            b.play(Player::Blue, Edge::new(x, y)).unwrap();
            let mv = st.red_respond(&b, Edge::new(x, y)).unwrap();
            red(&mut st, &mut b, mv);
        }
        b.play(Player::Blue, Edge::new(17, 18)).unwrap();
        let mv = st.red_respond(&b, Edge::new(17, 18)).unwrap();
        assert_eq!(mv.annotation.board, 3);
        assert!(matches!(st.boards[2].plan, Plan::Split(_)));
        if let Plan::Split(sp) = &st.boards[2].plan {
            assert_eq!(sp.u_set.len(), 4);
            let inside = |s: &[Vertex]| b.edges_within(Player::Blue, s).len();
            assert!(inside(&sp.u_set) + inside(&sp.w_set) <= 1);
            assert!(inside(&sp.w_set) == 0);
        }
    }

    #[test]
    fn split_puts_the_inside_edge_in_u() {
        let mut b = kboard(10);
        let vs: Vec<Vertex> = (0..10).collect();
        // A triangle forces one edge inside a half.
        for (x, y) in [(0, 1), (1, 2), (0, 2)] {
            b.claim(Player::Blue, Edge::new(x, y)).unwrap();
        }
        let (u, w) = split_board(&b, &vs).unwrap();
        assert_eq!(u.len() + w.len(), 10);
        assert!(u.len() % 2 == 0 && w.len() % 2 == 0);
        assert!(u.len().abs_diff(w.len()) <= 2);
        assert_eq!(b.edges_within(Player::Blue, &u).len(), 1);
        assert_eq!(b.edges_within(Player::Blue, &w).len(), 0);
    }

    #[test]
    fn split_infeasible_on_a_dense_blue_clique() {
        let mut b = kboard(8);
        let vs: Vec<Vertex> = (0..8).collect();
        for x in 0..5 {
            for y in x + 1..5 {
                b.claim(Player::Blue, Edge::new(x, y)).unwrap();
            }
        }
        assert!(matches!(split_board(&b, &vs), Err(StrategyError::SplitInfeasible(_))));
    }

    #[test]
    fn import_keeps_both_boards_even() {
        let b = kboard(24);
        let here: Vec<Vertex> = (0..8).collect();
        let next: Vec<Vertex> = (8..16).collect();
        let imp = choose_import(&b, &here, &next, 6, 7).unwrap();
        assert!(contains(&next, imp.p) && contains(&next, imp.q) && imp.p != imp.q);
        let mut st = RedState::new(&parts(3, 8), 24, 8).unwrap();
        st.move_vertices(&b, 1, 0, &[imp.p, imp.q]);
        assert_eq!(st.boards[0].vertices.len(), 10);
        assert_eq!(st.boards[1].vertices.len(), 6);
        assert_eq!(st.board_of(imp.p), 0);
    }

    #[test]
    fn import_respects_blue_degree_into_the_board() {
        let mut b = kboard(16);
        let here: Vec<Vertex> = (0..8).collect();
        let next: Vec<Vertex> = (8..16).collect();
        // Every vertex of next except 15 has two Blue edges into here.
        for q in 8..15 {
            b.claim(Player::Blue, Edge::new(q, 0)).unwrap();
            b.claim(Player::Blue, Edge::new(q, 1)).unwrap();
        }
        let imp = choose_import(&b, &here, &next, 6, 7).unwrap();
        assert_eq!(imp.q, 15);
    }

    #[test]
    fn current_board_tracks_progress() {
        let mut b = kboard(16);
        let mut st = RedState::new(&parts(2, 8), 16, 8).unwrap();
        assert_eq!(st.current_board(), Some(0));
        let e = st.red_first_move(&b).unwrap();
        red(&mut st, &mut b, e);
        assert_eq!(st.boards[0].status, Status::Active);
        assert_eq!(st.current_board(), Some(0));
    }
}
