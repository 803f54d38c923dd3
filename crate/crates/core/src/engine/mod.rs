//! Referee, transcripts, batch runs, the small-board solver and the
//! session server.

pub mod batch;
pub mod session;
pub mod solver;
pub mod transcript;
pub mod verify;

use std::sync::Arc;

use thiserror::Error;

use crate::adversary::{Adversary, AdversaryKind};
use crate::board::{Board, Player};
use crate::error::{AdversaryError, BoardError};
use crate::graph::{sample_gnp, Edge, Graph};
use crate::matching::IncrementalMatching;
use crate::orchestrator::{RedError, RedState};
use crate::partition::{partition_with_retries, Partition, PartitionConfig, PartitionFailure};
use crate::rng::{derive_seed, stream};
use crate::strategy::wasted_within;

pub use transcript::{BoardLedger, Ending, GameConfig, GameResult, Header, MoveRecord, Transcript, Versions, Winner};
pub use verify::{verify_jsonl, verify_transcript, VerifyReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Partition(#[from] PartitionFailure),
    #[error(transparent)]
    Rejected(#[from] RedError),
    #[error("illegal move: {0}")]
    Illegal(#[from] BoardError),
    #[error("it is not {0}'s turn")]
    OutOfTurn(&'static str),
    #[error("the game is over")]
    GameOver,
    #[error("header graph: {0}")]
    Graph(String),
}

/// A game in progress: board, Red's state, both players' incremental
/// maximum matchings and the transcript so far.
pub struct Game {
    pub board: Board,
    pub red: RedState,
    red_m: IncrementalMatching,
    blue_m: IncrementalMatching,
    header: Header,
    moves: Vec<MoveRecord>,
    chain: String,
    result: Option<GameResult>,
}

impl Game {
    pub fn new(graph: Arc<Graph>, partition: &Partition, header: Header) -> Result<Game, EngineError> {
        let n = graph.n();
        let red = RedState::new(partition, n, header.config.min_subboard_size)?;
        Ok(Game {
            board: Board::new(graph),
            red,
            red_m: IncrementalMatching::new(n),
            blue_m: IncrementalMatching::new(n),
            chain: transcript::header_digest(&header),
            header,
            moves: Vec::new(),
            result: None,
        })
    }

    /// Rebuilds the graph a header describes.
    pub fn graph_of(header: &Header) -> Result<Graph, EngineError> {
        match &header.graph {
            Some(j) => Graph::from_json(j).map_err(|e| EngineError::Graph(e.to_string())),
            None => Ok(sample_gnp(header.n, header.p, header.seed)),
        }
    }

    pub fn header(&self) -> &Header {
        &self.header
    }

    pub fn moves(&self) -> &[MoveRecord] {
        &self.moves
    }

    pub fn result(&self) -> Option<&GameResult> {
        self.result.as_ref()
    }

    pub fn is_over(&self) -> bool {
        self.result.is_some()
    }

    pub fn to_move(&self) -> Player {
        self.board.to_move()
    }

    /// Plays Red's move. Returns the record, or `None` if the game ended
    /// instead (forfeit).
    pub fn red_turn(&mut self) -> Result<Option<&MoveRecord>, EngineError> {
        if self.is_over() {
            return Err(EngineError::GameOver);
        }
        if self.to_move() != Player::Red {
            return Err(EngineError::OutOfTurn("red"));
        }
        let reply = match self.board.history().last() {
            None => self.red.red_first_move(&self.board),
            Some(&(_, blue)) => self.red.red_respond(&self.board, blue),
        };
        let mv = match reply {
            Ok(mv) => mv,
            Err(e) => {
                self.end(Winner::Forfeit, Ending::Forfeit, Some(e.to_string()));
                return Ok(None);
            }
        };
        if let Err(e) = self.board.play(Player::Red, mv.edge) {
            self.end(Winner::Forfeit, Ending::Forfeit, Some(format!("red chose an illegal edge: {e}")));
            return Ok(None);
        }
        self.red.commit(&self.board, mv.edge);
        let grew = self.red_m.insert(mv.edge);
        self.record(Player::Red, mv.edge, !grew, Some(mv.annotation), None, None);
        self.check_end(Player::Red);
        Ok(self.moves.last())
    }

    /// Applies Blue's move after checking it is legal.
    pub fn blue_turn(&mut self, e: Edge) -> Result<&MoveRecord, EngineError> {
        if self.is_over() {
            return Err(EngineError::GameOver);
        }
        if self.to_move() != Player::Blue {
            return Err(EngineError::OutOfTurn("blue"));
        }
        self.board.play(Player::Blue, e)?;
        let flip = self.red.update_wasted_ledger(&self.board, e).first().map(|i| i + 1);
        let grew = self.blue_m.insert(e);
        let board = self.red.board_containing(e).map(|i| i + 1);
        self.record(Player::Blue, e, !grew, None, board, flip);
        self.check_end(Player::Blue);
        Ok(self.moves.last().unwrap())
    }

    /// Would `e` be a wasted move for `p` right now?
    pub fn would_waste(&self, p: Player, e: Edge) -> bool {
        let m = if p == Player::Red { &self.red_m } else { &self.blue_m };
        !m.would_increase(e)
    }

    pub fn resign(&mut self, who: Player) {
        if !self.is_over() {
            let winner = if who == Player::Blue { Winner::Red } else { Winner::Blue };
            self.end(winner, Ending::Resigned, Some(format!("{who} resigned")));
        }
    }

    /// Ends the game because Blue's generator failed.
    pub fn abort(&mut self, why: &AdversaryError) {
        if self.is_over() {
            return;
        }
        match why {
            AdversaryError::NoFreeEdge => self.end(Winner::Draw, Ending::Exhausted, None),
            e => self.end(Winner::Draw, Ending::Aborted, Some(e.to_string())),
        }
    }

    fn record(&mut self, mover: Player, edge: Edge, wasted: bool, annotation: Option<crate::orchestrator::Annotation>, board: Option<usize>, flip: Option<usize>) {
        let mut rec = MoveRecord {
            ply: self.moves.len() + 1,
            mover,
            edge,
            wasted,
            annotation,
            board,
            ledger_flip: flip,
            digest: String::new(),
        };
        rec.digest = transcript::move_digest(&self.chain, &rec);
        self.chain = rec.digest.clone();
        self.moves.push(rec);
    }

    fn check_end(&mut self, mover: Player) {
        let m = if mover == Player::Red { &self.red_m } else { &self.blue_m };
        if m.is_perfect() {
            let w = if mover == Player::Red { Winner::Red } else { Winner::Blue };
            self.end(w, Ending::Matching, None);
        } else if self.board.free_count() == 0 {
            self.end(Winner::Draw, Ending::Exhausted, None);
        }
    }

    fn end(&mut self, winner: Winner, ending: Ending, detail: Option<String>) {
        let red_moves = self.moves.iter().filter(|m| m.mover == Player::Red).count();
        let blue_moves = self.moves.len() - red_moves;
        let ledgers = self
            .red
            .boards
            .iter()
            .enumerate()
            .map(|(i, b)| BoardLedger {
                board: i + 1,
                size: b.vertices.len(),
                status: b.status,
                strategy: b.chosen.map(|c| c.tag().to_string()),
                w: b.w,
                red_wasted: wasted_within(&self.board, Player::Red, &b.vertices),
                blue_wasted: wasted_within(&self.board, Player::Blue, &b.vertices),
                imported: b.imported.clone(),
            })
            .collect();
        self.result = Some(GameResult {
            winner,
            ending,
            detail,
            red_moves,
            blue_moves,
            red_wasted_total: red_moves - self.red_m.size(),
            blue_wasted_total: blue_moves - self.blue_m.size(),
            budget: self.red.forfeit_budget,
            fallback_moves: self.red.fallback_moves,
            per_board_ledgers: ledgers,
        });
    }

    /// The transcript; only complete once the game is over.
    pub fn transcript(&self) -> Option<Transcript> {
        Some(Transcript { header: self.header.clone(), moves: self.moves.clone(), result: self.result.clone()? })
    }
}

/// Runs the referee loop until the game ends.
pub fn play_game(g: Arc<Graph>, part: &Partition, header: Header) -> Result<Transcript, EngineError> {
    let mut adv = Adversary::new(header.adversary.clone(), header.config.adversary_seed);
    let mut game = Game::new(g, part, header)?;
    run(&mut game, &mut adv)?;
    Ok(game.transcript().expect("game ended"))
}

/// Alternates moves until the game is over.
pub fn run(game: &mut Game, adv: &mut Adversary) -> Result<(), EngineError> {
    while !game.is_over() {
        game.red_turn()?;
        if game.is_over() {
            break;
        }
        match adv.blue_next(&game.board, &game.red) {
            Ok(e) => {
                game.blue_turn(e)?;
            }
            Err(e) => game.abort(&e),
        }
    }
    Ok(())
}

/// Parameters of one sampled game.
#[derive(Clone, Debug, PartialEq)]
pub struct GameSpec {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub adversary: AdversaryKind,
    pub partition: PartitionConfig,
}

impl GameSpec {
    pub fn new(n: usize, p: f64, seed: u64, adversary: AdversaryKind) -> Self {
        GameSpec { n, p, seed, adversary, partition: PartitionConfig::default() }
    }
}

/// Samples the graph, partitions it and plays the game. The graph and
/// partition are returned alongside for further checks.
pub fn sampled_game(spec: &GameSpec) -> Result<(Arc<Graph>, Partition, Transcript), EngineError> {
    let g = Arc::new(sample_gnp(spec.n, spec.p, spec.seed));
    let (part, attempts) = partition_with_retries(&g, &spec.partition, derive_seed(spec.seed, stream::PARTITION))?;
    let header = Header {
        n: spec.n,
        p: spec.p,
        seed: spec.seed,
        partition: part.to_json(),
        config: GameConfig {
            clique_size: spec.partition.clique_size,
            min_subboard_size: spec.partition.min_subboard_size,
            partition_attempts: attempts,
            adversary_seed: derive_seed(spec.seed, stream::ADVERSARY),
        },
        adversary: spec.adversary.clone(),
        versions: Versions::current(),
        graph: None,
    };
    let tr = play_game(g.clone(), &part, header)?;
    Ok((g, part, tr))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(adv: AdversaryKind, seed: u64) -> Transcript {
        sampled_game(&GameSpec::new(256, 0.99, seed, adv)).unwrap().2
    }

    #[test]
    fn red_wins_a_small_random_game() {
        let tr = small(AdversaryKind::Random, 1);
        assert_eq!(tr.result.winner, Winner::Red, "{:?}", tr.result);
        assert!(tr.result.red_moves <= tr.result.budget);
        assert_eq!(tr.moves[0].mover, Player::Red);
        assert_eq!(tr.moves[0].annotation.as_ref().unwrap().board, 1);
    }

    #[test]
    fn same_seed_same_transcript() {
        let a = small(AdversaryKind::Blocker, 5);
        let b = small(AdversaryKind::Blocker, 5);
        assert_eq!(a.to_jsonl(), b.to_jsonl());
    }

    #[test]
    fn jsonl_round_trips() {
        let tr = small(AdversaryKind::FastMatcher, 2);
        let text = tr.to_jsonl();
        assert_eq!(Transcript::from_jsonl(&text).unwrap(), tr);
        assert_eq!(text.lines().count(), tr.moves.len() + 2);
    }

    #[test]
    fn out_of_turn_and_illegal_moves_are_refused() {
        let g = Arc::new(Graph::complete(16));
        let part = Partition { parts: vec![(0..8).collect(), (8..16).collect()], half_marks: Vec::new() };
        let header = Header {
            n: 16,
            p: 1.0,
            seed: 0,
            partition: part.to_json(),
            config: GameConfig { clique_size: 16, min_subboard_size: 8, partition_attempts: 1, adversary_seed: 0 },
            adversary: AdversaryKind::Remote,
            versions: Versions::current(),
            graph: Some(g.to_json()),
        };
        let mut game = Game::new(g, &part, header).unwrap();
        assert!(matches!(game.blue_turn(Edge::new(0, 1)), Err(EngineError::OutOfTurn(_))));
        let red = game.red_turn().unwrap().unwrap().edge;
        assert!(matches!(game.blue_turn(red), Err(EngineError::Illegal(_))));
        assert!(game.blue_turn(Edge::new(14, 15)).is_ok());
    }
}
