use thiserror::Error;

use crate::graph::{Edge, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge {0}")]
    DuplicateEdge(Edge),
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: Vertex, n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("left side has {left} vertices but right side has {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("no perfect matching")]
    NoPerfectMatching,
    #[error("target set has odd size {0}")]
    OddTarget(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoardError {
    #[error("{0} is not an edge of the graph")]
    NotAnEdge(Edge),
    #[error("edge {0} is already claimed")]
    AlreadyClaimed(Edge),
    #[error("it is not {0}'s turn")]
    OutOfTurn(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("no legal move: {0}")]
    NoLegalMove(String),
    #[error("case analysis exhausted: {0}")]
    CaseExhausted(String),
    #[error("no valid stage III pair: {0}")]
    SelectionFailure(String),
    #[error("no admissible split: {0}")]
    SplitInfeasible(String),
    #[error("no admissible import: {0}")]
    ImportInfeasible(String),
    #[error("parity violation: {0}")]
    Parity(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("no free edge left")]
    NoFreeEdge,
    #[error("scripted move {0} is not legal")]
    IllegalScriptedMove(Edge),
    #[error("script exhausted")]
    ScriptExhausted,
    #[error("remote player disconnected")]
    Disconnected,
}
