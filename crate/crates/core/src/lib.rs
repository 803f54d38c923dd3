//! Red's explicit winning strategy for the strong perfect matching game on
//! `G(n,p)`, with the referee, adversaries and oracles needed to check it.

pub mod adversary;
pub mod board;
pub mod engine;
pub mod error;
pub mod graph;
pub mod matching;
pub mod orchestrator;
pub mod partition;
pub mod rng;
pub mod strategy;

pub use board::{Board, Owner, Player};
pub use graph::{sample_gnp, Edge, Graph, Vertex};
