//! Bellman-Ford and Floyd-Warshall as integral transforms, with textbook
//! reference implementations to check them against.

mod bellman_ford;
mod floyd_warshall;

use thiserror::Error;

use crate::span::SpanError;

pub use bellman_ford::{
    bellman_ford, bellman_ford_in, bellman_ford_span, bellman_ford_spec, bellman_ford_step,
    bellman_ford_step_on, oracle_bellman_ford, BellmanFordState,
};
pub use floyd_warshall::{
    floyd_warshall, floyd_warshall_relax, floyd_warshall_span, floyd_warshall_spec,
    floyd_warshall_transform, oracle_floyd_warshall, DistanceMatrix,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgorithmError {
    #[error("source node {node} is outside 0..{n}")]
    InvalidSource { node: usize, n: usize },
    #[error("distance matrix diagonal entry {index} is not zero")]
    NonZeroDiagonal { index: usize },
    #[error(
        "distance matrix of size {n} needs {n}x{n} entries, found a row or table of length {len}"
    )]
    NotSquare { n: usize, len: usize },
    #[error(transparent)]
    Span(#[from] SpanError),
}
