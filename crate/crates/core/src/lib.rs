//! Dynamic programming and message-passing neural networks as one generic
//! computation: the integral transform over a polynomial span
//! `W ← X → Y → Z`, parameterised by a semiring.

pub mod algebra;
pub mod algorithms;
pub mod carrier;
pub mod cli;
pub mod gnn;
pub mod span;
