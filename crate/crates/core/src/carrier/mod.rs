//! Finite carrier sets built from the node set `V`, the edge set `E` and
//! the singleton `1` by sums and products, together with the closed
//! catalog of arrows between them.

mod arrow;
mod graph;
mod set;

pub use arrow::{build_arrow, eval_arrow, parse_arrow, preimage, Arrow, ArrowError, ArrowExpr};
pub use graph::{Edge, EdgeMode, GraphContext, GraphError};
pub use set::{parse_carrier, Carrier, CarrierError, Element, Factor, Term, MAX_CARRIER_SIZE};

pub(crate) use graph::check_permutation;
