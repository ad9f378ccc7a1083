//! The polynomial span and its integral transform: pullback along `i`,
//! argument pushforward along `p` (ordered fold over fibers), message
//! pushforward along `o` (multiset reduction over preimages).

mod datamap;
mod transform;

use thiserror::Error;

use crate::carrier::{CarrierError, GraphError};

pub use datamap::DataMap;
pub use transform::{
    validate_span, FoldStrategy, Hook, LearnedFold, PolynomialSpan, SpanIssue, SpanSpec,
    ValidationReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpanError {
    #[error("invalid span: {0}")]
    Invalid(ValidationReport),
    #[error("carrier mismatch for {what}: expected {expected}, found {found}")]
    CarrierMismatch {
        what: String,
        expected: String,
        found: String,
    },
    #[error("data map width must be at least 1")]
    ZeroWidth,
    #[error("data map on {carrier} needs {expected} values, got {found}")]
    ValueCount {
        carrier: String,
        expected: usize,
        found: usize,
    },
    #[error("row {row} has width {found}, expected {expected}")]
    RowWidth {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{carrier} has {expected} summands but {found} blocks were given")]
    TermCount {
        carrier: String,
        expected: usize,
        found: usize,
    },
    #[error("learned fold has no map for fibers of size {fiber_size}")]
    MissingFiberMap { fiber_size: usize },
    #[error("learned fold produced a row of width {found}, expected {expected}")]
    FoldWidth { expected: usize, found: usize },
    #[error("message hook produced rows of differing widths")]
    HookWidth,
    #[error(transparent)]
    Carrier(#[from] CarrierError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
