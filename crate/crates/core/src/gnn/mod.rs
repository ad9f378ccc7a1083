//! Message-passing layers as integral transforms: the pair-message layer,
//! the edge-updating layer that reuses its messages, and the layer with
//! triple messages reduced over an intermediate node. Parameters are fixed
//! per seed; there is no training.

mod forward;
mod layer;
mod mlp;

use thiserror::Error;

use crate::span::SpanError;

pub use forward::{
    direct_mpnn, edge_message_spec, mpnn_forward, mpnn_forward_with, mpnn_span, mpnn_spec,
    single_span_edge_update_spec, v2_forward, v2_forward_with, v3_footprint, v3_forward,
    v3_forward_with, v3_span, v3_spec, LayerOutput,
};
pub use layer::{
    Aggregator, LayerConfig, MessageFn, MpnnParams, Readout, V3Params, DEFAULT_MEMORY_CAP,
};
pub use mlp::{
    finite_diff_check, Activation, Dense, GradCheck, Loss, Mlp, SquaredError, Trace,
    FINITE_DIFF_STEP, RELATIVE_ERROR_FLOOR,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GnnError {
    #[error("widths must be at least 1")]
    ZeroWidth,
    #[error("an MLP needs at least one layer")]
    NoLayers,
    #[error("layer needs {expected} parameters, got {found}")]
    ParameterShape { expected: usize, found: usize },
    #[error("parameters must be finite")]
    NonFiniteParameter,
    #[error("{what}: expected width {expected}, found {found}")]
    WidthMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("{what}: expected a map on {expected}, found {found}")]
    CarrierMismatch {
        what: String,
        expected: String,
        found: String,
    },
    #[error("this layer needs a fully-connected graph")]
    NotFullyConnected,
    #[error("layer would hold {required} values, over the cap of {cap}")]
    MemoryCap { required: usize, cap: usize },
    #[error(transparent)]
    Span(#[from] SpanError),
}

/// Largest `|a − b| / max(|a|, |b|)` over paired entries, with the
/// denominator floored at `1e-12`. Equal infinities count as zero error.
pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "compared rows differ in length");
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            if x == y {
                0.0
            } else if !x.is_finite() || !y.is_finite() {
                f64::INFINITY
            } else {
                (x - y).abs() / x.abs().max(y.abs()).max(1e-12)
            }
        })
        .fold(0.0, f64::max)
}
