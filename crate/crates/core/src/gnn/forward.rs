use crate::algebra::{MaxPlus, MinPlusReal, Real};
use crate::carrier::{parse_carrier, Carrier, GraphContext};
use crate::span::{DataMap, FoldStrategy, LearnedFold, PolynomialSpan, SpanError, SpanSpec};

use super::{Aggregator, GnnError, LayerConfig, MessageFn, MpnnParams, V3Params};

/// `1 + V + E ← E + (E + E) + E → E → V`: every edge gathers the graph
/// feature, its sender, its receiver and itself, and is delivered to its
/// receiver.
pub fn mpnn_spec() -> SpanSpec {
    SpanSpec::new(
        "1 + V + E",
        "E + (E + E) + E",
        "E",
        "V",
        "[bang; src; tgt; id]",
        "[id; id; id; id]",
        "tgt",
    )
}

pub fn mpnn_span(g: &GraphContext) -> PolynomialSpan {
    PolynomialSpan::from_spec(&mpnn_spec(), g).expect("the message-passing span is well typed")
}

/// Same arguments and messages as [`mpnn_spec`], but each message stays on
/// its own edge.
pub fn edge_message_spec() -> SpanSpec {
    SpanSpec::new(
        "1 + V + E",
        "E + (E + E) + E",
        "E",
        "E",
        "[bang; src; tgt; id]",
        "[id; id; id; id]",
        "id",
    )
}

/// An attempt at node and edge outputs from one span over pair messages:
/// `o` would have to send each message both to its receiver and to its own
/// slot, which no function can do. Validation rejects it.
pub fn single_span_edge_update_spec() -> SpanSpec {
    SpanSpec::new(
        "1 + V + V^2",
        "V^2 + V^2 + V^2 + V^2",
        "V^2",
        "V + V^2",
        "[bang; src; tgt; id]",
        "[id; id; id; id]",
        "[proj[2]; id]",
    )
}

/// Pair messages over four broadcasts plus triple messages over seven
/// (graph; nodes via each coordinate; edges via `(1,2)`, `(2,3)`, `(1,3)`).
/// Pair messages reach their receiver node, triple messages `(i, k, j)`
/// reach the pair `(i, j)`.
pub fn v3_spec() -> SpanSpec {
    SpanSpec::new(
        "1 + V + V^2",
        "V^2 + V^2 + V^2 + V^2 + V^3 + V^3 + V^3 + V^3 + V^3 + V^3 + V^3",
        "V^2 + V^3",
        "V + V^2",
        "[inj[1].bang; inj[2].src; inj[2].tgt; inj[3]; \
         inj[1].bang; inj[2].proj[1]; inj[2].proj[2]; inj[2].proj[3]; \
         inj[3].proj[1,2]; inj[3].proj[2,3]; inj[3].proj[1,3]]",
        "[inj[1]; inj[1]; inj[1]; inj[1]; inj[2]; inj[2]; inj[2]; inj[2]; inj[2]; inj[2]; inj[2]]",
        "[inj[1].tgt; inj[2].proj[1,3]]",
    )
}

/// The triple-message span on the fully-connected graph with `n` nodes.
pub fn v3_span(n: usize) -> PolynomialSpan {
    v3_span_on(&GraphContext::complete(n)).expect("complete graphs are fully connected")
}

fn v3_span_on(g: &GraphContext) -> Result<PolynomialSpan, GnnError> {
    if !g.is_fully_connected() {
        return Err(GnnError::NotFullyConnected);
    }
    Ok(PolynomialSpan::from_spec(&v3_spec(), g)?)
}

fn carrier(text: &str) -> Carrier {
    parse_carrier(text).expect("static carrier")
}

fn check_inputs(
    g: &GraphContext,
    cfg: &LayerConfig,
    nodes: &DataMap<f64>,
    edges: &DataMap<f64>,
    graph: &[f64],
) -> Result<(), GnnError> {
    let expect = |what: &str, m: &DataMap<f64>, c: &str, width: usize| -> Result<(), GnnError> {
        if *m.carrier() != carrier(c) || m.len() != carrier(c).size(g) {
            return Err(GnnError::CarrierMismatch {
                what: what.into(),
                expected: c.into(),
                found: m.carrier().to_string(),
            });
        }
        if m.width() != width {
            return Err(GnnError::WidthMismatch {
                what: what.into(),
                expected: width,
                found: m.width(),
            });
        }
        Ok(())
    };
    expect("node features", nodes, "V", cfg.node_width)?;
    expect("edge features", edges, "E", cfg.edge_width)?;
    if graph.len() != cfg.graph_width {
        return Err(GnnError::WidthMismatch {
            what: "graph feature".into(),
            expected: cfg.graph_width,
            found: graph.len(),
        });
    }
    Ok(())
}

/// Stacks graph, node and edge rows, zero-padded to a common width, into a
/// map on `w` (whose summands must be `1`, a node term and an edge term).
fn input_map(
    w: Carrier,
    g: &GraphContext,
    width: usize,
    graph: &[f64],
    nodes: &DataMap<f64>,
    edges: &DataMap<f64>,
) -> Result<DataMap<f64>, SpanError> {
    let pad = |rows: &mut dyn Iterator<Item = &[f64]>| -> Vec<f64> {
        rows.flat_map(|r| r.iter().copied().chain(std::iter::repeat(0.0)).take(width))
            .collect()
    };
    let parts = vec![
        pad(&mut std::iter::once(graph)),
        pad(&mut nodes.rows()),
        pad(&mut edges.rows()),
    ];
    DataMap::from_terms(w, g, width, parts)
}

/// Splits a concatenated fiber back into its argument blocks, dropping the
/// padding, and applies `ψ`.
fn fiber_map(
    psi: &MessageFn,
    agg: Aggregator,
    padded: usize,
    blocks: Vec<usize>,
) -> impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static {
    let psi = psi.clone();
    move |row: &[f64]| {
        let parts: Vec<&[f64]> = blocks
            .iter()
            .enumerate()
            .map(|(b, &w)| &row[b * padded..b * padded + w])
            .collect();
        psi.apply(agg, &parts, padded)
    }
}

/// `o⊕` with the aggregator's semiring, then the floor on empty preimages.
fn aggregate(
    span: &PolynomialSpan,
    cfg: &LayerConfig,
    messages: &DataMap<f64>,
) -> Result<DataMap<f64>, SpanError> {
    let out = match cfg.aggregator {
        Aggregator::Sum => span.message_pushforward(&Real, messages, None)?,
        Aggregator::Max => span.message_pushforward(&MaxPlus, messages, None)?,
        Aggregator::Min => span.message_pushforward(&MinPlusReal, messages, None)?,
    };
    if !cfg.aggregator.uses_floor() {
        return Ok(out);
    }
    let (z, width) = (out.carrier().clone(), out.width());
    let mut values = out.into_values();
    for r in 0..values.len() / width {
        if span.delivered_to(r).is_empty() {
            values[r * width..(r + 1) * width].fill(cfg.floor);
        }
    }
    DataMap::new(z, span.graph(), width, values)
}

fn pair_messages(
    span: &PolynomialSpan,
    params: &MpnnParams,
    cfg: &LayerConfig,
    m: usize,
    nodes: &DataMap<f64>,
    edges: &DataMap<f64>,
    graph: &[f64],
) -> Result<DataMap<f64>, SpanError> {
    let c = cfg.padded_width();
    let w = input_map(span.w().clone(), span.graph(), c, graph, nodes, edges)?;
    let fold = LearnedFold::new(vec![0.0; m]).with_map(
        4,
        fiber_map(&params.psi, cfg.aggregator, c, cfg.pair_blocks()),
    );
    span.argument_pushforward(&Real, &FoldStrategy::Learned(fold), &span.pullback(&w)?)
}

fn read_out(
    phi: &super::Readout,
    g: &GraphContext,
    own: &DataMap<f64>,
    aggregate: &DataMap<f64>,
) -> Result<DataMap<f64>, SpanError> {
    let rows: Vec<Vec<f64>> = own
        .rows()
        .zip(aggregate.rows())
        .map(|(x, a)| phi.apply(x, a))
        .collect();
    if rows.is_empty() {
        return Ok(aggregate.clone());
    }
    DataMap::from_rows(own.carrier().clone(), g, rows)
}

/// One message-passing layer: `h_u = φ(x_u, ⊕_{e: v → u} ψ(x_G, x_v, x_u, x_e))`,
/// run as an integral transform with parameters drawn from `cfg.seed`.
pub fn mpnn_forward(
    g: &GraphContext,
    nodes: &DataMap<f64>,
    edges: &DataMap<f64>,
    graph: &[f64],
    cfg: &LayerConfig,
) -> Result<DataMap<f64>, GnnError> {
    mpnn_forward_with(g, &MpnnParams::init(cfg)?, nodes, edges, graph, cfg)
}

pub fn mpnn_forward_with(
    g: &GraphContext,
    params: &MpnnParams,
    nodes: &DataMap<f64>,
    edges: &DataMap<f64>,
    graph: &[f64],
    cfg: &LayerConfig,
) -> Result<DataMap<f64>, GnnError> {
    let m = params.check(cfg)?;
    check_inputs(g, cfg, nodes, edges, graph)?;
    let span = mpnn_span(g);
    let messages = pair_messages(&span, params, cfg, m, nodes, edges, graph)?;
    let agg = aggregate(&span, cfg, &messages)?;
    Ok(read_out(&params.phi, g, nodes, &agg)?)
}

/// Eq. (1) evaluated with plain loops over the edge list, sharing only the
/// parameters with the span path.
pub fn direct_mpnn(
    g: &GraphContext,
    params: &MpnnParams,
    nodes: &DataMap<f64>,
    edges: &DataMap<f64>,
    graph: &[f64],
    cfg: &LayerConfig,
) -> Result<Vec<Vec<f64>>, GnnError> {
    let m = params.check(cfg)?;
    check_inputs(g, cfg, nodes, edges, graph)?;
    let c = cfg.padded_width();
    let mut acc: Vec<Option<Vec<f64>>> = vec![None; g.node_count()];
    for (k, e) in g.edges().iter().enumerate() {
        let msg = params.psi.apply(
            cfg.aggregator,
            &[
                graph,
                nodes.row(e.source),
                nodes.row(e.target),
                edges.row(k),
            ],
            c,
        );
        acc[e.target] = Some(match acc[e.target].take() {
            None => msg,
            Some(a) => a
                .iter()
                .zip(&msg)
                .map(|(x, y)| cfg.aggregator.plus(*x, *y))
                .collect(),
        });
    }
    let empty = if cfg.aggregator.uses_floor() {
        cfg.floor
    } else {
        0.0
    };
    Ok(acc
        .into_iter()
        .enumerate()
        .map(|(u, a)| {
            params
                .phi
                .apply(nodes.row(u), &a.unwrap_or_else(|| vec![empty; m]))
        })
        .collect())
}

/// Node and edge outputs of an edge-updating layer over pair messages.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerOutput {
    pub nodes: DataMap<f64>,
    pub edges: DataMap<f64>,
}

/// Pair messages computed once, then pushed forward twice: to receivers
/// (with `⊕` and `φ`, exactly as [`mpnn_forward`]) and onto their own edge.
pub fn v2_forward(
    g: &GraphContext,
    nodes: &DataMap<f64>,
    edges: &DataMap<f64>,
    graph: &[f64],
    cfg: &LayerConfig,
) -> Result<LayerOutput, GnnError> {
    v2_forward_with(g, &MpnnParams::init(cfg)?, nodes, edges, graph, cfg)
}

pub fn v2_forward_with(
    g: &GraphContext,
    params: &MpnnParams,
    nodes: &DataMap<f64>,
    edges: &DataMap<f64>,
    graph: &[f64],
    cfg: &LayerConfig,
) -> Result<LayerOutput, GnnError> {
    if !g.is_fully_connected() {
        return Err(GnnError::NotFullyConnected);
    }
    let m = params.check(cfg)?;
    check_inputs(g, cfg, nodes, edges, graph)?;
    let to_nodes = mpnn_span(g);
    let to_edges = PolynomialSpan::from_spec(&edge_message_spec(), g)?;
    let messages = pair_messages(&to_nodes, params, cfg, m, nodes, edges, graph)?;
    let agg = aggregate(&to_nodes, cfg, &messages)?;
    Ok(LayerOutput {
        nodes: read_out(&params.phi, g, nodes, &agg)?,
        edges: aggregate(&to_edges, cfg, &messages)?,
    })
}

/// Values a triple-message layer on `n` nodes holds at once: the seven
/// triple broadcasts plus the triple messages.
pub fn v3_footprint(n: usize, cfg: &LayerConfig, message_width: usize) -> Option<usize> {
    let cube = n.checked_mul(n)?.checked_mul(n)?;
    cube.checked_mul(7 * cfg.padded_width() + message_width)
}

/// Pair messages reduced into nodes and triple messages `(i, k, j)`
/// reduced over `k` into the pair `(i, j)`, both in one integral transform;
/// `φ_node` and `φ_edge` run last.
pub fn v3_forward(
    g: &GraphContext,
    nodes: &DataMap<f64>,
    edges: &DataMap<f64>,
    graph: &[f64],
    cfg: &LayerConfig,
) -> Result<LayerOutput, GnnError> {
    v3_forward_with(g, &V3Params::init(cfg)?, nodes, edges, graph, cfg)
}

pub fn v3_forward_with(
    g: &GraphContext,
    params: &V3Params,
    nodes: &DataMap<f64>,
    edges: &DataMap<f64>,
    graph: &[f64],
    cfg: &LayerConfig,
) -> Result<LayerOutput, GnnError> {
    if !g.is_fully_connected() {
        return Err(GnnError::NotFullyConnected);
    }
    let m = params.check(cfg)?;
    check_inputs(g, cfg, nodes, edges, graph)?;
    let required = v3_footprint(g.node_count(), cfg, m).unwrap_or(usize::MAX);
    if required > cfg.memory_cap {
        return Err(GnnError::MemoryCap {
            required,
            cap: cfg.memory_cap,
        });
    }
    let span = v3_span_on(g)?;
    let c = cfg.padded_width();
    let w = input_map(span.w().clone(), g, c, graph, nodes, edges)?;
    let fold = LearnedFold::new(vec![0.0; m])
        .with_map(
            4,
            fiber_map(&params.psi2, cfg.aggregator, c, cfg.pair_blocks()),
        )
        .with_map(
            7,
            fiber_map(&params.psi3, cfg.aggregator, c, cfg.triple_blocks()),
        );
    let messages =
        span.argument_pushforward(&Real, &FoldStrategy::Learned(fold), &span.pullback(&w)?)?;
    let agg = aggregate(&span, cfg, &messages)?;
    let mut parts = agg.split_terms(g).into_iter();
    let (node_agg, pair_agg) = (
        parts.next().expect("two summands"),
        parts.next().expect("two summands"),
    );
    let pair_agg = DataMap::new(carrier("E"), g, pair_agg.width(), pair_agg.into_values())?;
    Ok(LayerOutput {
        nodes: read_out(&params.phi_node, g, nodes, &node_agg)?,
        edges: read_out(&params.phi_edge, g, edges, &pair_agg)?,
    })
}
