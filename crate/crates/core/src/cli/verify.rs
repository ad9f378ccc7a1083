//! The self-check suite behind the `verify` command.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{
    check_laws, check_monad_laws, random_triples, Boolean, Law, MaxPlus, MinPlus, MinPlusReal,
    Real, SampleValue, SubtractionPlus, Tropical,
};
use crate::algorithms::{
    bellman_ford, bellman_ford_step, floyd_warshall, floyd_warshall_relax, oracle_bellman_ford,
    oracle_floyd_warshall, BellmanFordState, DistanceMatrix,
};
use crate::carrier::{parse_carrier, Edge, GraphContext};
use crate::gnn::{
    direct_mpnn, finite_diff_check, max_relative_error, mpnn_forward, single_span_edge_update_spec,
    v2_forward, v3_forward, v3_forward_with, Aggregator, LayerConfig, MessageFn, Mlp, MpnnParams,
    Readout, SquaredError, V3Params,
};
use crate::span::{validate_span, DataMap};

pub const LAW_SAMPLES: usize = 1000;
pub const EQUIVARIANCE_TOL: f64 = 1e-9;
pub const GRADIENT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, failure: Option<String>, ok_detail: String) -> Self {
        match failure {
            None => Check {
                name: name.into(),
                passed: true,
                detail: ok_detail,
            },
            Some(detail) => Check {
                name: name.into(),
                passed: false,
                detail,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            writeln!(f, "{} {} ({})", c.name, status, c.detail)?;
        }
        Ok(())
    }
}

/// A random directed graph with at most `max_n` nodes and `max_m` edges.
pub fn random_graph(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize, max_w: u64) -> GraphContext {
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(0..=max_m);
    let edges = (0..m)
        .map(|_| {
            Edge::new(
                rng.random_range(0..n),
                rng.random_range(0..n),
                rng.random_range(0..=max_w),
            )
        })
        .collect();
    GraphContext::new(n, edges).expect("endpoints drawn in range")
}

/// A random zero-diagonal matrix with roughly half its entries infinite.
pub fn random_matrix(rng: &mut ChaCha8Rng, max_n: usize) -> DistanceMatrix {
    let n = rng.random_range(1..=max_n);
    let entries = (0..n * n)
        .map(|k| {
            if k / n == k % n {
                Tropical::ZERO
            } else if rng.random_bool(0.5) {
                Tropical::Infinity
            } else {
                Tropical::Finite(rng.random_range(0..=20))
            }
        })
        .collect();
    DistanceMatrix::new(n, entries).expect("square by construction")
}

/// Corner-case graphs: empty, self-loops, parallel edges, unreachable
/// nodes and friends.
pub fn adversarial_graphs() -> Vec<GraphContext> {
    let g = |n: usize, es: &[(usize, usize, u64)]| {
        GraphContext::new(n, es.iter().map(|&(u, v, w)| Edge::new(u, v, w)).collect())
            .expect("fixture")
    };
    let mut inf_edge = g(3, &[(0, 1, 4)]);
    inf_edge = GraphContext::new(
        3,
        inf_edge
            .edges()
            .iter()
            .copied()
            .chain([Edge::new(1, 2, Tropical::Infinity)])
            .collect(),
    )
    .expect("fixture");
    vec![
        g(1, &[]),
        g(4, &[]),
        g(3, &[(0, 0, 1), (1, 1, 0), (0, 1, 3)]),
        g(3, &[(0, 1, 5), (0, 1, 2), (0, 1, 9), (1, 2, 1)]),
        g(5, &[(0, 1, 1), (1, 0, 1), (3, 4, 2)]),
        g(4, &[(0, 1, 0), (1, 2, 0), (2, 3, 0)]),
        g(4, &[(1, 0, 1), (2, 0, 1), (3, 0, 1)]),
        g(
            6,
            &[
                (0, 1, 1),
                (1, 2, 1),
                (2, 3, 1),
                (3, 4, 1),
                (4, 5, 1),
                (0, 5, 10),
            ],
        ),
        g(3, &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]),
        inf_edge,
    ]
}

/// Runs `check` on every item, stopping at the first failure. Engine
/// errors count as failures.
fn first_failure<T>(
    items: impl IntoIterator<Item = T>,
    mut check: impl FnMut(&T) -> Result<(), String>,
) -> Option<String> {
    items.into_iter().find_map(|x| check(&x).err())
}

fn fail_if(bad: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if bad {
        Err(what())
    } else {
        Ok(())
    }
}

fn text<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

fn bf_equivalence(rng: &mut ChaCha8Rng) -> Check {
    let mut graphs: Vec<GraphContext> = (0..200).map(|_| random_graph(rng, 12, 40, 20)).collect();
    graphs.extend(adversarial_graphs());
    let total = graphs.len();
    let failure = first_failure(graphs.into_iter().enumerate(), |(k, g)| {
        for s in 0..g.node_count() {
            let got = bellman_ford(g, s).map_err(text)?.into_values();
            fail_if(got != oracle_bellman_ford(g, s), || {
                format!("graph {k}, source {s}")
            })?;
        }
        Ok(())
    });
    Check::new(
        "bellman-ford-equivalence",
        failure,
        format!("{total} graphs, every source"),
    )
}

/// `d'(v) = min(d(v) + b(v), min over edges u → v of d(u) + w(u → v))`.
fn bf_recurrence(g: &GraphContext, d: &[Tropical], b: &[Tropical]) -> Vec<Tropical> {
    (0..g.node_count())
        .map(|v| {
            g.edges()
                .iter()
                .filter(|e| e.target == v)
                .map(|e| d[e.source].saturating_add(e.weight))
                .fold(d[v].saturating_add(b[v]), Tropical::min)
        })
        .collect()
}

fn bf_step_recurrence(rng: &mut ChaCha8Rng) -> Check {
    let failure = first_failure(adversarial_graphs().into_iter().enumerate(), |(k, g)| {
        for _ in 0..5 {
            let n = g.node_count();
            let d: Vec<Tropical> = (0..n)
                .map(|_| {
                    if rng.random_bool(0.3) {
                        Tropical::Infinity
                    } else {
                        Tropical::Finite(rng.random_range(0..30))
                    }
                })
                .collect();
            let st = BellmanFordState::from_graph(g, d.clone()).map_err(text)?;
            let got = bellman_ford_step(g, &st).map_err(text)?.into_values();
            let expect = bf_recurrence(g, &d, &vec![Tropical::ZERO; n]);
            fail_if(got != expect, || format!("fixture {k}, d = {d:?}"))?;
        }
        Ok(())
    });
    let count = adversarial_graphs().len() * 5;
    Check::new(
        "bellman-ford-step-recurrence",
        failure,
        format!("{count} states over fixtures"),
    )
}

fn fw_equivalence(rng: &mut ChaCha8Rng) -> Check {
    let failure = first_failure(0..200, |k| {
        let d = random_matrix(rng, 10);
        let got = floyd_warshall(&d).map_err(text)?;
        fail_if(got != oracle_floyd_warshall(&d), || format!("matrix {k}"))
    });
    Check::new("floyd-warshall-equivalence", failure, "200 matrices".into())
}

fn law_check<S: SampleValue>(name: &str, s: &S, seed: u64) -> Check {
    let report = check_laws(s, &random_triples(s, LAW_SAMPLES, seed));
    let failure = report.failed().next().map(|r| {
        format!(
            "{}: {}",
            r.law.name(),
            r.counterexample.as_deref().unwrap_or("")
        )
    });
    Check::new(
        &format!("laws-{name}"),
        failure,
        format!("{} laws x {LAW_SAMPLES} samples", report.results.len()),
    )
}

fn broken_instance(seed: u64) -> Check {
    let report = check_laws(
        &SubtractionPlus,
        &random_triples(&SubtractionPlus, LAW_SAMPLES, seed),
    );
    let caught = report
        .get(Law::PlusAssociative)
        .is_some_and(|r| !r.passed());
    Check::new(
        "laws-broken-instance-rejected",
        (!caught).then(|| "subtraction passed plus-associativity".to_string()),
        "plus-associative fails as it must".into(),
    )
}

fn monad_laws(seed: u64) -> Check {
    let report = check_monad_laws(LAW_SAMPLES, seed);
    let failure = report
        .results
        .iter()
        .find(|r| r.counterexample.is_some())
        .map(|r| {
            format!(
                "{}: {}",
                r.law.name(),
                r.counterexample.as_deref().unwrap_or("")
            )
        });
    Check::new(
        "monad-laws",
        failure,
        format!("6 laws x {LAW_SAMPLES} samples"),
    )
}

fn random_features(
    rng: &mut ChaCha8Rng,
    carrier: &str,
    g: &GraphContext,
    width: usize,
) -> DataMap<f64> {
    let c = parse_carrier(carrier).expect("static carrier");
    let len = c.size(g) * width;
    DataMap::new(
        c,
        g,
        width,
        (0..len).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )
    .expect("sized")
}

struct Instance {
    g: GraphContext,
    nodes: DataMap<f64>,
    edges: DataMap<f64>,
    graph: Vec<f64>,
    cfg: LayerConfig,
}

fn random_instance(rng: &mut ChaCha8Rng, full: bool, max_n: usize) -> Instance {
    let g = if full {
        GraphContext::complete(rng.random_range(1..=max_n))
    } else {
        random_graph(rng, max_n, 3 * max_n, 5)
    };
    let agg = [Aggregator::Sum, Aggregator::Max, Aggregator::Min][rng.random_range(0..3)];
    let mut cfg = LayerConfig::new(
        agg,
        rng.random_range(1..=3),
        rng.random_range(1..=3),
        rng.random_range(1..=2),
        rng.random(),
    );
    cfg.message_width = rng.random_range(1..=4);
    cfg.output_width = rng.random_range(1..=4);
    cfg.hidden_width = rng.random_range(1..=8);
    let nodes = random_features(rng, "V", &g, cfg.node_width);
    let edges = random_features(rng, "E", &g, cfg.edge_width);
    let graph = (0..cfg.graph_width)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    Instance {
        g,
        nodes,
        edges,
        graph,
        cfg,
    }
}

type Layer<'a> =
    dyn Fn(&GraphContext, &DataMap<f64>, &DataMap<f64>) -> Result<Vec<DataMap<f64>>, String> + 'a;

/// Worst relative error between `f(π·input)` and `π·f(input)` over every
/// output map.
fn equivariance_error(inst: &Instance, perm: &[usize], f: &Layer<'_>) -> Result<f64, String> {
    let pg = inst.g.permuted(perm).map_err(text)?;
    let pn = inst.nodes.permuted(&inst.g, perm).map_err(text)?;
    let pe = inst.edges.permuted(&inst.g, perm).map_err(text)?;
    let base = f(&inst.g, &inst.nodes, &inst.edges)?;
    let moved = f(&pg, &pn, &pe)?;
    let mut worst = 0.0f64;
    for (a, b) in base.iter().zip(&moved) {
        let a = a.permuted(&inst.g, perm).map_err(text)?;
        worst = worst.max(max_relative_error(a.values(), b.values()));
    }
    Ok(worst)
}

fn shuffled(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

fn equivariance(rng: &mut ChaCha8Rng) -> Check {
    let failure = first_failure(0..50, |k| {
        let sparse = random_instance(rng, false, 6);
        let full = random_instance(rng, true, 6);
        let perm_s = shuffled(sparse.g.node_count(), rng);
        let perm_f = shuffled(full.g.node_count(), rng);
        let (sg, fg) = (&sparse.graph, &full.graph);
        let mp = equivariance_error(&sparse, &perm_s, &|g, n, e| {
            Ok(vec![mpnn_forward(g, n, e, sg, &sparse.cfg).map_err(text)?])
        })?;
        let v2 = equivariance_error(&full, &perm_f, &|g, n, e| {
            let o = v2_forward(g, n, e, fg, &full.cfg).map_err(text)?;
            Ok(vec![o.nodes, o.edges])
        })?;
        let v3 = equivariance_error(&full, &perm_f, &|g, n, e| {
            let o = v3_forward(g, n, e, fg, &full.cfg).map_err(text)?;
            Ok(vec![o.nodes, o.edges])
        })?;
        for (name, err) in [("mpnn", mp), ("v2", v2), ("v3", v3)] {
            fail_if(err > EQUIVARIANCE_TOL, || {
                format!("{name} triple {k}: error {err:e}")
            })?;
        }
        Ok(())
    });
    Check::new("gnn-equivariance", failure, "50 triples x 3 layers".into())
}

fn eq1_correspondence(rng: &mut ChaCha8Rng) -> Check {
    let failure = first_failure(0..50, |k| {
        let inst = random_instance(rng, false, 8);
        let params = MpnnParams::init(&inst.cfg).map_err(text)?;
        let span = mpnn_forward(&inst.g, &inst.nodes, &inst.edges, &inst.graph, &inst.cfg)
            .map_err(text)?;
        let direct = direct_mpnn(
            &inst.g,
            &params,
            &inst.nodes,
            &inst.edges,
            &inst.graph,
            &inst.cfg,
        )
        .map_err(text)?;
        let err = max_relative_error(span.values(), &direct.concat());
        fail_if(err > EQUIVARIANCE_TOL, || {
            format!("instance {k}: error {err:e}")
        })
    });
    Check::new("mpnn-direct-correspondence", failure, "50 instances".into())
}

/// The triple layer configured to add the two path-edge broadcasts and take
/// the minimum over the intermediate node.
pub fn relaxation_layer() -> (V3Params, LayerConfig) {
    let mut cfg = LayerConfig::new(Aggregator::Min, 1, 1, 1, 0);
    cfg.message_width = 1;
    cfg.output_width = 1;
    let params = V3Params {
        psi2: MessageFn::Fold { positions: None },
        psi3: MessageFn::Fold {
            positions: Some(vec![4, 5]),
        },
        phi_node: Readout::PassThrough,
        phi_edge: Readout::PassThrough,
    };
    (params, cfg)
}

fn v3_witness(rng: &mut ChaCha8Rng) -> Check {
    let (params, cfg) = relaxation_layer();
    let failure = first_failure(0..50, |k| {
        let d = random_matrix(rng, 8);
        let g = GraphContext::complete(d.size());
        let nodes = DataMap::filled(parse_carrier("V").map_err(text)?, &g, 1, 0.0).map_err(text)?;
        let column = d.entries().iter().map(|v| v.to_f64()).collect();
        let edges =
            DataMap::from_column(parse_carrier("E").map_err(text)?, &g, column).map_err(text)?;
        let out = v3_forward_with(&g, &params, &nodes, &edges, &[0.0], &cfg).map_err(text)?;
        let relaxed = floyd_warshall_relax(&d).map_err(text)?;
        let expect: Vec<f64> = relaxed.entries().iter().map(|v| v.to_f64()).collect();
        fail_if(out.edges.values() != expect.as_slice(), || {
            format!("matrix {k}")
        })
    });
    Check::new(
        "v3-relaxation-witness",
        failure,
        "50 matrices, exact".into(),
    )
}

fn gradient_check(rng: &mut ChaCha8Rng) -> Check {
    let mut worst = 0.0f64;
    let failure = first_failure(0..20, |k| {
        let widths = [
            rng.random_range(1..=6),
            rng.random_range(1..=10),
            rng.random_range(1..=6),
        ];
        let mlp = Mlp::seeded(&widths, rng.random()).map_err(text)?;
        let input: Vec<f64> = (0..widths[0])
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        let target = (0..widths[2])
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let r = finite_diff_check(&mlp, &input, &SquaredError { target });
        worst = worst.max(r.max_relative_error);
        fail_if(r.max_relative_error >= GRADIENT_TOL, || {
            format!("mlp {k}: error {:e}", r.max_relative_error)
        })
    });
    Check::new(
        "gradient-check",
        failure,
        format!("20 MLPs, worst {worst:.2e}"),
    )
}

fn single_span_rejected() -> Check {
    let report = validate_span(&single_span_edge_update_spec(), &GraphContext::complete(3));
    let failure = match report.issue("o") {
        Some(_) if !report.is_valid() => None,
        _ => Some(format!("expected an issue on o, got: {report}")),
    };
    Check::new(
        "single-span-edge-update-rejected",
        failure,
        "o cannot deliver one message twice".into(),
    )
}

fn fixture_checks(g: &GraphContext) -> Vec<Check> {
    let bf = first_failure(0..g.node_count(), |&s| {
        let got = bellman_ford(g, s).map_err(text)?.into_values();
        fail_if(got != oracle_bellman_ford(g, s), || format!("source {s}"))
    });
    let d = DistanceMatrix::from_graph(g);
    let fw = match floyd_warshall(&d) {
        Ok(out) if out == oracle_floyd_warshall(&d) => None,
        Ok(_) => Some("mismatch".to_string()),
        Err(e) => Some(e.to_string()),
    };
    vec![
        Check::new(
            "fixture-bellman-ford",
            bf,
            format!("{} sources", g.node_count()),
        ),
        Check::new(
            "fixture-floyd-warshall",
            fw,
            format!("{} nodes", g.node_count()),
        ),
    ]
}

/// Runs every suite with generators seeded from `seed`; `graph` adds
/// oracle checks on one loaded graph.
pub fn verify(seed: u64, graph: Option<&GraphContext>) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![
        bf_equivalence(&mut rng),
        bf_step_recurrence(&mut rng),
        fw_equivalence(&mut rng),
        law_check("min-plus", &MinPlus, seed),
        law_check("real", &Real, seed.wrapping_add(1)),
        law_check("max-plus", &MaxPlus, seed.wrapping_add(2)),
        law_check("min-plus-real", &MinPlusReal, seed.wrapping_add(3)),
        law_check("bool", &Boolean, seed.wrapping_add(4)),
        broken_instance(seed.wrapping_add(5)),
        monad_laws(seed.wrapping_add(6)),
        equivariance(&mut rng),
        eq1_correspondence(&mut rng),
        v3_witness(&mut rng),
        gradient_check(&mut rng),
        single_span_rejected(),
    ];
    if let Some(g) = graph {
        checks.extend(fixture_checks(g));
    }
    VerifyReport { checks }
}
