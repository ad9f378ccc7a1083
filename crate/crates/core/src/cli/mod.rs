//! The `polyspan` command line: load graphs and span specs, run the
//! algorithms and transforms, and emit deterministic text.

mod input;
mod verify;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{check_laws, random_triples, Boolean, MaxPlus, MinPlus, Real, SampleValue};
use crate::algorithms::{bellman_ford_in, floyd_warshall, DistanceMatrix};
use crate::carrier::{parse_carrier, GraphContext};
use crate::gnn::{mpnn_forward, v3_forward, Aggregator, LayerConfig};
use crate::span::{DataMap, FoldStrategy, PolynomialSpan};

pub use input::{
    default_input, load_graph, load_span_spec, parse_data_map, parse_graph, parse_span_spec,
    SemiringName, TextValue,
};
pub use verify::{
    adversarial_graphs, random_graph, random_matrix, relaxation_layer, verify, Check, VerifyReport,
    EQUIVARIANCE_TOL, GRADIENT_TOL, LAW_SAMPLES,
};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
        }
    }
}

/// Formats a real with 9 significant digits, `%g` style.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..9).contains(&exp) {
        let decimals = usize::try_from(8 - exp).expect("exponent below 9");
        trim(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "polyspan",
    version,
    about = "Dynamic programming and message passing as integral transforms over polynomial spans"
)]
pub struct Command {
    #[command(subcommand)]
    pub verb: Verb,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraphArg {
    /// Graph file: `n m [directed|full]` then `u v w` per edge.
    #[arg(long)]
    pub graph: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Single-source path values, one `node value` line per node.
    BellmanFord {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, default_value_t = 0)]
        source: usize,
        #[arg(long, value_enum, default_value_t = SemiringName::MinPlus)]
        semiring: SemiringName,
    },
    /// All-pairs shortest distances, one matrix row per line.
    FloydWarshall {
        #[command(flatten)]
        graph: GraphArg,
    },
    /// One integral transform of a span spec over a graph.
    RunSpan {
        #[command(flatten)]
        graph: GraphArg,
        /// JSON span spec with keys W, X, Y, Z, i, p, o.
        #[arg(long)]
        span: PathBuf,
        #[arg(long, value_enum, default_value_t = SemiringName::MinPlus)]
        semiring: SemiringName,
        /// Marks this node in the first `V` summand of the default input.
        #[arg(long)]
        source: Option<usize>,
        /// Input rows on `W`, one per line; replaces the default input.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Samples the semiring and aggregation laws.
    CheckLaws {
        /// Check one instance; all shipped instances when omitted.
        #[arg(long, value_enum)]
        semiring: Option<SemiringName>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = LAW_SAMPLES)]
        samples: usize,
    },
    /// Output features of one seeded message-passing layer.
    GnnDemo {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Oracle-equivalence and property suites.
    Verify {
        /// Also check the algorithms against their oracles on this graph.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Text produced by a command, and whether a check inside it failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub failed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome {
            text,
            failed: false,
        }
    }
}

fn dispatch_semiring<R>(
    name: SemiringName,
    min_plus: impl FnOnce(&MinPlus) -> R,
    real: impl FnOnce(&Real) -> R,
    max_plus: impl FnOnce(&MaxPlus) -> R,
    boolean: impl FnOnce(&Boolean) -> R,
) -> R {
    match name {
        SemiringName::MinPlus => min_plus(&MinPlus),
        SemiringName::Real => real(&Real),
        SemiringName::MaxPlus => max_plus(&MaxPlus),
        SemiringName::Bool => boolean(&Boolean),
    }
}

fn render_rows<S: TextValue>(s: &S, m: &DataMap<S::Value>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| s.render(v)).collect();
        writeln!(out, "{}", cells.join(" ")).expect("writing to a string");
    }
    out
}

fn run_bellman_ford<S: TextValue>(
    s: &S,
    g: &GraphContext,
    source: usize,
) -> Result<String, CliError> {
    let weights = g.weights().map(|w| s.weight_value(w)).collect();
    let d = bellman_ford_in(s, g, source, weights).map_err(|e| CliError::Input(e.to_string()))?;
    let mut out = String::new();
    for (v, x) in d.values().iter().enumerate() {
        writeln!(out, "{v} {}", s.render(x)).expect("writing to a string");
    }
    Ok(out)
}

fn run_span<S: TextValue>(
    s: &S,
    span: &PolynomialSpan,
    source: Option<usize>,
    input: Option<&Path>,
) -> Result<String, CliError> {
    let f = match input {
        Some(path) => parse_data_map(s, &input::read_text(path)?, span)?,
        None => default_input(s, span, source)?,
    };
    let out = span
        .integral_transform(s, &FoldStrategy::Semiring, &f, None)
        .map_err(|e| CliError::Input(e.to_string()))?;
    Ok(render_rows(s, &out))
}

fn laws_text<S: SampleValue>(s: &S, samples: usize, seed: u64) -> (String, bool) {
    let report = check_laws(s, &random_triples(s, samples, seed));
    (report.to_string(), !report.all_passed())
}

fn run_check_laws(
    which: Option<SemiringName>,
    seed: u64,
    samples: usize,
) -> Result<Outcome, CliError> {
    if samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let names: Vec<SemiringName> = match which {
        Some(n) => vec![n],
        None => vec![
            SemiringName::MinPlus,
            SemiringName::Real,
            SemiringName::MaxPlus,
            SemiringName::Bool,
        ],
    };
    let mut text = String::new();
    let mut failed = false;
    for name in names {
        let (t, f) = dispatch_semiring(
            name,
            |s| laws_text(s, samples, seed),
            |s| laws_text(s, samples, seed),
            |s| laws_text(s, samples, seed),
            |s| laws_text(s, samples, seed),
        );
        if which.is_none() {
            let label = clap::ValueEnum::to_possible_value(&name).expect("no skipped variants");
            writeln!(text, "[{}]", label.get_name()).expect("writing to a string");
        }
        text.push_str(&t);
        failed |= f;
    }
    Ok(Outcome { text, failed })
}

/// Seeded features: two random node channels, the edge weight as the edge
/// channel (`inf` as 0) and a constant graph feature.
fn run_gnn_demo(g: &GraphContext, seed: u64) -> Result<String, CliError> {
    let input_err = |e: crate::gnn::GnnError| CliError::Input(e.to_string());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = LayerConfig::new(Aggregator::Sum, 2, 1, 1, seed);
    let n = g.node_count();
    let node_values = (0..2 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nodes = DataMap::new(parse_carrier("V").expect("static"), g, 2, node_values)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let edge_values = g
        .weights()
        .map(|w| w.finite().map_or(0.0, |x| x as f64))
        .collect();
    let edges = DataMap::from_column(parse_carrier("E").expect("static"), g, edge_values)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let graph = [1.0];
    let mut out = String::new();
    let mut section = |title: &str, m: &DataMap<f64>| {
        writeln!(out, "# {title}").expect("writing to a string");
        out.push_str(&render_rows(&Real, m));
    };
    if g.is_fully_connected() {
        let o = v3_forward(g, &nodes, &edges, &graph, &cfg).map_err(input_err)?;
        section("nodes", &o.nodes);
        section("edges", &o.edges);
    } else {
        let o = mpnn_forward(g, &nodes, &edges, &graph, &cfg).map_err(input_err)?;
        section("nodes", &o);
    }
    Ok(out)
}

/// Runs a parsed command.
pub fn run_command(cmd: &Command) -> Result<Outcome, CliError> {
    match &cmd.verb {
        Verb::BellmanFord {
            graph,
            source,
            semiring,
        } => {
            let g = load_graph(&graph.graph)?;
            dispatch_semiring(
                *semiring,
                |s| run_bellman_ford(s, &g, *source),
                |s| run_bellman_ford(s, &g, *source),
                |s| run_bellman_ford(s, &g, *source),
                |s| run_bellman_ford(s, &g, *source),
            )
            .map(Outcome::ok)
        }
        Verb::FloydWarshall { graph } => {
            let g = load_graph(&graph.graph)?;
            let d = floyd_warshall(&DistanceMatrix::from_graph(&g))
                .map_err(|e| CliError::Input(e.to_string()))?;
            Ok(Outcome::ok(d.to_string()))
        }
        Verb::RunSpan {
            graph,
            span,
            semiring,
            source,
            input,
        } => {
            let g = load_graph(&graph.graph)?;
            let sp = load_span_spec(span, &g)?;
            let input = input.as_deref();
            dispatch_semiring(
                *semiring,
                |s| run_span(s, &sp, *source, input),
                |s| run_span(s, &sp, *source, input),
                |s| run_span(s, &sp, *source, input),
                |s| run_span(s, &sp, *source, input),
            )
            .map(Outcome::ok)
        }
        Verb::CheckLaws {
            semiring,
            seed,
            samples,
        } => run_check_laws(*semiring, *seed, *samples),
        Verb::GnnDemo { graph, seed } => {
            run_gnn_demo(&load_graph(&graph.graph)?, *seed).map(Outcome::ok)
        }
        Verb::Verify { graph, seed } => {
            let g = graph.as_deref().map(load_graph).transpose()?;
            let report = verify(*seed, g.as_ref());
            Ok(Outcome {
                text: report.to_string(),
                failed: !report.all_passed(),
            })
        }
    }
}

/// Parses arguments, runs the command and writes its output; returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cmd = match Command::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match run_command(&cmd) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let written = match &cmd.out {
        Some(path) => {
            std::fs::write(path, &outcome.text).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => std::io::stdout()
            .write_all(outcome.text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    if outcome.failed {
        eprintln!("error: verification failed");
        return EXIT_VERIFICATION;
    }
    0
}
