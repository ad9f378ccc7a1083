use std::fs;
use std::path::Path;

use crate::algebra::{Boolean, MaxPlus, MinPlus, Real, Semiring, Tropical};
use crate::carrier::{Edge, Factor, GraphContext};
use crate::span::{validate_span, DataMap, PolynomialSpan, SpanSpec};

use super::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn malformed(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("line {line}: {msg}"))
}

/// Lines that carry content, numbered from 1; `#` starts a comment.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_index(tok: &str, line: usize, what: &str) -> Result<usize, CliError> {
    tok.parse().map_err(|_| {
        malformed(
            line,
            format!("{what} `{tok}` is not a non-negative integer"),
        )
    })
}

fn parse_weight(tok: &str, line: usize) -> Result<Tropical, CliError> {
    if tok.starts_with('-') {
        return Err(malformed(line, format!("negative weight `{tok}`")));
    }
    tok.parse().map_err(|_| {
        malformed(
            line,
            format!("weight `{tok}` is neither a non-negative integer nor inf"),
        )
    })
}

/// Parses the text graph format: a header `n m [directed|full]` and `m`
/// lines `u v w`. In `full` mode unlisted pairs get weight `inf` and
/// repeated pairs keep their lightest weight.
pub fn parse_graph(text: &str) -> Result<GraphContext, CliError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| CliError::Input("empty graph file".into()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if !(2..=3).contains(&h.len()) {
        return Err(malformed(hl, "header must be `n m [directed|full]`"));
    }
    let n = parse_index(h[0], hl, "node count")?;
    let m = parse_index(h[1], hl, "edge count")?;
    let full = match h.get(2) {
        None | Some(&"directed") => false,
        Some(&"full") => true,
        Some(other) => return Err(malformed(hl, format!("unknown graph mode `{other}`"))),
    };
    let mut edges = Vec::with_capacity(m);
    for (ln, line) in lines {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            return Err(malformed(ln, "edge lines must be `u v w`"));
        }
        let (u, v) = (
            parse_index(t[0], ln, "node")?,
            parse_index(t[1], ln, "node")?,
        );
        if u >= n || v >= n {
            return Err(malformed(ln, format!("edge {u} -> {v} is outside 0..{n}")));
        }
        edges.push(Edge::new(u, v, parse_weight(t[2], ln)?));
    }
    if edges.len() != m {
        return Err(CliError::Input(format!(
            "header promises {m} edges, found {}",
            edges.len()
        )));
    }
    if full {
        let mut w = vec![Tropical::Infinity; n * n];
        for e in &edges {
            let slot = &mut w[e.source * n + e.target];
            *slot = (*slot).min(e.weight);
        }
        GraphContext::complete_with_weights(n, w).map_err(|e| CliError::Input(e.to_string()))
    } else {
        GraphContext::new(n, edges).map_err(|e| CliError::Input(e.to_string()))
    }
}

pub fn load_graph(path: &Path) -> Result<GraphContext, CliError> {
    parse_graph(&read(path)?).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses, builds and validates a span from its JSON form.
pub fn parse_span_spec(text: &str, g: &GraphContext) -> Result<PolynomialSpan, CliError> {
    let spec = SpanSpec::from_json(text).map_err(|e| CliError::Input(format!("span spec: {e}")))?;
    let report = validate_span(&spec, g);
    if !report.is_valid() {
        return Err(CliError::Input(format!(
            "span spec does not type-check:\n{report}"
        )));
    }
    PolynomialSpan::from_spec(&spec, g).map_err(|e| CliError::Input(e.to_string()))
}

pub fn load_span_spec(path: &Path, g: &GraphContext) -> Result<PolynomialSpan, CliError> {
    parse_span_spec(&read(path)?, g)
}

/// Semirings selectable from the command line, with their text forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SemiringName {
    MinPlus,
    Real,
    MaxPlus,
    Bool,
}

/// Text conversion for the values of a command-line semiring.
pub trait TextValue: Semiring {
    /// An edge weight as a value; `inf` becomes `zero`.
    fn weight_value(&self, w: Tropical) -> Self::Value;
    fn parse_value(&self, tok: &str) -> Option<Self::Value>;
    fn render(&self, v: &Self::Value) -> String;
}

impl TextValue for MinPlus {
    fn weight_value(&self, w: Tropical) -> Tropical {
        w
    }
    fn parse_value(&self, tok: &str) -> Option<Tropical> {
        tok.parse().ok()
    }
    fn render(&self, v: &Tropical) -> String {
        v.to_string()
    }
}

fn real_weight(w: Tropical, zero: f64) -> f64 {
    w.finite().map_or(zero, |x| x as f64)
}

fn parse_real(tok: &str) -> Option<f64> {
    match tok {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => tok.parse().ok().filter(|x: &f64| !x.is_nan()),
    }
}

impl TextValue for Real {
    fn weight_value(&self, w: Tropical) -> f64 {
        real_weight(w, self.zero())
    }
    fn parse_value(&self, tok: &str) -> Option<f64> {
        parse_real(tok)
    }
    fn render(&self, v: &f64) -> String {
        super::format_real(*v)
    }
}

impl TextValue for MaxPlus {
    fn weight_value(&self, w: Tropical) -> f64 {
        real_weight(w, self.zero())
    }
    fn parse_value(&self, tok: &str) -> Option<f64> {
        parse_real(tok)
    }
    fn render(&self, v: &f64) -> String {
        super::format_real(*v)
    }
}

impl TextValue for Boolean {
    fn weight_value(&self, w: Tropical) -> bool {
        !w.is_infinite()
    }
    fn parse_value(&self, tok: &str) -> Option<bool> {
        match tok {
            "1" | "true" => Some(true),
            "0" | "false" => Some(false),
            _ => None,
        }
    }
    fn render(&self, v: &bool) -> String {
        u8::from(*v).to_string()
    }
}

/// Parses one row per line, whitespace-separated, for every element of `W`.
pub fn parse_data_map<S: TextValue>(
    s: &S,
    text: &str,
    span: &PolynomialSpan,
) -> Result<DataMap<S::Value>, CliError> {
    let mut rows = Vec::new();
    for (ln, line) in content_lines(text) {
        let row = line
            .split_whitespace()
            .map(|tok| {
                s.parse_value(tok)
                    .ok_or_else(|| malformed(ln, format!("bad value `{tok}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    DataMap::from_rows(span.w().clone(), span.graph(), rows)
        .map_err(|e| CliError::Input(format!("input map: {e}")))
}

/// The default input on `W`: edge weights on `E` summands (and on `V²`
/// summands of a fully-connected graph), an indicator of `source` on the
/// first `V` summand when one is given, and `one` elsewhere.
pub fn default_input<S: TextValue>(
    s: &S,
    span: &PolynomialSpan,
    source: Option<usize>,
) -> Result<DataMap<S::Value>, CliError> {
    let g = span.graph();
    let w = span.w();
    if let Some(src) = source {
        if src >= g.node_count() {
            return Err(CliError::Input(format!(
                "source {src} is outside 0..{}",
                g.node_count()
            )));
        }
    }
    let mut indicator = source;
    let parts = w
        .terms()
        .iter()
        .enumerate()
        .map(|(k, term)| {
            let size = w.summand(k).size(g);
            match term.factors() {
                [Factor::E] => g.weights().map(|x| s.weight_value(x)).collect(),
                [Factor::V, Factor::V] if g.is_fully_connected() => {
                    g.weights().map(|x| s.weight_value(x)).collect()
                }
                [Factor::V] if indicator.is_some() => {
                    let src = indicator.take().expect("checked");
                    (0..size)
                        .map(|v| if v == src { s.one() } else { s.zero() })
                        .collect()
                }
                _ => vec![s.one(); size],
            }
        })
        .collect();
    DataMap::from_terms(w.clone(), g, 1, parts).map_err(|e| CliError::Input(e.to_string()))
}

pub(crate) fn read_text(path: &Path) -> Result<String, CliError> {
    read(path)
}
