use std::fmt;

use crate::algebra::{MinPlus, Tropical};
use crate::carrier::{parse_carrier, GraphContext};
use crate::span::{DataMap, FoldStrategy, PolynomialSpan, SpanSpec};

use super::AlgorithmError;

/// Square matrix of min-plus values, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<Tropical>,
}

impl DistanceMatrix {
    pub fn new(n: usize, entries: Vec<Tropical>) -> Result<Self, AlgorithmError> {
        if entries.len() != n * n {
            return Err(AlgorithmError::NotSquare {
                n,
                len: entries.len(),
            });
        }
        Ok(DistanceMatrix { n, entries })
    }

    pub fn from_rows(rows: Vec<Vec<Tropical>>) -> Result<Self, AlgorithmError> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(AlgorithmError::NotSquare { n, len: r.len() });
        }
        Self::new(n, rows.concat())
    }

    /// Zero diagonal, `Infinity` elsewhere.
    pub fn identity(n: usize) -> Self {
        let entries = (0..n * n).map(|k| {
            if k / n == k % n {
                Tropical::ZERO
            } else {
                Tropical::Infinity
            }
        });
        DistanceMatrix {
            n,
            entries: entries.collect(),
        }
    }

    /// Zero diagonal; off-diagonal entries take the lightest edge between
    /// the two nodes.
    pub fn from_graph(g: &GraphContext) -> Self {
        let mut d = Self::identity(g.node_count());
        for e in g.edges() {
            let slot = &mut d.entries[e.source * d.n + e.target];
            *slot = (*slot).min(e.weight);
        }
        d
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Tropical {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Tropical] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Tropical] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    fn check_diagonal(&self) -> Result<(), AlgorithmError> {
        match (0..self.n).find(|&i| self.get(i, i) != Tropical::ZERO) {
            Some(index) => Err(AlgorithmError::NonZeroDiagonal { index }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for DistanceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// `V² ← V³ + V³ → V³ → V²`.
///
/// A message `(i, k, j)` stands for the path `i → k → j`: its two
/// arguments are `d[i][k]` and `d[k][j]`, folded with `⊗ = +`, and `o`
/// drops the intermediate node so `⊕ = min` ranges over every `k`.
pub fn floyd_warshall_spec() -> SpanSpec {
    SpanSpec::new(
        "V^2",
        "V^3 + V^3",
        "V^3",
        "V^2",
        "[proj[1,2]; proj[2,3]]",
        "[id; id]",
        "proj[1,3]",
    )
}

pub fn floyd_warshall_span(n: usize) -> PolynomialSpan {
    PolynomialSpan::from_spec(&floyd_warshall_spec(), &GraphContext::complete(n))
        .expect("the Floyd-Warshall span is well typed")
}

fn transform_on(
    span: &PolynomialSpan,
    d: &DistanceMatrix,
) -> Result<DistanceMatrix, AlgorithmError> {
    let f = DataMap::from_column(
        parse_carrier("V^2").expect("static carrier"),
        span.graph(),
        d.entries.clone(),
    )?;
    let out = span.integral_transform(&MinPlus, &FoldStrategy::Semiring, &f, None)?;
    DistanceMatrix::new(d.n, out.into_values())
}

fn relax_on(span: &PolynomialSpan, d: &DistanceMatrix) -> Result<DistanceMatrix, AlgorithmError> {
    let t = transform_on(span, d)?;
    let entries = d
        .entries
        .iter()
        .zip(&t.entries)
        .map(|(a, b)| *a.min(b))
        .collect();
    DistanceMatrix::new(d.n, entries)
}

/// The bare transform: `out[i][j] = min_k d[i][k] + d[k][j]`.
pub fn floyd_warshall_transform(d: &DistanceMatrix) -> Result<DistanceMatrix, AlgorithmError> {
    transform_on(&floyd_warshall_span(d.n), d)
}

/// One relaxation: `min(d, transform(d))` elementwise.
pub fn floyd_warshall_relax(d: &DistanceMatrix) -> Result<DistanceMatrix, AlgorithmError> {
    relax_on(&floyd_warshall_span(d.n), d)
}

/// All-pairs shortest distances by repeated relaxation to a fixpoint.
/// Each round squares the path length covered, so at most
/// `⌈log₂ n⌉ + 1` rounds run.
pub fn floyd_warshall(d0: &DistanceMatrix) -> Result<DistanceMatrix, AlgorithmError> {
    floyd_warshall_counted(d0).map(|(d, _)| d)
}

pub(crate) fn floyd_warshall_counted(
    d0: &DistanceMatrix,
) -> Result<(DistanceMatrix, usize), AlgorithmError> {
    d0.check_diagonal()?;
    let span = floyd_warshall_span(d0.n);
    let mut d = d0.clone();
    let mut rounds = 0;
    loop {
        let next = relax_on(&span, &d)?;
        rounds += 1;
        if next == d {
            return Ok((d, rounds));
        }
        d = next;
    }
}

/// Textbook triple loop.
pub fn oracle_floyd_warshall(d0: &DistanceMatrix) -> DistanceMatrix {
    let n = d0.n;
    let mut d = d0.clone();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d.get(i, k).saturating_add(d.get(k, j));
                if via < d.get(i, j) {
                    d.entries[i * n + j] = via;
                }
            }
        }
    }
    d
}
