use crate::algebra::{MinPlus, Semiring, Tropical};
use crate::carrier::{parse_carrier, Carrier, GraphContext};
use crate::span::{DataMap, FoldStrategy, PolynomialSpan, SpanSpec};

use super::AlgorithmError;

/// `V + (V + E) ← (V + E) + (V + E) → V + E → V`.
///
/// Inputs are (distances, bias, weights). The first copy of `V + E` pulls
/// distances back to nodes and, via `src`, to edges; the second copy
/// carries (bias, weights). `p` glues the copies so each message folds
/// `d ⊗ b` on nodes and `d(src) ⊗ w` on edges, and `o` delivers node
/// messages to themselves and edge messages to their targets.
pub fn bellman_ford_spec() -> SpanSpec {
    SpanSpec::new(
        "V + (V + E)",
        "(V + E) + (V + E)",
        "V + E",
        "V",
        "[inj[1]; inj[1].src; inj[2]; inj[3]]",
        "[inj[1]; inj[2]; inj[1]; inj[2]]",
        "[id; tgt]",
    )
}

pub fn bellman_ford_span(g: &GraphContext) -> PolynomialSpan {
    PolynomialSpan::from_spec(&bellman_ford_spec(), g).expect("the Bellman-Ford span is well typed")
}

/// Distances, bias and edge weights for one Bellman-Ford round.
#[derive(Debug, Clone, PartialEq)]
pub struct BellmanFordState<V> {
    pub distances: DataMap<V>,
    pub bias: DataMap<V>,
    pub weights: DataMap<V>,
}

impl<V: Clone> BellmanFordState<V> {
    /// State with the bias fixed to the `⊗`-identity.
    pub fn new<S: Semiring<Value = V>>(
        s: &S,
        g: &GraphContext,
        distances: Vec<V>,
        weights: Vec<V>,
    ) -> Result<Self, AlgorithmError> {
        let v = parse_carrier("V").expect("static carrier");
        let e = parse_carrier("E").expect("static carrier");
        Ok(BellmanFordState {
            distances: DataMap::from_column(v.clone(), g, distances)?,
            bias: DataMap::filled(v, g, 1, s.one())?,
            weights: DataMap::from_column(e, g, weights)?,
        })
    }

    fn input(&self, g: &GraphContext) -> Result<DataMap<V>, AlgorithmError> {
        let w: Carrier = parse_carrier("V + (V + E)").expect("static carrier");
        let parts = vec![
            self.distances.values().to_vec(),
            self.bias.values().to_vec(),
            self.weights.values().to_vec(),
        ];
        Ok(DataMap::from_terms(w, g, 1, parts)?)
    }
}

impl BellmanFordState<Tropical> {
    /// Min-plus state using the graph's own edge weights.
    pub fn from_graph(g: &GraphContext, distances: Vec<Tropical>) -> Result<Self, AlgorithmError> {
        Self::new(&MinPlus, g, distances, g.weights().collect())
    }
}

/// One integral transform over `span` (which must be the Bellman-Ford span).
pub fn bellman_ford_step_on<S: Semiring>(
    s: &S,
    span: &PolynomialSpan,
    st: &BellmanFordState<S::Value>,
) -> Result<DataMap<S::Value>, AlgorithmError> {
    let f = st.input(span.graph())?;
    Ok(span.integral_transform(s, &FoldStrategy::Semiring, &f, None)?)
}

/// One min-plus Bellman-Ford round as an integral transform.
pub fn bellman_ford_step(
    g: &GraphContext,
    st: &BellmanFordState<Tropical>,
) -> Result<DataMap<Tropical>, AlgorithmError> {
    bellman_ford_step_on(&MinPlus, &bellman_ford_span(g), st)
}

/// Single-source path values over any semiring: the source starts at
/// `one`, everything else at `zero`, and rounds repeat until nothing
/// changes or `n − 1` rounds have run.
pub fn bellman_ford_in<S: Semiring>(
    s: &S,
    g: &GraphContext,
    source: usize,
    weights: Vec<S::Value>,
) -> Result<DataMap<S::Value>, AlgorithmError> {
    let n = g.node_count();
    if source >= n {
        return Err(AlgorithmError::InvalidSource { node: source, n });
    }
    let span = bellman_ford_span(g);
    let mut d = vec![s.zero(); n];
    d[source] = s.one();
    let mut st = BellmanFordState::new(s, g, d, weights)?;
    for _ in 1..n {
        let next = bellman_ford_step_on(s, &span, &st)?;
        if next == st.distances {
            break;
        }
        st.distances = next;
    }
    Ok(st.distances)
}

/// Single-source shortest distances with tropical-natural weights.
pub fn bellman_ford(g: &GraphContext, source: usize) -> Result<DataMap<Tropical>, AlgorithmError> {
    bellman_ford_in(&MinPlus, g, source, g.weights().collect())
}

/// Textbook Bellman-Ford: relax every edge `n − 1` times.
pub fn oracle_bellman_ford(g: &GraphContext, source: usize) -> Vec<Tropical> {
    let n = g.node_count();
    let mut d = vec![Tropical::Infinity; n];
    if source >= n {
        return d;
    }
    d[source] = Tropical::ZERO;
    for _ in 1..n {
        let mut changed = false;
        for e in g.edges() {
            let cand = d[e.source].saturating_add(e.weight);
            if cand < d[e.target] {
                d[e.target] = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    d
}
