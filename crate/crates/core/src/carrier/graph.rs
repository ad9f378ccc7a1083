use thiserror::Error;

use crate::algebra::Tropical;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: Tropical,
}

impl Edge {
    pub fn new(source: usize, target: usize, weight: impl Into<Tropical>) -> Self {
        Edge {
            source,
            target,
            weight: weight.into(),
        }
    }
}

/// How the edge set `E` is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeMode {
    /// An explicit edge list in load order.
    Sparse,
    /// `E = V²`: edge `k` joins `k / n` to `k % n`.
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge {index} ({from} -> {to}) references a node outside 0..{n}")]
    NodeOutOfRange {
        index: usize,
        from: usize,
        to: usize,
        n: usize,
    },
    #[error("fully-connected graph on {n} nodes needs {expected} edges, got {found}")]
    FullEdgeCount {
        n: usize,
        expected: usize,
        found: usize,
    },
    #[error("permutation of length {found} does not match {n} nodes or is not a bijection")]
    BadPermutation { n: usize, found: usize },
}

/// The node set `V = {0..n}` and the edge set `E` with source, target and
/// weight maps. Edge order is canonical: it is the enumeration order of `E`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphContext {
    n: usize,
    edges: Vec<Edge>,
    mode: EdgeMode,
}

impl GraphContext {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self, GraphError> {
        for (index, e) in edges.iter().enumerate() {
            if e.source >= n || e.target >= n {
                return Err(GraphError::NodeOutOfRange {
                    index,
                    from: e.source,
                    to: e.target,
                    n,
                });
            }
        }
        Ok(GraphContext {
            n,
            edges,
            mode: EdgeMode::Sparse,
        })
    }

    /// Fully-connected graph with every weight set to `Infinity`.
    pub fn complete(n: usize) -> Self {
        Self::complete_with_weights(n, vec![Tropical::Infinity; n * n])
            .expect("weight count matches by construction")
    }

    /// Fully-connected graph; `weights[i * n + j]` is the weight of `i -> j`.
    pub fn complete_with_weights(n: usize, weights: Vec<Tropical>) -> Result<Self, GraphError> {
        if weights.len() != n * n {
            return Err(GraphError::FullEdgeCount {
                n,
                expected: n * n,
                found: weights.len(),
            });
        }
        let edges = weights
            .into_iter()
            .enumerate()
            .map(|(k, w)| Edge::new(k / n, k % n, w))
            .collect();
        Ok(GraphContext {
            n,
            edges,
            mode: EdgeMode::Full,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn mode(&self) -> EdgeMode {
        self.mode
    }

    pub fn is_fully_connected(&self) -> bool {
        self.mode == EdgeMode::Full
    }

    pub fn source(&self, edge: usize) -> usize {
        self.edges[edge].source
    }

    pub fn target(&self, edge: usize) -> usize {
        self.edges[edge].target
    }

    pub fn weights(&self) -> impl Iterator<Item = Tropical> + '_ {
        self.edges.iter().map(|e| e.weight)
    }

    /// Relabels node `v` as `perm[v]`.
    ///
    /// Sparse graphs keep their edge order. Fully-connected graphs move the
    /// weight of `i -> j` to slot `perm[i] * n + perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, GraphError> {
        check_permutation(perm, self.n)?;
        match self.mode {
            EdgeMode::Sparse => {
                let edges = self
                    .edges
                    .iter()
                    .map(|e| Edge::new(perm[e.source], perm[e.target], e.weight))
                    .collect();
                Ok(GraphContext {
                    n: self.n,
                    edges,
                    mode: EdgeMode::Sparse,
                })
            }
            EdgeMode::Full => {
                let n = self.n;
                let mut weights = vec![Tropical::Infinity; n * n];
                for e in &self.edges {
                    weights[perm[e.source] * n + perm[e.target]] = e.weight;
                }
                Self::complete_with_weights(n, weights)
            }
        }
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<(), GraphError> {
    let mut seen = vec![false; n];
    let ok = perm.len() == n
        && perm
            .iter()
            .all(|&p| p < n && !std::mem::replace(&mut seen[p], true));
    if ok {
        Ok(())
    } else {
        Err(GraphError::BadPermutation {
            n,
            found: perm.len(),
        })
    }
}
