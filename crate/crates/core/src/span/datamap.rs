use crate::carrier::{check_permutation, Carrier, Element, Factor, GraphContext};

use super::SpanError;

/// A dense table assigning a row of `width` values to every element of a
/// carrier, rows in canonical enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMap<V> {
    carrier: Carrier,
    width: usize,
    values: Vec<V>,
}

impl<V: Clone> DataMap<V> {
    /// `values` is row-major: row `r` occupies `values[r*width..(r+1)*width]`.
    pub fn new(
        carrier: Carrier,
        g: &GraphContext,
        width: usize,
        values: Vec<V>,
    ) -> Result<Self, SpanError> {
        if width == 0 {
            return Err(SpanError::ZeroWidth);
        }
        let rows = carrier.checked_size(g)?;
        if values.len() != rows * width {
            return Err(SpanError::ValueCount {
                carrier: carrier.to_string(),
                expected: rows * width,
                found: values.len(),
            });
        }
        Ok(DataMap {
            carrier,
            width,
            values,
        })
    }

    pub fn filled(
        carrier: Carrier,
        g: &GraphContext,
        width: usize,
        v: V,
    ) -> Result<Self, SpanError> {
        let rows = carrier.checked_size(g)?;
        Self::new(carrier, g, width, vec![v; rows * width])
    }

    pub fn from_rows(
        carrier: Carrier,
        g: &GraphContext,
        rows: Vec<Vec<V>>,
    ) -> Result<Self, SpanError> {
        let width = rows.first().map_or(1, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != width) {
            return Err(SpanError::RowWidth {
                row: bad,
                expected: width,
                found: rows[bad].len(),
            });
        }
        Self::new(carrier, g, width, rows.concat())
    }

    /// A width-1 map from one value per element.
    pub fn from_column(
        carrier: Carrier,
        g: &GraphContext,
        column: Vec<V>,
    ) -> Result<Self, SpanError> {
        Self::new(carrier, g, 1, column)
    }

    /// Stacks per-summand blocks of rows into a map on the whole carrier.
    /// `parts[k]` holds the flat row-major values of summand `k`.
    pub fn from_terms(
        carrier: Carrier,
        g: &GraphContext,
        width: usize,
        parts: Vec<Vec<V>>,
    ) -> Result<Self, SpanError> {
        if parts.len() != carrier.terms().len() {
            return Err(SpanError::TermCount {
                carrier: carrier.to_string(),
                expected: carrier.terms().len(),
                found: parts.len(),
            });
        }
        Self::new(carrier, g, width, parts.concat())
    }

    /// Splits into one map per summand.
    pub fn split_terms(&self, g: &GraphContext) -> Vec<DataMap<V>> {
        let offsets = self.carrier.offsets(g);
        (0..self.carrier.terms().len())
            .map(|k| DataMap {
                carrier: self.carrier.summand(k),
                width: self.width,
                values: self.values[offsets[k] * self.width..offsets[k + 1] * self.width].to_vec(),
            })
            .collect()
    }

    /// Moves every row to where the node relabelling `v ↦ perm[v]` sends its
    /// element. `E` coordinates follow the edge layout of `g`: unchanged for
    /// sparse graphs (whose permuted copy keeps edge order), and
    /// `(i, j) ↦ (perm[i], perm[j])` for fully-connected ones.
    pub fn permuted(&self, g: &GraphContext, perm: &[usize]) -> Result<Self, SpanError> {
        check_permutation(perm, g.node_count())?;
        let n = g.node_count();
        let mut values = self.values.clone();
        for (r, x) in self.carrier.elements(g).enumerate() {
            let factors = self.carrier.terms()[x.term].factors();
            let coords: Vec<usize> = factors
                .iter()
                .zip(&x.coords)
                .map(|(f, &c)| match f {
                    Factor::V => perm[c],
                    Factor::E if g.is_fully_connected() => perm[c / n] * n + perm[c % n],
                    Factor::E => c,
                })
                .collect();
            let target = self.carrier.rank(&Element::new(x.term, coords), g)?;
            values[target * self.width..(target + 1) * self.width].clone_from_slice(self.row(r));
        }
        Ok(DataMap {
            carrier: self.carrier.clone(),
            width: self.width,
            values,
        })
    }
}

impl<V> DataMap<V> {
    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.values.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn into_values(self) -> Vec<V> {
        self.values
    }

    pub fn row(&self, r: usize) -> &[V] {
        &self.values[r * self.width..(r + 1) * self.width]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[V]> + '_ {
        self.values.chunks_exact(self.width)
    }

    pub fn get(&self, r: usize, channel: usize) -> &V {
        &self.values[r * self.width + channel]
    }
}
