use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{fold_list, reduce_bag, Bag, OrderedList, Semiring};
use crate::carrier::{build_arrow, parse_carrier, Arrow, Carrier, GraphContext};

use super::{DataMap, SpanError};

/// Textual description of a span: four carrier expressions and three arrow
/// expressions. This is the JSON span-spec format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanSpec {
    #[serde(rename = "W")]
    pub w: String,
    #[serde(rename = "X")]
    pub x: String,
    #[serde(rename = "Y")]
    pub y: String,
    #[serde(rename = "Z")]
    pub z: String,
    pub i: String,
    pub p: String,
    pub o: String,
}

impl SpanSpec {
    pub fn new(w: &str, x: &str, y: &str, z: &str, i: &str, p: &str, o: &str) -> Self {
        SpanSpec {
            w: w.into(),
            x: x.into(),
            y: y.into(),
            z: z.into(),
            i: i.into(),
            p: p.into(),
            o: o.into(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain strings always serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanIssue {
    /// One of `W`, `X`, `Y`, `Z`, `i`, `p`, `o`.
    pub component: &'static str,
    pub expression: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub issues: Vec<SpanIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn issue(&self, component: &str) -> Option<&SpanIssue> {
        self.issues.iter().find(|i| i.component == component)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return f.write_str("valid");
        }
        for (k, issue) in self.issues.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(
                f,
                "{} = `{}`: {}",
                issue.component, issue.expression, issue.message
            )?;
        }
        Ok(())
    }
}

/// Type-checks every carrier and arrow of `spec`, collecting all problems.
///
/// A formulation that needs one message delivered to two outputs cannot be
/// written as an arrow: the copair over the message carrier would need more
/// branches than the carrier has summands, which is reported here.
pub fn validate_span(spec: &SpanSpec, g: &GraphContext) -> ValidationReport {
    assemble(spec, g).1
}

fn assemble(spec: &SpanSpec, g: &GraphContext) -> (Option<PolynomialSpan>, ValidationReport) {
    let mut report = ValidationReport::default();
    let mut carrier = |name: &'static str, text: &str| match parse_carrier(text)
        .and_then(|c| c.checked_size(g).map(|_| c))
    {
        Ok(c) => Some(c),
        Err(e) => {
            report.issues.push(SpanIssue {
                component: name,
                expression: text.to_string(),
                message: e.to_string(),
            });
            None
        }
    };
    let w = carrier("W", &spec.w);
    let x = carrier("X", &spec.x);
    let y = carrier("Y", &spec.y);
    let z = carrier("Z", &spec.z);

    let mut arrow =
        |name: &'static str, text: &str, dom: &Option<Carrier>, cod: &Option<Carrier>| {
            let (Some(dom), Some(cod)) = (dom, cod) else {
                return None;
            };
            match build_arrow(text, dom, cod, g) {
                Ok(a) => Some(a),
                Err(e) => {
                    report.issues.push(SpanIssue {
                        component: name,
                        expression: text.to_string(),
                        message: e.to_string(),
                    });
                    None
                }
            }
        };
    let i = arrow("i", &spec.i, &x, &w);
    let p = arrow("p", &spec.p, &x, &y);
    let o = arrow("o", &spec.o, &y, &z);

    let span = match (i, p, o) {
        (Some(i), Some(p), Some(o)) => Some(
            PolynomialSpan::from_arrows(i, p, o, g.clone())
                .expect("arrows were checked against these carriers"),
        ),
        _ => None,
    };
    (span, report)
}

/// A per-row map applied to every message before aggregation.
pub type Hook<'a, V> = &'a (dyn Fn(&[V]) -> Vec<V> + Sync);

type FiberMap<V> = Box<dyn Fn(&[V]) -> Vec<V> + Send + Sync>;

/// A parameterised fold over argument fibers: the fiber's rows are
/// concatenated in fiber order and handed to the map registered for that
/// fiber size.
pub struct LearnedFold<V> {
    out_width: usize,
    empty_row: Vec<V>,
    maps: BTreeMap<usize, FiberMap<V>>,
}

impl<V: Clone> LearnedFold<V> {
    /// `empty_row` is emitted for empty fibers and fixes the output width.
    pub fn new(empty_row: Vec<V>) -> Self {
        LearnedFold {
            out_width: empty_row.len(),
            empty_row,
            maps: BTreeMap::new(),
        }
    }

    /// Registers the map used for fibers with `fiber_size` elements. Its
    /// input has `fiber_size * width` values.
    pub fn with_map(
        mut self,
        fiber_size: usize,
        f: impl Fn(&[V]) -> Vec<V> + Send + Sync + 'static,
    ) -> Self {
        self.maps.insert(fiber_size, Box::new(f));
        self
    }

    pub fn out_width(&self) -> usize {
        self.out_width
    }
}

impl<V> fmt::Debug for LearnedFold<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LearnedFold")
            .field("out_width", &self.out_width)
            .field("fiber_sizes", &self.maps.keys().collect::<Vec<_>>())
            .finish()
    }
}

/// How argument pushforward combines the ordered rows of a fiber.
#[derive(Debug)]
pub enum FoldStrategy<V> {
    /// Channelwise `⊗`-fold in fiber order.
    Semiring,
    Learned(LearnedFold<V>),
}

/// `W ←i− X −p→ Y −o→ Z` over a fixed graph, with the fiber and preimage
/// tables precomputed.
#[derive(Debug, Clone)]
pub struct PolynomialSpan {
    graph: GraphContext,
    i: Arrow,
    p: Arrow,
    o: Arrow,
    /// `input_of[x]` is the rank of `i(x)` in `W`.
    input_of: Vec<usize>,
    /// `fibers[y]` lists `p⁻¹(y)` in ascending rank.
    fibers: Vec<Vec<usize>>,
    /// `preimages[z]` lists `o⁻¹(z)` in ascending rank.
    preimages: Vec<Vec<usize>>,
}

impl PartialEq for PolynomialSpan {
    fn eq(&self, other: &Self) -> bool {
        self.graph == other.graph && self.i == other.i && self.p == other.p && self.o == other.o
    }
}

fn invert(table: &[usize], codomain_size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); codomain_size];
    for (x, &y) in table.iter().enumerate() {
        out[y].push(x);
    }
    out
}

impl PolynomialSpan {
    /// Parses, type-checks and assembles a span from its text form.
    pub fn from_spec(spec: &SpanSpec, g: &GraphContext) -> Result<Self, SpanError> {
        match assemble(spec, g) {
            (Some(span), _) => Ok(span),
            (None, report) => Err(SpanError::Invalid(report)),
        }
    }

    /// Assembles a span from typed arrows; their carriers must line up.
    pub fn from_arrows(i: Arrow, p: Arrow, o: Arrow, g: GraphContext) -> Result<Self, SpanError> {
        let mismatch =
            |what: &str, expected: &Carrier, found: &Carrier| SpanError::CarrierMismatch {
                what: what.to_string(),
                expected: expected.to_string(),
                found: found.to_string(),
            };
        if i.domain() != p.domain() {
            return Err(mismatch("domain of p", i.domain(), p.domain()));
        }
        if p.codomain() != o.domain() {
            return Err(mismatch("domain of o", p.codomain(), o.domain()));
        }
        for c in [i.codomain(), i.domain(), p.codomain(), o.codomain()] {
            c.checked_size(&g)?;
        }
        let input_of = i.rank_table(&g);
        let fibers = invert(&p.rank_table(&g), p.codomain().size(&g));
        let preimages = invert(&o.rank_table(&g), o.codomain().size(&g));
        Ok(PolynomialSpan {
            graph: g,
            i,
            p,
            o,
            input_of,
            fibers,
            preimages,
        })
    }

    pub fn graph(&self) -> &GraphContext {
        &self.graph
    }
    pub fn w(&self) -> &Carrier {
        self.i.codomain()
    }
    pub fn x(&self) -> &Carrier {
        self.i.domain()
    }
    pub fn y(&self) -> &Carrier {
        self.p.codomain()
    }
    pub fn z(&self) -> &Carrier {
        self.o.codomain()
    }
    pub fn i(&self) -> &Arrow {
        &self.i
    }
    pub fn p(&self) -> &Arrow {
        &self.p
    }
    pub fn o(&self) -> &Arrow {
        &self.o
    }

    /// Ranks in `X` of the ordered fiber over message `y`.
    pub fn fiber(&self, y: usize) -> &[usize] {
        &self.fibers[y]
    }

    /// Ranks in `Y` of the messages delivered to output `z`.
    pub fn delivered_to(&self, z: usize) -> &[usize] {
        &self.preimages[z]
    }

    fn expect_carrier<V>(
        &self,
        m: &DataMap<V>,
        expected: &Carrier,
        stage: &str,
    ) -> Result<(), SpanError> {
        if m.carrier() != expected {
            return Err(SpanError::CarrierMismatch {
                what: format!("input of {stage}"),
                expected: expected.to_string(),
                found: m.carrier().to_string(),
            });
        }
        Ok(())
    }

    /// `i* f = f ∘ i`.
    pub fn pullback<V: Clone>(&self, f: &DataMap<V>) -> Result<DataMap<V>, SpanError> {
        self.expect_carrier(f, self.w(), "pullback")?;
        let values = self
            .input_of
            .iter()
            .flat_map(|&w| f.row(w).iter().cloned())
            .collect();
        DataMap::new(self.x().clone(), &self.graph, f.width(), values)
    }

    /// `p̄⊗`: for each message, its ordered fiber as one list per channel.
    pub fn argument_lists<V: Clone>(
        &self,
        g: &DataMap<V>,
    ) -> Result<Vec<Vec<OrderedList<V>>>, SpanError> {
        self.expect_carrier(g, self.x(), "argument pushforward")?;
        Ok(self
            .fibers
            .iter()
            .map(|fiber| {
                (0..g.width())
                    .map(|c| fiber.iter().map(|&x| g.get(x, c).clone()).collect())
                    .collect()
            })
            .collect())
    }

    /// `p⊗`: folds each ordered fiber into a message row.
    pub fn argument_pushforward<S: Semiring>(
        &self,
        s: &S,
        strategy: &FoldStrategy<S::Value>,
        g: &DataMap<S::Value>,
    ) -> Result<DataMap<S::Value>, SpanError> {
        self.expect_carrier(g, self.x(), "argument pushforward")?;
        match strategy {
            FoldStrategy::Semiring => {
                let values = self
                    .argument_lists(g)?
                    .iter()
                    .flat_map(|channels| channels.iter().map(|list| fold_list(s, list)))
                    .collect();
                DataMap::new(self.y().clone(), &self.graph, g.width(), values)
            }
            FoldStrategy::Learned(fold) => {
                let mut values = Vec::with_capacity(self.fibers.len() * fold.out_width);
                let mut input = Vec::new();
                for fiber in &self.fibers {
                    if fiber.is_empty() {
                        values.extend_from_slice(&fold.empty_row);
                        continue;
                    }
                    let map = fold
                        .maps
                        .get(&fiber.len())
                        .ok_or(SpanError::MissingFiberMap {
                            fiber_size: fiber.len(),
                        })?;
                    input.clear();
                    for &x in fiber {
                        input.extend_from_slice(g.row(x));
                    }
                    let row = map(&input);
                    if row.len() != fold.out_width {
                        return Err(SpanError::FoldWidth {
                            expected: fold.out_width,
                            found: row.len(),
                        });
                    }
                    values.extend(row);
                }
                DataMap::new(self.y().clone(), &self.graph, fold.out_width, values)
            }
        }
    }

    /// `ō⊕`: for each output, the bag of delivered messages per channel.
    pub fn message_bags<V: Clone + crate::algebra::BagKey>(
        &self,
        m: &DataMap<V>,
    ) -> Result<Vec<Vec<Bag<V>>>, SpanError> {
        self.expect_carrier(m, self.y(), "message pushforward")?;
        Ok(self
            .preimages
            .iter()
            .map(|pre| {
                (0..m.width())
                    .map(|c| pre.iter().map(|&y| m.get(y, c).clone()).collect())
                    .collect()
            })
            .collect())
    }

    /// `o⊕`: applies `hook` to every message row, then reduces each output's
    /// preimage channelwise with `⊕`. Empty preimages give the all-zero row.
    pub fn message_pushforward<S: Semiring>(
        &self,
        s: &S,
        m: &DataMap<S::Value>,
        hook: Option<Hook<'_, S::Value>>,
    ) -> Result<DataMap<S::Value>, SpanError> {
        self.expect_carrier(m, self.y(), "message pushforward")?;
        let hooked;
        let m = match hook {
            Some(h) => {
                let rows: Vec<Vec<S::Value>> = m.rows().map(h).collect();
                if rows.is_empty() {
                    m
                } else {
                    hooked = DataMap::from_rows(self.y().clone(), &self.graph, rows)
                        .map_err(|_| SpanError::HookWidth)?;
                    &hooked
                }
            }
            None => m,
        };
        let values = self
            .message_bags(m)?
            .iter()
            .flat_map(|channels| channels.iter().map(|bag| reduce_bag(s, bag)))
            .collect();
        DataMap::new(self.z().clone(), &self.graph, m.width(), values)
    }

    /// `o⊕ ∘ hook ∘ p⊗ ∘ i*`.
    pub fn integral_transform<S: Semiring>(
        &self,
        s: &S,
        strategy: &FoldStrategy<S::Value>,
        f: &DataMap<S::Value>,
        hook: Option<Hook<'_, S::Value>>,
    ) -> Result<DataMap<S::Value>, SpanError> {
        let args = self.pullback(f)?;
        let messages = self.argument_pushforward(s, strategy, &args)?;
        self.message_pushforward(s, &messages, hook)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{MinPlus, Real, Tropical};
    use crate::carrier::Edge;

    const INF: Tropical = Tropical::Infinity;

    fn t(v: u64) -> Tropical {
        Tropical::Finite(v)
    }

    fn g1() -> GraphContext {
        GraphContext::new(
            3,
            vec![Edge::new(0, 1, 2), Edge::new(0, 2, 7), Edge::new(1, 2, 3)],
        )
        .unwrap()
    }

    fn bf_spec() -> SpanSpec {
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

    fn bf_input(g: &GraphContext, d: &[Tropical]) -> DataMap<Tropical> {
        let parts = vec![d.to_vec(), vec![t(0); 3], g.weights().collect()];
        DataMap::from_terms(parse_carrier("V + (V + E)").unwrap(), g, 1, parts).unwrap()
    }

    #[test]
    fn pullback_along_src() {
        let g = g1();
        let spec = SpanSpec::new("V", "E", "E", "V", "src", "id", "tgt");
        let sp = PolynomialSpan::from_spec(&spec, &g).unwrap();
        let f = DataMap::from_column(sp.w().clone(), &g, vec![5u32, 1, 9]).unwrap();
        assert_eq!(sp.pullback(&f).unwrap().values(), &[5, 5, 1]);

        let ident =
            PolynomialSpan::from_spec(&SpanSpec::new("V", "V", "V", "V", "id", "id", "id"), &g)
                .unwrap();
        assert_eq!(ident.pullback(&f).unwrap(), f);
    }

    #[test]
    fn bf_pullback_concatenates_terms() {
        let g = g1();
        let sp = PolynomialSpan::from_spec(&bf_spec(), &g).unwrap();
        let d = [t(4), t(1), INF];
        let x = sp.pullback(&bf_input(&g, &d)).unwrap();
        // (f, f∘s, b, w)
        let expect = [
            d.to_vec(),
            vec![t(4), t(4), t(1)],
            vec![t(0); 3],
            vec![t(2), t(7), t(3)],
        ]
        .concat();
        assert_eq!(x.values(), expect.as_slice());
    }

    #[test]
    fn bf_argument_pushforward() {
        let g = g1();
        let sp = PolynomialSpan::from_spec(&bf_spec(), &g).unwrap();
        let x = sp.pullback(&bf_input(&g, &[t(0), INF, INF])).unwrap();
        let y = sp
            .argument_pushforward(&MinPlus, &FoldStrategy::Semiring, &x)
            .unwrap();
        // (f + b, f∘s + w)
        assert_eq!(y.values(), &[t(0), INF, INF, t(2), t(7), INF]);
        for k in 0..y.len() {
            assert_eq!(sp.fiber(k).len(), 2);
        }
    }

    #[test]
    fn identity_process_is_identity() {
        let g = g1();
        let sp =
            PolynomialSpan::from_spec(&SpanSpec::new("E", "E", "E", "V", "id", "id", "tgt"), &g)
                .unwrap();
        let x = DataMap::from_column(sp.x().clone(), &g, vec![1.5, -2.0, 3.0]).unwrap();
        assert_eq!(
            sp.argument_pushforward(&Real, &FoldStrategy::Semiring, &x)
                .unwrap()
                .values(),
            x.values()
        );
    }

    #[test]
    fn bf_message_pushforward() {
        let g = g1();
        let sp = PolynomialSpan::from_spec(&bf_spec(), &g).unwrap();
        let m = DataMap::from_column(sp.y().clone(), &g, vec![t(0), INF, INF, t(2), t(7), INF])
            .unwrap();
        let z = sp.message_pushforward(&MinPlus, &m, None).unwrap();
        assert_eq!(z.values(), &[t(0), t(2), t(7)]);
        assert_eq!(sp.delivered_to(2), &[2, 4, 5]);
        let id = |r: &[Tropical]| r.to_vec();
        assert_eq!(sp.message_pushforward(&MinPlus, &m, Some(&id)).unwrap(), z);
    }

    #[test]
    fn bf_transform_two_rounds() {
        let g = g1();
        let sp = PolynomialSpan::from_spec(&bf_spec(), &g).unwrap();
        let d1 = sp
            .integral_transform(
                &MinPlus,
                &FoldStrategy::Semiring,
                &bf_input(&g, &[t(0), INF, INF]),
                None,
            )
            .unwrap();
        assert_eq!(d1.values(), &[t(0), t(2), t(7)]);
        let d2 = sp
            .integral_transform(
                &MinPlus,
                &FoldStrategy::Semiring,
                &bf_input(&g, d1.values()),
                None,
            )
            .unwrap();
        assert_eq!(d2.values(), &[t(0), t(2), t(5)]);
        let d3 = sp
            .integral_transform(
                &MinPlus,
                &FoldStrategy::Semiring,
                &bf_input(&g, d2.values()),
                None,
            )
            .unwrap();
        assert_eq!(d3, d2);
    }

    #[test]
    fn empty_preimage_gives_zero_row() {
        let g = g1();
        let sp =
            PolynomialSpan::from_spec(&SpanSpec::new("V", "E", "E", "V", "src", "id", "tgt"), &g)
                .unwrap();
        let m = DataMap::new(sp.y().clone(), &g, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let z = sp.message_pushforward(&Real, &m, None).unwrap();
        assert_eq!(z.values(), &[0.0, 0.0, 1.0, 2.0, 8.0, 10.0]);
    }

    #[test]
    fn learned_fold_concatenates_in_fiber_order() {
        let g = g1();
        let spec = SpanSpec::new("V", "E + E", "E", "V", "[src; tgt]", "[id; id]", "tgt");
        let sp = PolynomialSpan::from_spec(&spec, &g).unwrap();
        let f = DataMap::from_column(sp.w().clone(), &g, vec![1.0, 10.0, 100.0]).unwrap();
        // Message = 2*sender - receiver.
        let fold = LearnedFold::new(vec![0.0]).with_map(2, |r: &[f64]| vec![2.0 * r[0] - r[1]]);
        let y = sp
            .argument_pushforward(
                &Real,
                &FoldStrategy::Learned(fold),
                &sp.pullback(&f).unwrap(),
            )
            .unwrap();
        assert_eq!(y.values(), &[-8.0, -98.0, -80.0]);

        let missing = LearnedFold::new(vec![0.0]).with_map(3, |r: &[f64]| vec![r[0]]);
        let err = sp
            .argument_pushforward(
                &Real,
                &FoldStrategy::Learned(missing),
                &sp.pullback(&f).unwrap(),
            )
            .unwrap_err();
        assert!(matches!(err, SpanError::MissingFiberMap { fiber_size: 2 }));
    }

    #[test]
    fn carrier_mismatch_rejected() {
        let g = g1();
        let sp = PolynomialSpan::from_spec(&bf_spec(), &g).unwrap();
        let wrong = DataMap::from_column(parse_carrier("V").unwrap(), &g, vec![t(0); 3]).unwrap();
        assert!(matches!(
            sp.pullback(&wrong),
            Err(SpanError::CarrierMismatch { .. })
        ));
        assert!(matches!(
            sp.message_pushforward(&MinPlus, &wrong, None),
            Err(SpanError::CarrierMismatch { .. })
        ));
    }

    #[test]
    fn validation_reports() {
        let g = g1();
        assert!(validate_span(&bf_spec(), &g).is_valid());
        let mut bad = bf_spec();
        bad.o = "[id; src; tgt]".into();
        bad.w = "V + Q".into();
        let report = validate_span(&bad, &g);
        assert!(report.issue("W").is_some());
        assert!(report.issue("o").is_some());
        assert!(matches!(
            PolynomialSpan::from_spec(&bad, &g),
            Err(SpanError::Invalid(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let spec = bf_spec();
        assert_eq!(SpanSpec::from_json(&spec.to_json()).unwrap(), spec);
        assert!(SpanSpec::from_json(r#"{"W":"V"}"#).is_err());
    }
}
