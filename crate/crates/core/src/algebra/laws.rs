//! Sample-based checking of the semiring and monad-algebra laws.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bag::{fold_list, join_bag, map_bag, reduce_bag, Bag};
use super::semiring::{
    Boolean, MaxPlus, MinPlus, MinPlusReal, Real, Semiring, SubtractionPlus, Tropical,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Law {
    PlusIdentity,
    PlusAssociative,
    PlusCommutative,
    TimesIdentity,
    TimesAssociative,
    /// Only checked when the instance declares `times_commutative`.
    TimesCommutative,
    LeftDistributive,
    RightDistributive,
    Annihilation,
    /// `⊕{x} = x` and `⊗(x) = x`.
    SingletonAggregation,
    /// `⊕ ∘ join = ⊕ ∘ bag(⊕)` on nested bags.
    NestedAggregation,
    /// `⊗ ∘ concat = ⊗ ∘ list(⊗)` on nested lists.
    NestedFold,
}

impl Law {
    pub const ALL: [Law; 12] = [
        Law::PlusIdentity,
        Law::PlusAssociative,
        Law::PlusCommutative,
        Law::TimesIdentity,
        Law::TimesAssociative,
        Law::TimesCommutative,
        Law::LeftDistributive,
        Law::RightDistributive,
        Law::Annihilation,
        Law::SingletonAggregation,
        Law::NestedAggregation,
        Law::NestedFold,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Law::PlusIdentity => "plus-identity",
            Law::PlusAssociative => "plus-associative",
            Law::PlusCommutative => "plus-commutative",
            Law::TimesIdentity => "times-identity",
            Law::TimesAssociative => "times-associative",
            Law::TimesCommutative => "times-commutative",
            Law::LeftDistributive => "left-distributive",
            Law::RightDistributive => "right-distributive",
            Law::Annihilation => "annihilation",
            Law::SingletonAggregation => "singleton-aggregation",
            Law::NestedAggregation => "nested-aggregation",
            Law::NestedFold => "nested-fold",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawResult {
    pub law: Law,
    pub checked: usize,
    /// First failing sample, rendered for diagnostics.
    pub counterexample: Option<String>,
}

impl LawResult {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawReport {
    pub results: Vec<LawResult>,
}

impl LawReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(LawResult::passed)
    }

    pub fn get(&self, law: Law) -> Option<&LawResult> {
        self.results.iter().find(|r| r.law == law)
    }

    pub fn failed(&self) -> impl Iterator<Item = &LawResult> {
        self.results.iter().filter(|r| !r.passed())
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            match &r.counterexample {
                None => writeln!(f, "{} pass ({} samples)", r.law.name(), r.checked)?,
                Some(cx) => writeln!(f, "{} FAIL at {}", r.law.name(), cx)?,
            }
        }
        Ok(())
    }
}

struct Checker<'s, S: Semiring> {
    s: &'s S,
    law: Law,
    checked: usize,
    counterexample: Option<String>,
}

impl<'s, S: Semiring> Checker<'s, S> {
    fn new(s: &'s S, law: Law) -> Self {
        Checker {
            s,
            law,
            checked: 0,
            counterexample: None,
        }
    }

    fn expect(&mut self, lhs: S::Value, rhs: S::Value, ctx: impl FnOnce() -> String) {
        self.checked += 1;
        if self.counterexample.is_none() && !self.s.approx_eq(&lhs, &rhs) {
            self.counterexample = Some(format!("{}: {:?} != {:?}", ctx(), lhs, rhs));
        }
    }

    fn finish(self) -> LawResult {
        LawResult {
            law: self.law,
            checked: self.checked,
            counterexample: self.counterexample,
        }
    }
}

/// Checks every law on the given triples. Failures are reported, not
/// raised.
///
/// # Panics
///
/// If `samples` is empty.
pub fn check_laws<S: Semiring>(s: &S, samples: &[(S::Value, S::Value, S::Value)]) -> LawReport {
    assert!(!samples.is_empty(), "check_laws needs at least one sample");
    let zero = s.zero();
    let one = s.one();
    let mut results = Vec::with_capacity(Law::ALL.len());

    for law in Law::ALL {
        if law == Law::TimesCommutative && !s.times_commutative() {
            continue;
        }
        let mut c = Checker::new(s, law);
        for (x, a, b) in samples {
            match law {
                Law::PlusIdentity => {
                    c.expect(s.plus(&zero, x), x.clone(), || format!("0 ⊕ {x:?}"));
                    c.expect(s.plus(x, &zero), x.clone(), || format!("{x:?} ⊕ 0"));
                }
                Law::PlusAssociative => {
                    c.expect(s.plus(&s.plus(x, a), b), s.plus(x, &s.plus(a, b)), || {
                        format!("({x:?} ⊕ {a:?}) ⊕ {b:?}")
                    })
                }
                Law::PlusCommutative => {
                    c.expect(s.plus(x, a), s.plus(a, x), || format!("{x:?} ⊕ {a:?}"))
                }
                Law::TimesIdentity => {
                    c.expect(s.times(&one, x), x.clone(), || format!("1 ⊗ {x:?}"));
                    c.expect(s.times(x, &one), x.clone(), || format!("{x:?} ⊗ 1"));
                }
                Law::TimesAssociative => c.expect(
                    s.times(&s.times(x, a), b),
                    s.times(x, &s.times(a, b)),
                    || format!("({x:?} ⊗ {a:?}) ⊗ {b:?}"),
                ),
                Law::TimesCommutative => {
                    c.expect(s.times(x, a), s.times(a, x), || format!("{x:?} ⊗ {a:?}"))
                }
                Law::LeftDistributive => c.expect(
                    s.times(x, &s.plus(a, b)),
                    s.plus(&s.times(x, a), &s.times(x, b)),
                    || format!("{x:?} ⊗ ({a:?} ⊕ {b:?})"),
                ),
                Law::RightDistributive => c.expect(
                    s.times(&s.plus(a, b), x),
                    s.plus(&s.times(a, x), &s.times(b, x)),
                    || format!("({a:?} ⊕ {b:?}) ⊗ {x:?}"),
                ),
                Law::Annihilation => {
                    c.expect(s.times(x, &zero), zero.clone(), || format!("{x:?} ⊗ 0"));
                    c.expect(s.times(&zero, x), zero.clone(), || format!("0 ⊗ {x:?}"));
                }
                Law::SingletonAggregation => {
                    c.expect(reduce_bag(s, &Bag::unit(x.clone())), x.clone(), || {
                        format!("⊕{{{x:?}}}")
                    });
                    c.expect(fold_list(s, std::slice::from_ref(x)), x.clone(), || {
                        format!("⊗({x:?})")
                    });
                }
                Law::NestedAggregation => {
                    for bb in nested_bags(x, a, b) {
                        c.expect(
                            reduce_bag(s, &join_bag(&bb)),
                            reduce_bag(s, &map_bag(|inner| reduce_bag(s, inner), &bb)),
                            || format!("nested bag {bb:?}"),
                        );
                    }
                }
                Law::NestedFold => {
                    for ll in nested_lists(x, a, b) {
                        let flat: Vec<S::Value> = ll.concat();
                        let inner: Vec<S::Value> = ll.iter().map(|l| fold_list(s, l)).collect();
                        c.expect(fold_list(s, &flat), fold_list(s, &inner), || {
                            format!("nested list {ll:?}")
                        });
                    }
                }
            }
        }
        results.push(c.finish());
    }
    LawReport { results }
}

fn nested_bags<V: Clone + super::bag::BagKey>(x: &V, a: &V, b: &V) -> Vec<Bag<Bag<V>>> {
    let bag = |xs: &[&V]| xs.iter().map(|v| (*v).clone()).collect::<Bag<V>>();
    vec![
        [bag(&[x, a]), bag(&[b])].into_iter().collect(),
        [bag(&[x]), bag(&[x, a, b]), Bag::new()]
            .into_iter()
            .collect(),
        Bag::from_counts([(bag(&[a, b]), 2), (bag(&[x]), 1)]),
    ]
}

fn nested_lists<V: Clone>(x: &V, a: &V, b: &V) -> Vec<Vec<Vec<V>>> {
    vec![
        vec![vec![x.clone(), a.clone()], vec![b.clone()]],
        vec![
            vec![x.clone()],
            vec![],
            vec![a.clone(), b.clone(), x.clone()],
        ],
    ]
}

/// Random value generation for law sampling.
pub trait SampleValue: Semiring {
    fn sample_value<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Value;
}

impl SampleValue for MinPlus {
    fn sample_value<R: Rng + ?Sized>(&self, rng: &mut R) -> Tropical {
        if rng.random_bool(0.1) {
            Tropical::Infinity
        } else {
            Tropical::Finite(rng.random_range(0..=1000))
        }
    }
}

impl SampleValue for Real {
    fn sample_value<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.random_range(-1e3..=1e3)
    }
}

impl SampleValue for MaxPlus {
    fn sample_value<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if rng.random_bool(0.1) {
            f64::NEG_INFINITY
        } else {
            rng.random_range(-1e3..=1e3)
        }
    }
}

impl SampleValue for MinPlusReal {
    fn sample_value<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if rng.random_bool(0.1) {
            f64::INFINITY
        } else {
            rng.random_range(-1e3..=1e3)
        }
    }
}

impl SampleValue for Boolean {
    fn sample_value<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        rng.random_bool(0.5)
    }
}

impl SampleValue for SubtractionPlus {
    fn sample_value<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.random_range(-1e3..=1e3)
    }
}

/// `count` random triples from a seeded generator.
pub fn random_triples<S: SampleValue>(
    s: &S,
    count: usize,
    seed: u64,
) -> Vec<(S::Value, S::Value, S::Value)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (
                s.sample_value(&mut rng),
                s.sample_value(&mut rng),
                s.sample_value(&mut rng),
            )
        })
        .collect()
}
