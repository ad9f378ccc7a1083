//! Sample-based checking of the bag and list monad laws.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bag::{join_bag, join_list, map_bag, map_list, unit_bag, unit_list, Bag, OrderedList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MonadLaw {
    /// `join ∘ unit = id`.
    BagLeftUnit,
    /// `join ∘ map(unit) = id`.
    BagRightUnit,
    /// `join ∘ join = join ∘ map(join)`.
    BagAssociative,
    ListLeftUnit,
    ListRightUnit,
    ListAssociative,
}

impl MonadLaw {
    pub const ALL: [MonadLaw; 6] = [
        MonadLaw::BagLeftUnit,
        MonadLaw::BagRightUnit,
        MonadLaw::BagAssociative,
        MonadLaw::ListLeftUnit,
        MonadLaw::ListRightUnit,
        MonadLaw::ListAssociative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MonadLaw::BagLeftUnit => "bag-left-unit",
            MonadLaw::BagRightUnit => "bag-right-unit",
            MonadLaw::BagAssociative => "bag-associative",
            MonadLaw::ListLeftUnit => "list-left-unit",
            MonadLaw::ListRightUnit => "list-right-unit",
            MonadLaw::ListAssociative => "list-associative",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonadLawResult {
    pub law: MonadLaw,
    pub checked: usize,
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonadReport {
    pub results: Vec<MonadLawResult>,
}

impl MonadReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.counterexample.is_none())
    }
}

impl fmt::Display for MonadReport {
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

const MAX_SIZE: usize = 6;

fn random_list(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let len = rng.random_range(0..=MAX_SIZE);
    (0..len).map(|_| rng.random_range(0..8)).collect()
}

/// A depth-3 nesting, at most six items per level.
pub fn random_nested_lists(rng: &mut ChaCha8Rng) -> Vec<Vec<Vec<u8>>> {
    let outer = rng.random_range(0..=MAX_SIZE);
    (0..outer)
        .map(|_| {
            let mid = rng.random_range(0..=MAX_SIZE);
            (0..mid).map(|_| random_list(rng)).collect()
        })
        .collect()
}

fn bag_of(nested: &[Vec<Vec<u8>>]) -> Bag<Bag<Bag<u8>>> {
    nested
        .iter()
        .map(|m| m.iter().map(|l| l.iter().copied().collect()).collect())
        .collect()
}

/// Checks the unit and associativity laws of both monads on `count`
/// random nestings.
pub fn check_monad_laws(count: usize, seed: u64) -> MonadReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cx: [Option<String>; 6] = Default::default();
    let mut note = |k: usize, ok: bool, what: &dyn fmt::Debug| {
        if !ok && cx[k].is_none() {
            cx[k] = Some(format!("{what:?}"));
        }
    };
    for _ in 0..count {
        let nested = random_nested_lists(&mut rng);
        let flat: OrderedList<u8> = random_list(&mut rng);
        let bags = bag_of(&nested);
        let b: Bag<u8> = flat.iter().copied().collect();

        note(0, join_bag(&unit_bag(b.clone())) == b, &b);
        note(1, join_bag(&map_bag(|x| unit_bag(*x), &b)) == b, &b);
        let lhs = join_bag(&join_bag(&bags));
        let rhs = join_bag(&map_bag(join_bag, &bags));
        note(2, lhs == rhs, &nested);

        note(3, join_list(&unit_list(flat.clone())) == flat, &flat);
        note(
            4,
            join_list(&map_list(|x| unit_list(*x), &flat)) == flat,
            &flat,
        );
        let lhs = join_list(&join_list(&nested));
        let rhs = join_list(&map_list(|m| join_list(m), &nested));
        note(5, lhs == rhs, &nested);
    }
    let results = MonadLaw::ALL
        .iter()
        .zip(cx)
        .map(|(&law, counterexample)| MonadLawResult {
            law,
            checked: count,
            counterexample,
        })
        .collect();
    MonadReport { results }
}
