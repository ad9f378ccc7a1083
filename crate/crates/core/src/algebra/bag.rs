//! Finite multisets and ordered lists, with their monad structure and the
//! distributive law turning a list of bags into a bag of lists.

use std::cmp::Ordering;
use std::fmt;

use super::semiring::{cmp_f64, Semiring, Tropical};

/// Total order used to keep bags in canonical form.
///
/// Floats are ordered by `total_cmp`, so bags of floats have a well-defined
/// canonical presentation even though `f64` is not `Ord`.
pub trait BagKey {
    fn key_cmp(&self, other: &Self) -> Ordering;
}

macro_rules! ord_bag_key {
    ($($t:ty),*) => {
        $(impl BagKey for $t {
            fn key_cmp(&self, other: &Self) -> Ordering {
                self.cmp(other)
            }
        })*
    };
}

ord_bag_key!(bool, char, u8, u32, u64, usize, i32, i64, Tropical, String, &str);

impl BagKey for f64 {
    fn key_cmp(&self, other: &Self) -> Ordering {
        cmp_f64(self, other)
    }
}

impl<T: BagKey> BagKey for Vec<T> {
    fn key_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.iter().zip(other) {
            match a.key_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.len().cmp(&other.len())
    }
}

impl<T: BagKey> BagKey for Bag<T> {
    fn key_cmp(&self, other: &Self) -> Ordering {
        for ((a, na), (b, nb)) in self.entries.iter().zip(&other.entries) {
            match a.key_cmp(b).then(na.cmp(nb)) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.entries.len().cmp(&other.entries.len())
    }
}

/// A finite multiset, stored as `(value, multiplicity)` pairs sorted by
/// [`BagKey`] with every multiplicity at least one.
#[derive(Clone, PartialEq)]
pub struct Bag<T> {
    entries: Vec<(T, usize)>,
}

/// A finite sequence whose order matters.
pub type OrderedList<T> = Vec<T>;

impl<T> Default for Bag<T> {
    fn default() -> Self {
        Bag {
            entries: Vec::new(),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Bag<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("bag")?;
        f.debug_map()
            .entries(self.entries.iter().map(|(v, n)| (v, n)))
            .finish()
    }
}

impl<T: BagKey> Bag<T> {
    pub fn new() -> Self {
        Bag::default()
    }

    /// The bag `{x}`.
    pub fn unit(x: T) -> Self {
        Bag {
            entries: vec![(x, 1)],
        }
    }

    pub fn insert(&mut self, x: T) {
        self.insert_n(x, 1);
    }

    pub fn insert_n(&mut self, x: T, count: usize) {
        if count == 0 {
            return;
        }
        match self.entries.binary_search_by(|(k, _)| k.key_cmp(&x)) {
            Ok(pos) => self.entries[pos].1 += count,
            Err(pos) => self.entries.insert(pos, (x, count)),
        }
    }

    /// Builds from `(value, multiplicity)` pairs, merging duplicates and
    /// dropping zero counts.
    pub fn from_counts<I: IntoIterator<Item = (T, usize)>>(iter: I) -> Self {
        let mut bag = Bag::new();
        for (x, n) in iter {
            bag.insert_n(x, n);
        }
        bag
    }

    pub fn multiplicity(&self, x: &T) -> usize {
        self.entries
            .binary_search_by(|(k, _)| k.key_cmp(x))
            .map_or(0, |pos| self.entries[pos].1)
    }
}

impl<T> Bag<T> {
    /// Total number of elements, counted with multiplicity.
    pub fn cardinality(&self) -> usize {
        self.entries.iter().map(|(_, n)| n).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct values with their multiplicities, in canonical order.
    pub fn entries(&self) -> &[(T, usize)] {
        &self.entries
    }

    /// Every element repeated by multiplicity, in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &T> + '_ {
        self.entries
            .iter()
            .flat_map(|(x, n)| std::iter::repeat_n(x, *n))
    }
}

impl<T: BagKey> FromIterator<T> for Bag<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut bag = Bag::new();
        for x in iter {
            bag.insert(x);
        }
        bag
    }
}

/// `⊕` over every element with multiplicity. The empty bag reduces to
/// `s.zero()`.
pub fn reduce_bag<S: Semiring>(s: &S, bag: &Bag<S::Value>) -> S::Value {
    bag.iter().fold(s.zero(), |acc, x| s.plus(&acc, x))
}

/// Left fold with `⊗` starting from `s.one()`.
pub fn fold_list<S: Semiring>(s: &S, list: &[S::Value]) -> S::Value {
    list.iter().fold(s.one(), |acc, x| s.times(&acc, x))
}

/// Functor action on bags: multiplicities of equal images accumulate.
pub fn map_bag<T, U: BagKey>(f: impl Fn(&T) -> U, bag: &Bag<T>) -> Bag<U> {
    Bag::from_counts(bag.entries.iter().map(|(x, n)| (f(x), *n)))
}

/// Flattens a bag of bags; inner multiplicities are scaled by the outer one.
pub fn join_bag<T: BagKey + Clone>(bags: &Bag<Bag<T>>) -> Bag<T> {
    let mut out = Bag::new();
    for (inner, outer_n) in &bags.entries {
        for (x, n) in &inner.entries {
            out.insert_n(x.clone(), n * outer_n);
        }
    }
    out
}

pub fn unit_bag<T: BagKey>(x: T) -> Bag<T> {
    Bag::unit(x)
}

pub fn map_list<T, U>(f: impl Fn(&T) -> U, list: &[T]) -> OrderedList<U> {
    list.iter().map(f).collect()
}

pub fn join_list<T: Clone>(lists: &[OrderedList<T>]) -> OrderedList<T> {
    lists.concat()
}

pub fn unit_list<T>(x: T) -> OrderedList<T> {
    vec![x]
}

/// The distributive law: a list of bags becomes the bag of every ordered
/// selection taking the k-th item from the k-th bag. Multiplicities
/// multiply, so the output cardinality is the product of the input ones.
pub fn distribute<T: BagKey + Clone>(lists: &[Bag<T>]) -> Bag<OrderedList<T>> {
    let mut acc: Vec<(OrderedList<T>, usize)> = vec![(Vec::new(), 1)];
    for bag in lists {
        let mut next = Vec::with_capacity(acc.len() * bag.entries.len());
        for (prefix, n) in &acc {
            for (x, m) in &bag.entries {
                let mut sel = prefix.clone();
                sel.push(x.clone());
                next.push((sel, n * m));
            }
        }
        acc = next;
    }
    Bag::from_counts(acc)
}
