use std::fmt;

use thiserror::Error;

use super::graph::GraphContext;

/// Hard limit on the number of elements in any carrier.
pub const MAX_CARRIER_SIZE: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    V,
    E,
}

impl Factor {
    pub fn size(self, g: &GraphContext) -> usize {
        match self {
            Factor::V => g.node_count(),
            Factor::E => g.edge_count(),
        }
    }
}

/// A product of base sets. The empty product is the singleton `1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Term(pub Vec<Factor>);

impl Term {
    pub fn one() -> Self {
        Term(Vec::new())
    }

    pub fn v_power(k: usize) -> Self {
        Term(vec![Factor::V; k])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0
    }

    pub fn size(&self, g: &GraphContext) -> usize {
        self.0
            .iter()
            .try_fold(1usize, |acc, f| acc.checked_mul(f.size(g)))
            .unwrap_or(usize::MAX)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.0.len() {
            let run = self.0[i..].iter().take_while(|&&x| x == self.0[i]).count();
            if !first {
                f.write_str("*")?;
            }
            first = false;
            let name = match self.0[i] {
                Factor::V => "V",
                Factor::E => "E",
            };
            if run > 1 && self.0[i] == Factor::V {
                write!(f, "V^{run}")?;
                i += run;
            } else {
                f.write_str(name)?;
                i += 1;
            }
        }
        Ok(())
    }
}

/// A finite set written as a disjoint sum of products of `V`, `E` and `1`.
///
/// Elements are enumerated term-major, and row-major within a term (the
/// last factor varies fastest).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Carrier {
    terms: Vec<Term>,
}

/// A point of a carrier: which summand, and one index per factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    pub term: usize,
    pub coords: Vec<usize>,
}

impl Element {
    pub fn new(term: usize, coords: impl Into<Vec<usize>>) -> Self {
        Element {
            term,
            coords: coords.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CarrierError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown base set {name:?} at position {pos}")]
    UnknownBase { pos: usize, name: String },
    #[error("carrier {carrier} has {size} elements, over the limit of {MAX_CARRIER_SIZE}")]
    TooLarge { carrier: String, size: usize },
    #[error("index {index} out of range for carrier of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("{element:?} is not an element of {carrier}")]
    NotAnElement { element: Element, carrier: String },
}

impl Carrier {
    pub fn new(terms: Vec<Term>) -> Self {
        Carrier { terms }
    }

    /// The singleton carrier `1`.
    pub fn one() -> Self {
        Carrier::new(vec![Term::one()])
    }

    pub fn single(term: Term) -> Self {
        Carrier::new(vec![term])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// The one-term carrier holding summand `index`.
    pub fn summand(&self, index: usize) -> Carrier {
        Carrier::single(self.terms[index].clone())
    }

    /// `Σ_terms Π_factors |factor|`, saturating at `usize::MAX`.
    pub fn size(&self, g: &GraphContext) -> usize {
        self.terms
            .iter()
            .try_fold(0usize, |acc, t| acc.checked_add(t.size(g)))
            .unwrap_or(usize::MAX)
    }

    /// Like [`Carrier::size`] but refuses carriers above [`MAX_CARRIER_SIZE`].
    pub fn checked_size(&self, g: &GraphContext) -> Result<usize, CarrierError> {
        let size = self.size(g);
        if size > MAX_CARRIER_SIZE {
            Err(CarrierError::TooLarge {
                carrier: self.to_string(),
                size,
            })
        } else {
            Ok(size)
        }
    }

    /// Rank of the first element of each term, plus the total size.
    pub fn offsets(&self, g: &GraphContext) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.terms.len() + 1);
        let mut acc = 0usize;
        out.push(0);
        for t in &self.terms {
            acc = acc.saturating_add(t.size(g));
            out.push(acc);
        }
        out
    }

    pub fn contains(&self, e: &Element, g: &GraphContext) -> bool {
        self.terms.get(e.term).is_some_and(|t| {
            t.0.len() == e.coords.len() && t.0.iter().zip(&e.coords).all(|(f, &c)| c < f.size(g))
        })
    }

    pub fn element_at(&self, index: usize, g: &GraphContext) -> Result<Element, CarrierError> {
        let mut rest = index;
        for (term, t) in self.terms.iter().enumerate() {
            let size = t.size(g);
            if rest < size {
                let mut coords = vec![0; t.0.len()];
                for (slot, f) in coords.iter_mut().zip(&t.0).rev() {
                    let base = f.size(g);
                    *slot = rest % base;
                    rest /= base;
                }
                return Ok(Element { term, coords });
            }
            rest -= size;
        }
        Err(CarrierError::IndexOutOfRange {
            index,
            size: self.size(g),
        })
    }

    pub fn rank(&self, e: &Element, g: &GraphContext) -> Result<usize, CarrierError> {
        if !self.contains(e, g) {
            return Err(CarrierError::NotAnElement {
                element: e.clone(),
                carrier: self.to_string(),
            });
        }
        let offset: usize = self.terms[..e.term].iter().map(|t| t.size(g)).sum();
        let within = self.terms[e.term]
            .0
            .iter()
            .zip(&e.coords)
            .fold(0usize, |acc, (f, &c)| acc * f.size(g) + c);
        Ok(offset + within)
    }

    /// Every element in canonical order.
    pub fn elements<'a>(&'a self, g: &'a GraphContext) -> impl Iterator<Item = Element> + 'a {
        self.terms.iter().enumerate().flat_map(move |(term, t)| {
            let bases: Vec<usize> = t.0.iter().map(|f| f.size(g)).collect();
            let count = t.size(g);
            (0..count).map(move |mut r| {
                let mut coords = vec![0; bases.len()];
                for (slot, &b) in coords.iter_mut().zip(&bases).rev() {
                    *slot = r % b;
                    r /= b;
                }
                Element { term, coords }
            })
        })
    }
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Carrier {
    type Err = CarrierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_carrier(s)
    }
}

/// Parses `carrier := term {"+" term}`, `term := factor {"*" factor}`,
/// `factor := "V" | "E" | "1" | "V^" INT | "(" carrier ")"`.
///
/// Nested sums are flattened in source order; a product with a
/// parenthesised sum distributes over it.
pub fn parse_carrier(expr: &str) -> Result<Carrier, CarrierError> {
    let mut p = Parser {
        src: expr.as_bytes(),
        pos: 0,
    };
    let terms = p.carrier()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(Carrier::new(terms))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, message: &str) -> CarrierError {
        CarrierError::Syntax {
            pos: self.pos,
            message: message.to_string(),
        }
    }

    fn carrier(&mut self) -> Result<Vec<Term>, CarrierError> {
        let mut terms = self.term()?;
        while self.peek() == Some(b'+') {
            self.pos += 1;
            terms.extend(self.term()?);
        }
        Ok(terms)
    }

    fn term(&mut self) -> Result<Vec<Term>, CarrierError> {
        let mut acc = vec![Term::one()];
        loop {
            let factor = self.factor()?;
            acc = acc
                .iter()
                .flat_map(|a| {
                    factor.iter().map(move |b| {
                        let mut t = a.0.clone();
                        t.extend_from_slice(&b.0);
                        Term(t)
                    })
                })
                .collect();
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Vec<Term>, CarrierError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.carrier()?;
                if self.peek() != Some(b')') {
                    return Err(self.syntax("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(vec![Term::one()])
            }
            Some(b'E') if !self.ident_continues(1) => {
                self.pos += 1;
                Ok(vec![Term(vec![Factor::E])])
            }
            Some(b'V') if !self.ident_continues(1) => {
                self.pos += 1;
                if self.src.get(self.pos) == Some(&b'^') {
                    self.pos += 1;
                    let k = self.integer()?;
                    Ok(vec![Term::v_power(k)])
                } else {
                    Ok(vec![Term(vec![Factor::V])])
                }
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self
                    .src
                    .get(self.pos)
                    .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
                {
                    self.pos += 1;
                }
                let name = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                Err(CarrierError::UnknownBase { pos: start, name })
            }
            Some(_) => Err(self.syntax("expected V, E, 1, V^k or '('")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn ident_continues(&self, offset: usize) -> bool {
        self.src
            .get(self.pos + offset)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
    }

    fn integer(&mut self) -> Result<usize, CarrierError> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected an integer exponent"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CarrierError::Syntax {
                pos: start,
                message: "exponent too large".into(),
            })
    }
}
