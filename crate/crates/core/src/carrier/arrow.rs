use std::fmt;

use thiserror::Error;

use super::graph::GraphContext;
use super::set::{Carrier, CarrierError, Element, Factor, Term};

/// Untyped arrow expression as written in span specs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArrowExpr {
    Id,
    Bang,
    Src,
    Tgt,
    /// One-based factor positions.
    Proj(Vec<usize>),
    /// One-based summand position in the codomain.
    Inj(usize),
    Copair(Vec<ArrowExpr>),
    /// Outermost first: `a.b` is `a ∘ b`.
    Compose(Vec<ArrowExpr>),
}

impl fmt::Display for ArrowExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArrowExpr::Id => f.write_str("id"),
            ArrowExpr::Bang => f.write_str("bang"),
            ArrowExpr::Src => f.write_str("src"),
            ArrowExpr::Tgt => f.write_str("tgt"),
            ArrowExpr::Proj(ks) => {
                let ks: Vec<String> = ks.iter().map(usize::to_string).collect();
                write!(f, "proj[{}]", ks.join(","))
            }
            ArrowExpr::Inj(j) => write!(f, "inj[{j}]"),
            ArrowExpr::Copair(bs) => {
                let bs: Vec<String> = bs.iter().map(ToString::to_string).collect();
                write!(f, "[{}]", bs.join("; "))
            }
            ArrowExpr::Compose(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(".")?;
                    }
                    match p {
                        ArrowExpr::Compose(_) => write!(f, "({p})")?,
                        _ => write!(f, "{p}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArrowError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("type mismatch in `{expr}`: expected {expected}, found {found}")]
    TypeMismatch {
        expr: String,
        expected: String,
        found: String,
    },
    #[error(
        "copair `{expr}` has {branches} branches but its domain {domain} has {terms} terms; \
         every domain term needs exactly one branch, so one message cannot be sent to two places"
    )]
    CopairArity {
        expr: String,
        domain: String,
        terms: usize,
        branches: usize,
    },
    #[error("projection `{expr}` does not fit a product of {arity} factors")]
    ProjArity { expr: String, arity: usize },
    #[error("`{expr}` needs a single-term domain, found {domain}")]
    NotSingleTerm { expr: String, domain: String },
    #[error(
        "`{expr}` injects {term} into {codomain}, which contains it {count} times; use inj[k]"
    )]
    AmbiguousInjection {
        expr: String,
        term: String,
        codomain: String,
        count: usize,
    },
    #[error("cannot infer the codomain of `{expr}`; inj[k] must be the outermost arrow")]
    CannotInfer { expr: String },
    #[error(transparent)]
    Element(#[from] CarrierError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Body {
    Identity,
    Bang,
    Src,
    Tgt,
    /// Zero-based factor positions.
    Proj(Vec<usize>),
    /// Zero-based codomain summand.
    Inj(usize),
    Copair(Vec<Arrow>),
    /// Outermost first.
    Compose(Vec<Arrow>),
}

/// A type-checked total function between two carriers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    domain: Carrier,
    codomain: Carrier,
    body: Body,
}

impl Arrow {
    pub fn domain(&self) -> &Carrier {
        &self.domain
    }

    pub fn codomain(&self) -> &Carrier {
        &self.codomain
    }

    /// Applies the arrow after checking `e` belongs to the domain.
    pub fn eval(&self, e: &Element, g: &GraphContext) -> Result<Element, ArrowError> {
        if !self.domain.contains(e, g) {
            return Err(CarrierError::NotAnElement {
                element: e.clone(),
                carrier: self.domain.to_string(),
            }
            .into());
        }
        Ok(self.apply(e, g))
    }

    fn apply(&self, e: &Element, g: &GraphContext) -> Element {
        match &self.body {
            Body::Identity => e.clone(),
            Body::Bang => Element::new(0, []),
            Body::Src => Element::new(0, [g.source(e.coords[0])]),
            Body::Tgt => Element::new(0, [g.target(e.coords[0])]),
            Body::Proj(ks) => Element::new(0, ks.iter().map(|&k| e.coords[k]).collect::<Vec<_>>()),
            Body::Inj(j) => Element::new(*j, e.coords.clone()),
            Body::Copair(branches) => branches[e.term].apply(&Element::new(0, e.coords.clone()), g),
            Body::Compose(parts) => parts
                .iter()
                .rev()
                .fold(e.clone(), |acc, a| a.apply(&acc, g)),
        }
    }

    /// All `x` with `self(x) = e`, in ascending canonical rank of the domain.
    /// Empty when `e` has no preimage (or is not in the codomain).
    pub fn preimage(&self, e: &Element, g: &GraphContext) -> Vec<Element> {
        self.domain
            .elements(g)
            .filter(|x| &self.apply(x, g) == e)
            .collect()
    }

    /// `table[rank(x)] = rank(self(x))` for every domain element.
    pub fn rank_table(&self, g: &GraphContext) -> Vec<usize> {
        self.domain
            .elements(g)
            .map(|x| {
                self.codomain
                    .rank(&self.apply(&x, g), g)
                    .expect("type-checked arrows land in their codomain")
            })
            .collect()
    }
}

/// Parses and type-checks `spec` as an arrow `domain → codomain`.
///
/// An arrow whose result is a single term is injected into the codomain
/// automatically when that term occurs exactly once there.
pub fn build_arrow(
    spec: &str,
    domain: &Carrier,
    codomain: &Carrier,
    g: &GraphContext,
) -> Result<Arrow, ArrowError> {
    let expr = parse_arrow(spec)?;
    check(&expr, domain, codomain, g)
}

pub fn eval_arrow(a: &Arrow, e: &Element, g: &GraphContext) -> Result<Element, ArrowError> {
    a.eval(e, g)
}

pub fn preimage(a: &Arrow, e: &Element, g: &GraphContext) -> Vec<Element> {
    a.preimage(e, g)
}

fn single_term<'c>(expr: &ArrowExpr, dom: &'c Carrier) -> Result<&'c Term, ArrowError> {
    match dom.terms() {
        [t] => Ok(t),
        _ => Err(ArrowError::NotSingleTerm {
            expr: expr.to_string(),
            domain: dom.to_string(),
        }),
    }
}

fn infer(expr: &ArrowExpr, dom: &Carrier, g: &GraphContext) -> Result<Arrow, ArrowError> {
    let arrow = |codomain: Carrier, body: Body| Arrow {
        domain: dom.clone(),
        codomain,
        body,
    };
    match expr {
        ArrowExpr::Id => Ok(arrow(dom.clone(), Body::Identity)),
        ArrowExpr::Bang => Ok(arrow(Carrier::one(), Body::Bang)),
        ArrowExpr::Src | ArrowExpr::Tgt => {
            let t = single_term(expr, dom)?;
            let is_src = matches!(expr, ArrowExpr::Src);
            let body = match t.factors() {
                [Factor::E] if is_src => Body::Src,
                [Factor::E] => Body::Tgt,
                // With E = V², an edge (i, j) may also be written as a pair.
                [Factor::V, Factor::V] if g.is_fully_connected() => {
                    Body::Proj(vec![if is_src { 0 } else { 1 }])
                }
                _ => {
                    return Err(ArrowError::TypeMismatch {
                        expr: expr.to_string(),
                        expected: "domain E".into(),
                        found: dom.to_string(),
                    })
                }
            };
            Ok(arrow(Carrier::single(Term::v_power(1)), body))
        }
        ArrowExpr::Proj(ks) => {
            let t = single_term(expr, dom)?;
            let arity = t.factors().len();
            if ks.is_empty() || ks.iter().any(|&k| k == 0 || k > arity) {
                return Err(ArrowError::ProjArity {
                    expr: expr.to_string(),
                    arity,
                });
            }
            let factors = ks.iter().map(|&k| t.factors()[k - 1]).collect();
            let zero_based = ks.iter().map(|&k| k - 1).collect();
            Ok(arrow(
                Carrier::single(Term(factors)),
                Body::Proj(zero_based),
            ))
        }
        ArrowExpr::Inj(_) => Err(ArrowError::CannotInfer {
            expr: expr.to_string(),
        }),
        ArrowExpr::Copair(branches) => {
            check_copair_arity(expr, dom, branches.len())?;
            let typed = branches
                .iter()
                .enumerate()
                .map(|(i, b)| infer(b, &dom.summand(i), g))
                .collect::<Result<Vec<_>, _>>()?;
            let cod = typed[0].codomain.clone();
            if let Some(bad) = typed.iter().position(|a| a.codomain != cod) {
                return Err(ArrowError::TypeMismatch {
                    expr: branches[bad].to_string(),
                    expected: cod.to_string(),
                    found: typed[bad].codomain.to_string(),
                });
            }
            Ok(arrow(cod, Body::Copair(typed)))
        }
        ArrowExpr::Compose(parts) => {
            let mut typed = Vec::with_capacity(parts.len());
            let mut mid = dom.clone();
            for p in parts.iter().rev() {
                let a = infer(p, &mid, g)?;
                mid = a.codomain.clone();
                typed.push(a);
            }
            typed.reverse();
            Ok(arrow(mid, Body::Compose(typed)))
        }
    }
}

fn check_copair_arity(expr: &ArrowExpr, dom: &Carrier, branches: usize) -> Result<(), ArrowError> {
    if dom.terms().len() != branches {
        return Err(ArrowError::CopairArity {
            expr: expr.to_string(),
            domain: dom.to_string(),
            terms: dom.terms().len(),
            branches,
        });
    }
    Ok(())
}

fn check(
    expr: &ArrowExpr,
    dom: &Carrier,
    cod: &Carrier,
    g: &GraphContext,
) -> Result<Arrow, ArrowError> {
    match expr {
        ArrowExpr::Inj(j) => {
            let t = single_term(expr, dom)?;
            match cod.terms().get(j.wrapping_sub(1)) {
                Some(target) if target == t => Ok(Arrow {
                    domain: dom.clone(),
                    codomain: cod.clone(),
                    body: Body::Inj(j - 1),
                }),
                Some(target) => Err(ArrowError::TypeMismatch {
                    expr: expr.to_string(),
                    expected: format!("summand {target}"),
                    found: t.to_string(),
                }),
                None => Err(ArrowError::TypeMismatch {
                    expr: expr.to_string(),
                    expected: format!("a summand index in 1..={}", cod.terms().len()),
                    found: j.to_string(),
                }),
            }
        }
        ArrowExpr::Copair(branches) => {
            check_copair_arity(expr, dom, branches.len())?;
            let typed = branches
                .iter()
                .enumerate()
                .map(|(i, b)| check(b, &dom.summand(i), cod, g))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Arrow {
                domain: dom.clone(),
                codomain: cod.clone(),
                body: Body::Copair(typed),
            })
        }
        ArrowExpr::Compose(parts) => {
            let (outer, inner) = parts
                .split_first()
                .expect("compositions have two or more parts");
            let mut typed = Vec::with_capacity(parts.len());
            let mut mid = dom.clone();
            for p in inner.iter().rev() {
                let a = infer(p, &mid, g)?;
                mid = a.codomain.clone();
                typed.push(a);
            }
            typed.push(check(outer, &mid, cod, g)?);
            typed.reverse();
            Ok(Arrow {
                domain: dom.clone(),
                codomain: cod.clone(),
                body: Body::Compose(typed),
            })
        }
        _ => coerce(expr, infer(expr, dom, g)?, cod),
    }
}

fn coerce(expr: &ArrowExpr, a: Arrow, cod: &Carrier) -> Result<Arrow, ArrowError> {
    if &a.codomain == cod {
        return Ok(a);
    }
    let mismatch = || ArrowError::TypeMismatch {
        expr: expr.to_string(),
        expected: cod.to_string(),
        found: a.codomain.to_string(),
    };
    let [t] = a.codomain.terms() else {
        return Err(mismatch());
    };
    let hits: Vec<usize> = cod
        .terms()
        .iter()
        .enumerate()
        .filter(|(_, c)| *c == t)
        .map(|(i, _)| i)
        .collect();
    match hits.as_slice() {
        [] => Err(mismatch()),
        [j] => {
            let inj = Arrow {
                domain: a.codomain.clone(),
                codomain: cod.clone(),
                body: Body::Inj(*j),
            };
            Ok(Arrow {
                domain: a.domain.clone(),
                codomain: cod.clone(),
                body: Body::Compose(vec![inj, a]),
            })
        }
        _ => Err(ArrowError::AmbiguousInjection {
            expr: expr.to_string(),
            term: t.to_string(),
            codomain: cod.to_string(),
            count: hits.len(),
        }),
    }
}

/// Parses `arrow := atom {"." atom}` with atoms `id`, `bang`, `src`, `tgt`,
/// `proj[k,..]`, `inj[k]`, `[arrow; ..]` and `(arrow)`.
pub fn parse_arrow(spec: &str) -> Result<ArrowExpr, ArrowError> {
    let mut p = ArrowParser {
        src: spec.as_bytes(),
        pos: 0,
    };
    let expr = p.arrow()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(expr)
}

struct ArrowParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl ArrowParser<'_> {
    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<(), ArrowError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(&format!("expected '{}'", c as char)))
        }
    }

    fn syntax(&self, message: &str) -> ArrowError {
        ArrowError::Syntax {
            pos: self.pos,
            message: message.to_string(),
        }
    }

    fn arrow(&mut self) -> Result<ArrowExpr, ArrowError> {
        let mut parts = vec![self.atom()?];
        while self.peek() == Some(b'.') {
            self.pos += 1;
            parts.push(self.atom()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            ArrowExpr::Compose(parts)
        })
    }

    fn atom(&mut self) -> Result<ArrowExpr, ArrowError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.arrow()?;
                self.eat(b')')?;
                Ok(inner)
            }
            Some(b'[') => {
                self.pos += 1;
                let mut branches = vec![self.arrow()?];
                while self.peek() == Some(b';') {
                    self.pos += 1;
                    branches.push(self.arrow()?);
                }
                self.eat(b']')?;
                Ok(ArrowExpr::Copair(branches))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self
                    .src
                    .get(self.pos)
                    .is_some_and(u8::is_ascii_alphanumeric)
                {
                    self.pos += 1;
                }
                match &self.src[start..self.pos] {
                    b"id" => Ok(ArrowExpr::Id),
                    b"bang" => Ok(ArrowExpr::Bang),
                    b"src" => Ok(ArrowExpr::Src),
                    b"tgt" => Ok(ArrowExpr::Tgt),
                    b"proj" => Ok(ArrowExpr::Proj(self.index_list()?)),
                    b"inj" => {
                        let ks = self.index_list()?;
                        match ks.as_slice() {
                            [k] => Ok(ArrowExpr::Inj(*k)),
                            _ => Err(ArrowError::Syntax {
                                pos: start,
                                message: "inj takes exactly one index".into(),
                            }),
                        }
                    }
                    other => Err(ArrowError::Syntax {
                        pos: start,
                        message: format!("unknown arrow {:?}", String::from_utf8_lossy(other)),
                    }),
                }
            }
            Some(_) => Err(self.syntax("expected an arrow")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn index_list(&mut self) -> Result<Vec<usize>, ArrowError> {
        if self.src.get(self.pos) != Some(&b'[') {
            return Err(self.syntax("expected '['"));
        }
        self.pos += 1;
        let mut out = vec![self.integer()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            out.push(self.integer()?);
        }
        self.eat(b']')?;
        Ok(out)
    }

    fn integer(&mut self) -> Result<usize, ArrowError> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ArrowError::Syntax {
                pos: start,
                message: "expected an integer".into(),
            })
    }
}
