//! Subtyping deductions as terms, and the two rewrite systems that eliminate
//! transitivity (`T`) and expansion (`E`) from them.
//!
//! Transitivity algebra: `⊥ | I | S d | C d | L d | R d | P d d | T d d`
//! (impossible case, reflexivity, size step, conversion, left and right
//! reduction, product, transitivity). Expansion algebra: `I | S | E d | R d | P d d`.

use std::fmt;
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TransDeduction {
    Bot,
    I,
    S(Box<TransDeduction>),
    C(Box<TransDeduction>),
    L(Box<TransDeduction>),
    R(Box<TransDeduction>),
    P(Box<TransDeduction>, Box<TransDeduction>),
    T(Box<TransDeduction>, Box<TransDeduction>),
}

use TransDeduction as D;

fn s(d: D) -> D {
    D::S(Box::new(d))
}
fn c(d: D) -> D {
    D::C(Box::new(d))
}
fn l(d: D) -> D {
    D::L(Box::new(d))
}
fn r(d: D) -> D {
    D::R(Box::new(d))
}
fn p(a: D, b: D) -> D {
    D::P(Box::new(a), Box::new(b))
}
fn t(a: D, b: D) -> D {
    D::T(Box::new(a), Box::new(b))
}

impl TransDeduction {
    /// Number of constructors.
    pub fn size(&self) -> usize {
        match self {
            D::Bot | D::I => 1,
            D::S(x) | D::C(x) | D::L(x) | D::R(x) => 1 + x.size(),
            D::P(x, y) | D::T(x, y) => 1 + x.size() + y.size(),
        }
    }

    pub fn contains_t(&self) -> bool {
        match self {
            D::Bot | D::I => false,
            D::S(x) | D::C(x) | D::L(x) | D::R(x) => x.contains_t(),
            D::T(..) => true,
            D::P(x, y) => x.contains_t() || y.contains_t(),
        }
    }

    pub fn contains_bot(&self) -> bool {
        match self {
            D::Bot => true,
            D::I => false,
            D::S(x) | D::C(x) | D::L(x) | D::R(x) => x.contains_bot(),
            D::P(x, y) | D::T(x, y) => x.contains_bot() || y.contains_bot(),
        }
    }

    /// The termination measure of a transitivity node `T u v`.
    pub fn measure(&self) -> Option<(usize, usize)> {
        match self {
            D::T(u, v) => Some((u.size() + v.size(), v.size())),
            _ => None,
        }
    }

    fn collect_t_measures(&self, out: &mut Vec<(usize, usize)>) {
        if let Some(m) = self.measure() {
            out.push(m);
        }
        match self {
            D::Bot | D::I => {}
            D::S(x) | D::C(x) | D::L(x) | D::R(x) => x.collect_t_measures(out),
            D::P(x, y) | D::T(x, y) => {
                x.collect_t_measures(out);
                y.collect_t_measures(out);
            }
        }
    }
}

/// One contraction recorded by [`trans_normalize_traced`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransStep {
    pub rule: &'static str,
    pub redex: TransDeduction,
    pub contractum: TransDeduction,
    /// Measure of the redex when it is a `T` node.
    pub before: Option<(usize, usize)>,
    /// Measures of the `T` nodes created by the contraction.
    pub after: Vec<(usize, usize)>,
}

/// Rewrites at the root of a term whose children are normal.
fn trans_root(d: &D) -> Option<(&'static str, D)> {
    use D::*;
    let out = match d {
        C(x) => ("a", r(l((**x).clone()))),
        R(x) => match &**x {
            Bot => ("3", Bot),
            R(y) => ("b", r((**y).clone())),
            _ => return None,
        },
        L(x) => match &**x {
            Bot => ("2", Bot),
            L(y) => ("c", l((**y).clone())),
            R(y) => ("d", r(l((**y).clone()))),
            _ => return None,
        },
        S(x) if **x == Bot => ("1", Bot),
        P(x, y) if **x == Bot => ("4", Bot),
        P(_, y) if **y == Bot => ("5", Bot),
        T(x, _) if **x == Bot => ("6", Bot),
        T(_, y) if **y == Bot => ("7", Bot),
        T(x, y) => {
            let y0 = (**y).clone();
            match &**x {
                I => ("e", y0),
                S(x1) => ("f", s(t((**x1).clone(), y0))),
                L(x1) => ("g", l(t((**x1).clone(), y0))),
                R(inner) => match &**inner {
                    I => ("h", l(y0)),
                    S(x1) => ("i", s(t(r((**x1).clone()), y0))),
                    L(x1) => ("j", l(t(r((**x1).clone()), y0))),
                    P(a, b) => {
                        let (a, b) = ((**a).clone(), (**b).clone());
                        match y0 {
                            I => ("k", r(p(a, b))),
                            S(_) => ("l", Bot),
                            L(z) => ("m", t(p(a, b), l(*z))),
                            R(z) => ("n", r(t(r(p(a, b)), *z))),
                            P(z, w) => ("p", p(t(*z, l(a)), t(b, l(*w)))),
                            _ => return None,
                        }
                    }
                    _ => return None,
                },
                P(a, b) => {
                    let (a, b) = ((**a).clone(), (**b).clone());
                    match y0 {
                        I => ("q", p(a, b)),
                        S(_) => ("r", Bot),
                        L(z) => match *z {
                            I => ("s", r(p(a, b))),
                            S(_) => ("t", Bot),
                            P(z1, w) => ("u", p(t(*z1, l(a)), t(b, l(*w)))),
                            _ => return None,
                        },
                        R(z) => ("v", r(t(p(a, b), *z))),
                        P(z, w) => ("w", p(t(*z, a), t(b, *w))),
                        _ => return None,
                    }
                }
                _ => return None,
            }
        }
        _ => return None,
    };
    Some(out)
}

fn trans_norm(d: D, trace: &mut Option<&mut Vec<TransStep>>) -> D {
    let d = match d {
        D::Bot | D::I => d,
        D::S(x) => s(trans_norm(*x, trace)),
        D::C(x) => c(trans_norm(*x, trace)),
        D::L(x) => l(trans_norm(*x, trace)),
        D::R(x) => r(trans_norm(*x, trace)),
        D::P(x, y) => p(trans_norm(*x, trace), trans_norm(*y, trace)),
        D::T(x, y) => t(trans_norm(*x, trace), trans_norm(*y, trace)),
    };
    match trans_root(&d) {
        None => d,
        Some((rule, contractum)) => {
            if let Some(steps) = trace.as_deref_mut() {
                let mut after = Vec::new();
                contractum.collect_t_measures(&mut after);
                steps.push(TransStep {
                    rule,
                    before: d.measure(),
                    redex: d,
                    contractum: contractum.clone(),
                    after,
                });
            }
            trans_norm(contractum, trace)
        }
    }
}

/// Normal form under the transitivity-elimination rules, innermost first.
pub fn trans_normalize(d: &TransDeduction) -> TransDeduction {
    trans_norm(d.clone(), &mut None)
}

/// As [`trans_normalize`], also returning every contraction performed.
pub fn trans_normalize_traced(d: &TransDeduction) -> (TransDeduction, Vec<TransStep>) {
    let mut steps = Vec::new();
    let nf = trans_norm(d.clone(), &mut Some(&mut steps));
    (nf, steps)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExpDeduction {
    I,
    S,
    E(Box<ExpDeduction>),
    R(Box<ExpDeduction>),
    P(Box<ExpDeduction>, Box<ExpDeduction>),
}

use ExpDeduction as X;

fn xe(d: X) -> X {
    X::E(Box::new(d))
}
fn xr(d: X) -> X {
    X::R(Box::new(d))
}
fn xp(a: X, b: X) -> X {
    X::P(Box::new(a), Box::new(b))
}

impl ExpDeduction {
    pub fn size(&self) -> usize {
        match self {
            X::I | X::S => 1,
            X::E(x) | X::R(x) => 1 + x.size(),
            X::P(x, y) => 1 + x.size() + y.size(),
        }
    }

    pub fn contains_e(&self) -> bool {
        match self {
            X::I | X::S => false,
            X::E(_) => true,
            X::R(x) => x.contains_e(),
            X::P(x, y) => x.contains_e() || y.contains_e(),
        }
    }
}

fn exp_root(d: &X) -> Option<(&'static str, X)> {
    let X::E(x) = d else { return None };
    Some(match &**x {
        X::R(y) => ("a", xr(xe((**y).clone()))),
        X::P(y, z) => ("b", xp(xe((**y).clone()), xe((**z).clone()))),
        X::I => ("c", xr(X::I)),
        X::S => ("d", xr(X::S)),
        X::E(y) => ("e", xe((**y).clone())),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Innermost,
    Outermost,
}

fn exp_innermost(d: X, trace: &mut Vec<&'static str>) -> X {
    let d = match d {
        X::I | X::S => d,
        X::E(x) => xe(exp_innermost(*x, trace)),
        X::R(x) => xr(exp_innermost(*x, trace)),
        X::P(x, y) => xp(exp_innermost(*x, trace), exp_innermost(*y, trace)),
    };
    match exp_root(&d) {
        None => d,
        Some((rule, contractum)) => {
            trace.push(rule);
            exp_innermost(contractum, trace)
        }
    }
}

/// Contracts the leftmost-outermost redex.
fn exp_outer_step(d: &X) -> Option<(&'static str, X)> {
    if let Some(r) = exp_root(d) {
        return Some(r);
    }
    match d {
        X::I | X::S => None,
        X::E(x) => exp_outer_step(x).map(|(n, x2)| (n, xe(x2))),
        X::R(x) => exp_outer_step(x).map(|(n, x2)| (n, xr(x2))),
        X::P(x, y) => match exp_outer_step(x) {
            Some((n, x2)) => Some((n, xp(x2, (**y).clone()))),
            None => exp_outer_step(y).map(|(n, y2)| (n, xp((**x).clone(), y2))),
        },
    }
}

/// Normal form under the expansion-elimination rules.
pub fn exp_normalize(d: &ExpDeduction, strategy: Strategy) -> ExpDeduction {
    exp_normalize_traced(d, strategy).0
}

/// As [`exp_normalize`], also returning the names of the rules applied.
pub fn exp_normalize_traced(d: &ExpDeduction, strategy: Strategy) -> (ExpDeduction, Vec<&'static str>) {
    let mut trace = Vec::new();
    let nf = match strategy {
        Strategy::Innermost => exp_innermost(d.clone(), &mut trace),
        Strategy::Outermost => {
            let mut cur = d.clone();
            while let Some((rule, next)) = exp_outer_step(&cur) {
                trace.push(rule);
                cur = next;
            }
            cur
        }
    };
    (nf, trace)
}

impl fmt::Display for TransDeduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            D::Bot => write!(f, "Bot"),
            D::I => write!(f, "I"),
            D::S(x) => write!(f, "S({x})"),
            D::C(x) => write!(f, "C({x})"),
            D::L(x) => write!(f, "L({x})"),
            D::R(x) => write!(f, "R({x})"),
            D::P(x, y) => write!(f, "P({x},{y})"),
            D::T(x, y) => write!(f, "T({x},{y})"),
        }
    }
}

impl fmt::Display for ExpDeduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            X::I => write!(f, "I"),
            X::S => write!(f, "S"),
            X::E(x) => write!(f, "E({x})"),
            X::R(x) => write!(f, "R({x})"),
            X::P(x, y) => write!(f, "P({x},{y})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("malformed deduction at offset {offset}: {message}")]
pub struct DeductionParseError {
    pub offset: usize,
    pub message: String,
}

/// A generic `Name` / `Name(arg, …)` reader shared by both algebras.
struct Reader<'a> {
    src: &'a [u8],
    at: usize,
}

#[derive(Debug)]
struct Node {
    name: String,
    args: Vec<Node>,
}

impl Reader<'_> {
    fn skip_ws(&mut self) {
        while self.at < self.src.len() && self.src[self.at].is_ascii_whitespace() {
            self.at += 1;
        }
    }

    fn fail<T>(&self, message: &str) -> Result<T, DeductionParseError> {
        Err(DeductionParseError { offset: self.at, message: message.to_string() })
    }

    fn node(&mut self) -> Result<Node, DeductionParseError> {
        self.skip_ws();
        let start = self.at;
        while self.at < self.src.len() && self.src[self.at].is_ascii_alphabetic() {
            self.at += 1;
        }
        if start == self.at {
            return self.fail("expected a constructor name");
        }
        let name = String::from_utf8_lossy(&self.src[start..self.at]).into_owned();
        let mut args = Vec::new();
        self.skip_ws();
        if self.src.get(self.at) == Some(&b'(') {
            self.at += 1;
            loop {
                args.push(self.node()?);
                self.skip_ws();
                match self.src.get(self.at) {
                    Some(b',') => self.at += 1,
                    Some(b')') => {
                        self.at += 1;
                        break;
                    }
                    _ => return self.fail("expected `,` or `)`"),
                }
            }
        }
        Ok(Node { name, args })
    }

    fn read(src: &str) -> Result<Node, DeductionParseError> {
        let mut r = Reader { src: src.as_bytes(), at: 0 };
        let n = r.node()?;
        r.skip_ws();
        if r.at != r.src.len() {
            return r.fail("trailing input");
        }
        Ok(n)
    }
}

fn unknown<T>(name: &str, arity: usize) -> Result<T, DeductionParseError> {
    Err(DeductionParseError {
        offset: 0,
        message: format!("unknown constructor `{name}` with {arity} arguments"),
    })
}

fn to_trans(n: Node) -> Result<D, DeductionParseError> {
    let arity = n.args.len();
    let mut args = n.args.into_iter().map(to_trans).collect::<Result<Vec<_>, _>>()?.into_iter();
    let mut next = || Box::new(args.next().unwrap());
    Ok(match (n.name.as_str(), arity) {
        ("Bot", 0) => D::Bot,
        ("I", 0) => D::I,
        ("S", 1) => D::S(next()),
        ("C", 1) => D::C(next()),
        ("L", 1) => D::L(next()),
        ("R", 1) => D::R(next()),
        ("P", 2) => D::P(next(), next()),
        ("T", 2) => D::T(next(), next()),
        _ => return unknown(&n.name, arity),
    })
}

fn to_exp(n: Node) -> Result<X, DeductionParseError> {
    let arity = n.args.len();
    let mut args = n.args.into_iter().map(to_exp).collect::<Result<Vec<_>, _>>()?.into_iter();
    let mut next = || Box::new(args.next().unwrap());
    Ok(match (n.name.as_str(), arity) {
        ("I", 0) => X::I,
        ("S", 0) => X::S,
        ("E", 1) => X::E(next()),
        ("R", 1) => X::R(next()),
        ("P", 2) => X::P(next(), next()),
        _ => return unknown(&n.name, arity),
    })
}

impl FromStr for TransDeduction {
    type Err = DeductionParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        to_trans(Reader::read(s)?)
    }
}

impl FromStr for ExpDeduction {
    type Err = DeductionParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        to_exp(Reader::read(s)?)
    }
}
