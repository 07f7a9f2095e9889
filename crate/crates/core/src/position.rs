//! Positions in terms and their polarity.
//!
//! A position is a word over `{0, 1, 2}`: `1` and `2` select the two children
//! of a binder or an application and `0` descends into a size annotation.
//! Size expressions are read as curried applications, so the `i`-th of `n`
//! arguments of a size symbol sits at `1^(n-i) 2`.

use std::collections::BTreeSet;
use std::fmt;

use crate::size::SizeExpr;
use crate::term::Term;
use crate::Name;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position(pub Vec<u8>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn child(&self, d: u8) -> Position {
        let mut v = self.0.clone();
        v.push(d);
        Position(v)
    }

    pub fn concat(&self, other: &Position) -> Position {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Position(v)
    }

    /// Position of the `i`-th (1-based) of `n` arguments of a spine.
    pub fn spine_arg(&self, n: usize, i: usize) -> Position {
        let mut v = self.0.clone();
        v.extend(std::iter::repeat_n(1, n - i));
        v.push(2);
        Position(v)
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "·")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl serde::Serialize for Position {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub type PositionSet = BTreeSet<Position>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    /// Rule of signs.
    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Pos => "+",
            Sign::Neg => "-",
        })
    }
}

/// Monotone and anti-monotone argument indices (1-based) of symbols.
pub trait Monotonicity {
    fn term_mon(&self, f: &str) -> Option<(Vec<usize>, Vec<usize>)>;
    fn size_mon(&self, h: &str) -> Option<(Vec<usize>, Vec<usize>)>;
}

/// Monotonicity of the built-in size symbols, `None` for anything else.
pub fn builtin_size_mon(h: &str, arity: usize) -> Option<(Vec<usize>, Vec<usize>)> {
    match h {
        "s" | crate::size::MAX | crate::size::PLUS | crate::size::TIMES => {
            Some(((1..=arity).collect(), Vec::new()))
        }
        _ if h.parse::<u64>().is_ok() => Some((Vec::new(), Vec::new())),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown symbol `{0}`")]
pub struct UnknownSymbol(pub Name);

/// `Pos(t)`.
pub fn all_positions(t: &Term) -> PositionSet {
    let mut out = PositionSet::new();
    term_positions(t, &Position::root(), &mut out);
    out
}

fn term_positions(t: &Term, at: &Position, out: &mut PositionSet) {
    match t {
        Term::Sort(_) | Term::Var(_) | Term::Symbol(_) => {
            out.insert(at.clone());
        }
        Term::Sized(_, a) => {
            out.insert(at.clone());
            size_positions(a, &at.child(0), out);
        }
        Term::Abs(_, a, b) | Term::Prod(_, a, b) | Term::App(a, b) => {
            term_positions(a, &at.child(1), out);
            term_positions(b, &at.child(2), out);
        }
    }
}

fn size_positions(a: &SizeExpr, at: &Position, out: &mut PositionSet) {
    let (head, args) = a.head_args();
    if head.is_none() || args.is_empty() {
        out.insert(at.clone());
        return;
    }
    let n = args.len();
    let mut head_at = at.clone();
    head_at.0.extend(std::iter::repeat_n(1, n));
    out.insert(head_at);
    for (i, arg) in args.iter().enumerate() {
        size_positions(arg, &at.spine_arg(n, i + 1), out);
    }
}

/// What [`occurrences`] looks for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Subject {
    Var(Name),
    Symbol(Name),
    SizeVar(Name),
}

/// `Pos(x, t)`: positions of the free occurrences of a variable, of a
/// symbol (annotated or not), or of a size variable.
pub fn occurrences(subject: &Subject, t: &Term) -> PositionSet {
    let mut out = PositionSet::new();
    occ_term(subject, t, &Position::root(), &mut out);
    out
}

fn occ_term(subject: &Subject, t: &Term, at: &Position, out: &mut PositionSet) {
    match (t, subject) {
        (Term::Var(x), Subject::Var(y)) if x == y => {
            out.insert(at.clone());
        }
        (Term::Symbol(f), Subject::Symbol(g)) if f == g => {
            out.insert(at.clone());
        }
        (Term::Sized(c, _), Subject::Symbol(g)) if c == g => {
            out.insert(at.clone());
        }
        (Term::Sized(_, a), Subject::SizeVar(v)) => occ_size(v, a, &at.child(0), out),
        (Term::Abs(x, a, b) | Term::Prod(x, a, b), _) => {
            occ_term(subject, a, &at.child(1), out);
            if !matches!(subject, Subject::Var(y) if y == x) {
                occ_term(subject, b, &at.child(2), out);
            }
        }
        (Term::App(a, b), _) => {
            occ_term(subject, a, &at.child(1), out);
            occ_term(subject, b, &at.child(2), out);
        }
        _ => {}
    }
}

fn occ_size(v: &Name, a: &SizeExpr, at: &Position, out: &mut PositionSet) {
    if let SizeExpr::Var(w) = a {
        if w == v {
            out.insert(at.clone());
        }
        return;
    }
    let (_, args) = a.head_args();
    let n = args.len();
    for (i, arg) in args.iter().enumerate() {
        occ_size(v, arg, &at.spine_arg(n, i + 1), out);
    }
}

/// `Pos^δ(t)`.
pub fn signed_positions(
    t: &Term,
    sign: Sign,
    mon: &dyn Monotonicity,
) -> Result<PositionSet, UnknownSymbol> {
    let mut out = PositionSet::new();
    signed_term(t, sign, mon, &Position::root(), &mut out)?;
    Ok(out)
}

fn signed_term(
    t: &Term,
    sign: Sign,
    mon: &dyn Monotonicity,
    at: &Position,
    out: &mut PositionSet,
) -> Result<(), UnknownSymbol> {
    match t {
        Term::Sort(_) | Term::Var(_) => {
            if sign == Sign::Pos {
                out.insert(at.clone());
            }
        }
        Term::Prod(_, a, b) => {
            signed_term(a, sign.flip(), mon, &at.child(1), out)?;
            signed_term(b, sign, mon, &at.child(2), out)?;
        }
        Term::Abs(_, _, b) => signed_term(b, sign, mon, &at.child(2), out)?,
        Term::App(..) | Term::Symbol(_) | Term::Sized(..) => {
            let (head, args) = t.spine();
            match head {
                Term::Symbol(f) | Term::Sized(f, _) => {
                    let n = args.len();
                    let (plus, minus) = if n == 0 {
                        (Vec::new(), Vec::new())
                    } else {
                        mon.term_mon(f).ok_or_else(|| UnknownSymbol(f.clone()))?
                    };
                    let mut head_at = at.clone();
                    head_at.0.extend(std::iter::repeat_n(1, n));
                    if sign == Sign::Pos {
                        out.insert(head_at.clone());
                    }
                    for (indices, eps) in [(plus, Sign::Pos), (minus, Sign::Neg)] {
                        for i in indices.into_iter().filter(|i| (1..=n).contains(i)) {
                            signed_term(args[i - 1], eps.times(sign), mon, &at.spine_arg(n, i), out)?;
                        }
                    }
                    if let (Term::Sized(_, a), Sign::Pos) = (head, sign) {
                        signed_size(a, sign, mon, &head_at.child(0), out)?;
                    }
                }
                _ => {
                    if let Term::App(f, _) = t {
                        signed_term(f, sign, mon, &at.child(1), out)?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn signed_size(
    a: &SizeExpr,
    sign: Sign,
    mon: &dyn Monotonicity,
    at: &Position,
    out: &mut PositionSet,
) -> Result<(), UnknownSymbol> {
    let (head, args) = a.head_args();
    let Some(h) = head else {
        if sign == Sign::Pos {
            out.insert(at.clone());
        }
        return Ok(());
    };
    let n = args.len();
    let (plus, minus) = builtin_size_mon(h, n)
        .or_else(|| mon.size_mon(h))
        .ok_or_else(|| UnknownSymbol(Name::from(h)))?;
    if sign == Sign::Pos {
        let mut head_at = at.clone();
        head_at.0.extend(std::iter::repeat_n(1, n));
        out.insert(head_at);
    }
    for (indices, eps) in [(plus, Sign::Pos), (minus, Sign::Neg)] {
        for i in indices.into_iter().filter(|i| (1..=n).contains(i)) {
            signed_size(args[i - 1], eps.times(sign), mon, &at.spine_arg(n, i), out)?;
        }
    }
    Ok(())
}
