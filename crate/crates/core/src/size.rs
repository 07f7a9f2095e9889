//! Size expressions and the quasi-ordering on them.
//!
//! The base algebra is `α | s a | ∞`, ordered by the smallest quasi-ordering
//! with `a < s a` and `a ≤ ∞`. On top of it we ship three extensions:
//! numerals, `max`, and polynomials (`+`, `*`) with non-negative integer
//! coefficients. Declared size symbols are kept opaque: they only compare by
//! syntactic equality and against `∞`.
//!
//! Comparisons are sound but not complete once extensions are mixed; a
//! comparison that cannot be established returns `false`.

use std::collections::BTreeMap;
use std::fmt;

use crate::poly::{Atom, Poly};
use crate::Name;

pub const MAX: &str = "max";
pub const PLUS: &str = "+";
pub const TIMES: &str = "*";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SizeExpr {
    Var(Name),
    Succ(Box<SizeExpr>),
    Infty,
    /// Extension symbol: `max`, `+`, `*`, a numeral (nullary, named by its
    /// digits) or a declared size symbol.
    Ext(Name, Vec<SizeExpr>),
}

pub type SizeSubst = BTreeMap<Name, SizeExpr>;

impl SizeExpr {
    pub fn var(name: &str) -> Self {
        SizeExpr::Var(Name::from(name))
    }

    pub fn succ(a: SizeExpr) -> Self {
        SizeExpr::Succ(Box::new(a))
    }

    /// `s^k a`
    pub fn succ_n(mut a: SizeExpr, k: usize) -> Self {
        for _ in 0..k {
            a = SizeExpr::succ(a);
        }
        a
    }

    pub fn num(n: u64) -> Self {
        SizeExpr::Ext(Name::from(n.to_string().as_str()), Vec::new())
    }

    pub fn max(a: SizeExpr, b: SizeExpr) -> Self {
        SizeExpr::Ext(Name::from(MAX), vec![a, b])
    }

    pub fn plus(a: SizeExpr, b: SizeExpr) -> Self {
        SizeExpr::Ext(Name::from(PLUS), vec![a, b])
    }

    pub fn times(a: SizeExpr, b: SizeExpr) -> Self {
        SizeExpr::Ext(Name::from(TIMES), vec![a, b])
    }

    pub fn as_numeral(&self) -> Option<u64> {
        match self {
            SizeExpr::Ext(name, args) if args.is_empty() => name.parse().ok(),
            _ => None,
        }
    }

    pub fn is_infty(&self) -> bool {
        matches!(self, SizeExpr::Infty)
    }

    /// Size variables occurring in the expression, in order of first occurrence.
    pub fn vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<Name>) {
        match self {
            SizeExpr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            SizeExpr::Succ(a) => a.collect_vars(out),
            SizeExpr::Infty => {}
            SizeExpr::Ext(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        match self {
            SizeExpr::Var(v) => &**v == var,
            SizeExpr::Succ(a) => a.mentions(var),
            SizeExpr::Infty => false,
            SizeExpr::Ext(_, args) => args.iter().any(|a| a.mentions(var)),
        }
    }

    /// Simultaneous substitution of size variables.
    pub fn subst(&self, phi: &SizeSubst) -> SizeExpr {
        match self {
            SizeExpr::Var(v) => phi.get(v).cloned().unwrap_or_else(|| self.clone()),
            SizeExpr::Succ(a) => SizeExpr::succ(a.subst(phi)),
            SizeExpr::Infty => SizeExpr::Infty,
            SizeExpr::Ext(h, args) => {
                SizeExpr::Ext(h.clone(), args.iter().map(|a| a.subst(phi)).collect())
            }
        }
    }

    /// Nesting depth, counting leaves as depth 1.
    pub fn depth(&self) -> usize {
        match self {
            SizeExpr::Var(_) | SizeExpr::Infty => 1,
            SizeExpr::Succ(a) => 1 + a.depth(),
            SizeExpr::Ext(_, args) => 1 + args.iter().map(SizeExpr::depth).max().unwrap_or(0),
        }
    }

    /// Head symbol and arguments when viewed as a first-order term.
    /// `s` is monotone in its argument; `∞` and variables are leaves.
    pub(crate) fn head_args(&self) -> (Option<&str>, Vec<&SizeExpr>) {
        match self {
            SizeExpr::Var(_) | SizeExpr::Infty => (None, Vec::new()),
            SizeExpr::Succ(a) => (Some("s"), vec![&**a]),
            SizeExpr::Ext(h, args) => (Some(&**h), args.iter().collect()),
        }
    }

    fn is_poly_shaped(&self) -> bool {
        match self {
            SizeExpr::Succ(_) => true,
            SizeExpr::Ext(h, _) => {
                &**h == PLUS || &**h == TIMES || self.as_numeral().is_some()
            }
            _ => false,
        }
    }
}

/// Whether a name is reserved by the built-in extension symbols.
pub fn is_builtin_symbol(name: &str) -> bool {
    name == MAX || name == PLUS || name == TIMES || name.parse::<u64>().is_ok()
}

/// Result of reading a size expression as a polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolyValue {
    Finite(Poly),
    Infinite,
}

/// Reads `a` as a polynomial over atoms. Variables become atoms, `s a`
/// becomes `a + 1`, numerals become constants, `∞` absorbs everything and
/// any other subterm (`max` or a declared symbol) becomes an opaque atom.
pub fn to_poly(a: &SizeExpr) -> PolyValue {
    match a {
        SizeExpr::Var(v) => PolyValue::Finite(Poly::atom(Atom::Var(v.clone()))),
        SizeExpr::Infty => PolyValue::Infinite,
        SizeExpr::Succ(b) => match to_poly(b) {
            PolyValue::Finite(p) => PolyValue::Finite(p.add(&Poly::constant(1))),
            PolyValue::Infinite => PolyValue::Infinite,
        },
        SizeExpr::Ext(h, args) => {
            if let Some(n) = a.as_numeral() {
                return PolyValue::Finite(Poly::constant(n as i128));
            }
            if &**h == PLUS || &**h == TIMES {
                let mut acc = if &**h == PLUS {
                    Poly::constant(0)
                } else {
                    Poly::constant(1)
                };
                for arg in args {
                    match to_poly(arg) {
                        PolyValue::Infinite => return PolyValue::Infinite,
                        PolyValue::Finite(p) => {
                            acc = if &**h == PLUS { acc.add(&p) } else { acc.mul(&p) }
                        }
                    }
                }
                return PolyValue::Finite(acc);
            }
            match canon(a) {
                SizeExpr::Infty => PolyValue::Infinite,
                c if c.is_poly_shaped() || matches!(c, SizeExpr::Var(_)) => to_poly(&c),
                c => PolyValue::Finite(Poly::atom(Atom::Opaque(c))),
            }
        }
    }
}

/// Renders a polynomial back into a size expression. `atom + k` is rendered
/// as `s^k atom`, so that the base algebra is a fixed point of [`canon`].
pub fn from_poly(p: &Poly) -> SizeExpr {
    if let Some(k) = p.as_constant() {
        return SizeExpr::num(k.max(0) as u64);
    }
    if let Some((atom, k)) = p.as_atom_plus_constant() {
        return SizeExpr::succ_n(atom_expr(atom), k as usize);
    }
    let mut summands = Vec::new();
    let mut constant = 0;
    for (mono, coeff) in p.terms() {
        if mono.is_empty() {
            constant = *coeff;
            continue;
        }
        let mut factors = Vec::new();
        if *coeff != 1 {
            factors.push(SizeExpr::num(*coeff as u64));
        }
        for (atom, exp) in mono {
            for _ in 0..*exp {
                factors.push(atom_expr(atom));
            }
        }
        summands.push(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            SizeExpr::Ext(Name::from(TIMES), factors)
        });
    }
    if constant != 0 {
        summands.push(SizeExpr::num(constant as u64));
    }
    if summands.len() == 1 {
        summands.pop().unwrap()
    } else {
        SizeExpr::Ext(Name::from(PLUS), summands)
    }
}

fn atom_expr(atom: &Atom) -> SizeExpr {
    match atom {
        Atom::Var(v) => SizeExpr::Var(v.clone()),
        Atom::Opaque(e) => e.clone(),
    }
}

/// Canonical representative of the equivalence class of `a` under mutual `≤`.
pub fn canon(a: &SizeExpr) -> SizeExpr {
    match a {
        SizeExpr::Var(_) | SizeExpr::Infty => a.clone(),
        SizeExpr::Ext(h, args) if &**h == MAX => {
            let mut flat = Vec::new();
            for arg in args {
                match canon(arg) {
                    SizeExpr::Infty => return SizeExpr::Infty,
                    SizeExpr::Ext(h2, inner) if &*h2 == MAX => flat.extend(inner),
                    c => flat.push(c),
                }
            }
            flat.sort();
            flat.dedup();
            // drop arguments dominated by another one
            let mut kept: Vec<SizeExpr> = Vec::new();
            for (i, x) in flat.iter().enumerate() {
                let dominated = flat.iter().enumerate().any(|(j, y)| {
                    j != i && leq_canon(x, y) && (!leq_canon(y, x) || j < i)
                });
                if !dominated {
                    kept.push(x.clone());
                }
            }
            match kept.len() {
                0 => SizeExpr::num(0),
                1 => kept.pop().unwrap(),
                _ => SizeExpr::Ext(h.clone(), kept),
            }
        }
        SizeExpr::Ext(h, args) if !a.is_poly_shaped() => {
            SizeExpr::Ext(h.clone(), args.iter().map(canon).collect())
        }
        _ => match to_poly(a) {
            PolyValue::Infinite => SizeExpr::Infty,
            PolyValue::Finite(p) => from_poly(&p),
        },
    }
}

/// `b - k` when `b` is `s^k c` up to canonical form (`∞ - k = ∞`).
pub fn size_minus(b: &SizeExpr, k: usize) -> Option<SizeExpr> {
    match to_poly(&canon(b)) {
        PolyValue::Infinite => Some(SizeExpr::Infty),
        PolyValue::Finite(p) if p.constant_term() >= k as i128 => {
            Some(canon(&from_poly(&p.sub(&Poly::constant(k as i128)))))
        }
        PolyValue::Finite(_) => None,
    }
}

/// Decides `a ≤ b`.
pub fn size_leq(a: &SizeExpr, b: &SizeExpr) -> bool {
    leq_canon(&canon(a), &canon(b))
}

/// Strict part: `a ≤ b` and not `b ≤ a`.
pub fn size_lt(a: &SizeExpr, b: &SizeExpr) -> bool {
    let (a, b) = (canon(a), canon(b));
    leq_canon(&a, &b) && !leq_canon(&b, &a)
}

/// Mutual `≤`.
pub fn size_equiv(a: &SizeExpr, b: &SizeExpr) -> bool {
    let (a, b) = (canon(a), canon(b));
    a == b || (leq_canon(&a, &b) && leq_canon(&b, &a))
}

fn leq_canon(a: &SizeExpr, b: &SizeExpr) -> bool {
    if a == b || b.is_infty() {
        return true;
    }
    if a.is_infty() {
        return false;
    }
    if let SizeExpr::Ext(h, xs) = a {
        if &**h == MAX {
            return xs.iter().all(|x| leq_canon(x, b));
        }
    }
    if let SizeExpr::Ext(h, ys) = b {
        if &**h == MAX && ys.iter().any(|y| leq_canon(a, y)) {
            return true;
        }
    }
    match (to_poly(a), to_poly(b)) {
        (PolyValue::Finite(p), PolyValue::Finite(q)) if q.sub(&p).all_coefficients_nonneg() => return true,
        (_, PolyValue::Infinite) => return true,
        (PolyValue::Infinite, _) => return false,
        _ => {}
    }
    // Polynomials are monotone in their atoms, so a `max` nested inside
    // one can be split: `p[max(x⃗)] = max_i p[x_i]`.
    if let Some(m @ SizeExpr::Ext(_, xs)) = nested_max(a) {
        return xs.iter().all(|x| leq_canon(&canon(&replace(a, m, x)), b));
    }
    if let Some(m @ SizeExpr::Ext(_, ys)) = nested_max(b) {
        return ys.iter().any(|y| leq_canon(a, &canon(&replace(b, m, y))));
    }
    false
}

/// A `max` occurring strictly below successors, sums and products.
fn nested_max(a: &SizeExpr) -> Option<&SizeExpr> {
    match a {
        SizeExpr::Succ(x) => find_max(x),
        SizeExpr::Ext(h, xs) if &**h == PLUS || &**h == TIMES => xs.iter().find_map(find_max),
        _ => None,
    }
}

fn find_max(a: &SizeExpr) -> Option<&SizeExpr> {
    match a {
        SizeExpr::Ext(h, _) if &**h == MAX => Some(a),
        _ => nested_max(a),
    }
}

fn replace(a: &SizeExpr, from: &SizeExpr, to: &SizeExpr) -> SizeExpr {
    if a == from {
        return to.clone();
    }
    match a {
        SizeExpr::Succ(x) => SizeExpr::Succ(Box::new(replace(x, from, to))),
        SizeExpr::Ext(h, xs) => SizeExpr::Ext(h.clone(), xs.iter().map(|x| replace(x, from, to)).collect()),
        _ => a.clone(),
    }
}

/// Sound test for `p > q` over all assignments of integers `≥ 1` to the
/// atoms: shift every atom `v := 1 + w`, expand `p − q`, and require every
/// coefficient to be non-negative with a constant term of at least 1.
pub fn poly_strict_geq(p: &Poly, q: &Poly) -> bool {
    let diff = p.sub(q).shift_atoms_by_one();
    diff.all_coefficients_nonneg() && diff.constant_term() >= 1
}

impl fmt::Display for SizeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeExpr::Var(v) => write!(f, "{v}"),
            SizeExpr::Infty => write!(f, "inf"),
            SizeExpr::Succ(a) => {
                write!(f, "s ")?;
                fmt_size_operand(a, f, 3)
            }
            SizeExpr::Ext(h, args) if args.is_empty() => write!(f, "{h}"),
            SizeExpr::Ext(h, args) if &**h == PLUS || &**h == TIMES => {
                let level = if &**h == PLUS { 1 } else { 2 };
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{h}")?;
                    }
                    fmt_size_operand(arg, f, level + 1)?;
                }
                Ok(())
            }
            SizeExpr::Ext(h, args) => {
                write!(f, "{h}(")?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{arg}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Binding levels: sum 1, product 2, prefix `s` 3.
fn size_level(a: &SizeExpr) -> u8 {
    match a {
        SizeExpr::Ext(h, args) if !args.is_empty() && &**h == PLUS => 1,
        SizeExpr::Ext(h, args) if !args.is_empty() && &**h == TIMES => 2,
        SizeExpr::Succ(_) => 3,
        _ => 4,
    }
}

fn fmt_size_operand(a: &SizeExpr, f: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
    if size_level(a) < min_level {
        write!(f, "({a})")
    } else {
        write!(f, "{a}")
    }
}

/// Whether `a` prints as a single token (usable right after `^`).
pub fn is_atomic(a: &SizeExpr) -> bool {
    match a {
        SizeExpr::Var(_) | SizeExpr::Infty => true,
        SizeExpr::Ext(h, args) => args.is_empty() || !(&**h == PLUS || &**h == TIMES),
        SizeExpr::Succ(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> SizeExpr {
        SizeExpr::var(x)
    }
    fn s(a: SizeExpr) -> SizeExpr {
        SizeExpr::succ(a)
    }

    #[test]
    fn canon_collapses_successor_of_infinity() {
        assert_eq!(canon(&s(s(SizeExpr::Infty))), SizeExpr::Infty);
        assert_eq!(canon(&s(v("a"))), s(v("a")));
        assert_eq!(canon(&SizeExpr::max(v("a"), v("a"))), v("a"));
        assert_eq!(canon(&SizeExpr::max(v("a"), SizeExpr::Infty)), SizeExpr::Infty);
    }

    #[test]
    fn canon_identifies_successor_and_plus_one() {
        let d1 = SizeExpr::plus(v("d"), SizeExpr::num(1));
        assert_eq!(canon(&d1), s(v("d")));
        assert!(size_equiv(&d1, &s(v("d"))));
    }

    #[test]
    fn base_comparisons() {
        assert!(size_leq(&v("a"), &SizeExpr::Infty));
        assert!(size_leq(&v("a"), &v("a")));
        assert!(!size_leq(&s(s(v("a"))), &s(v("a"))));
        assert!(size_leq(&SizeExpr::Infty, &s(SizeExpr::Infty)));
        assert!(size_lt(&v("a"), &s(v("a"))));
        assert!(!size_lt(&SizeExpr::Infty, &SizeExpr::Infty));
        assert!(size_lt(&v("d"), &s(v("d"))));
        assert!(!size_lt(&s(v("d")), &v("d")));
        assert!(!size_leq(&v("a"), &v("b")));
        assert!(!size_leq(&SizeExpr::Infty, &s(v("a"))));
    }

    #[test]
    fn max_comparisons() {
        let m = SizeExpr::max(v("a"), v("b"));
        assert!(size_leq(&v("a"), &m));
        assert!(size_leq(&v("b"), &m));
        assert!(!size_leq(&m, &v("a")));
        assert!(size_leq(&m, &SizeExpr::max(v("b"), v("a"))));
        let d = v("d");
        assert_eq!(canon(&SizeExpr::max(s(d.clone()), d.clone())), s(d.clone()));
        assert!(size_leq(&SizeExpr::max(d.clone(), s(d.clone())), &s(d)));
    }

    #[test]
    fn numerals_and_zero() {
        assert!(size_leq(&SizeExpr::num(0), &v("a")));
        assert!(!size_leq(&SizeExpr::num(1), &v("a")));
        assert_eq!(canon(&s(SizeExpr::num(0))), SizeExpr::num(1));
    }

    #[test]
    fn declared_symbols_are_opaque() {
        let h = |a| SizeExpr::Ext(Name::from("h"), vec![a]);
        assert!(size_leq(&h(v("a")), &h(v("a"))));
        assert!(size_leq(&h(v("a")), &SizeExpr::Infty));
        assert!(!size_leq(&h(v("a")), &h(s(v("a")))));
        assert!(size_leq(&h(v("a")), &s(h(v("a")))));
    }

    #[test]
    fn strict_polynomial_examples() {
        let p = |e: SizeExpr| match to_poly(&e) {
            PolyValue::Finite(p) => p,
            PolyValue::Infinite => panic!("infinite"),
        };
        let a = v("a");
        let one_de = SizeExpr::plus(SizeExpr::plus(SizeExpr::num(1), v("d")), v("e"));
        let one_bc = SizeExpr::plus(SizeExpr::plus(SizeExpr::num(1), v("b")), v("c"));
        let upsilon = SizeExpr::times(SizeExpr::times(a.clone(), one_bc), one_de.clone());
        let beta_side = SizeExpr::times(v("b"), one_de);
        assert!(poly_strict_geq(&p(upsilon.clone()), &p(beta_side)));
        assert!(!poly_strict_geq(&p(upsilon.clone()), &p(upsilon)));
        let two_d = |k| SizeExpr::plus(SizeExpr::times(SizeExpr::num(2), v("d")), SizeExpr::num(k));
        assert!(poly_strict_geq(&p(two_d(3)), &p(two_d(2))));
        assert!(!poly_strict_geq(&p(two_d(2)), &p(two_d(3))));
    }
}
