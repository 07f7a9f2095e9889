//! Polynomials with integer coefficients over size atoms.

use std::collections::BTreeMap;
use std::fmt;

use crate::size::SizeExpr;
use crate::Name;

/// A polynomial indeterminate: a size variable, or a size expression that
/// the polynomial reading cannot see through (`max`, declared symbols).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(Name),
    Opaque(SizeExpr),
}

pub type Monomial = BTreeMap<Atom, u32>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Monomial, i128>,
}

impl Poly {
    pub fn constant(c: i128) -> Self {
        let mut p = Poly::default();
        p.add_term(Monomial::new(), c);
        p
    }

    pub fn atom(a: Atom) -> Self {
        let mut m = Monomial::new();
        m.insert(a, 1);
        let mut p = Poly::default();
        p.add_term(m, 1);
        p
    }

    pub fn var(name: &str) -> Self {
        Poly::atom(Atom::Var(Name::from(name)))
    }

    fn add_term(&mut self, m: Monomial, c: i128) {
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(m).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.terms.retain(|_, v| *v != 0);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -*c);
        }
        out
    }

    pub fn scale(&self, k: i128) -> Poly {
        let mut out = Poly::default();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = m1.clone();
                for (a, e) in m2 {
                    *m.entry(a.clone()).or_insert(0) += e;
                }
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &i128)> {
        self.terms.iter()
    }

    pub fn constant_term(&self) -> i128 {
        self.terms.get(&Monomial::new()).copied().unwrap_or(0)
    }

    pub fn as_constant(&self) -> Option<i128> {
        match self.terms.len() {
            0 => Some(0),
            1 => self.terms.get(&Monomial::new()).copied(),
            _ => None,
        }
    }

    /// `Some((x, k))` when the polynomial is `x + k` for one atom `x`, `k ≥ 0`.
    pub fn as_atom_plus_constant(&self) -> Option<(&Atom, i128)> {
        let mut atom = None;
        let mut k = 0;
        for (m, c) in &self.terms {
            if m.is_empty() {
                k = *c;
            } else if m.len() == 1 && *c == 1 && atom.is_none() {
                let (a, e) = m.iter().next().unwrap();
                if *e != 1 {
                    return None;
                }
                atom = Some(a);
            } else {
                return None;
            }
        }
        match atom {
            Some(a) if k >= 0 => Some((a, k)),
            _ => None,
        }
    }

    pub fn all_coefficients_nonneg(&self) -> bool {
        self.terms.values().all(|c| *c >= 0)
    }

    /// Substitutes `x := 1 + x` for every atom `x` and expands.
    pub fn shift_atoms_by_one(&self) -> Poly {
        let mut out = Poly::default();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(*c);
            for (a, e) in m {
                let shifted = Poly::atom(a.clone()).add(&Poly::constant(1));
                for _ in 0..*e {
                    term = term.mul(&shifted);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Evaluates with every atom mapped by `value`.
    pub fn eval(&self, value: &dyn Fn(&Atom) -> i128) -> i128 {
        self.terms
            .iter()
            .map(|(m, c)| c * m.iter().map(|(a, e)| value(a).pow(*e)).product::<i128>())
            .sum()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::size::from_poly(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_expands_binomially() {
        // x^2 at x := 1 + x is 1 + 2x + x^2
        let x = Poly::var("x");
        let p = x.mul(&x).shift_atoms_by_one();
        let expect = Poly::constant(1)
            .add(&x.scale(2))
            .add(&x.mul(&x));
        assert_eq!(p, expect);
    }

    #[test]
    fn cancellation_removes_terms() {
        let x = Poly::var("x");
        assert_eq!(x.sub(&x), Poly::default());
        assert_eq!(x.sub(&x).as_constant(), Some(0));
    }

    #[test]
    fn eval_matches_expansion() {
        let x = Poly::var("x");
        let y = Poly::var("y");
        let p = x.add(&Poly::constant(2)).mul(&y.add(&Poly::constant(1)));
        let v = |a: &Atom| match a {
            Atom::Var(n) if &**n == "x" => 3,
            _ => 5,
        };
        assert_eq!(p.eval(&v), 30);
    }
}
