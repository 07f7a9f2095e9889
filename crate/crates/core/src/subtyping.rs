//! Subtyping: `T ≤ U` iff `T⇓ ≤_s U⇓`, where `≤_s` only uses reflexivity,
//! the size rule `C^a t⃗ ≤ C^b t⃗` (`a ≤ b`) and the product rule.

use crate::reduction::{FuelExhausted, Rewriter};
use crate::size::size_leq;
use crate::term::{fresh_name, Term};

/// Structural subtyping on normal forms.
pub fn sub_s(t: &Term, u: &Term) -> bool {
    match (t, u) {
        (Term::Prod(x, a, b), Term::Prod(y, c, d)) => {
            if !sub_s(c, a) {
                return false;
            }
            let (b2, d2) = align_binders(x, b, y, d);
            sub_s(&b2, &d2)
        }
        _ => {
            if t == u {
                return true;
            }
            let (h1, args1) = t.spine();
            let (h2, args2) = u.spine();
            match (h1, h2) {
                (Term::Sized(c, a), Term::Sized(d, b)) => {
                    c == d
                        && args1.len() == args2.len()
                        && size_leq(a, b)
                        && args1.iter().zip(&args2).all(|(v, w)| v == w)
                }
                _ => false,
            }
        }
    }
}

/// Brings two binder bodies under a common bound name.
pub fn align_binders(x: &crate::Name, b: &Term, y: &crate::Name, d: &Term) -> (Term, Term) {
    if x == y {
        return (b.clone(), d.clone());
    }
    let bx = b.has_free(x);
    let dy = d.has_free(y);
    match (bx, dy) {
        (false, false) => (b.clone(), d.clone()),
        (true, false) if !d.has_free(x) => (b.clone(), d.clone()),
        (false, true) if !b.has_free(y) => (b.clone(), d.clone()),
        _ => {
            let z = fresh_name(x, |n| b.has_free(n) || d.has_free(n));
            (b.rename_free(x, &z), d.rename_free(y, &z))
        }
    }
}

/// `T ≤ U`: normalize both sides, then compare structurally.
pub fn subtype(rw: &Rewriter, t: &Term, u: &Term, fuel: usize) -> Result<bool, FuelExhausted> {
    let tn = rw.normalize(t, fuel)?;
    let un = rw.normalize(u, fuel)?;
    Ok(sub_s(&tn, &un))
}
