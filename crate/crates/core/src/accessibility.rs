//! Accessibility: which subterms of a left-hand side may be used in the
//! right-hand side, and at which size.
//!
//! `t:T ⊳_a u:U` steps from a constructor application typed `C^{sa} v⃗` to
//! one of its accessible arguments; the strong relation `⊵_a` only follows
//! recursive arguments of finitely branching constructors; `≫_φ` is either
//! the identity modulo a renaming `φ`, or `⊵*` followed by one `⊳_ε`.

use std::fmt;

use crate::position::{occurrences, Subject};
use crate::signature::{Signature, SymbolDecl};
use crate::size::{canon, size_minus, SizeExpr, SizeSubst};
use crate::term::{Term, TermSubst, ANON};
use crate::Name;

/// A term together with a type, `t:T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizedOccurrence {
    pub term: Term,
    pub ty: Term,
}

impl SizedOccurrence {
    pub fn new(term: Term, ty: Term) -> SizedOccurrence {
        SizedOccurrence { term, ty }
    }
}

impl fmt::Display for SizedOccurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {}", self.term, self.ty)
    }
}

/// For `f : (y⃗:U⃗) C^{sα} v⃗`, the variable `α`.
pub fn recursive_size_var(decl: &SymbolDecl) -> Option<Name> {
    let (_, out) = decl.ty.split_prods(usize::MAX);
    match out.spine().0 {
        Term::Sized(_, a) => match canon(a) {
            SizeExpr::Succ(inner) => match *inner {
                SizeExpr::Var(alpha) => Some(alpha),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

/// Every accessible argument either ignores `α` or has type `D^α u⃗`.
pub fn is_finitely_branching(decl: &SymbolDecl) -> bool {
    let Some(alpha) = recursive_size_var(decl) else { return true };
    let (doms, _) = decl.ty.split_prods(usize::MAX);
    decl.acc().iter().all(|&j| {
        let Some((_, u)) = doms.get(j - 1) else { return true };
        !u.mentions_size_var(&alpha)
            || matches!(u.spine().0, Term::Sized(_, SizeExpr::Var(b)) if *b == alpha)
    })
}

/// One `⊳_a` step: the accessible arguments of a constructor application,
/// each paired with its 1-based argument index.
pub fn accessible_children(sig: &Signature, occ: &SizedOccurrence, a: &SizeExpr) -> Vec<(usize, SizedOccurrence)> {
    let (head, args) = occ.term.spine();
    let Term::Symbol(f) = head else { return Vec::new() };
    let Some(decl) = sig.get(f).filter(|d| d.is_constructor()) else { return Vec::new() };
    let Some(alpha) = recursive_size_var(decl) else { return Vec::new() };
    let (doms, out) = decl.ty.split_prods(usize::MAX);
    if doms.len() != args.len() {
        return Vec::new();
    }
    if args
        .iter()
        .any(|u| !occurrences(&Subject::SizeVar(alpha.clone()), u).is_empty())
    {
        return Vec::new();
    }
    let mut gamma = TermSubst::new();
    for ((y, _), u) in doms.iter().zip(&args) {
        if &**y != ANON {
            gamma.insert(y.clone(), (*u).clone());
        }
    }
    let phi: SizeSubst = [(alpha, a.clone())].into_iter().collect();
    let expected = out.subst(&gamma).size_subst(&phi);
    if expected != occ.ty {
        return Vec::new();
    }
    decl.acc()
        .iter()
        .filter_map(|&j| {
            let (_, u) = doms.get(j - 1)?;
            let child = SizedOccurrence::new(args[j - 1].clone(), u.subst(&gamma).size_subst(&phi));
            Some((j, child))
        })
        .collect()
}

/// One `⊵_a` step.
pub fn strong_step(sig: &Signature, occ: &SizedOccurrence, a: &SizeExpr) -> Vec<(usize, SizedOccurrence)> {
    let Some(decl) = occ.term.head_symbol().and_then(|f| sig.get(f)) else { return Vec::new() };
    if !is_finitely_branching(decl) {
        return Vec::new();
    }
    let Some(alpha) = recursive_size_var(decl) else { return Vec::new() };
    let (doms, _) = decl.ty.split_prods(usize::MAX);
    accessible_children(sig, occ, a)
        .into_iter()
        .filter(|(j, _)| doms[j - 1].1.mentions_size_var(&alpha))
        .collect()
}

/// The annotation `b` of a type `C^b t⃗`.
pub fn annotation(ty: &Term) -> Option<&SizeExpr> {
    match ty.spine().0 {
        Term::Sized(_, b) => Some(b),
        _ => None,
    }
}

/// How a variable was reached from a left-hand side argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AccessPath {
    /// `t:Tφ` is the variable itself and `φ` renames the variables of `T`.
    Identity,
    /// Occurrences visited by `⊵*` and the final `⊳_ε`, start first.
    Chain(Vec<SizedOccurrence>),
}

impl fmt::Display for AccessPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AccessPath::Identity => write!(f, "identity"),
            AccessPath::Chain(steps) => {
                let parts: Vec<String> = steps.iter().map(ToString::to_string).collect();
                write!(f, "{}", parts.join(" ▷ "))
            }
        }
    }
}

/// Whether `φ` restricted to the variables of `ty` is an injective renaming.
pub fn is_renaming_on(phi: &SizeSubst, ty: &Term) -> bool {
    let mut images = Vec::new();
    for v in ty.size_vars() {
        let img = phi.get(&v).cloned().unwrap_or(SizeExpr::Var(v));
        match canon(&img) {
            SizeExpr::Var(w) => {
                if images.contains(&w) {
                    return false;
                }
                images.push(w);
            }
            _ => return false,
        }
    }
    true
}

/// Decides `start:T ≫_φ x:X`, where `start.ty` is `T` before applying `φ`.
pub fn star_accessible(
    sig: &Signature,
    start: &SizedOccurrence,
    phi: &SizeSubst,
    x: &Name,
    target_ty: &Term,
) -> Option<AccessPath> {
    let target = SizedOccurrence::new(Term::Var(x.clone()), target_ty.clone());
    let first = SizedOccurrence::new(start.term.clone(), start.ty.size_subst(phi));
    if first == target && is_renaming_on(phi, &start.ty) {
        return Some(AccessPath::Identity);
    }
    let mut frontier = vec![vec![first]];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for chain in frontier {
            let last = chain.last().expect("chains are never empty");
            let Some(pred) = annotation(&last.ty).and_then(|b| size_minus(b, 1)) else { continue };
            if let SizeExpr::Var(_) = canon(&pred) {
                for (_, child) in accessible_children(sig, last, &pred) {
                    if child == target {
                        let mut path = chain.clone();
                        path.push(child);
                        debug_assert!(chain_annotations_agree(&path));
                        return Some(AccessPath::Chain(path));
                    }
                }
            }
            for (_, child) in strong_step(sig, last, &pred) {
                let mut longer = chain.clone();
                longer.push(child);
                next.push(longer);
            }
        }
        frontier = next;
    }
    None
}

/// Each strong step goes from `C^{s b}` to `D^b`.
fn chain_annotations_agree(path: &[SizedOccurrence]) -> bool {
    path[..path.len() - 1].windows(2).all(|w| match (annotation(&w[0].ty), annotation(&w[1].ty)) {
        (Some(b), Some(e)) => canon(b) == canon(&SizeExpr::succ(e.clone())),
        _ => false,
    })
}
