//! Terms, environments and substitutions.
//!
//! Terms use names at binders. Equality is α-equivalence: bound names are
//! compared by binding depth, and size annotations by their canonical form.
//! Substitution renames binders that would capture a free variable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::size::{canon, is_atomic, SizeExpr, SizeSubst};
use crate::Name;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Star,
    Box,
}

#[derive(Clone, Debug)]
pub enum Term {
    Sort(Sort),
    Var(Name),
    /// An annotated constant predicate symbol `C^a`.
    Sized(Name, SizeExpr),
    Symbol(Name),
    Abs(Name, Arc<Term>, Arc<Term>),
    Prod(Name, Arc<Term>, Arc<Term>),
    App(Arc<Term>, Arc<Term>),
}

/// Binder name used for non-dependent products.
pub const ANON: &str = "_";

pub type TermSubst = BTreeMap<Name, Term>;

impl Term {
    pub fn star() -> Term {
        Term::Sort(Sort::Star)
    }

    pub fn var(x: &str) -> Term {
        Term::Var(Name::from(x))
    }

    pub fn sym(f: &str) -> Term {
        Term::Symbol(Name::from(f))
    }

    pub fn sized(c: &str, a: SizeExpr) -> Term {
        Term::Sized(Name::from(c), a)
    }

    pub fn abs(x: impl Into<Name>, dom: Term, body: Term) -> Term {
        Term::Abs(x.into(), Arc::new(dom), Arc::new(body))
    }

    pub fn prod(x: impl Into<Name>, dom: Term, cod: Term) -> Term {
        Term::Prod(x.into(), Arc::new(dom), Arc::new(cod))
    }

    /// `A ⇒ B`, a product whose bound variable does not occur.
    pub fn arrow(dom: Term, cod: Term) -> Term {
        Term::prod(ANON, dom, cod)
    }

    pub fn app(f: Term, u: Term) -> Term {
        Term::App(Arc::new(f), Arc::new(u))
    }

    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut t = self;
        while let Term::App(f, u) = t {
            args.push(&**u);
            t = f;
        }
        args.reverse();
        (t, args)
    }

    /// Name of the head symbol (annotated or not) of an application spine.
    pub fn head_symbol(&self) -> Option<&Name> {
        match self.spine().0 {
            Term::Symbol(f) | Term::Sized(f, _) => Some(f),
            _ => None,
        }
    }

    /// Leading products `(x1:T1)…(xn:Tn)U`, at most `limit` of them.
    pub fn split_prods(&self, limit: usize) -> (Vec<(Name, Term)>, Term) {
        let mut doms = Vec::new();
        let mut t = self;
        while let Term::Prod(x, a, b) = t {
            if doms.len() == limit {
                break;
            }
            doms.push((x.clone(), (**a).clone()));
            t = b;
        }
        (doms, t.clone())
    }

    /// Number of leading products.
    pub fn arity(&self) -> usize {
        let mut n = 0;
        let mut t = self;
        while let Term::Prod(_, _, b) = t {
            n += 1;
            t = b;
        }
        n
    }

    pub fn is_sort(&self) -> bool {
        matches!(self, Term::Sort(_))
    }

    /// Whether the term is syntactically a kind: `★` or `(x:t)K`.
    pub fn is_kind(&self) -> bool {
        match self {
            Term::Sort(Sort::Star) => true,
            Term::Prod(_, _, b) => b.is_kind(),
            _ => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Sort(_) | Term::Sized(..) | Term::Symbol(_) => {}
            Term::Abs(x, a, b) | Term::Prod(x, a, b) => {
                a.collect_free(bound, out);
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            Term::App(f, u) => {
                f.collect_free(bound, out);
                u.collect_free(bound, out);
            }
        }
    }

    pub fn has_free(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => &**y == x,
            Term::Sort(_) | Term::Sized(..) | Term::Symbol(_) => false,
            Term::Abs(y, a, b) | Term::Prod(y, a, b) => {
                a.has_free(x) || (&**y != x && b.has_free(x))
            }
            Term::App(f, u) => f.has_free(x) || u.has_free(x),
        }
    }

    /// Size variables occurring in annotations, in order of first occurrence.
    pub fn size_vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_size_vars(&mut out);
        out
    }

    fn collect_size_vars(&self, out: &mut Vec<Name>) {
        match self {
            Term::Sized(_, a) => a.collect_vars(out),
            Term::Sort(_) | Term::Var(_) | Term::Symbol(_) => {}
            Term::Abs(_, a, b) | Term::Prod(_, a, b) | Term::App(a, b) => {
                a.collect_size_vars(out);
                b.collect_size_vars(out);
            }
        }
    }

    pub fn mentions_size_var(&self, v: &str) -> bool {
        match self {
            Term::Sized(_, a) => a.mentions(v),
            Term::Sort(_) | Term::Var(_) | Term::Symbol(_) => false,
            Term::Abs(_, a, b) | Term::Prod(_, a, b) | Term::App(a, b) => {
                a.mentions_size_var(v) || b.mentions_size_var(v)
            }
        }
    }

    /// Every symbol name occurring in the term, annotated or not.
    pub fn symbols(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.walk(&mut |t| {
            if let Term::Symbol(f) | Term::Sized(f, _) = t {
                out.insert(f.clone());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn walk(&self, visit: &mut dyn FnMut(&Term)) {
        visit(self);
        match self {
            Term::Sort(_) | Term::Var(_) | Term::Sized(..) | Term::Symbol(_) => {}
            Term::Abs(_, a, b) | Term::Prod(_, a, b) | Term::App(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Sort(_) | Term::Var(_) | Term::Sized(..) | Term::Symbol(_) => 1,
            Term::Abs(_, a, b) | Term::Prod(_, a, b) | Term::App(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Sort(_) | Term::Var(_) | Term::Sized(..) | Term::Symbol(_) => 1,
            Term::Abs(_, a, b) | Term::Prod(_, a, b) | Term::App(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Removes every size annotation: `C^a` becomes the bare symbol `C`.
    pub fn erase(&self) -> Term {
        match self {
            Term::Sized(c, _) => Term::Symbol(c.clone()),
            Term::Sort(_) | Term::Var(_) | Term::Symbol(_) => self.clone(),
            Term::Abs(x, a, b) => Term::abs(x.clone(), a.erase(), b.erase()),
            Term::Prod(x, a, b) => Term::prod(x.clone(), a.erase(), b.erase()),
            Term::App(f, u) => Term::app(f.erase(), u.erase()),
        }
    }

    /// Applies a size substitution to every annotation.
    pub fn size_subst(&self, phi: &SizeSubst) -> Term {
        if phi.is_empty() {
            return self.clone();
        }
        match self {
            Term::Sized(c, a) => Term::Sized(c.clone(), a.subst(phi)),
            Term::Sort(_) | Term::Var(_) | Term::Symbol(_) => self.clone(),
            Term::Abs(x, a, b) => Term::abs(x.clone(), a.size_subst(phi), b.size_subst(phi)),
            Term::Prod(x, a, b) => Term::prod(x.clone(), a.size_subst(phi), b.size_subst(phi)),
            Term::App(f, u) => Term::app(f.size_subst(phi), u.size_subst(phi)),
        }
    }

    /// `self{x ↦ u}`
    pub fn subst1(&self, x: &Name, u: &Term) -> Term {
        let mut theta = TermSubst::new();
        theta.insert(x.clone(), u.clone());
        self.subst(&theta)
    }

    /// Capture-avoiding simultaneous substitution.
    pub fn subst(&self, theta: &TermSubst) -> Term {
        if theta.is_empty() {
            return self.clone();
        }
        match self {
            Term::Var(x) => theta.get(x).cloned().unwrap_or_else(|| self.clone()),
            Term::Sort(_) | Term::Sized(..) | Term::Symbol(_) => self.clone(),
            Term::App(f, u) => Term::app(f.subst(theta), u.subst(theta)),
            Term::Abs(x, a, b) => {
                let (x2, b2) = subst_under_binder(x, b, theta);
                Term::abs(x2, a.subst(theta), b2)
            }
            Term::Prod(x, a, b) => {
                let (x2, b2) = subst_under_binder(x, b, theta);
                Term::prod(x2, a.subst(theta), b2)
            }
        }
    }

    /// Replaces the bound variable of a binder body: `body{x ↦ y}`.
    pub fn rename_free(&self, x: &Name, y: &Name) -> Term {
        self.subst1(x, &Term::Var(y.clone()))
    }

    /// Sub-term at a position of the position grammar, if it is a term
    /// position (not inside a size annotation).
    pub fn subterm(&self, pos: &[u8]) -> Option<&Term> {
        let mut t = self;
        for d in pos {
            t = match (t, d) {
                (Term::Abs(_, a, _) | Term::Prod(_, a, _) | Term::App(a, _), 1) => a,
                (Term::Abs(_, _, b) | Term::Prod(_, _, b) | Term::App(_, b), 2) => b,
                _ => return None,
            };
        }
        Some(t)
    }

    fn alpha(&self, other: &Term, left: &mut Vec<Name>, right: &mut Vec<Name>) -> bool {
        match (self, other) {
            (Term::Sort(s), Term::Sort(t)) => s == t,
            (Term::Var(x), Term::Var(y)) => {
                let i = left.iter().rposition(|n| n == x);
                let j = right.iter().rposition(|n| n == y);
                match (i, j) {
                    (Some(i), Some(j)) => left.len() - i == right.len() - j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Term::Symbol(f), Term::Symbol(g)) => f == g,
            (Term::Sized(c, a), Term::Sized(d, b)) => c == d && (a == b || canon(a) == canon(b)),
            (Term::Abs(x, a, b), Term::Abs(y, c, d)) | (Term::Prod(x, a, b), Term::Prod(y, c, d)) => {
                if !a.alpha(c, left, right) {
                    return false;
                }
                left.push(x.clone());
                right.push(y.clone());
                let r = b.alpha(d, left, right);
                left.pop();
                right.pop();
                r
            }
            (Term::App(f, u), Term::App(g, v)) => f.alpha(g, left, right) && u.alpha(v, left, right),
            _ => false,
        }
    }
}

fn subst_under_binder(x: &Name, body: &Term, theta: &TermSubst) -> (Name, Term) {
    let inner: TermSubst = theta
        .iter()
        .filter(|(y, _)| *y != x && body.has_free(y))
        .map(|(y, t)| (y.clone(), t.clone()))
        .collect();
    if inner.is_empty() {
        return (x.clone(), body.clone());
    }
    let captured = inner.values().any(|t| t.has_free(x));
    if !captured {
        return (x.clone(), body.subst(&inner));
    }
    let fresh = fresh_name(x, |n| {
        body.has_free(n) || inner.keys().any(|k| &**k == n) || inner.values().any(|t| t.has_free(n))
    });
    let mut renamed = inner;
    renamed.insert(x.clone(), Term::Var(fresh.clone()));
    (fresh, body.subst(&renamed))
}

/// First of `x'`, `x''`, … that `taken` rejects.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    let root = if base == ANON { "x" } else { base };
    let mut candidate = format!("{root}'");
    while taken(&candidate) {
        candidate.push('\'');
    }
    Name::from(candidate.as_str())
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        self.alpha(other, &mut Vec::new(), &mut Vec::new())
    }
}

impl Eq for Term {}

/// Syntactic classes of terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Class {
    Kind,
    Predicate,
    Object,
    Other,
}

/// Sorts of symbols and variables, used by [`classify`].
pub trait SortInfo {
    fn symbol_sort(&self, f: &str) -> Option<Sort>;
}

/// Which of the kind/predicate/object classes a term belongs to.
/// `var_sort` gives the sort of free variables.
pub fn classify(t: &Term, sorts: &dyn SortInfo, var_sort: &dyn Fn(&str) -> Option<Sort>) -> Class {
    let mut bound: Vec<(Name, Option<Sort>)> = Vec::new();
    classify_in(t, sorts, var_sort, &mut bound)
}

fn classify_in(
    t: &Term,
    sorts: &dyn SortInfo,
    var_sort: &dyn Fn(&str) -> Option<Sort>,
    bound: &mut Vec<(Name, Option<Sort>)>,
) -> Class {
    let sort_of_var = |x: &Name, bound: &Vec<(Name, Option<Sort>)>| match bound.iter().rev().find(|(y, _)| y == x) {
        Some((_, s)) => *s,
        None => var_sort(x),
    };
    match t {
        Term::Sort(Sort::Star) => Class::Kind,
        Term::Sort(Sort::Box) => Class::Other,
        Term::Var(x) => match sort_of_var(x, bound) {
            Some(Sort::Box) => Class::Predicate,
            Some(Sort::Star) => Class::Object,
            None => Class::Other,
        },
        Term::Sized(c, _) => match sorts.symbol_sort(c) {
            Some(Sort::Box) => Class::Predicate,
            _ => Class::Other,
        },
        Term::Symbol(f) => match sorts.symbol_sort(f) {
            Some(Sort::Box) => Class::Predicate,
            Some(Sort::Star) => Class::Object,
            None => Class::Other,
        },
        Term::Prod(x, a, b) => {
            let s = binder_sort(a);
            bound.push((x.clone(), s));
            let c = classify_in(b, sorts, var_sort, bound);
            bound.pop();
            match c {
                Class::Kind => Class::Kind,
                Class::Predicate => Class::Predicate,
                _ => Class::Other,
            }
        }
        Term::Abs(x, a, b) => {
            let s = binder_sort(a);
            bound.push((x.clone(), s));
            let c = classify_in(b, sorts, var_sort, bound);
            bound.pop();
            match c {
                Class::Predicate => Class::Predicate,
                Class::Object => Class::Object,
                _ => Class::Other,
            }
        }
        Term::App(f, _) => match classify_in(f, sorts, var_sort, bound) {
            Class::Predicate => Class::Predicate,
            Class::Object => Class::Object,
            _ => Class::Other,
        },
    }
}

/// Sort of a variable bound to a type: `□` when the type is a kind.
pub fn binder_sort(ty: &Term) -> Option<Sort> {
    Some(if ty.is_kind() { Sort::Box } else { Sort::Star })
}

/// A typing environment: an ordered sequence of declarations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env {
    entries: Vec<(Name, Term)>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn from_entries(entries: Vec<(Name, Term)>) -> Env {
        Env { entries }
    }

    pub fn push(&mut self, x: Name, ty: Term) {
        self.entries.push((x, ty));
    }

    pub fn pop(&mut self) {
        self.entries.pop();
    }

    pub fn lookup(&self, x: &str) -> Option<&Term> {
        self.entries.iter().rev().find(|(y, _)| &**y == x).map(|(_, t)| t)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.lookup(x).is_some()
    }

    pub fn entries(&self) -> &[(Name, Term)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sort tag of a declared variable.
    pub fn var_sort(&self, x: &str) -> Option<Sort> {
        self.lookup(x).and_then(binder_sort)
    }

    pub fn size_subst(&self, phi: &SizeSubst) -> Env {
        Env {
            entries: self
                .entries
                .iter()
                .map(|(x, t)| (x.clone(), t.size_subst(phi)))
                .collect(),
        }
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, t)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x} : {t}")?;
        }
        Ok(())
    }
}

// Printing levels: 0 binder/arrow, 1 application, 2 atom.
fn level(t: &Term) -> u8 {
    match t {
        Term::Abs(..) | Term::Prod(..) => 0,
        Term::App(..) => 1,
        _ => 2,
    }
}

fn fmt_at(t: &Term, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
    if level(t) < min {
        write!(f, "({t})")
    } else {
        write!(f, "{t}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Sort(Sort::Star) => write!(f, "*"),
            Term::Sort(Sort::Box) => write!(f, "□"),
            Term::Var(x) | Term::Symbol(x) => write!(f, "{x}"),
            Term::Sized(c, a) if a.is_infty() => write!(f, "{c}^inf"),
            Term::Sized(c, a) if is_atomic(a) => write!(f, "{c}^{a}"),
            Term::Sized(c, a) => write!(f, "{c}^({a})"),
            Term::Abs(x, a, b) => write!(f, "[{x}:{a}]{b}"),
            Term::Prod(x, a, b) if !b.has_free(x) => {
                fmt_at(a, f, 1)?;
                write!(f, " => {b}")
            }
            Term::Prod(x, a, b) => write!(f, "({x}:{a}){b}"),
            Term::App(g, u) => {
                fmt_at(g, f, 1)?;
                write!(f, " ")?;
                fmt_at(u, f, 2)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat(a: SizeExpr) -> Term {
        Term::sized("nat", a)
    }

    #[test]
    fn alpha_equivalence_ignores_bound_names() {
        let t = Term::abs("x", nat(SizeExpr::var("a")), Term::var("x"));
        let u = Term::abs("y", nat(SizeExpr::var("a")), Term::var("y"));
        assert_eq!(t, u);
        let v = Term::abs("y", nat(SizeExpr::var("a")), Term::var("x"));
        assert_ne!(t, v);
    }

    #[test]
    fn annotations_compare_by_canonical_form() {
        let a = nat(SizeExpr::succ(SizeExpr::Infty));
        assert_eq!(a, nat(SizeExpr::Infty));
    }

    #[test]
    fn erase_examples() {
        let a = SizeExpr::var("a");
        assert_eq!(nat(SizeExpr::succ(a.clone())).erase(), Term::sym("nat"));
        let t = Term::abs("x", nat(a), Term::var("x"));
        assert_eq!(t.erase(), Term::abs("x", Term::sym("nat"), Term::var("x")));
    }

    #[test]
    fn substitution_avoids_capture() {
        // ([y:T] x y){x ↦ y} must not capture y
        let t = Term::abs("y", Term::star(), Term::app(Term::var("x"), Term::var("y")));
        let r = t.subst1(&Name::from("x"), &Term::var("y"));
        let expect = Term::abs("z", Term::star(), Term::app(Term::var("y"), Term::var("z")));
        assert_eq!(r, expect);
    }

    #[test]
    fn binder_shields_its_variable() {
        let t = Term::abs("x", Term::star(), Term::var("x"));
        assert_eq!(t.subst1(&Name::from("x"), &Term::sym("0")), t);
    }

    #[test]
    fn size_substitution_rewrites_annotations() {
        let mut phi = SizeSubst::new();
        phi.insert(Name::from("a"), SizeExpr::succ(SizeExpr::var("d")));
        assert_eq!(
            nat(SizeExpr::var("a")).size_subst(&phi),
            nat(SizeExpr::succ(SizeExpr::var("d")))
        );
    }

    #[test]
    fn display_uses_arrows_for_non_dependent_products() {
        let t = Term::arrow(nat(SizeExpr::var("a")), nat(SizeExpr::succ(SizeExpr::var("a"))));
        assert_eq!(t.to_string(), "nat^a => nat^(s a)");
        let dep = Term::prod("x", Term::star(), Term::var("x"));
        assert_eq!(dep.to_string(), "(x:*)x");
    }
}
