//! β-reduction and rewriting with first-order rules.

use std::collections::{BTreeSet, HashMap};

use crate::term::{Term, TermSubst};
use crate::Name;

pub const DEFAULT_FUEL: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("reduction did not reach a normal form within {fuel} steps")]
pub struct FuelExhausted {
    pub fuel: usize,
}

/// `head args → rhs`; free variables of `args` are the pattern variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub head: Name,
    pub args: Vec<Term>,
    pub rhs: Term,
}

impl RewriteRule {
    pub fn lhs(&self) -> Term {
        Term::apps(Term::Symbol(self.head.clone()), self.args.iter().cloned())
    }

    pub fn pattern_vars(&self) -> BTreeSet<Name> {
        self.args.iter().flat_map(Term::free_vars).collect()
    }

    /// Whether no pattern variable occurs twice in the left-hand side.
    pub fn is_left_linear(&self) -> bool {
        let mut seen = BTreeSet::new();
        let mut linear = true;
        for a in &self.args {
            a.walk(&mut |t| {
                if let Term::Var(x) = t {
                    if !seen.insert(x.clone()) {
                        linear = false;
                    }
                }
            });
        }
        linear
    }
}

/// Matches `pattern` against `subject`, extending `theta`. Pattern variables
/// are bound on first sight and compared up to α afterwards; every other
/// node must coincide up to α (size annotations up to canonical form).
pub fn match_pattern(
    pattern: &Term,
    subject: &Term,
    vars: &BTreeSet<Name>,
    theta: &mut TermSubst,
) -> bool {
    match (pattern, subject) {
        (Term::Var(x), _) if vars.contains(x) => match theta.get(x) {
            Some(bound) => bound == subject,
            None => {
                theta.insert(x.clone(), subject.clone());
                true
            }
        },
        (Term::App(p1, p2), Term::App(s1, s2)) => {
            match_pattern(p1, s1, vars, theta) && match_pattern(p2, s2, vars, theta)
        }
        _ => {
            let has_pattern_var = pattern.free_vars().iter().any(|v| vars.contains(v));
            !has_pattern_var && pattern == subject
        }
    }
}

/// `match` on a single pattern: `None` when there is no match.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<TermSubst> {
    let vars = pattern.free_vars();
    let mut theta = TermSubst::new();
    match_pattern(pattern, subject, &vars, &mut theta).then_some(theta)
}

#[derive(Clone, Debug, Default)]
pub struct Rewriter {
    rules: Vec<(RewriteRule, BTreeSet<Name>)>,
    by_head: HashMap<Name, Vec<usize>>,
}

impl Rewriter {
    pub fn new(rules: impl IntoIterator<Item = RewriteRule>) -> Rewriter {
        let mut rw = Rewriter::default();
        for r in rules {
            rw.add(r);
        }
        rw
    }

    pub fn add(&mut self, rule: RewriteRule) {
        self.by_head
            .entry(rule.head.clone())
            .or_default()
            .push(self.rules.len());
        let vars = rule.pattern_vars();
        self.rules.push((rule, vars));
    }

    pub fn rules(&self) -> impl Iterator<Item = &RewriteRule> {
        self.rules.iter().map(|(r, _)| r)
    }

    /// Contracta of the redexes at the root, β first, then rules in order.
    pub fn root_reducts(&self, t: &Term) -> Vec<Term> {
        let mut out = Vec::new();
        if let Term::App(f, u) = t {
            if let Term::Abs(x, _, body) = &**f {
                out.push(body.subst1(x, u));
            }
        }
        if let Some(r) = self.rule_contractum(t, usize::MAX) {
            out.extend(r);
        }
        out
    }

    fn rule_contractum(&self, t: &Term, limit: usize) -> Option<Vec<Term>> {
        let (head, args) = t.spine();
        let Term::Symbol(f) = head else { return None };
        let candidates = self.by_head.get(f)?;
        let mut out = Vec::new();
        for &i in candidates {
            let (rule, vars) = &self.rules[i];
            if rule.args.len() != args.len() {
                continue;
            }
            let mut theta = TermSubst::new();
            if rule
                .args
                .iter()
                .zip(&args)
                .all(|(p, s)| match_pattern(p, s, vars, &mut theta))
            {
                out.push(rule.rhs.subst(&theta));
                if out.len() >= limit {
                    break;
                }
            }
        }
        (!out.is_empty()).then_some(out)
    }

    /// Every one-step reduct of `t`.
    pub fn step(&self, t: &Term) -> Vec<Term> {
        let mut out = self.root_reducts(t);
        match t {
            Term::Sort(_) | Term::Var(_) | Term::Sized(..) | Term::Symbol(_) => {}
            Term::App(f, u) => {
                out.extend(self.step(f).into_iter().map(|f2| Term::app(f2, (**u).clone())));
                out.extend(self.step(u).into_iter().map(|u2| Term::app((**f).clone(), u2)));
            }
            Term::Abs(x, a, b) => {
                out.extend(self.step(a).into_iter().map(|a2| Term::abs(x.clone(), a2, (**b).clone())));
                out.extend(self.step(b).into_iter().map(|b2| Term::abs(x.clone(), (**a).clone(), b2)));
            }
            Term::Prod(x, a, b) => {
                out.extend(self.step(a).into_iter().map(|a2| Term::prod(x.clone(), a2, (**b).clone())));
                out.extend(self.step(b).into_iter().map(|b2| Term::prod(x.clone(), (**a).clone(), b2)));
            }
        }
        out
    }

    /// Contracts the leftmost-outermost redex, if any.
    pub fn step_lo(&self, t: &Term) -> Option<Term> {
        if let Term::App(f, u) = t {
            if let Term::Abs(x, _, body) = &**f {
                return Some(body.subst1(x, u));
            }
        }
        if let Some(mut r) = self.rule_contractum(t, 1) {
            return r.pop();
        }
        match t {
            Term::Sort(_) | Term::Var(_) | Term::Sized(..) | Term::Symbol(_) => None,
            Term::App(f, u) => match self.step_lo(f) {
                Some(f2) => Some(Term::App(std::sync::Arc::new(f2), u.clone())),
                None => self
                    .step_lo(u)
                    .map(|u2| Term::App(f.clone(), std::sync::Arc::new(u2))),
            },
            Term::Abs(x, a, b) => match self.step_lo(a) {
                Some(a2) => Some(Term::Abs(x.clone(), std::sync::Arc::new(a2), b.clone())),
                None => self
                    .step_lo(b)
                    .map(|b2| Term::Abs(x.clone(), a.clone(), std::sync::Arc::new(b2))),
            },
            Term::Prod(x, a, b) => match self.step_lo(a) {
                Some(a2) => Some(Term::Prod(x.clone(), std::sync::Arc::new(a2), b.clone())),
                None => self
                    .step_lo(b)
                    .map(|b2| Term::Prod(x.clone(), a.clone(), std::sync::Arc::new(b2))),
            },
        }
    }

    /// Leftmost-outermost normalization with at most `fuel` contractions.
    pub fn normalize(&self, t: &Term, fuel: usize) -> Result<Term, FuelExhausted> {
        let mut current = t.clone();
        let mut used = 0;
        while let Some(next) = self.step_lo(&current) {
            if used == fuel {
                return Err(FuelExhausted { fuel });
            }
            used += 1;
            current = next;
        }
        Ok(current)
    }

    /// `t ↓ u`, decided by comparing normal forms (complete under confluence).
    pub fn joinable(&self, t: &Term, u: &Term, fuel: usize) -> Result<bool, FuelExhausted> {
        Ok(self.normalize(t, fuel)? == self.normalize(u, fuel)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(f: &str) -> Term {
        Term::sym(f)
    }
    fn app(f: Term, args: Vec<Term>) -> Term {
        Term::apps(f, args)
    }

    fn minus_rules() -> Rewriter {
        let (x, y) = (Term::var("x"), Term::var("y"));
        let s = |t| Term::app(sym("s"), t);
        Rewriter::new([
            RewriteRule { head: "-".into(), args: vec![x.clone(), sym("0")], rhs: x.clone() },
            RewriteRule { head: "-".into(), args: vec![sym("0"), x.clone()], rhs: sym("0") },
            RewriteRule {
                head: "-".into(),
                args: vec![s(x.clone()), s(y.clone())],
                rhs: app(sym("-"), vec![x, y]),
            },
        ])
    }

    #[test]
    fn matching_examples() {
        let theta = match_term(&Term::app(sym("s"), Term::var("x")), &Term::app(sym("s"), sym("0")));
        assert_eq!(theta.unwrap()[&Name::from("x")], sym("0"));
        assert!(match_term(&Term::app(sym("s"), Term::var("x")), &sym("0")).is_none());
    }

    #[test]
    fn beta_step() {
        let id = Term::abs("x", Term::sized("nat", crate::SizeExpr::Infty), Term::var("x"));
        assert_eq!(Rewriter::default().step(&Term::app(id, sym("0"))), vec![sym("0")]);
        assert!(Rewriter::default().step(&sym("0")).is_empty());
    }

    #[test]
    fn minus_normalizes() {
        let rw = minus_rules();
        let one = Term::app(sym("s"), sym("0"));
        let t = app(sym("-"), vec![one.clone(), one]);
        assert!(rw.step(&t).contains(&app(sym("-"), vec![sym("0"), sym("0")])));
        assert_eq!(rw.normalize(&t, 100).unwrap(), sym("0"));
        assert!(rw.joinable(&app(sym("-"), vec![sym("0"), sym("0")]), &sym("0"), 10).unwrap());
    }

    #[test]
    fn self_application_runs_out_of_fuel() {
        let delta = Term::abs("x", Term::star(), Term::app(Term::var("x"), Term::var("x")));
        let omega = Term::app(delta.clone(), delta);
        assert_eq!(Rewriter::default().normalize(&omega, 50), Err(FuelExhausted { fuel: 50 }));
    }
}
