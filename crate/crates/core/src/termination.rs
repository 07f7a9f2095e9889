//! The termination criterion: six conditions per rule, checked with the
//! computability closure (the typing kernel in closure mode) and the
//! accessibility relations.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::accessibility::{star_accessible, SizedOccurrence};
use crate::analysis::{analyse, SignatureReport};
use crate::position::{occurrences, signed_positions, Sign, Subject};
use crate::reduction::{FuelExhausted, RewriteRule, Rewriter};
use crate::signature::Signature;
use crate::size::{SizeExpr, SizeSubst};
use crate::term::{Env, Sort, Term, TermSubst, ANON};
use crate::typing::{CallNote, Checker, ClosureCtx, Failure, TypingVerdict};
use crate::Name;

/// `(f l⃗ → r, Γ, φ)`, with optional explicit size substitutions for calls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    /// 1-based position in the rule file.
    pub index: usize,
    pub head: Name,
    pub args: Vec<Term>,
    pub rhs: Term,
    pub env: Env,
    pub phi: SizeSubst,
    pub psi: BTreeMap<Name, SizeSubst>,
}

impl Rule {
    pub fn lhs(&self) -> Term {
        Term::apps(Term::Symbol(self.head.clone()), self.args.iter().cloned())
    }

    pub fn to_rewrite_rule(&self) -> RewriteRule {
        RewriteRule { head: self.head.clone(), args: self.args.clone(), rhs: self.rhs.clone() }
    }
}

/// Builds the rewriter of a rule set.
pub fn rewriter(rules: &[Rule]) -> Rewriter {
    Rewriter::new(rules.iter().map(Rule::to_rewrite_rule))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum Outcome {
    Accepted,
    Rejected {
        /// Short machine-readable reason, such as `CallNotSmaller`.
        kind: String,
        detail: String,
        position: Option<String>,
    },
    Inconclusive {
        detail: String,
    },
}

impl Outcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Outcome::Accepted)
    }

    pub fn is_rejected(&self) -> bool {
        matches!(self, Outcome::Rejected { .. })
    }

    pub fn kind(&self) -> Option<&str> {
        match self {
            Outcome::Rejected { kind, .. } => Some(kind),
            _ => None,
        }
    }

    fn rejected(kind: &str, detail: impl ToString) -> Outcome {
        Outcome::Rejected { kind: kind.to_string(), detail: detail.to_string(), position: None }
    }

    fn fuel(f: FuelExhausted) -> Outcome {
        Outcome::Inconclusive { detail: f.to_string() }
    }

    fn from_failure(f: Failure, context: &str) -> Outcome {
        match f {
            Failure::Rejected { error, position } => Outcome::Rejected {
                kind: error.kind().to_string(),
                detail: format!("{context}{error}"),
                position: Some(position.to_string()),
            },
            Failure::Fuel(f) => Outcome::fuel(f),
        }
    }

    fn from_verdict(v: TypingVerdict, context: &str) -> Outcome {
        match v {
            TypingVerdict::Accepted(_) => Outcome::Accepted,
            TypingVerdict::Rejected { error, position } => Outcome::from_failure(Failure::Rejected { error: Box::new(error), position }, context),
            TypingVerdict::Inconclusive(f) => Outcome::fuel(f),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Accepted => write!(f, "accepted"),
            Outcome::Rejected { detail, position, .. } => {
                write!(f, "rejected: {detail}")?;
                if let Some(p) = position {
                    write!(f, " (at {p})")?;
                }
                Ok(())
            }
            Outcome::Inconclusive { detail } => write!(f, "inconclusive: {detail}"),
        }
    }
}

pub const CONDITIONS: [&str; 6] = ["well-typedness", "linearity", "accessibility", "closure", "positivity", "safeness"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleReport {
    pub index: usize,
    pub head: String,
    pub rule: String,
    pub well_typedness: Outcome,
    pub linearity: Outcome,
    pub accessibility: Outcome,
    pub closure: Outcome,
    pub positivity: Outcome,
    pub safeness: Outcome,
    /// For each variable of the rule, how it was found accessible.
    pub access_paths: Vec<(String, String)>,
    /// Calls compared with the head while checking the right-hand side.
    pub calls: Vec<CallNote>,
    pub notes: Vec<String>,
}

impl RuleReport {
    pub fn conditions(&self) -> [(&'static str, &Outcome); 6] {
        [
            (CONDITIONS[0], &self.well_typedness),
            (CONDITIONS[1], &self.linearity),
            (CONDITIONS[2], &self.accessibility),
            (CONDITIONS[3], &self.closure),
            (CONDITIONS[4], &self.positivity),
            (CONDITIONS[5], &self.safeness),
        ]
    }

    pub fn accepted(&self) -> bool {
        self.conditions().iter().all(|(_, o)| o.is_accepted())
    }
}

fn show_rule(rule: &Rule) -> String {
    format!("{} -> {}", rule.lhs(), rule.rhs)
}

/// Checks the six conditions for one rule.
pub fn check_rule(sig: &Signature, rw: &Rewriter, rule: &Rule, fuel: usize) -> RuleReport {
    let mut report = RuleReport {
        index: rule.index,
        head: rule.head.to_string(),
        rule: show_rule(rule),
        well_typedness: Outcome::Accepted,
        linearity: Outcome::Accepted,
        accessibility: Outcome::Accepted,
        closure: Outcome::Accepted,
        positivity: Outcome::Accepted,
        safeness: Outcome::Accepted,
        access_paths: Vec::new(),
        calls: Vec::new(),
        notes: Vec::new(),
    };
    let Some(decl) = sig.get(&rule.head) else {
        let o = Outcome::rejected("UnknownSymbol", format!("unknown symbol `{}`", rule.head));
        report.well_typedness = o.clone();
        report.accessibility = o.clone();
        report.closure = o.clone();
        report.positivity = o.clone();
        report.safeness = o;
        return report;
    };
    let k = rule.args.len();
    let (doms, out) = decl.ty.split_prods(k);

    // size variables of the head type that φ leaves alone are renamed apart
    // from those of Γ
    let mut phi = rule.phi.clone();
    let mut fresh = 0;
    for v in decl.ty.size_vars() {
        if !phi.contains_key(&v) {
            fresh += 1;
            phi.insert(v.clone(), SizeExpr::Var(Name::from(format!("{v}~{fresh}").as_str())));
        }
    }
    let mut gamma = TermSubst::new();
    for ((x, _), l) in doms.iter().zip(&rule.args) {
        if &**x != ANON {
            gamma.insert(x.clone(), l.clone());
        }
    }
    let ctx = ClosureCtx {
        head: rule.head.clone(),
        phi: phi.clone(),
        rule_env: rule.env.clone(),
        psi_overrides: rule.psi.clone(),
    };

    // well-typedness
    let mut kernel = Checker::new(sig, rw, fuel);
    if let Err(f) = kernel.check_env(&rule.env) {
        report.well_typedness = Outcome::from_failure(f, "environment: ");
    } else {
        for (i, ((_, t), l)) in doms.iter().zip(&rule.args).enumerate() {
            let expected = t.size_subst(&phi).subst(&gamma);
            let mut ck = Checker::closure(sig, rw, fuel, ctx.clone());
            let v = ck.check(&Env::new(), l, &expected);
            if !v.is_accepted() {
                report.well_typedness = Outcome::from_verdict(v, &format!("argument {}: ", i + 1));
                break;
            }
        }
    }

    report.linearity = linearity(&rule.env);

    // accessibility
    'vars: for (x, xty) in rule.env.entries() {
        for (i, ((_, t), l)) in doms.iter().zip(&rule.args).enumerate() {
            let Term::Sized(_, _) = t.spine().0 else { continue };
            if t.spine().1.iter().any(|a| !a.size_vars().is_empty()) {
                continue;
            }
            let start = SizedOccurrence::new(l.clone(), t.subst(&gamma));
            if let Some(path) = star_accessible(sig, &start, &phi, x, xty) {
                report.access_paths.push((x.to_string(), format!("argument {}: {path}", i + 1)));
                continue 'vars;
            }
        }
        report.accessibility = Outcome::rejected("NotAccessible", format!("`{x} : {xty}` is not accessible in any argument"));
        break;
    }

    // computability closure
    let expected = out.size_subst(&phi).subst(&gamma);
    let mut ck = Checker::closure(sig, rw, fuel, ctx);
    let v = ck.check(&Env::new(), &rule.rhs, &expected);
    report.closure = Outcome::from_verdict(v, "");
    report.calls = std::mem::take(&mut ck.calls);
    report.notes.extend(ck.fallbacks.iter().map(|f| format!("size variable set to infinity: {f}")));

    // positivity
    for (_, t) in &doms {
        for alpha in t.size_vars() {
            let occ = occurrences(&Subject::SizeVar(alpha.clone()), &out);
            match signed_positions(&out, Sign::Pos, sig) {
                Ok(pos) if occ.is_subset(&pos) => {}
                Ok(_) => {
                    report.positivity = Outcome::rejected("NotPositive", format!("`{alpha}` occurs negatively in `{out}`"));
                }
                Err(e) => report.positivity = Outcome::rejected("UnknownSymbol", e),
            }
        }
    }

    report.safeness = safeness(&doms, rule);
    report
}

/// Each size variable annotates at most one place in the environment.
fn linearity(env: &Env) -> Outcome {
    let mut seen: BTreeMap<Name, usize> = BTreeMap::new();
    for (_, t) in env.entries() {
        for v in t.size_vars() {
            let n = occurrences(&Subject::SizeVar(v.clone()), t).len();
            *seen.entry(v).or_default() += n;
        }
    }
    match seen.into_iter().find(|(_, n)| *n > 1) {
        Some((v, n)) => Outcome::rejected("NonLinear", format!("size variable `{v}` occurs {n} times in the environment")),
        None => Outcome::Accepted,
    }
}

/// Predicate-sorted arguments are distinct predicate variables of `Γ`.
fn safeness(doms: &[(Name, Term)], rule: &Rule) -> Outcome {
    let mut used: Vec<&Name> = Vec::new();
    for (i, ((_, t), l)) in doms.iter().zip(&rule.args).enumerate() {
        if !t.is_kind() {
            continue;
        }
        match l {
            Term::Var(y) if rule.env.var_sort(y) == Some(Sort::Box) && !used.contains(&y) => used.push(y),
            _ => {
                return Outcome::rejected(
                    "NotInjective",
                    format!("argument {} is predicate-sorted and must be a distinct predicate variable, not `{l}`", i + 1),
                )
            }
        }
    }
    Outcome::Accepted
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SystemReport {
    pub signature: SignatureReport,
    pub rules: Vec<RuleReport>,
}

impl SystemReport {
    pub fn accepted(&self) -> bool {
        self.signature.is_ok() && self.rules.iter().all(RuleReport::accepted)
    }

    pub fn any_inconclusive(&self) -> bool {
        self.rules
            .iter()
            .any(|r| r.conditions().iter().any(|(_, o)| matches!(o, Outcome::Inconclusive { .. })))
    }
}

/// Signature analysis followed by every rule.
pub fn check_system(sig: &Signature, rules: &[Rule], fuel: usize) -> SystemReport {
    let rw = rewriter(rules);
    let signature = analyse(sig, rules, &rw, fuel);
    let reports = rules.iter().map(|r| check_rule(sig, &rw, r, fuel)).collect();
    SystemReport { signature, rules: reports }
}
