//! Global well-formedness of a constructor-based system: constructor and
//! defined-predicate conditions, primitive types, and sanity checks on
//! precedence, monotonicity sets, metrics and rules.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::accessibility::recursive_size_var;
use crate::metric::{placeholder_index, Metric};
use crate::position::{occurrences, signed_positions, Position, PositionSet, Sign, Subject};
use crate::reduction::Rewriter;
use crate::signature::{PrecRel, Signature, SymbolDecl, SymbolKind};
use crate::size::SizeExpr;
use crate::term::{binder_sort, Sort, Term};
use crate::termination::Rule;
use crate::typing::check_signature_types;
use crate::Name;

/// Banners for the assumptions the checker relies on but does not verify.
pub const OBLIGATIONS: [&str; 2] = ["β∪R is confluent", "R preserves typing"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// The symbol, rule (`rule N`) or `precedence` concerned.
    pub subject: String,
    pub condition: String,
    pub message: String,
    pub position: Option<Position>,
}

impl Diagnostic {
    fn new(subject: impl ToString, condition: &str, message: String) -> Diagnostic {
        Diagnostic { subject: subject.to_string(), condition: condition.to_string(), message, position: None }
    }

    fn at(mut self, p: &Position) -> Diagnostic {
        self.position = Some(p.clone());
        self
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} [{}]: {}", self.subject, self.condition, self.message)?;
        if let Some(p) = &self.position {
            write!(f, " (at {p})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SignatureReport {
    pub errors: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
    /// Witnesses found for existential conditions.
    pub notes: Vec<String>,
    pub obligations: Vec<String>,
}

impl SignatureReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

fn mentions_symbol(t: &Term, d: &str) -> PositionSet {
    occurrences(&Subject::Symbol(Name::from(d)), t)
}

fn is_predicate_type(ty: &Term) -> bool {
    binder_sort(ty) == Some(Sort::Box)
}

/// Conditions on constructors and on rules defining predicate symbols.
pub fn check_constructor_conditions(sig: &Signature, rules: &[Rule]) -> SignatureReport {
    let mut rep = SignatureReport::default();
    for f in sig.symbols() {
        if let SymbolKind::Constructor { of, acc } = &f.kind {
            constructor_conditions(sig, f, of, acc, &mut rep);
        }
    }
    for rule in rules {
        if sig.get(&rule.head).is_some_and(|d| !d.is_type() && d.sort() == Sort::Box) {
            defined_predicate_conditions(sig, rule, &mut rep);
        }
    }
    rep
}

fn constructor_conditions(sig: &Signature, f: &SymbolDecl, c: &Name, acc: &[usize], rep: &mut SignatureReport) {
    let (doms, out) = f.ty.split_prods(usize::MAX);
    let (out_head, out_args) = out.spine();
    match out_head {
        Term::Sized(d, _) if d == c => {}
        _ => {
            rep.errors.push(Diagnostic::new(&f.name, "constructor", format!("output type `{out}` is not `{c}^a …`")));
            return;
        }
    }
    let equiv: Vec<&SymbolDecl> = sig.symbols().iter().filter(|d| d.is_type() && sig.prec(&d.name, c) == PrecRel::Equiv).collect();
    let alpha = recursive_size_var(f);
    let recursive = acc.iter().any(|&j| {
        doms.get(j - 1)
            .is_some_and(|(_, u)| equiv.iter().any(|d| !mentions_symbol(u, &d.name).is_empty()))
    });
    if recursive {
        let vars = f.ty.size_vars();
        let ok = alpha.as_ref().is_some_and(|a| vars == vec![a.clone()]);
        if !ok {
            rep.errors.push(Diagnostic::new(
                &f.name,
                "recursive annotation",
                format!("a recursive constructor must have type (y⃗:U⃗){c}^(s α) v⃗ with α its only size variable, not `{}`", f.ty),
            ));
        }
    }
    for &j in acc {
        let Some((_, u)) = doms.get(j - 1) else {
            rep.errors.push(Diagnostic::new(&f.name, "accessible arguments", format!("index {j} exceeds the arity {}", doms.len())));
            continue;
        };
        let subject = format!("{} (argument {j})", f.name);
        let pos = match signed_positions(u, Sign::Pos, sig) {
            Ok(p) => p,
            Err(e) => {
                rep.errors.push(Diagnostic::new(&subject, "constructor", e.to_string()));
                continue;
            }
        };
        for d in sig.symbols() {
            let occ = mentions_symbol(u, &d.name);
            if occ.is_empty() {
                continue;
            }
            match sig.prec(&d.name, c) {
                PrecRel::Greater => {
                    for p in &occ {
                        rep.errors.push(
                            Diagnostic::new(&subject, "no greater type", format!("`{}` is greater than `{c}` in the precedence", d.name)).at(p),
                        );
                    }
                }
                PrecRel::Equiv if d.is_type() => {
                    for p in &occ {
                        let shape_ok = match (u.subterm(&p.0), &alpha) {
                            (Some(Term::Sized(_, SizeExpr::Var(b))), Some(a)) => b == a,
                            _ => false,
                        };
                        if !pos.contains(p) || !shape_ok {
                            rep.errors.push(
                                Diagnostic::new(&subject, "positive recursion", format!("`{}` must occur positively as `{}^α`", d.name, d.name)).at(p),
                            );
                        }
                    }
                }
                _ => {}
            }
        }
        if let Some(a) = &alpha {
            for p in occurrences(&Subject::SizeVar(a.clone()), u) {
                let ok = p.0.split_last().is_some_and(|(last, q)| {
                    *last == 0
                        && matches!(u.subterm(q), Some(Term::Sized(d, SizeExpr::Var(b)))
                            if b == a && sig.prec(d, c) == PrecRel::Equiv)
                });
                if !ok {
                    rep.errors.push(
                        Diagnostic::new(&subject, "size variable", format!("`{a}` may only annotate a type equivalent to `{c}`")).at(&p),
                    );
                }
            }
        }
        let bound: Vec<&(Name, Term)> = doms.iter().take(j - 1).collect();
        for x in u.free_vars() {
            let Some((_, xty)) = bound.iter().rev().find(|(y, _)| *y == x) else { continue };
            if !is_predicate_type(xty) {
                continue;
            }
            let witness = out_args.iter().position(|v| matches!(v, Term::Var(y) if *y == x));
            match witness {
                Some(i) => rep.notes.push(format!("{}: ι({x}) = {}", f.name, i + 1)),
                None => rep.errors.push(Diagnostic::new(
                    &subject,
                    "small inductive type",
                    format!("predicate variable `{x}` is not a parameter of the output type"),
                )),
            }
            let occ = occurrences(&Subject::Var(x.clone()), u);
            if !occ.is_subset(&pos) {
                rep.errors.push(Diagnostic::new(&subject, "small inductive type", format!("predicate variable `{x}` occurs negatively")));
            }
        }
    }
}

fn defined_predicate_conditions(sig: &Signature, rule: &Rule, rep: &mut SignatureReport) {
    let subject = format!("rule {}", rule.index);
    let f = &rule.head;
    for g in rule.rhs.symbols() {
        if sig.prec(&g, f) == PrecRel::Greater {
            rep.errors.push(Diagnostic::new(&subject, "defined predicate", format!("`{g}` is greater than `{f}`")));
        }
    }
    let decl = sig.get(f).expect("rule heads are declared");
    for (indices, sign) in [(&decl.monotone, Sign::Pos), (&decl.antimonotone, Sign::Neg)] {
        for &i in indices {
            let Some(li) = rule.args.get(i - 1) else { continue };
            let is_pred_var = matches!(li, Term::Var(x) if rule.env.var_sort(x) == Some(Sort::Box));
            if !is_pred_var {
                rep.errors.push(Diagnostic::new(&subject, "monotone argument", format!("argument {i} must be a predicate variable")));
                continue;
            }
            let Term::Var(x) = li else { unreachable!() };
            let occ = occurrences(&Subject::Var(x.clone()), &rule.rhs);
            match signed_positions(&rule.rhs, sign, sig) {
                Ok(ps) if occ.is_subset(&ps) => {}
                Ok(_) => rep.errors.push(Diagnostic::new(&subject, "monotone argument", format!("`{x}` occurs with the wrong polarity"))),
                Err(e) => rep.errors.push(Diagnostic::new(&subject, "monotone argument", e.to_string())),
            }
        }
    }
    for x in rule.rhs.free_vars() {
        if rule.env.var_sort(&x) != Some(Sort::Box) {
            continue;
        }
        match rule.args.iter().position(|l| matches!(l, Term::Var(y) if *y == x)) {
            Some(k) => rep.notes.push(format!("{subject}: κ({x}) = {}", k + 1)),
            None => rep.errors.push(Diagnostic::new(&subject, "defined predicate", format!("predicate variable `{x}` is not an argument"))),
        }
    }
}

/// Whether `c` is a primitive type.
pub fn check_primitive(sig: &Signature, c: &str) -> bool {
    check_primitive_in(sig, c, &mut BTreeSet::new())
}

fn check_primitive_in(sig: &Signature, c: &str, visiting: &mut BTreeSet<Name>) -> bool {
    let Some(decl) = sig.get(c).filter(|d| d.is_type()) else { return false };
    if !visiting.insert(decl.name.clone()) {
        return true;
    }
    let (doms, out) = decl.ty.split_prods(usize::MAX);
    if out != Term::star() || doms.iter().any(|(_, v)| is_predicate_type(v)) {
        return false;
    }
    let class: Vec<&SymbolDecl> = sig.symbols().iter().filter(|d| d.is_type() && sig.prec(&d.name, c) == PrecRel::Equiv).collect();
    for d in &class {
        for f in sig.constructors_of(&d.name) {
            if f.acc().is_empty() {
                continue;
            }
            let Some(alpha) = recursive_size_var(f) else { return false };
            let (fdoms, _) = f.ty.split_prods(usize::MAX);
            for &j in f.acc() {
                let Some((_, u)) = fdoms.get(j - 1) else { return false };
                let ok = match u.spine().0 {
                    Term::Sized(e, SizeExpr::Infty) => {
                        sig.prec(e, c) == PrecRel::Less && check_primitive_in(sig, e, visiting)
                    }
                    Term::Sized(e, SizeExpr::Var(b)) => *b == alpha && sig.prec(e, c) == PrecRel::Equiv,
                    _ => false,
                };
                if !ok {
                    return false;
                }
            }
        }
    }
    true
}

/// `|t|_C` together with whether the empty-maximum case was used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimitiveSize {
    pub value: usize,
    /// Some constructor had output `C^{sα}` but no accessible argument mentioning `α`.
    pub empty_max: bool,
}

/// `|t|_C` for a closed term in a primitive type.
pub fn size_in_primitive(sig: &Signature, t: &Term, c: &str) -> usize {
    size_in_primitive_detailed(sig, t, c).value
}

pub fn size_in_primitive_detailed(sig: &Signature, t: &Term, c: &str) -> PrimitiveSize {
    let zero = PrimitiveSize { value: 0, empty_max: false };
    let (head, args) = t.spine();
    let Term::Symbol(f) = head else { return zero };
    let Some(decl) = sig.get(f).filter(|d| matches!(&d.kind, SymbolKind::Constructor { of, .. } if &**of == c)) else {
        return zero;
    };
    let Some(alpha) = recursive_size_var(decl) else { return zero };
    let (doms, _) = decl.ty.split_prods(usize::MAX);
    if doms.len() != args.len() {
        return zero;
    }
    let mut best = 0;
    let mut any = false;
    let mut flagged = false;
    for &j in decl.acc() {
        let u = &doms[j - 1].1;
        if !u.mentions_size_var(&alpha) {
            continue;
        }
        let Term::Sized(cj, SizeExpr::Var(b)) = u.spine().0 else { return zero };
        if *b != alpha {
            return zero;
        }
        let sub = size_in_primitive_detailed(sig, args[j - 1], cj);
        flagged |= sub.empty_max;
        best = best.max(sub.value);
        any = true;
    }
    PrimitiveSize { value: 1 + best, empty_max: flagged || !any }
}

/// Precedence, monotonicity, metric and rule-shape checks.
pub fn check_global(sig: &Signature, rules: &[Rule]) -> SignatureReport {
    let mut rep = SignatureReport { obligations: OBLIGATIONS.iter().map(|s| s.to_string()).collect(), ..Default::default() };
    if let Some((f, g)) = sig.precedence.strict_cycle() {
        rep.errors.push(Diagnostic::new("precedence", "well-founded", format!("`{f} > {g}` lies on a cycle")));
    }
    for chain in sig.precedence.chains() {
        for n in std::iter::once(&chain.first).chain(chain.steps.iter().map(|(_, n)| n)) {
            if sig.get(n).is_none() {
                rep.errors.push(Diagnostic::new("precedence", "declared", format!("unknown symbol `{n}`")));
            }
        }
    }
    for s in sig.size_symbols() {
        mon_checks(&s.name, s.arity, &s.monotone, &s.antimonotone, &mut rep);
    }
    for d in sig.symbols() {
        mon_checks(&d.name, d.arity(), &d.monotone, &d.antimonotone, &mut rep);
        if let Some(m) = &d.metric {
            if m.max_index() > d.arity() {
                rep.errors.push(Diagnostic::new(&d.name, "metric", format!("{m} mentions argument {} of {}", m.max_index(), d.arity())));
            }
            match m {
                Metric::Status(ms) if ms.is_empty() || ms.iter().flatten().any(|&i| i == 0) => {
                    rep.errors.push(Diagnostic::new(&d.name, "metric", "a status is a non-empty sequence of positive indices".into()));
                }
                Metric::Poly(p) => {
                    if let Some(v) = p.vars().iter().find(|v| placeholder_index(v).is_none()) {
                        rep.errors.push(Diagnostic::new(&d.name, "metric", format!("`{v}` is not an argument placeholder #i")));
                    }
                }
                _ => {}
            }
        }
        for &j in d.acc() {
            if j == 0 || j > d.arity() {
                rep.errors.push(Diagnostic::new(&d.name, "accessible arguments", format!("index {j} is not in 1..={}", d.arity())));
            }
        }
    }
    let fns: Vec<&SymbolDecl> = sig.symbols().iter().filter(|d| !d.is_type()).collect();
    for (i, f) in fns.iter().enumerate() {
        for g in &fns[i + 1..] {
            if sig.prec(&f.name, &g.name) == PrecRel::Equiv {
                let shape = |m: Metric| match m {
                    Metric::Status(ms) => Some(ms.len()),
                    Metric::Poly(_) => None,
                };
                if shape(f.effective_metric()) != shape(g.effective_metric()) {
                    rep.errors.push(Diagnostic::new(
                        &f.name,
                        "metric",
                        format!("equivalent symbols `{}` and `{}` have metrics of different shapes", f.name, g.name),
                    ));
                }
            }
        }
    }
    for rule in rules {
        rule_shape_checks(sig, rule, &mut rep);
    }
    rep
}

fn mon_checks(name: &Name, arity: usize, plus: &[usize], minus: &[usize], rep: &mut SignatureReport) {
    if let Some(i) = plus.iter().find(|i| minus.contains(i)) {
        rep.errors.push(Diagnostic::new(name, "monotonicity", format!("argument {i} is both monotone and anti-monotone")));
    }
    if let Some(i) = plus.iter().chain(minus).find(|&&i| i == 0 || i > arity) {
        rep.errors.push(Diagnostic::new(name, "monotonicity", format!("argument {i} is not in 1..={arity}")));
    }
}

fn rule_shape_checks(sig: &Signature, rule: &Rule, rep: &mut SignatureReport) {
    let subject = format!("rule {}", rule.index);
    let Some(decl) = sig.get(&rule.head) else {
        rep.errors.push(Diagnostic::new(&subject, "declared", format!("unknown head `{}`", rule.head)));
        return;
    };
    if decl.is_type() || decl.is_constructor() {
        rep.errors.push(Diagnostic::new(&subject, "head", format!("`{}` is a type or constructor and cannot be defined by rules", rule.head)));
    }
    if rule.args.len() > decl.arity() {
        rep.errors.push(Diagnostic::new(&subject, "arity", format!("{} arguments given, `{}` takes {}", rule.args.len(), rule.head, decl.arity())));
    }
    let lhs = rule.lhs();
    if !lhs.size_vars().is_empty() || !rule.rhs.size_vars().is_empty() {
        rep.errors.push(Diagnostic::new(&subject, "no size variables", "rules may not mention size variables".into()));
    }
    let lhs_vars = lhs.free_vars();
    if let Some(x) = rule.rhs.free_vars().iter().find(|x| !lhs_vars.contains(*x)) {
        rep.errors.push(Diagnostic::new(&subject, "variables", format!("`{x}` occurs on the right but not on the left")));
    }
    if !rule.to_rewrite_rule().is_left_linear() {
        rep.warnings.push(Diagnostic::new(&subject, "left-linearity", "the rule is not left-linear; confluence may fail".into()));
    }
}

/// Every check on the signature and rule shapes.
pub fn analyse(sig: &Signature, rules: &[Rule], rw: &Rewriter, fuel: usize) -> SignatureReport {
    let mut rep = check_global(sig, rules);
    for d in check_signature_types(sig, rw, fuel) {
        rep.errors.push(Diagnostic::new(&d.symbol, "well-sorted type", d.message));
    }
    let cons = check_constructor_conditions(sig, rules);
    rep.errors.extend(cons.errors);
    rep.warnings.extend(cons.warnings);
    rep.notes.extend(cons.notes);
    rep
}
