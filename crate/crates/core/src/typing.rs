//! Bidirectional type checking.
//!
//! Inference is syntax directed; subsumption is only used when an argument
//! meets the domain of a product and in [`Checker::check`]. Symbol types are
//! instantiated at each application by solving their size variables against
//! the inferred argument types ([`infer_size_subst`]).
//!
//! The same checker runs in closure mode for right-hand sides of rules: the
//! variables of the rule environment then behave as symbols typed by their
//! declaration, and every call to a symbol must be smaller than the head of
//! the rule.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::metric::{metric_compare, CallComparison, MetricError};
use crate::position::{occurrences, signed_positions, Monotonicity, Position, Sign, Subject};
use crate::reduction::{FuelExhausted, Rewriter};
use crate::signature::{PrecRel, Signature, SymbolDecl};
use crate::size::{size_leq, size_minus, SizeExpr, SizeSubst};
use crate::subtyping::subtype;
use crate::term::{fresh_name, Env, Sort, Term, TermSubst, ANON};
use crate::Name;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("`{term}` has type `{ty}`, which is not a product")]
    NotAProduct { term: Term, ty: Term },
    #[error("unbound variable `{0}`")]
    UnboundVariable(Name),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(Name),
    #[error("`{0}` is not a constant predicate symbol and cannot carry a size")]
    NotATypeConstant(Name),
    #[error("`{term}` is not a type: its type `{ty}` is not a sort")]
    SortMismatch { term: Term, ty: Term },
    #[error("□ has no type")]
    BoxUntypable,
    #[error("`{term}` has type `{found}`, which is not a subtype of `{expected}`")]
    SubtypeFailure { term: Term, found: Term, expected: Term },
    #[error("call to `{callee}` is not smaller than `{caller}`: {detail}")]
    CallNotSmaller { caller: Name, callee: Name, detail: String },
    #[error("size variable `{var}` of `{symbol}` is required to be both `{first}` and `{second}`")]
    SizeSubstUnsolved { symbol: Name, var: Name, first: SizeExpr, second: SizeExpr },
    #[error("`{callee}` is equivalent to `{caller}` and must get {arity} arguments, not {given}")]
    UnderAppliedCall { caller: Name, callee: Name, arity: usize, given: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

impl TypeError {
    /// Name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            TypeError::NotAProduct { .. } => "NotAProduct",
            TypeError::UnboundVariable(_) => "UnboundVariable",
            TypeError::UnknownSymbol(_) => "UnknownSymbol",
            TypeError::NotATypeConstant(_) => "NotATypeConstant",
            TypeError::SortMismatch { .. } => "SortMismatch",
            TypeError::BoxUntypable => "BoxUntypable",
            TypeError::SubtypeFailure { .. } => "SubtypeFailure",
            TypeError::CallNotSmaller { .. } => "CallNotSmaller",
            TypeError::SizeSubstUnsolved { .. } => "SizeSubstUnsolved",
            TypeError::UnderAppliedCall { .. } => "UnderAppliedCall",
            TypeError::Metric(_) => "MetricShapeMismatch",
        }
    }
}

/// Why a judgement could not be established.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Failure {
    Rejected { error: Box<TypeError>, position: Position },
    Fuel(FuelExhausted),
}

impl From<FuelExhausted> for Failure {
    fn from(f: FuelExhausted) -> Failure {
        Failure::Fuel(f)
    }
}

fn reject<T>(error: TypeError, at: &Position) -> Result<T, Failure> {
    Err(Failure::Rejected { error: Box::new(error), position: at.clone() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypingVerdict {
    Accepted(Term),
    Rejected { error: TypeError, position: Position },
    Inconclusive(FuelExhausted),
}

impl TypingVerdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, TypingVerdict::Accepted(_))
    }

    pub fn accepted(&self) -> Option<&Term> {
        match self {
            TypingVerdict::Accepted(t) => Some(t),
            _ => None,
        }
    }
}

impl From<Result<Term, Failure>> for TypingVerdict {
    fn from(r: Result<Term, Failure>) -> TypingVerdict {
        match r {
            Ok(t) => TypingVerdict::Accepted(t),
            Err(Failure::Rejected { error, position }) => TypingVerdict::Rejected { error: *error, position },
            Err(Failure::Fuel(f)) => TypingVerdict::Inconclusive(f),
        }
    }
}

/// The rule a right-hand side is checked against in closure mode.
#[derive(Clone, Debug, Default)]
pub struct ClosureCtx {
    pub head: Name,
    pub phi: SizeSubst,
    /// Variables of the rule, typed as symbols smaller than `head`.
    pub rule_env: Env,
    /// Size substitutions given explicitly for calls to a symbol.
    pub psi_overrides: BTreeMap<Name, SizeSubst>,
}

/// A call met in closure mode.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CallNote {
    pub callee: String,
    pub position: Position,
    pub psi: BTreeMap<String, String>,
    pub comparison: CallComparison,
}

pub struct Checker<'a> {
    sig: &'a Signature,
    rw: &'a Rewriter,
    fuel: usize,
    closure: Option<ClosureCtx>,
    fresh: usize,
    /// Calls compared against the rule head, in checking order.
    pub calls: Vec<CallNote>,
    /// Size variables set to `∞` because their bindings were incomparable.
    pub fallbacks: Vec<String>,
}

impl<'a> Checker<'a> {
    pub fn new(sig: &'a Signature, rw: &'a Rewriter, fuel: usize) -> Checker<'a> {
        Checker { sig, rw, fuel, closure: None, fresh: 0, calls: Vec::new(), fallbacks: Vec::new() }
    }

    pub fn closure(sig: &'a Signature, rw: &'a Rewriter, fuel: usize, ctx: ClosureCtx) -> Checker<'a> {
        Checker { closure: Some(ctx), ..Checker::new(sig, rw, fuel) }
    }

    /// A size variable that cannot clash with user-written ones.
    pub fn fresh_size_var(&mut self, base: &str) -> Name {
        self.fresh += 1;
        Name::from(format!("{base}~{}", self.fresh).as_str())
    }

    pub fn infer(&mut self, env: &Env, t: &Term) -> TypingVerdict {
        let mut env = env.clone();
        self.infer_at(&mut env, t, &Position::root()).into()
    }

    /// Infers a type for `t` and compares it with `ty`, which must itself be
    /// a well-sorted type (or `□`).
    pub fn check(&mut self, env: &Env, t: &Term, ty: &Term) -> TypingVerdict {
        let mut env = env.clone();
        self.check_top(&mut env, t, ty).into()
    }

    fn check_top(&mut self, env: &mut Env, t: &Term, ty: &Term) -> Result<Term, Failure> {
        let root = Position::root();
        if *ty != Term::Sort(Sort::Box) {
            self.sort_of(env, ty, &root)?;
        }
        let found = self.infer_at(env, t, &root)?;
        self.expect(&found, ty, t, &root)?;
        Ok(found)
    }

    /// Checks every declaration of `env` against the ones before it.
    pub fn check_env(&mut self, env: &Env) -> Result<(), Failure> {
        let mut prefix = Env::new();
        for (i, (x, ty)) in env.entries().iter().enumerate() {
            let at = Position(vec![1; i]);
            self.sort_of(&mut prefix, ty, &at)?;
            prefix.push(x.clone(), ty.clone());
        }
        Ok(())
    }

    fn nf(&self, t: &Term) -> Result<Term, Failure> {
        Ok(self.rw.normalize(t, self.fuel)?)
    }

    fn expect(&self, found: &Term, expected: &Term, term: &Term, at: &Position) -> Result<(), Failure> {
        if subtype(self.rw, found, expected, self.fuel)? {
            Ok(())
        } else {
            reject(
                TypeError::SubtypeFailure {
                    term: term.clone(),
                    found: found.clone(),
                    expected: expected.clone(),
                },
                at,
            )
        }
    }

    /// The sort of a type.
    pub fn sort_of(&mut self, env: &mut Env, ty: &Term, at: &Position) -> Result<Sort, Failure> {
        let k = self.infer_at(env, ty, at)?;
        match self.nf(&k)? {
            Term::Sort(s) => Ok(s),
            other => reject(TypeError::SortMismatch { term: ty.clone(), ty: other }, at),
        }
    }

    fn lookup_var(&self, env: &Env, x: &str) -> Option<Term> {
        env.lookup(x).cloned().or_else(|| {
            self.closure
                .as_ref()
                .and_then(|c| c.rule_env.lookup(x).cloned())
        })
    }

    /// Binder name to use when `x` is pushed on `env`, and the body renamed accordingly.
    fn enter(&self, env: &Env, x: &Name, body: &Term) -> (Name, Term) {
        let taken = |n: &str| {
            env.contains(n) || self.closure.as_ref().is_some_and(|c| c.rule_env.contains(n))
        };
        if &**x == ANON || !taken(x) {
            return (x.clone(), body.clone());
        }
        let y = fresh_name(x, |n| taken(n) || body.has_free(n));
        (y.clone(), body.rename_free(x, &y))
    }

    pub fn infer_at(&mut self, env: &mut Env, t: &Term, at: &Position) -> Result<Term, Failure> {
        match t {
            Term::Sort(Sort::Star) => Ok(Term::Sort(Sort::Box)),
            Term::Sort(Sort::Box) => reject(TypeError::BoxUntypable, at),
            Term::Var(x) => match self.lookup_var(env, x) {
                Some(ty) => Ok(ty),
                None => reject(TypeError::UnboundVariable(x.clone()), at),
            },
            Term::Sized(c, _) => match self.sig.get(c) {
                Some(d) if d.is_type() => Ok(d.ty.clone()),
                Some(_) => reject(TypeError::NotATypeConstant(c.clone()), at),
                None => reject(TypeError::UnknownSymbol(c.clone()), at),
            },
            Term::Symbol(_) | Term::App(..) => self.infer_spine(env, t, at),
            Term::Prod(x, a, b) => {
                self.sort_of(env, a, &at.child(1))?;
                let (x2, b2) = self.enter(env, x, b);
                env.push(x2, (**a).clone());
                let s = self.sort_of(env, &b2, &at.child(2));
                env.pop();
                Ok(Term::Sort(s?))
            }
            Term::Abs(x, a, b) => {
                self.sort_of(env, a, &at.child(1))?;
                let (x2, b2) = self.enter(env, x, b);
                env.push(x2.clone(), (**a).clone());
                let body = self.infer_abs_body(env, &b2, &at.child(2));
                env.pop();
                Ok(Term::prod(x2, (**a).clone(), body?))
            }
        }
    }

    fn infer_abs_body(&mut self, env: &mut Env, b: &Term, at: &Position) -> Result<Term, Failure> {
        let ty = self.infer_at(env, b, at)?;
        if ty == Term::Sort(Sort::Box) {
            return reject(TypeError::BoxUntypable, at);
        }
        self.sort_of(env, &ty, at)?;
        Ok(ty)
    }

    fn infer_spine(&mut self, env: &mut Env, t: &Term, at: &Position) -> Result<Term, Failure> {
        let (head, args) = t.spine();
        let n = args.len();
        let mut head_at = at.clone();
        head_at.0.extend(std::iter::repeat_n(1, n));
        let head_ty = match head {
            Term::Symbol(f) => {
                let Some(decl) = self.sig.get(f) else {
                    return reject(TypeError::UnknownSymbol(f.clone()), &head_at);
                };
                if !decl.is_type() {
                    let decl = decl.clone();
                    return self.infer_symbol_spine(env, t, &decl, &args, at);
                }
                decl.ty.clone()
            }
            _ => self.infer_at(env, head, &head_at)?,
        };
        self.apply_args(env, t, head_ty, &args, 0, at)
    }

    /// Types `args[from..]` against successive products of `ty`.
    fn apply_args(
        &mut self,
        env: &mut Env,
        whole: &Term,
        mut ty: Term,
        args: &[&Term],
        from: usize,
        at: &Position,
    ) -> Result<Term, Failure> {
        let n = args.len();
        for (i, u) in args.iter().enumerate().skip(from) {
            let arg_at = at.spine_arg(n, i + 1);
            let Term::Prod(x, dom, cod) = self.nf(&ty)? else {
                return reject(TypeError::NotAProduct { term: whole.clone(), ty }, at);
            };
            let found = self.infer_at(env, u, &arg_at)?;
            self.expect(&found, &dom, u, &arg_at)?;
            ty = cod.subst1(&x, u);
        }
        Ok(ty)
    }

    fn infer_symbol_spine(
        &mut self,
        env: &mut Env,
        whole: &Term,
        decl: &SymbolDecl,
        args: &[&Term],
        at: &Position,
    ) -> Result<Term, Failure> {
        let n = args.len();
        let k = n.min(decl.arity());
        let (doms, rest) = decl.ty.split_prods(k);
        let mut found = Vec::with_capacity(k);
        for (i, u) in args.iter().take(k).enumerate() {
            let ty = self.infer_at(env, u, &at.spine_arg(n, i + 1))?;
            found.push(ty);
        }
        let psi = self.solve_psi(decl, &doms, &found, &rest, at)?;
        let mut gamma = TermSubst::new();
        for (i, ((y, dom), u)) in doms.iter().zip(args).enumerate() {
            let expected = dom.size_subst(&psi).subst(&gamma);
            self.expect(&found[i], &expected, u, &at.spine_arg(n, i + 1))?;
            if &**y != ANON {
                gamma.insert(y.clone(), (*u).clone());
            }
        }
        self.check_call(decl, n, &psi, at)?;
        let ty = rest.size_subst(&psi).subst(&gamma);
        self.apply_args(env, whole, ty, args, k, at)
    }

    /// Size substitution for a use of `decl`: explicit overrides first, then
    /// inference, then fresh variables for whatever is left.
    fn solve_psi(
        &mut self,
        decl: &SymbolDecl,
        doms: &[(Name, Term)],
        found: &[Term],
        rest: &Term,
        at: &Position,
    ) -> Result<SizeSubst, Failure> {
        let override_psi = self
            .closure
            .as_ref()
            .and_then(|c| c.psi_overrides.get(&decl.name).cloned());
        let mut psi = match override_psi {
            Some(p) => p,
            None => {
                let mut actual = Vec::with_capacity(found.len());
                for ty in found {
                    actual.push(self.nf(ty)?);
                }
                let pats: Vec<Term> = doms.iter().map(|(_, t)| t.clone()).collect();
                match infer_size_subst(self.sig, &decl.ty.size_vars(), &pats, &actual, rest) {
                    Ok(sol) => {
                        for v in sol.fallbacks {
                            self.fallbacks.push(format!("{}: {v} := inf", decl.name));
                        }
                        sol.subst
                    }
                    Err(u) => {
                        return reject(
                            TypeError::SizeSubstUnsolved {
                                symbol: decl.name.clone(),
                                var: u.var,
                                first: u.first,
                                second: u.second,
                            },
                            at,
                        )
                    }
                }
            }
        };
        for v in decl.ty.size_vars() {
            if let std::collections::btree_map::Entry::Vacant(e) = psi.entry(v.clone()) {
                e.insert(SizeExpr::Var(self.fresh_size_var(&v)));
            }
        }
        Ok(psi)
    }

    /// In closure mode, a call to `decl` must be smaller than the rule head.
    fn check_call(&mut self, decl: &SymbolDecl, given: usize, psi: &SizeSubst, at: &Position) -> Result<(), Failure> {
        let Some(ctx) = &self.closure else { return Ok(()) };
        let (head, phi) = (ctx.head.clone(), ctx.phi.clone());
        let callee = decl.name.clone();
        match self.sig.prec(&head, &callee) {
            PrecRel::Greater => {}
            PrecRel::Equiv => {
                if given < decl.arity() {
                    return reject(
                        TypeError::UnderAppliedCall { caller: head, callee, arity: decl.arity(), given },
                        at,
                    );
                }
            }
            PrecRel::Less | PrecRel::Incomparable => {
                return reject(
                    TypeError::CallNotSmaller {
                        caller: head.clone(),
                        callee: callee.clone(),
                        detail: format!("the precedence does not give `{head} > {callee}`"),
                    },
                    at,
                )
            }
        }
        let cmp = match metric_compare(self.sig, &head, &phi, &callee, psi) {
            Ok(c) => c,
            Err(e) => return reject(TypeError::Metric(e), at),
        };
        let holds = cmp.holds;
        let detail = format!("{} is not greater than {}", cmp.caller_value, cmp.callee_value);
        self.calls.push(CallNote {
            callee: callee.to_string(),
            position: at.clone(),
            psi: psi.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            comparison: cmp,
        });
        if holds {
            Ok(())
        } else {
            reject(TypeError::CallNotSmaller { caller: head, callee, detail }, at)
        }
    }
}

/// Result of [`infer_size_subst`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeSolution {
    pub subst: SizeSubst,
    /// Variables whose bindings conflicted and were set to `∞`.
    pub fallbacks: Vec<Name>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unsolved {
    pub var: Name,
    pub first: SizeExpr,
    pub second: SizeExpr,
}

/// Solves the size variables `vars` of a symbol type `(y⃗:U⃗)V` by matching
/// the annotations of each `U_i` against the (normal) actual type `found[i]`.
///
/// Bindings met at positive positions are joined (a later, larger binding
/// raises the first one); bindings at negative positions are met. When two
/// positive bindings are incomparable the variable is set to `∞`, provided
/// it only occurs positively in `V`; otherwise the conflict is reported.
/// Variables without bindings are left out of the result.
pub fn infer_size_subst(
    mon: &dyn Monotonicity,
    vars: &[Name],
    doms: &[Term],
    found: &[Term],
    codomain: &Term,
) -> Result<SizeSolution, Unsolved> {
    let mut bindings: Vec<(Name, SizeExpr, Sign)> = Vec::new();
    for (u, a) in doms.iter().zip(found) {
        match_sizes(u, a, vars, Sign::Pos, &mut bindings);
    }
    let mut subst = SizeSubst::new();
    let mut fallbacks = Vec::new();
    for v in vars {
        let pos: Vec<&SizeExpr> = bindings.iter().filter(|(w, _, s)| w == v && *s == Sign::Pos).map(|(_, e, _)| e).collect();
        let neg: Vec<&SizeExpr> = bindings.iter().filter(|(w, _, s)| w == v && *s == Sign::Neg).map(|(_, e, _)| e).collect();
        let chosen = if !pos.is_empty() {
            match bound(&pos, true) {
                Ok(e) => e,
                Err((first, second)) => {
                    if neg.is_empty() && only_positive(mon, v, codomain) {
                        fallbacks.push(v.clone());
                        SizeExpr::Infty
                    } else {
                        return Err(Unsolved { var: v.clone(), first, second });
                    }
                }
            }
        } else if !neg.is_empty() {
            bound(&neg, false).map_err(|(first, second)| Unsolved { var: v.clone(), first, second })?
        } else {
            continue;
        };
        subst.insert(v.clone(), chosen);
    }
    Ok(SizeSolution { subst, fallbacks })
}

/// Least upper (or greatest lower) bound of a chain, or the first incomparable pair.
fn bound(xs: &[&SizeExpr], upper: bool) -> Result<SizeExpr, (SizeExpr, SizeExpr)> {
    let mut cur = xs[0].clone();
    for b in &xs[1..] {
        let (lo, hi) = if upper { (*b, &cur) } else { (&cur, *b) };
        if size_leq(lo, hi) {
            continue;
        }
        if size_leq(hi, lo) {
            cur = (*b).clone();
            continue;
        }
        return Err((cur, (*b).clone()));
    }
    Ok(cur)
}

fn only_positive(mon: &dyn Monotonicity, v: &Name, t: &Term) -> bool {
    let occ = occurrences(&Subject::SizeVar(v.clone()), t);
    match signed_positions(t, Sign::Pos, mon) {
        Ok(pos) => occ.is_subset(&pos),
        Err(_) => false,
    }
}

fn match_sizes(pattern: &Term, actual: &Term, vars: &[Name], sign: Sign, out: &mut Vec<(Name, SizeExpr, Sign)>) {
    match (pattern, actual) {
        (Term::Prod(_, a, b), Term::Prod(_, c, d)) => {
            match_sizes(a, c, vars, sign.flip(), out);
            match_sizes(b, d, vars, sign, out);
        }
        _ => {
            if let (Term::Sized(c, e), Term::Sized(d, b)) = (pattern.spine().0, actual.spine().0) {
                if c == d {
                    bind_annotation(e, b, vars, sign, out);
                }
            }
        }
    }
}

/// Matches `s^k α` against `b`, binding `α` to `b - k`.
fn bind_annotation(e: &SizeExpr, b: &SizeExpr, vars: &[Name], sign: Sign, out: &mut Vec<(Name, SizeExpr, Sign)>) {
    let mut k = 0;
    let mut e = e;
    while let SizeExpr::Succ(inner) = e {
        k += 1;
        e = inner;
    }
    let SizeExpr::Var(alpha) = e else { return };
    if !vars.contains(alpha) {
        return;
    }
    if let Some(value) = size_minus(b, k) {
        out.push((alpha.clone(), value, sign));
    }
}

/// Diagnostic about a declared symbol type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TypeDiagnostic {
    pub symbol: String,
    pub message: String,
}

/// Every declared type must be closed, well-sorted at the sort of its
/// symbol, and free of size variables when it is a kind.
pub fn check_signature_types(sig: &Signature, rw: &Rewriter, fuel: usize) -> Vec<TypeDiagnostic> {
    let mut out = Vec::new();
    for d in sig.symbols() {
        let mut report = |message: String| out.push(TypeDiagnostic { symbol: d.name.to_string(), message });
        let fv = d.ty.free_vars();
        if !fv.is_empty() {
            let names: Vec<String> = fv.iter().map(|x| x.to_string()).collect();
            report(format!("type has free variables: {}", names.join(", ")));
            continue;
        }
        let sort = d.sort();
        if sort == Sort::Box && !d.ty.size_vars().is_empty() {
            report(format!("kind `{}` mentions size variables", d.ty));
        }
        let mut checker = Checker::new(sig, rw, fuel);
        match checker.sort_of(&mut Env::new(), &d.ty, &Position::root()) {
            Ok(s) if s == sort => {}
            Ok(s) => report(format!("type `{}` has sort {} but the symbol has sort {}", d.ty, Term::Sort(s), Term::Sort(sort))),
            Err(Failure::Rejected { error, position }) => report(format!("ill-typed at {position}: {error}")),
            Err(Failure::Fuel(f)) => report(f.to_string()),
        }
        if d.is_type() && !d.ty.is_kind() {
            report(format!("`{}` is not a kind", d.ty));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::{SymbolDecl, SymbolKind};

    fn nat(a: SizeExpr) -> Term {
        Term::sized("nat", a)
    }

    fn div_sig() -> Signature {
        let a = SizeExpr::var("a");
        let b = SizeExpr::var("b");
        let mut sig = Signature::new();
        let mk = |name: &str, kind, ty| SymbolDecl {
            name: name.into(),
            kind,
            ty,
            monotone: Vec::new(),
            antimonotone: Vec::new(),
            metric: None,
        };
        sig.add_symbol(mk("nat", SymbolKind::Type, Term::star())).unwrap();
        let cons = |acc: Vec<usize>| SymbolKind::Constructor { of: "nat".into(), acc };
        sig.add_symbol(mk("0", cons(vec![]), nat(SizeExpr::num(0)))).unwrap();
        sig.add_symbol(mk("s", cons(vec![1]), Term::arrow(nat(a.clone()), nat(SizeExpr::succ(a.clone()))))).unwrap();
        sig.add_symbol(mk(
            "-",
            SymbolKind::Function,
            Term::arrow(nat(a.clone()), Term::arrow(nat(b.clone()), nat(a))),
        ))
        .unwrap();
        sig
    }

    #[test]
    fn abstraction_over_sized_type() {
        let sig = div_sig();
        let rw = Rewriter::default();
        let a = SizeExpr::var("a");
        let t = Term::abs("x", nat(a.clone()), Term::var("x"));
        let v = Checker::new(&sig, &rw, 100).infer(&Env::new(), &t);
        assert_eq!(v, TypingVerdict::Accepted(Term::prod("x", nat(a.clone()), nat(a))));
    }

    #[test]
    fn successor_increases_size() {
        let sig = div_sig();
        let rw = Rewriter::default();
        let d = SizeExpr::var("d");
        let env = Env::from_entries(vec![("x".into(), nat(d.clone()))]);
        let t = Term::app(Term::sym("s"), Term::var("x"));
        let mut ck = Checker::new(&sig, &rw, 100);
        assert_eq!(ck.infer(&env, &t), TypingVerdict::Accepted(nat(SizeExpr::succ(d.clone()))));
        assert!(ck.check(&env, &t, &nat(SizeExpr::succ_n(d.clone(), 2))).is_accepted());
        let other = nat(SizeExpr::var("e"));
        assert!(matches!(
            ck.check(&env, &Term::var("x"), &other),
            TypingVerdict::Rejected { error: TypeError::SubtypeFailure { .. }, .. }
        ));
        assert!(ck.check(&Env::new(), &Term::sym("0"), &nat(SizeExpr::num(0))).is_accepted());
    }

    #[test]
    fn sorts_are_not_functions() {
        let sig = div_sig();
        let rw = Rewriter::default();
        let v = Checker::new(&sig, &rw, 100).infer(&Env::new(), &Term::app(Term::star(), Term::star()));
        assert!(matches!(v, TypingVerdict::Rejected { error: TypeError::NotAProduct { .. }, .. }));
    }

    #[test]
    fn size_substitution_inference() {
        let sig = div_sig();
        let (d, e) = (SizeExpr::var("d"), SizeExpr::var("e"));
        let vars: Vec<Name> = vec!["a".into(), "b".into()];
        let (doms, cod) = sig.get("-").unwrap().ty.split_prods(2);
        let doms: Vec<Term> = doms.into_iter().map(|(_, t)| t).collect();
        let sol = infer_size_subst(&sig, &vars, &doms, &[nat(d.clone()), nat(e.clone())], &cod).unwrap();
        assert_eq!(sol.subst[&Name::from("a")], d);
        assert_eq!(sol.subst[&Name::from("b")], e);

        let same = vec![nat(SizeExpr::var("a")), nat(SizeExpr::var("a"))];
        let negative_use = Term::arrow(nat(SizeExpr::var("a")), nat(SizeExpr::num(0)));
        let err = infer_size_subst(&sig, &vars[..1], &same, &[nat(d.clone()), nat(e.clone())], &negative_use);
        assert!(err.is_err());
        let ok = infer_size_subst(&sig, &vars[..1], &same, &[nat(d), nat(e)], &nat(SizeExpr::var("a"))).unwrap();
        assert_eq!(ok.subst[&Name::from("a")], SizeExpr::Infty);
        assert_eq!(ok.fallbacks, vec![Name::from("a")]);
    }
}
