mod common;

use std::collections::BTreeSet;

use cacsa_core::accessibility::{accessible_children, annotation, star_accessible, strong_step, AccessPath, SizedOccurrence};
use cacsa_core::analysis::check_primitive;
use cacsa_core::metric::metric_compare;
use cacsa_core::position::{all_positions, signed_positions};
use cacsa_core::signature::{SymbolDecl, SymbolKind};
use cacsa_core::size::{canon, size_leq};
use cacsa_core::subtyping::subtype;
use cacsa_core::syntax::parse_spec;
use cacsa_core::term::ANON;
use cacsa_core::termination::{check_rule, check_system, rewriter, Rule};
use cacsa_core::typing::Checker;
use cacsa_core::{Env, Name, Rewriter, Sign, Signature, SizeExpr, SizeSubst, Term, TermSubst, DEFAULT_FUEL};
use common::{inhabited_types, load, random_base, Base, TermGen, Universe, CORPUS};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

// ---------------------------------------------------------------------------
// Positions and substitution.

fn position_signature() -> Signature {
    parse_spec(
        "type nat : * type list : nat => *
         constructor 0 : nat^0
         fun f : nat => nat => nat monotone(1) antimonotone(2)
         fun g : nat => nat",
    )
    .unwrap()
    .signature
}

fn size() -> impl Strategy<Value = SizeExpr> {
    let leaf = prop_oneof![prop::sample::select(vec!["a", "b"]).prop_map(SizeExpr::var), Just(SizeExpr::Infty)];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(SizeExpr::succ),
            (inner.clone(), inner).prop_map(|(a, b)| SizeExpr::max(a, b)),
        ]
    })
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::star()),
        prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var),
        prop::sample::select(vec!["0", "f", "g"]).prop_map(Term::sym),
        size().prop_map(|a| Term::sized("nat", a)),
        size().prop_map(|a| Term::sized("list", a)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let name = prop::sample::select(vec!["x", "y", "z"]);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(t, u)| Term::app(t, u)),
            (name.clone(), inner.clone(), inner.clone()).prop_map(|(x, t, u)| Term::abs(x, t, u)),
            (name, inner.clone(), inner).prop_map(|(x, t, u)| Term::prod(x, t, u)),
        ]
    })
}

/// Renames every binder to a name not used anywhere else.
fn rename_binders(t: &Term, counter: &mut usize) -> Term {
    match t {
        Term::Abs(x, a, b) | Term::Prod(x, a, b) => {
            *counter += 1;
            let y = Name::from(format!("fresh{counter}").as_str());
            let a = rename_binders(a, counter);
            let b = rename_binders(&b.rename_free(x, &y), counter);
            match t {
                Term::Abs(..) => Term::abs(y, a, b),
                _ => Term::prod(y, a, b),
            }
        }
        Term::App(f, u) => Term::app(rename_binders(f, counter), rename_binders(u, counter)),
        _ => t.clone(),
    }
}

proptest! {
    #[test]
    fn erasure_positions_are_positions(t in term()) {
        prop_assert!(all_positions(&t.erase()).is_subset(&all_positions(&t)));
    }

    #[test]
    fn signed_positions_are_disjoint(t in term()) {
        let sig = position_signature();
        let pos = signed_positions(&t, Sign::Pos, &sig).unwrap();
        let neg = signed_positions(&t, Sign::Neg, &sig).unwrap();
        prop_assert!(pos.is_disjoint(&neg), "{}: {:?} / {:?}", t, pos, neg);
    }

    #[test]
    fn alpha_equivalent_terms_share_positions(t in term()) {
        let sig = position_signature();
        let u = rename_binders(&t, &mut 0);
        prop_assert_eq!(all_positions(&t), all_positions(&u));
        prop_assert_eq!(signed_positions(&t, Sign::Pos, &sig).unwrap(), signed_positions(&u, Sign::Pos, &sig).unwrap());
        prop_assert_eq!(signed_positions(&t, Sign::Neg, &sig).unwrap(), signed_positions(&u, Sign::Neg, &sig).unwrap());
        prop_assert_eq!(rename_binders(&t.erase(), &mut 0), rename_binders(&u.erase(), &mut 0));
    }

    #[test]
    fn substitutions_compose(t in term(), s in term(), r in term()) {
        // θ = {x ↦ s}, θ' = {y ↦ r} with r closed in x and y
        let r = r.subst(&TermSubst::from([("x".into(), Term::sym("0")), ("y".into(), Term::sym("0"))]));
        let theta = TermSubst::from([("x".into(), s.clone())]);
        let theta2 = TermSubst::from([("y".into(), r.clone())]);
        let composed = TermSubst::from([("x".into(), s.subst(&theta2)), ("y".into(), r)]);
        let lhs = rename_binders(&t.subst(&theta).subst(&theta2), &mut 0);
        let rhs = rename_binders(&t.subst(&composed), &mut 0);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn size_order_is_stable_and_canon_is_equivalent(a in size(), b in size(), c in size(), d in size()) {
        prop_assert!(size_leq(&a, &canon(&a)) && size_leq(&canon(&a), &a));
        let phi: SizeSubst = [("a".into(), c), ("b".into(), d)].into_iter().collect();
        if size_leq(&a, &b) {
            prop_assert!(size_leq(&a.subst(&phi), &b.subst(&phi)));
        }
    }
}

// ---------------------------------------------------------------------------
// Metrics.

#[test]
fn metric_comparison_is_invariant_under_renaming() {
    const FROM: [&str; 3] = ["c", "d", "e"];
    let rename: SizeSubst = FROM.iter().zip(["p", "q", "r"]).map(|(v, w)| ((*v).into(), SizeExpr::var(w))).collect();
    let mut rng = StdRng::seed_from_u64(20);
    for (file, f) in [("div", "/"), ("div", "-"), ("rev", "rev2"), ("rev", "rev"), ("qs", "pivot")] {
        let sig = load(file).signature;
        let vars = sig.get(f).unwrap().ty.size_vars();
        for _ in 0..200 {
            let mut draw = || -> SizeSubst {
                vars.iter().map(|v| (v.clone(), random_base(&mut rng, &FROM, 3).to_size())).collect()
            };
            let (phi, psi) = (draw(), draw());
            let renamed = |s: &SizeSubst| -> SizeSubst { s.iter().map(|(k, v)| (k.clone(), v.subst(&rename))).collect() };
            let before = metric_compare(&sig, f, &phi, f, &psi).unwrap();
            let after = metric_compare(&sig, f, &renamed(&phi), f, &renamed(&psi)).unwrap();
            assert_eq!(before.holds, after.holds, "{f}: {phi:?} vs {psi:?}");
        }
    }
}

// ---------------------------------------------------------------------------
// Reduction.

/// Replaces `∞` annotations by size variables chosen at random.
fn sprinkle_sizes(t: &Term, rng: &mut StdRng) -> Term {
    match t {
        Term::Sized(c, SizeExpr::Infty) if rng.gen_bool(0.7) => {
            Term::sized(c, SizeExpr::var(["a", "b"][rng.gen_range(0..2)]))
        }
        Term::Abs(x, a, b) => Term::abs(x.clone(), sprinkle_sizes(a, rng), sprinkle_sizes(b, rng)),
        Term::Prod(x, a, b) => Term::prod(x.clone(), sprinkle_sizes(a, rng), sprinkle_sizes(b, rng)),
        Term::App(f, u) => Term::app(sprinkle_sizes(f, rng), sprinkle_sizes(u, rng)),
        _ => t.clone(),
    }
}

fn reducible_terms(name: &str, n: usize, seed: u64) -> Vec<Term> {
    let spec = load(name);
    let rw = rewriter(&spec.rules);
    let gen = TermGen { sig: &spec.signature, rw: &rw, redex_rate: 0.3 };
    let goals = inhabited_types(&spec.signature);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let goal = &goals[rng.gen_range(0..goals.len())];
        if let Some(t) = gen.term(&mut rng, &mut Vec::new(), goal, 5) {
            let t = sprinkle_sizes(&t, &mut rng);
            if !rw.step(&t).is_empty() {
                out.push(t);
            }
        }
    }
    out
}

#[test]
fn reduction_is_stable_under_size_substitution() {
    let mut rng = StdRng::seed_from_u64(21);
    for name in ["div", "ord", "qs", "rev"] {
        let rw = rewriter(&load(name).rules);
        for t in reducible_terms(name, 100, 22) {
            let phi: SizeSubst =
                ["a", "b"].iter().map(|v| ((*v).into(), random_base(&mut rng, &["a", "c"], 3).to_size())).collect();
            let reducts: Vec<Term> = rw.step(&t.size_subst(&phi));
            for u in rw.step(&t) {
                assert!(reducts.contains(&u.size_subst(&phi)), "{name}: {t} → {u} lost under {phi:?}");
            }
        }
    }
}

#[test]
fn erasure_commutes_with_reduction() {
    for name in ["div", "ord", "qs", "rev"] {
        let rw = rewriter(&load(name).rules);
        for t in reducible_terms(name, 100, 23) {
            let of_erased: BTreeSet<String> = rw.step(&t.erase()).iter().map(|u| u.erase().to_string()).collect();
            let erased_of: BTreeSet<String> = rw.step(&t).iter().map(|u| u.erase().to_string()).collect();
            assert_eq!(of_erased, erased_of, "{name}: {t}");
        }
    }
}

// ---------------------------------------------------------------------------
// Subtyping.

fn small_universe() -> Universe {
    let alpha = Base::Var("a");
    Universe::new(&["nat", "list"], vec![alpha.clone(), alpha.succ_n(1), Base::Var("b"), Base::Inf], 2)
}

#[test]
fn subtyping_is_reflexive_and_transitive() {
    let u = small_universe();
    let rw = Rewriter::new(Vec::new());
    let terms: Vec<Term> = (0..u.len() as u32).map(|i| u.term(i)).collect();
    let rel: Vec<Vec<bool>> =
        terms.iter().map(|t| terms.iter().map(|v| subtype(&rw, t, v, DEFAULT_FUEL).unwrap()).collect()).collect();
    for i in 0..terms.len() {
        assert!(rel[i][i], "{} ≤ itself", terms[i]);
        for j in (0..terms.len()).filter(|&j| rel[i][j]) {
            for k in (0..terms.len()).filter(|&k| rel[j][k]) {
                assert!(rel[i][k], "{} ≤ {} ≤ {}", terms[i], terms[j], terms[k]);
            }
        }
    }
}

#[test]
fn sorts_are_rigid() {
    let u = small_universe();
    let rw = Rewriter::new(Vec::new());
    let id = |ty: Term, t: Term| Term::app(Term::abs("x", ty, Term::var("x")), t);
    let mut candidates: Vec<Term> = (0..u.len() as u32).map(|i| u.term(i)).collect();
    candidates.extend(candidates.clone().into_iter().map(|t| id(Term::star(), t)));
    candidates.push(Term::Sort(cacsa_core::Sort::Box));
    for t in &candidates {
        for s in [Term::star(), Term::Sort(cacsa_core::Sort::Box)] {
            let related = subtype(&rw, t, &s, DEFAULT_FUEL).unwrap() || subtype(&rw, &s, t, DEFAULT_FUEL).unwrap();
            if related {
                assert_eq!(rw.normalize(t, DEFAULT_FUEL).unwrap(), s, "{t} related to {s}");
            }
        }
    }
}

#[test]
fn subtyping_is_stable_under_size_substitution() {
    let u = small_universe();
    let rw = Rewriter::new(Vec::new());
    let mut rng = StdRng::seed_from_u64(24);
    let mut cases = 0;
    while cases < 2000 {
        let (t, v) = (u.term(rng.gen_range(0..u.len() as u32)), u.term(rng.gen_range(0..u.len() as u32)));
        if !subtype(&rw, &t, &v, DEFAULT_FUEL).unwrap() {
            continue;
        }
        let psi: SizeSubst =
            ["a", "b"].iter().map(|x| ((*x).into(), random_base(&mut rng, &["a", "c"], 3).to_size())).collect();
        assert!(subtype(&rw, &t.size_subst(&psi), &v.size_subst(&psi), DEFAULT_FUEL).unwrap(), "{t} ≤ {v} under {psi:?}");
        cases += 1;
    }
}

// ---------------------------------------------------------------------------
// Typing.

#[test]
fn inferred_types_are_well_sorted_and_deterministic() {
    let mut rng = StdRng::seed_from_u64(25);
    for name in CORPUS {
        let spec = load(name);
        let rw = rewriter(&spec.rules);
        let gen = TermGen { sig: &spec.signature, rw: &rw, redex_rate: 0.2 };
        let mut goals = inhabited_types(&spec.signature);
        goals.extend(spec.signature.symbols().iter().filter(|d| !d.is_type()).map(|d| d.ty.erase()));
        let mut done = 0;
        while done < 100 {
            let goal = &goals[rng.gen_range(0..goals.len())];
            let Some((t, ty)) = gen.typed(&mut rng, goal, 5, 5) else { continue };
            let again = Checker::new(&spec.signature, &rw, DEFAULT_FUEL).infer(&Env::new(), &t);
            assert_eq!(again.accepted(), Some(&ty), "{name}: {t}");
            if ty != Term::Sort(cacsa_core::Sort::Box) {
                let sort = Checker::new(&spec.signature, &rw, DEFAULT_FUEL).infer(&Env::new(), &ty);
                let sort = sort.accepted().unwrap_or_else(|| panic!("{name}: type {ty} of {t} is not typable"));
                assert!(rw.normalize(sort, DEFAULT_FUEL).unwrap().is_sort(), "{name}: {ty} : {sort}");
            }
            done += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Signature analysis.

fn rename_sizes(sig: &Signature, rename: &SizeSubst) -> Signature {
    let mut out = sig.clone();
    for d in sig.symbols() {
        out.replace_symbol(SymbolDecl { ty: d.ty.size_subst(rename), ..d.clone() });
    }
    out
}

#[test]
fn primitivity_is_invariant_under_renaming() {
    let rename: SizeSubst = [("a".into(), SizeExpr::var("p")), ("b".into(), SizeExpr::var("q"))].into_iter().collect();
    for name in CORPUS {
        let sig = load(name).signature;
        let renamed = rename_sizes(&sig, &rename);
        for d in sig.symbols().iter().filter(|d| d.is_type()) {
            assert_eq!(check_primitive(&sig, &d.name), check_primitive(&renamed, &d.name), "{name}: {}", d.name);
        }
    }
}

// ---------------------------------------------------------------------------
// Accessibility.

#[test]
fn accessible_children_are_bounded_by_acc() {
    for name in CORPUS {
        let sig = load(name).signature;
        for d in sig.symbols() {
            let SymbolKind::Constructor { .. } = &d.kind else { continue };
            let (doms, out) = d.ty.split_prods(usize::MAX);
            let args: Vec<Term> = (0..doms.len()).map(|i| Term::var(&format!("x{i}"))).collect();
            let a = SizeExpr::var("e");
            let ty = match out.spine().0 {
                Term::Sized(c, _) => Term::apps(Term::sized(c, SizeExpr::succ(a.clone())), out.spine().1.into_iter().cloned()),
                _ => continue,
            };
            let occ = SizedOccurrence::new(Term::apps(Term::sym(&d.name), args), ty);
            let children = accessible_children(&sig, &occ, &a);
            assert!(children.len() <= d.acc().len(), "{name}: {}", d.name);
            for step in strong_step(&sig, &occ, &a) {
                assert!(children.contains(&step), "{name}: {} strong step not accessible", d.name);
            }
        }
    }
}

/// The head type's size variables not mapped by `φ`, renamed apart.
fn completed_phi(sig: &Signature, rule: &Rule) -> SizeSubst {
    let mut phi = rule.phi.clone();
    for (i, v) in sig.get(&rule.head).unwrap().ty.size_vars().into_iter().enumerate() {
        phi.entry(v.clone()).or_insert_with(|| SizeExpr::var(&format!("{v}~{}", i + 1)));
    }
    phi
}

fn gamma(doms: &[(Name, Term)], rule: &Rule) -> TermSubst {
    doms.iter().zip(&rule.args).filter(|((x, _), _)| &**x != ANON).map(|((x, _), l)| (x.clone(), l.clone())).collect()
}

#[test]
fn accessibility_chains_follow_successor_annotations() {
    let mut chains = 0;
    for name in CORPUS {
        let spec = load(name);
        for rule in &spec.rules {
            let decl = spec.signature.get(&rule.head).unwrap();
            let (doms, _) = decl.ty.split_prods(rule.args.len());
            let (phi, gamma) = (completed_phi(&spec.signature, rule), gamma(&doms, rule));
            for (x, xty) in rule.env.entries() {
                for ((_, t), l) in doms.iter().zip(&rule.args) {
                    let start = SizedOccurrence::new(l.clone(), t.subst(&gamma));
                    let Some(AccessPath::Chain(path)) = star_accessible(&spec.signature, &start, &phi, x, xty) else {
                        continue;
                    };
                    chains += 1;
                    let k = path.len() - 1;
                    let beta = canon(annotation(&path[0].ty).unwrap());
                    let mut base = beta.clone();
                    for _ in 0..k {
                        base = match base {
                            SizeExpr::Succ(b) => *b,
                            other => panic!("{name}: {beta} is not s^{k} of a variable ({other})"),
                        };
                    }
                    assert!(matches!(base, SizeExpr::Var(_)), "{name}: {beta} is not s^{k} of a variable");
                    for w in path[..k].windows(2) {
                        let (b, e) = (annotation(&w[0].ty).unwrap(), annotation(&w[1].ty).unwrap());
                        assert_eq!(canon(b), canon(&SizeExpr::succ(e.clone())), "{name}: {} to {}", w[0].ty, w[1].ty);
                    }
                }
            }
        }
    }
    assert!(chains > 10, "only {chains} chains exercised");
}

// ---------------------------------------------------------------------------
// Termination checking.

#[test]
fn closure_typing_implies_kernel_typing() {
    for name in CORPUS {
        let spec = load(name);
        let rw = rewriter(&spec.rules);
        let report = check_system(&spec.signature, &spec.rules, DEFAULT_FUEL);
        for (rule, r) in spec.rules.iter().zip(&report.rules) {
            if !r.closure.is_accepted() {
                continue;
            }
            let decl = spec.signature.get(&rule.head).unwrap();
            let (doms, out) = decl.ty.split_prods(rule.args.len());
            let expected = out.size_subst(&completed_phi(&spec.signature, rule)).subst(&gamma(&doms, rule));
            let v = Checker::new(&spec.signature, &rw, DEFAULT_FUEL).check(&rule.env, &rule.rhs, &expected);
            assert!(v.is_accepted(), "{name} rule {}: kernel rejects {} : {expected}: {v:?}", rule.index, rule.rhs);
        }
    }
}

fn rename_rule(rule: &Rule, rename: &SizeSubst) -> Rule {
    let env = rule.env.size_subst(rename);
    let phi = rule.phi.iter().map(|(k, v)| (k.clone(), v.subst(rename))).collect();
    let psi = rule
        .psi
        .iter()
        .map(|(f, s)| (f.clone(), s.iter().map(|(k, v)| (k.clone(), v.subst(rename))).collect()))
        .collect();
    Rule { env, phi, psi, args: rule.args.iter().map(|t| t.size_subst(rename)).collect(), rhs: rule.rhs.size_subst(rename), ..rule.clone() }
}

fn verdicts(r: &cacsa_core::termination::RuleReport) -> Vec<(String, bool)> {
    r.conditions().iter().map(|(c, o)| (c.to_string(), o.is_accepted())).collect()
}

#[test]
fn rule_checks_are_invariant_under_size_renaming() {
    let rename: SizeSubst = ["c", "d", "e", "f"].iter().map(|v| ((*v).into(), SizeExpr::var(&format!("{v}{v}")))).collect();
    for name in CORPUS.iter().chain(&["div-broken", "qs-broken", "div-shared-size"]) {
        let spec = load(name);
        let rw = rewriter(&spec.rules);
        for rule in &spec.rules {
            let before = check_rule(&spec.signature, &rw, rule, DEFAULT_FUEL);
            let after = check_rule(&spec.signature, &rw, &rename_rule(rule, &rename), DEFAULT_FUEL);
            assert_eq!(verdicts(&before), verdicts(&after), "{name} rule {}", rule.index);
        }
    }
}

#[test]
fn rejections_survive_unrelated_symbols() {
    for name in ["div-broken", "qs-broken", "div-shared-size"] {
        let spec = load(name);
        let before = check_system(&spec.signature, &spec.rules, DEFAULT_FUEL);
        let mut sig = spec.signature.clone();
        let nat = Term::sized("nat", SizeExpr::Infty);
        sig.add_symbol(SymbolDecl {
            name: "unrelated".into(),
            kind: SymbolKind::Function,
            ty: Term::arrow(nat.clone(), nat),
            monotone: Vec::new(),
            antimonotone: Vec::new(),
            metric: None,
        })
        .unwrap();
        let after = check_system(&sig, &spec.rules, DEFAULT_FUEL);
        let summary = |r: &cacsa_core::termination::SystemReport| -> Vec<_> { r.rules.iter().map(verdicts).collect() };
        assert_eq!(summary(&before), summary(&after), "{name}");
    }
}
