//! Shared helpers for the integration tests: corpus loading, brute-force
//! oracles and random generators of well-typed terms.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use cacsa_core::signature::{Signature, SymbolKind};
use cacsa_core::syntax::{parse_spec, SpecFile};
use cacsa_core::term::Term;
use cacsa_core::typing::Checker;
use cacsa_core::{Env, Rewriter, SizeExpr};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const CORPUS: [&str; 5] = ["div", "ord", "qs", "if-normalization", "rev"];

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(format!("{name}.cacsa"))
}

pub fn load(name: &str) -> SpecFile {
    let path = corpus_path(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_spec(&text).unwrap_or_else(|e| panic!("{}:{e}", path.display()))
}

// ---------------------------------------------------------------------------
// Base size algebra: α | s a | ∞, kept apart from the library representation.

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    Var(&'static str),
    Succ(Box<Base>),
    Inf,
}

impl Base {
    pub fn succ_n(mut self, k: usize) -> Base {
        for _ in 0..k {
            self = Base::Succ(Box::new(self));
        }
        self
    }

    pub fn depth(&self) -> usize {
        match self {
            Base::Succ(b) => 1 + b.depth(),
            _ => 1,
        }
    }

    pub fn to_size(&self) -> SizeExpr {
        match self {
            Base::Var(v) => SizeExpr::var(v),
            Base::Succ(b) => SizeExpr::succ(b.to_size()),
            Base::Inf => SizeExpr::Infty,
        }
    }

    pub fn subst(&self, phi: &HashMap<&'static str, Base>) -> Base {
        match self {
            Base::Var(v) => phi.get(v).cloned().unwrap_or(Base::Var(v)),
            Base::Succ(b) => Base::Succ(Box::new(b.subst(phi))),
            Base::Inf => Base::Inf,
        }
    }
}

/// Every `s^k x` with `x` among `vars` or `∞` and depth at most `depth`.
pub fn base_expressions(vars: &[&'static str], depth: usize) -> Vec<Base> {
    let mut roots: Vec<Base> = vars.iter().map(|v| Base::Var(v)).collect();
    roots.push(Base::Inf);
    let mut out = Vec::new();
    for k in 0..depth {
        for r in &roots {
            out.push(r.clone().succ_n(k));
        }
    }
    out
}

/// Reflexive-transitive closure, restricted to `exprs`, of `a ≤ s a` and
/// `a ≤ ∞`. `closure[i][j]` holds when `exprs[i] ≤ exprs[j]`.
#[allow(clippy::needless_range_loop)]
pub fn generator_closure(exprs: &[Base]) -> Vec<Vec<bool>> {
    let n = exprs.len();
    let mut le = vec![vec![false; n]; n];
    for i in 0..n {
        le[i][i] = true;
        for j in 0..n {
            if exprs[j] == Base::Succ(Box::new(exprs[i].clone())) || exprs[j] == Base::Inf {
                le[i][j] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if le[i][k] {
                for j in 0..n {
                    if le[k][j] {
                        le[i][j] = true;
                    }
                }
            }
        }
    }
    le
}

// ---------------------------------------------------------------------------
// Declarative subtyping by bounded derivation search.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Star,
    /// Type constant index and annotation index.
    Sized(u8, u8),
    Prod(u32, u32),
    /// `(λy:★.y) T`, a β-redex convertible to `T`.
    Redex(u32),
}

pub struct Universe {
    pub constants: Vec<&'static str>,
    pub annotations: Vec<Base>,
    pub shapes: Vec<Shape>,
    index: HashMap<Shape, u32>,
}

impl Universe {
    /// All types of depth at most `depth` built from `★`, the sized
    /// constants and a non-dependent product.
    pub fn new(constants: &[&'static str], annotations: Vec<Base>, depth: usize) -> Universe {
        Universe::build(constants, annotations, depth, false)
    }

    /// As [`Universe::new`], also wrapping every type of each layer in an
    /// identity β-redex.
    pub fn with_redexes(constants: &[&'static str], annotations: Vec<Base>, depth: usize) -> Universe {
        Universe::build(constants, annotations, depth, true)
    }

    fn build(constants: &[&'static str], annotations: Vec<Base>, depth: usize, redexes: bool) -> Universe {
        let mut u = Universe { constants: constants.to_vec(), annotations, shapes: Vec::new(), index: HashMap::new() };
        u.add(Shape::Star);
        for c in 0..constants.len() {
            for a in 0..u.annotations.len() {
                u.add(Shape::Sized(c as u8, a as u8));
            }
        }
        let mut layer_start = 0;
        for level in 0..depth {
            if level > 0 {
                let prev = u.shapes.len() as u32;
                layer_start = prev;
                for i in 0..prev {
                    for j in 0..prev {
                        u.add(Shape::Prod(i, j));
                    }
                }
            }
            if redexes {
                for i in layer_start..u.shapes.len() as u32 {
                    u.add(Shape::Redex(i));
                }
            }
        }
        u
    }

    fn add(&mut self, s: Shape) {
        if !self.index.contains_key(&s) {
            self.index.insert(s, self.shapes.len() as u32);
            self.shapes.push(s);
        }
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn lookup(&self, s: Shape) -> Option<u32> {
        self.index.get(&s).copied()
    }

    pub fn term(&self, i: u32) -> Term {
        match self.shapes[i as usize] {
            Shape::Star => Term::star(),
            Shape::Sized(c, a) => Term::sized(self.constants[c as usize], self.annotations[a as usize].to_size()),
            Shape::Prod(u, v) => Term::prod("x", self.term(u), self.term(v)),
            Shape::Redex(u) => Term::app(Term::abs("y", Term::star(), Term::var("y")), self.term(u)),
        }
    }

    /// Index of the β-normal form, computed on shapes.
    pub fn normal_form(&self, i: u32) -> u32 {
        match self.shapes[i as usize] {
            Shape::Redex(u) => self.normal_form(u),
            Shape::Prod(a, b) => self.lookup(Shape::Prod(self.normal_form(a), self.normal_form(b))).expect("universe is closed"),
            _ => i,
        }
    }
}

/// Relation as one bit row per type.
pub struct Relation {
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl Relation {
    fn empty(n: usize) -> Relation {
        let words = n.div_ceil(64);
        Relation { words, rows: vec![vec![0; words]; n] }
    }

    pub fn get(&self, i: u32, j: u32) -> bool {
        self.rows[i as usize][j as usize / 64] >> (j % 64) & 1 == 1
    }

    fn set(&mut self, i: u32, j: u32) {
        self.rows[i as usize][j as usize / 64] |= 1 << (j % 64);
    }

    fn members(&self, i: u32) -> impl Iterator<Item = u32> + '_ {
        self.rows[i as usize].iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| (w * 64 + b) as u32)
        })
    }
}

/// Pairs `T ≤ U` of the universe having a derivation of height at most
/// `height` using (refl), (size), (prod), (conv) and (trans), with every
/// intermediate type taken from the universe. Two types are convertible
/// when their shapes have the same β-normal form.
#[allow(clippy::needless_range_loop)]
pub fn declarative_subtyping(u: &Universe, height: usize) -> Relation {
    let n = u.len() as u32;
    let le = generator_closure(&u.annotations);
    let mut axioms = Relation::empty(n as usize);
    for i in 0..n {
        axioms.set(i, i);
        if let Shape::Sized(c, a) = u.shapes[i as usize] {
            for b in 0..u.annotations.len() {
                if le[a as usize][b] {
                    axioms.set(i, u.lookup(Shape::Sized(c, b as u8)).unwrap());
                }
            }
        }
    }
    let prods: Vec<(u32, u32, u32)> = (0..n)
        .filter_map(|i| match u.shapes[i as usize] {
            Shape::Prod(a, b) => Some((i, a, b)),
            _ => None,
        })
        .collect();
    let nf: Vec<u32> = (0..n).map(|i| u.normal_form(i)).collect();
    let mut rel = axioms;
    for _ in 1..height {
        let mut next = Relation { words: rel.words, rows: rel.rows.clone() };
        // (prod): contravariant domain, covariant codomain
        for &(p, a, b) in &prods {
            for &(q, a2, b2) in &prods {
                if rel.get(a2, a) && rel.get(b, b2) {
                    next.set(p, q);
                }
            }
        }
        // (trans)
        for i in 0..n {
            let mids: Vec<u32> = rel.members(i).collect();
            for m in mids {
                for w in 0..rel.words {
                    next.rows[i as usize][w] |= rel.rows[m as usize][w];
                }
            }
        }
        // (conv): replace either side by a convertible type
        let redexes: Vec<u32> = (0..n).filter(|&i| nf[i as usize] != i).collect();
        for &i in &redexes {
            let row = next.rows[i as usize].clone();
            for (w, bits) in row.into_iter().enumerate() {
                next.rows[nf[i as usize] as usize][w] |= bits;
            }
        }
        for &i in &redexes {
            next.rows[i as usize] = next.rows[nf[i as usize] as usize].clone();
        }
        for i in 0..n {
            for &j in &redexes {
                if next.get(i, j) {
                    next.set(i, nf[j as usize]);
                }
            }
            for &j in &redexes {
                if next.get(i, nf[j as usize]) {
                    next.set(i, j);
                }
            }
        }
        if next.rows == rel.rows {
            break;
        }
        rel = next;
    }
    rel
}

// ---------------------------------------------------------------------------
// Well-typed term generation.

/// Generates closed terms from the symbols of a signature, guided by erased
/// types, and keeps those the kernel types.
pub struct TermGen<'a> {
    pub sig: &'a Signature,
    pub rw: &'a Rewriter,
    /// Probability of nesting a β-redex around a generated subterm.
    pub redex_rate: f64,
}

fn erased_codomain(ty: &Term) -> (Vec<Term>, Term) {
    let (doms, out) = ty.split_prods(usize::MAX);
    (doms.into_iter().map(|(_, t)| t).collect(), out.erase())
}

impl TermGen<'_> {
    /// A term whose type erases to `goal`, of depth at most `depth`.
    pub fn term(&self, rng: &mut StdRng, env: &mut Vec<(String, Term)>, goal: &Term, depth: usize) -> Option<Term> {
        let goal = goal.erase();
        if let Term::Prod(_, dom, cod) = &goal {
            let x = format!("v{}", env.len());
            let dom_ty = with_infinite_sizes(self.sig, dom);
            env.push((x.clone(), dom_ty.clone()));
            let body = self.term(rng, env, cod, depth.saturating_sub(1));
            env.pop();
            return Some(Term::abs(x.as_str(), dom_ty, body?));
        }
        let t = self.head_application(rng, env, &goal, depth)?;
        if depth > 1 && rng.gen_bool(self.redex_rate) {
            let ty = with_infinite_sizes(self.sig, &goal);
            let x = format!("v{}", env.len());
            env.push((x.clone(), ty.clone()));
            let body = self.term(rng, env, &goal, depth - 1).unwrap_or_else(|| Term::var(&x));
            env.pop();
            return Some(Term::app(Term::abs(x.as_str(), ty, body), t));
        }
        Some(t)
    }

    fn head_application(&self, rng: &mut StdRng, env: &mut Vec<(String, Term)>, goal: &Term, depth: usize) -> Option<Term> {
        let mut heads: Vec<(Term, Vec<Term>)> = Vec::new();
        for (x, ty) in env.iter() {
            let (doms, out) = erased_codomain(ty);
            if out == *goal && (depth > 1 || doms.is_empty()) {
                heads.push((Term::var(x), doms));
            }
        }
        for d in self.sig.symbols() {
            if d.kind == SymbolKind::Type {
                continue;
            }
            let (doms, out) = erased_codomain(&d.ty);
            if out == *goal && (depth > 1 || doms.is_empty()) {
                heads.push((Term::sym(&d.name), doms));
            }
        }
        heads.shuffle(rng);
        // leaves first when the budget is low
        if depth <= 2 {
            heads.sort_by_key(|(_, doms)| doms.len());
            let min = heads.first()?.1.len();
            heads.retain(|(_, doms)| doms.len() == min);
            heads.shuffle(rng);
        }
        for (head, doms) in heads.into_iter().take(3) {
            let mut args = Vec::new();
            for d in &doms {
                match self.term(rng, env, d, depth - 1) {
                    Some(a) => args.push(a),
                    None => break,
                }
            }
            if args.len() == doms.len() {
                return Some(Term::apps(head, args));
            }
        }
        None
    }

    /// A random closed term of type erasing to `goal` accepted by the kernel.
    pub fn typed(&self, rng: &mut StdRng, goal: &Term, depth: usize, attempts: usize) -> Option<(Term, Term)> {
        for _ in 0..attempts {
            let Some(t) = self.term(rng, &mut Vec::new(), goal, depth) else { continue };
            if t.depth() > depth + 2 {
                continue;
            }
            let mut ck = Checker::new(self.sig, self.rw, 10_000);
            if let Some(ty) = ck.infer(&Env::new(), &t).accepted() {
                return Some((t, ty.clone()));
            }
        }
        None
    }
}

/// Replaces every bare type constant by its `∞`-annotated form.
pub fn with_infinite_sizes(sig: &Signature, t: &Term) -> Term {
    match t {
        Term::Symbol(c) if sig.is_type(c) => Term::sized(c, SizeExpr::Infty),
        Term::Prod(x, a, b) => Term::prod(x.clone(), with_infinite_sizes(sig, a), with_infinite_sizes(sig, b)),
        Term::App(f, u) => Term::app(with_infinite_sizes(sig, f), with_infinite_sizes(sig, u)),
        _ => t.clone(),
    }
}

/// Type constants that are the output of some constructor.
pub fn inhabited_types(sig: &Signature) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    for d in sig.symbols() {
        if let SymbolKind::Constructor { of, .. } = &d.kind {
            let t = Term::sym(of);
            if !out.contains(&t) {
                out.push(t);
            }
        }
    }
    out
}

pub fn random_base(rng: &mut StdRng, vars: &[&'static str], depth: usize) -> Base {
    let root = if rng.gen_bool(0.2) { Base::Inf } else { Base::Var(vars[rng.gen_range(0..vars.len())]) };
    root.succ_n(rng.gen_range(0..depth))
}
