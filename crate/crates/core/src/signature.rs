//! Global declarations: size symbols, typed symbols, constructors and the
//! precedence.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::metric::Metric;
use crate::position::Monotonicity;
use crate::term::{Sort, SortInfo, Term};
use crate::Name;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeSymbolDecl {
    pub name: Name,
    pub arity: usize,
    pub monotone: Vec<usize>,
    pub antimonotone: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    /// Constant predicate symbol; the only symbols carrying size annotations.
    Type,
    /// Constructor of the constant predicate symbol `of`.
    Constructor { of: Name, acc: Vec<usize> },
    /// Any other symbol, possibly defined by rules.
    Function,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolDecl {
    pub name: Name,
    pub kind: SymbolKind,
    pub ty: Term,
    pub monotone: Vec<usize>,
    pub antimonotone: Vec<usize>,
    /// Explicit status or metric; `None` stands for the default status.
    pub metric: Option<Metric>,
}

impl SymbolDecl {
    /// `s_f`: `□` for symbols whose type is a kind.
    pub fn sort(&self) -> Sort {
        if self.ty.is_kind() {
            Sort::Box
        } else {
            Sort::Star
        }
    }

    pub fn arity(&self) -> usize {
        self.ty.arity()
    }

    pub fn is_type(&self) -> bool {
        self.kind == SymbolKind::Type
    }

    pub fn is_constructor(&self) -> bool {
        matches!(self.kind, SymbolKind::Constructor { .. })
    }

    pub fn acc(&self) -> &[usize] {
        match &self.kind {
            SymbolKind::Constructor { acc, .. } => acc,
            _ => &[],
        }
    }

    /// The status or metric in force, defaulting to `lex(mult(1),…,mult(n))`.
    pub fn effective_metric(&self) -> Metric {
        self.metric
            .clone()
            .unwrap_or_else(|| Metric::default_status(self.arity()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecOp {
    Greater,
    Equiv,
}

/// One `prec` line: `f0 op1 f1 op2 f2 …`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecChain {
    pub first: Name,
    pub steps: Vec<(PrecOp, Name)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecRel {
    Greater,
    Less,
    Equiv,
    Incomparable,
}

/// Quasi-ordering on symbol names generated by declared chains.
#[derive(Clone, Debug, Default)]
pub struct Precedence {
    chains: Vec<PrecChain>,
    index: HashMap<Name, usize>,
    geq: Vec<Vec<bool>>,
}

impl PartialEq for Precedence {
    fn eq(&self, other: &Self) -> bool {
        self.chains == other.chains
    }
}

impl Eq for Precedence {}

impl Precedence {
    #[allow(clippy::needless_range_loop)]
    pub fn new(chains: Vec<PrecChain>) -> Precedence {
        let mut index = HashMap::new();
        for c in &chains {
            for n in std::iter::once(&c.first).chain(c.steps.iter().map(|(_, n)| n)) {
                let len = index.len();
                index.entry(n.clone()).or_insert(len);
            }
        }
        let n = index.len();
        let mut geq = vec![vec![false; n]; n];
        for (i, row) in geq.iter_mut().enumerate() {
            row[i] = true;
        }
        for c in &chains {
            let mut prev = index[&c.first];
            for (op, name) in &c.steps {
                let next = index[name];
                geq[prev][next] = true;
                if *op == PrecOp::Equiv {
                    geq[next][prev] = true;
                }
                prev = next;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if geq[i][k] {
                    for j in 0..n {
                        if geq[k][j] {
                            geq[i][j] = true;
                        }
                    }
                }
            }
        }
        Precedence { chains, index, geq }
    }

    pub fn chains(&self) -> &[PrecChain] {
        &self.chains
    }

    pub fn compare(&self, f: &str, g: &str) -> PrecRel {
        if f == g {
            return PrecRel::Equiv;
        }
        let (Some(&i), Some(&j)) = (self.index.get(f), self.index.get(g)) else {
            return PrecRel::Incomparable;
        };
        match (self.geq[i][j], self.geq[j][i]) {
            (true, true) => PrecRel::Equiv,
            (true, false) => PrecRel::Greater,
            (false, true) => PrecRel::Less,
            (false, false) => PrecRel::Incomparable,
        }
    }

    pub fn greater(&self, f: &str, g: &str) -> bool {
        self.compare(f, g) == PrecRel::Greater
    }

    pub fn equiv(&self, f: &str, g: &str) -> bool {
        self.compare(f, g) == PrecRel::Equiv
    }

    /// A declared strict edge `f > g` whose reverse `g ≥ f` also holds.
    pub fn strict_cycle(&self) -> Option<(Name, Name)> {
        for c in &self.chains {
            let mut prev = &c.first;
            for (op, name) in &c.steps {
                if *op == PrecOp::Greater && self.geq[self.index[name]][self.index[prev]] {
                    return Some((prev.clone(), name.clone()));
                }
                prev = name;
            }
        }
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("`{0}` is declared twice")]
    Duplicate(Name),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    size_symbols: BTreeMap<Name, SizeSymbolDecl>,
    symbols: Vec<SymbolDecl>,
    index: HashMap<Name, usize>,
    pub precedence: Precedence,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn declares(&self, name: &str) -> bool {
        self.index.contains_key(name) || self.size_symbols.contains_key(name)
    }

    pub fn add_size_symbol(&mut self, decl: SizeSymbolDecl) -> Result<(), SignatureError> {
        if self.declares(&decl.name) {
            return Err(SignatureError::Duplicate(decl.name));
        }
        self.size_symbols.insert(decl.name.clone(), decl);
        Ok(())
    }

    pub fn add_symbol(&mut self, decl: SymbolDecl) -> Result<(), SignatureError> {
        if self.declares(&decl.name) {
            return Err(SignatureError::Duplicate(decl.name));
        }
        self.index.insert(decl.name.clone(), self.symbols.len());
        self.symbols.push(decl);
        Ok(())
    }

    /// Replaces an existing declaration of the same name.
    pub fn replace_symbol(&mut self, decl: SymbolDecl) {
        match self.index.get(&decl.name) {
            Some(&i) => self.symbols[i] = decl,
            None => {
                self.index.insert(decl.name.clone(), self.symbols.len());
                self.symbols.push(decl);
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<&SymbolDecl> {
        self.index.get(name).map(|&i| &self.symbols[i])
    }

    pub fn size_symbol(&self, name: &str) -> Option<&SizeSymbolDecl> {
        self.size_symbols.get(name)
    }

    pub fn size_symbols(&self) -> impl Iterator<Item = &SizeSymbolDecl> {
        self.size_symbols.values()
    }

    /// Symbols in declaration order.
    pub fn symbols(&self) -> &[SymbolDecl] {
        &self.symbols
    }

    pub fn is_type(&self, name: &str) -> bool {
        self.get(name).is_some_and(SymbolDecl::is_type)
    }

    pub fn constructors_of<'a>(&'a self, c: &'a str) -> impl Iterator<Item = &'a SymbolDecl> + 'a {
        self.symbols
            .iter()
            .filter(move |d| matches!(&d.kind, SymbolKind::Constructor { of, .. } if &**of == c))
    }

    pub fn prec(&self, f: &str, g: &str) -> PrecRel {
        self.precedence.compare(f, g)
    }
}

impl Monotonicity for Signature {
    fn term_mon(&self, f: &str) -> Option<(Vec<usize>, Vec<usize>)> {
        self.get(f).map(|d| (d.monotone.clone(), d.antimonotone.clone()))
    }

    fn size_mon(&self, h: &str) -> Option<(Vec<usize>, Vec<usize>)> {
        self.size_symbol(h)
            .map(|d| (d.monotone.clone(), d.antimonotone.clone()))
    }
}

impl SortInfo for Signature {
    fn symbol_sort(&self, f: &str) -> Option<Sort> {
        self.get(f).map(SymbolDecl::sort)
    }
}

impl fmt::Display for PrecChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.first)?;
        for (op, n) in &self.steps {
            match op {
                PrecOp::Greater => write!(f, " > {n}")?,
                PrecOp::Equiv => write!(f, " ~ {n}")?,
            }
        }
        Ok(())
    }
}
