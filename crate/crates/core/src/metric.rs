//! Statuses, polynomial metrics and the ordering `>^A` on calls.
//!
//! A call is a symbol together with the size substitution its type is used
//! at. `(f, φ) >^A (g, ψ)` holds when `f >_F g`, or when `f ≃_F g` and the
//! metric of `f` on the argument sizes `a⃗_f φ` strictly dominates the metric
//! of `g` on `a⃗_g ψ`.

use std::fmt;

use serde::Serialize;

use crate::poly::Poly;
use crate::signature::{PrecRel, Signature};
use crate::size::{
    poly_strict_geq, size_equiv, size_lt, to_poly, PolyValue, SizeExpr, SizeSubst,
};
use crate::term::Term;
use crate::Name;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Metric {
    /// Lexicographic sequence of multisets of 1-based argument indices.
    Status(Vec<Vec<usize>>),
    /// Polynomial over placeholders `#1 … #n` standing for argument sizes.
    Poly(SizeExpr),
}

/// Name of the placeholder for the `i`-th argument size in a polynomial metric.
pub fn placeholder(i: usize) -> Name {
    Name::from(format!("#{i}").as_str())
}

pub fn placeholder_index(name: &str) -> Option<usize> {
    name.strip_prefix('#')?.parse().ok()
}

impl Metric {
    pub fn default_status(arity: usize) -> Metric {
        Metric::Status((1..=arity).map(|i| vec![i]).collect())
    }

    /// Largest argument index mentioned.
    pub fn max_index(&self) -> usize {
        match self {
            Metric::Status(ms) => ms.iter().flatten().copied().max().unwrap_or(0),
            Metric::Poly(p) => p
                .vars()
                .iter()
                .filter_map(|v| placeholder_index(v))
                .max()
                .unwrap_or(0),
        }
    }

    /// Shape of the codomain: the lexicographic length, or `None` for polynomials.
    fn shape(&self) -> Option<usize> {
        match self {
            Metric::Status(ms) => Some(ms.len()),
            Metric::Poly(_) => None,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Status(ms) => {
                write!(f, "status lex(")?;
                for (i, m) in ms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    let idx: Vec<String> = m.iter().map(usize::to_string).collect();
                    write!(f, "mult({})", idx.join(", "))?;
                }
                write!(f, ")")
            }
            Metric::Poly(p) => write!(f, "metric {p}"),
        }
    }
}

/// `a⃗_f`: the annotation of each declared argument type `C^a v⃗`, or `∞`.
pub fn argument_sizes(ty: &Term) -> Vec<SizeExpr> {
    let (doms, _) = ty.split_prods(usize::MAX);
    doms.iter()
        .map(|(_, t)| match t.spine().0 {
            Term::Sized(_, a) => a.clone(),
            _ => SizeExpr::Infty,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("equivalent symbols `{0}` and `{1}` have metrics of different shapes")]
    ShapeMismatch(Name, Name),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(Name),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decision {
    Precedence,
    Metric,
}

/// Outcome of comparing a caller `(f, φ)` with a callee `(g, ψ)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CallComparison {
    pub holds: bool,
    pub decided_by: Decision,
    /// The comparison involved an infinite polynomial value.
    pub infinite: bool,
    pub caller_value: String,
    pub callee_value: String,
}

/// Decides `(f, φ) >^A (g, ψ)`.
pub fn metric_compare(
    sig: &Signature,
    f: &str,
    phi: &SizeSubst,
    g: &str,
    psi: &SizeSubst,
) -> Result<CallComparison, MetricError> {
    let fd = sig.get(f).ok_or_else(|| MetricError::UnknownSymbol(Name::from(f)))?;
    let gd = sig.get(g).ok_or_else(|| MetricError::UnknownSymbol(Name::from(g)))?;
    match sig.prec(f, g) {
        PrecRel::Greater => {
            return Ok(CallComparison {
                holds: true,
                decided_by: Decision::Precedence,
                infinite: false,
                caller_value: f.to_string(),
                callee_value: g.to_string(),
            })
        }
        PrecRel::Equiv => {}
        PrecRel::Less | PrecRel::Incomparable => {
            return Ok(CallComparison {
                holds: false,
                decided_by: Decision::Precedence,
                infinite: false,
                caller_value: f.to_string(),
                callee_value: g.to_string(),
            })
        }
    }
    let (mf, mg) = (fd.effective_metric(), gd.effective_metric());
    if mf.shape() != mg.shape() {
        return Err(MetricError::ShapeMismatch(fd.name.clone(), gd.name.clone()));
    }
    let af: Vec<SizeExpr> = argument_sizes(&fd.ty).iter().map(|a| a.subst(phi)).collect();
    let ag: Vec<SizeExpr> = argument_sizes(&gd.ty).iter().map(|a| a.subst(psi)).collect();
    Ok(match (&mf, &mg) {
        (Metric::Status(sf), Metric::Status(sg)) => {
            let vf = status_value(sf, &af);
            let vg = status_value(sg, &ag);
            CallComparison {
                holds: lex_mul_greater(&vf, &vg),
                decided_by: Decision::Metric,
                infinite: false,
                caller_value: show_status_value(&vf),
                callee_value: show_status_value(&vg),
            }
        }
        (Metric::Poly(pf), Metric::Poly(pg)) => {
            let vf = poly_value(pf, &af);
            let vg = poly_value(pg, &ag);
            let show = |v: &PolyValue| match v {
                PolyValue::Finite(p) => p.to_string(),
                PolyValue::Infinite => "inf".to_string(),
            };
            let (holds, infinite) = match (&vf, &vg) {
                (PolyValue::Finite(p), PolyValue::Finite(q)) => (poly_strict_geq(p, q), false),
                (PolyValue::Infinite, PolyValue::Finite(_)) => (true, true),
                _ => (false, true),
            };
            CallComparison {
                holds,
                decided_by: Decision::Metric,
                infinite,
                caller_value: show(&vf),
                callee_value: show(&vg),
            }
        }
        _ => unreachable!("shapes checked above"),
    })
}

fn status_value(status: &[Vec<usize>], args: &[SizeExpr]) -> Vec<Vec<SizeExpr>> {
    status
        .iter()
        .map(|m| {
            m.iter()
                .map(|&i| args.get(i - 1).cloned().unwrap_or(SizeExpr::Infty))
                .collect()
        })
        .collect()
}

fn show_status_value(v: &[Vec<SizeExpr>]) -> String {
    let parts: Vec<String> = v
        .iter()
        .map(|m| {
            let items: Vec<String> = m.iter().map(ToString::to_string).collect();
            format!("{{{}}}", items.join(", "))
        })
        .collect();
    format!("({})", parts.join(", "))
}

/// Evaluates a polynomial metric at argument sizes, `∞` being absorbing.
pub fn poly_value(metric: &SizeExpr, args: &[SizeExpr]) -> PolyValue {
    let inst: SizeSubst = (1..=args.len())
        .map(|i| (placeholder(i), args[i - 1].clone()))
        .collect();
    to_poly(&metric.subst(&inst))
}

/// Lexicographic extension of the multiset extension of `(size_lt, size_leq)`.
pub fn lex_mul_greater(m: &[Vec<SizeExpr>], n: &[Vec<SizeExpr>]) -> bool {
    for (a, b) in m.iter().zip(n) {
        if mul_greater(a, b) {
            return true;
        }
        if !mul_equiv(a, b) {
            return false;
        }
    }
    false
}

/// Removes pairs of equivalent elements, returning the two remainders.
fn cancel_equivalent(m: &[SizeExpr], n: &[SizeExpr]) -> (Vec<SizeExpr>, Vec<SizeExpr>) {
    let mut rest_n: Vec<Option<&SizeExpr>> = n.iter().map(Some).collect();
    let mut rest_m = Vec::new();
    for x in m {
        match rest_n
            .iter_mut()
            .find(|y| y.is_some_and(|y| size_equiv(x, y)))
        {
            Some(slot) => *slot = None,
            None => rest_m.push(x.clone()),
        }
    }
    (rest_m, rest_n.into_iter().flatten().cloned().collect())
}

/// Strict multiset extension (Dershowitz–Manna) of the size quasi-order.
pub fn mul_greater(m: &[SizeExpr], n: &[SizeExpr]) -> bool {
    let (rm, rn) = cancel_equivalent(m, n);
    !rm.is_empty() && rn.iter().all(|y| rm.iter().any(|x| size_lt(y, x)))
}

pub fn mul_equiv(m: &[SizeExpr], n: &[SizeExpr]) -> bool {
    let (rm, rn) = cancel_equivalent(m, n);
    rm.is_empty() && rn.is_empty()
}

/// Reads a polynomial metric as a polynomial over placeholders.
pub fn metric_poly(metric: &SizeExpr) -> Option<Poly> {
    match to_poly(metric) {
        PolyValue::Finite(p) => Some(p),
        PolyValue::Infinite => None,
    }
}
