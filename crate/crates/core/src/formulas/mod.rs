//! First-order formulas over `⟨+, ·⟩` and their hyperfinite analogs.
//!
//! A [`Formula`] is either *ordinary* (built from `+`, `·`, `=`, unbounded quantifiers and
//! rational constants) or *translated* (built from `⊕`, `⊙`, `ρ`, quantifiers bounded to `R_b`
//! and embedded constants). [`translate_h`] maps the first kind onto the second node for node.

mod bound;
mod eval;
pub(crate) mod parse;
mod transfer;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::hyperarith::HyperError;
use crate::numbers::Rat;

pub use bound::{term_bounds, term_error_bound, TermBound};
pub use eval::{eval_hyper, eval_real, eval_term_hyper, eval_term_real, HyperEnv, RealEnv};
pub use parse::{parse_corpus, parse_formula, parse_formula_with, parse_term, CorpusEntry};
pub use transfer::{
    transfer_check, AtomSemantics, Row, Sampling, TransferReport, TransferSummary, Verdict,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unbound variable '{name}' at byte {pos}")]
    UnboundVariable { name: String, pos: usize },
    #[error("corpus line {line}: {source}")]
    Corpus { line: usize, source: Box<FormulaError> },
    #[error("formula is already translated")]
    AlreadyTranslated,
    #[error("expected a translated formula")]
    NotTranslated,
    #[error("expected an ordinary formula")]
    NotOrdinary,
    #[error("variable '{0}' has no value")]
    MissingValue(String),
    #[error("value of '{0}' is not bounded")]
    UnboundedValue(String),
    #[error(transparent)]
    Hyper(#[from] HyperError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(Rat),
    Add(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    /// `⊕`
    HAdd(Box<Term>, Box<Term>),
    /// `⊙`
    HMul(Box<Term>, Box<Term>),
    /// A rational constant carried into `r` by rounding to the nearest element.
    Embed(Rat),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Eq,
    Rho,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quant {
    Forall,
    Exists,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Term, Rel, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// `bounded` marks `Q^b`, ranging over `R_b`.
    Quant { q: Quant, bounded: bool, var: String, body: Box<Formula> },
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(Box::new(a), Box::new(b))
    }

    pub fn is_translated(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) | Term::Add(..) | Term::Mul(..) => false,
            Term::HAdd(..) | Term::HMul(..) | Term::Embed(_) => true,
        }
    }

    fn any(&self, pred: &impl Fn(&Term) -> bool) -> bool {
        pred(self)
            || match self {
                Term::Add(a, b) | Term::Mul(a, b) | Term::HAdd(a, b) | Term::HMul(a, b) => {
                    a.any(pred) || b.any(pred)
                }
                _ => false,
            }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Term::Add(a, b) | Term::Mul(a, b) | Term::HAdd(a, b) | Term::HMul(a, b) => {
                1 + a.node_count() + b.node_count()
            }
            _ => 1,
        }
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Add(a, b) | Term::Mul(a, b) | Term::HAdd(a, b) | Term::HMul(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Term::Const(_) | Term::Embed(_) => {}
        }
    }

    pub fn has_constants(&self) -> bool {
        self.any(&|t| matches!(t, Term::Const(_) | Term::Embed(_)))
    }

    fn translate(&self) -> Term {
        match self {
            Term::Var(v) => Term::Var(v.clone()),
            Term::Const(c) => Term::Embed(c.clone()),
            Term::Add(a, b) => Term::HAdd(Box::new(a.translate()), Box::new(b.translate())),
            Term::Mul(a, b) => Term::HMul(Box::new(a.translate()), Box::new(b.translate())),
            t => t.clone(),
        }
    }
}

impl Formula {
    pub fn atom(lhs: Term, rhs: Term) -> Formula {
        Formula::Atom(lhs, Rel::Eq, rhs)
    }

    pub fn quant(q: Quant, var: &str, body: Formula) -> Formula {
        Formula::Quant { q, bounded: false, var: var.to_string(), body: Box::new(body) }
    }

    /// True if any node belongs to the translated vocabulary.
    pub fn is_translated(&self) -> bool {
        self.any_node(&|f| match f {
            Formula::Atom(l, r, s) => *r == Rel::Rho || l.any(&Term::is_translated) || s.any(&Term::is_translated),
            Formula::Quant { bounded, .. } => *bounded,
            _ => false,
        })
    }

    /// True if every node belongs to the translated vocabulary.
    pub fn is_fully_translated(&self) -> bool {
        !self.any_node(&|f| match f {
            Formula::Atom(l, r, s) => {
                *r == Rel::Eq
                    || l.any(&|t| matches!(t, Term::Const(_) | Term::Add(..) | Term::Mul(..)))
                    || s.any(&|t| matches!(t, Term::Const(_) | Term::Add(..) | Term::Mul(..)))
            }
            Formula::Quant { bounded, .. } => !*bounded,
            _ => false,
        })
    }

    fn any_node(&self, pred: &impl Fn(&Formula) -> bool) -> bool {
        pred(self)
            || match self {
                Formula::Atom(..) => false,
                Formula::Not(a) => a.any_node(pred),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    a.any_node(pred) || b.any_node(pred)
                }
                Formula::Quant { body, .. } => body.any_node(pred),
            }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Formula::Atom(l, _, r) => 1 + l.node_count() + r.node_count(),
            Formula::Not(a) => 1 + a.node_count(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.node_count() + b.node_count()
            }
            Formula::Quant { body, .. } => 1 + body.node_count(),
        }
    }

    /// Quantifier kinds and variables in prefix order.
    pub fn quantifier_shape(&self) -> Vec<(Quant, String)> {
        let mut out = Vec::new();
        self.collect_quants(&mut out);
        out
    }

    fn collect_quants(&self, out: &mut Vec<(Quant, String)>) {
        match self {
            Formula::Atom(..) => {}
            Formula::Not(a) => a.collect_quants(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_quants(out);
                b.collect_quants(out);
            }
            Formula::Quant { q, var, body, .. } => {
                out.push((*q, var.clone()));
                body.collect_quants(out);
            }
        }
    }

    /// Free variables, sorted.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out.into_iter().collect()
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(l, _, r) => {
                let mut vs = BTreeSet::new();
                l.vars(&mut vs);
                r.vars(&mut vs);
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Quant { var, body, .. } => {
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every atom's two sides, in order.
    pub fn atoms(&self) -> Vec<(&Term, &Term)> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<(&'a Term, &'a Term)>) {
        match self {
            Formula::Atom(l, _, r) => out.push((l, r)),
            Formula::Not(a) => a.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Formula::Quant { body, .. } => body.collect_atoms(out),
        }
    }

    pub fn has_constants(&self) -> bool {
        self.atoms().iter().any(|(l, r)| l.has_constants() || r.has_constants())
    }
}

/// `φ ↦ φ_h`: `t = s` becomes `t_h ρ s_h`, `Qx` becomes `Q^b x`, `+`/`·` become `⊕`/`⊙`, and
/// constants are embedded.
pub fn translate_h(f: &Formula) -> Result<Formula, FormulaError> {
    if f.is_translated() {
        return Err(FormulaError::AlreadyTranslated);
    }
    Ok(translate_unchecked(f))
}

fn translate_unchecked(f: &Formula) -> Formula {
    let bx = |g: &Formula| Box::new(translate_unchecked(g));
    match f {
        Formula::Atom(l, _, r) => Formula::Atom(l.translate(), Rel::Rho, r.translate()),
        Formula::Not(a) => Formula::Not(bx(a)),
        Formula::And(a, b) => Formula::And(bx(a), bx(b)),
        Formula::Or(a, b) => Formula::Or(bx(a), bx(b)),
        Formula::Implies(a, b) => Formula::Implies(bx(a), bx(b)),
        Formula::Quant { q, var, body, .. } => {
            Formula::Quant { q: *q, bounded: true, var: var.clone(), body: bx(body) }
        }
    }
}

/// Term-level counterpart of [`translate_h`].
pub fn translate_term(t: &Term) -> Result<Term, FormulaError> {
    if t.any(&Term::is_translated) {
        return Err(FormulaError::AlreadyTranslated);
    }
    Ok(t.translate())
}

// Printing. Precedence: sum < product < primary for terms; quantified/implication < or < and
// < literal for formulas.

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, level: u8) -> fmt::Result {
    let (own, text) = match t {
        Term::Add(..) | Term::HAdd(..) => (0, true),
        Term::Mul(..) | Term::HMul(..) => (1, true),
        _ => (2, false),
    };
    let paren = text && own < level;
    if paren {
        f.write_str("(")?;
    }
    match t {
        Term::Var(v) => f.write_str(v)?,
        Term::Const(c) => write!(f, "{c}")?,
        Term::Embed(c) => write!(f, "[{c}]")?,
        Term::Add(a, b) | Term::HAdd(a, b) | Term::Mul(a, b) | Term::HMul(a, b) => {
            let op = match t {
                Term::Add(..) => " + ",
                Term::HAdd(..) => " (+) ",
                Term::Mul(..) => " * ",
                _ => " (*) ",
            };
            write_term(f, a, own)?;
            f.write_str(op)?;
            write_term(f, b, own + 1)?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

fn write_formula(f: &mut fmt::Formatter<'_>, g: &Formula, level: u8) -> fmt::Result {
    let own = match g {
        Formula::Quant { .. } | Formula::Implies(..) => 0,
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        Formula::Not(_) | Formula::Atom(..) => 3,
    };
    let paren = own < level;
    if paren {
        f.write_str("(")?;
    }
    match g {
        Formula::Atom(l, rel, r) => {
            write_term(f, l, 0)?;
            f.write_str(if *rel == Rel::Eq { " = " } else { " rho " })?;
            write_term(f, r, 0)?;
        }
        Formula::Not(a) => {
            f.write_str("not ")?;
            write_formula(f, a, 3)?;
        }
        Formula::And(a, b) => {
            write_formula(f, a, 2)?;
            f.write_str(" and ")?;
            write_formula(f, b, 3)?;
        }
        Formula::Or(a, b) => {
            write_formula(f, a, 1)?;
            f.write_str(" or ")?;
            write_formula(f, b, 2)?;
        }
        Formula::Implies(a, b) => {
            write_formula(f, a, 1)?;
            f.write_str(" implies ")?;
            write_formula(f, b, 0)?;
        }
        Formula::Quant { q, bounded, var, body } => {
            f.write_str(match q {
                Quant::Forall => "forall",
                Quant::Exists => "exists",
            })?;
            if *bounded {
                f.write_str("^b")?;
            }
            write!(f, " {var}. ")?;
            write_formula(f, body, 0)?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, 0)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translation_rewrites_every_node() {
        let f = parse_formula("forall x. x + y = y + x").unwrap();
        let h = translate_h(&f).unwrap();
        assert_eq!(h.to_string(), "forall^b x. x (+) y rho y (+) x");
        assert!(h.is_fully_translated());
        assert_eq!(h.node_count(), f.node_count());
        assert_eq!(h.quantifier_shape(), f.quantifier_shape());
        assert_eq!(translate_h(&h), Err(FormulaError::AlreadyTranslated));
    }

    #[test]
    fn constants_become_embeddings() {
        let f = parse_formula("2 * x = x + x").unwrap();
        let h = translate_h(&f).unwrap();
        assert_eq!(h.to_string(), "[2] (*) x rho x (+) x");
        assert!(f.has_constants());
    }

    #[test]
    fn free_variables() {
        let f = parse_formula("exists y. x + y = 0 and z = z").unwrap();
        assert_eq!(f.free_vars(), vec!["x".to_string(), "z".to_string()]);
    }
}
