//! Membership of closed formulas in the satisfaction class `True(X)`.
//!
//! Two strategies compute the same class. [`Strategy::TopDown`] follows the five defining
//! clauses literally: atoms are decided on parameters, connectives combine, and `∃v θ` is true
//! iff some substitution instance `θ_{v→x}` with `x ∈ X` is. Results are memoized per closed
//! formula. [`Strategy::BottomUp`] computes, for every distinct subformula, the table of its
//! truth values over all assignments of the formula's variables in `X`.

use std::collections::HashMap;
use std::rc::Rc;

use crate::formulas::Quant;
use crate::hfset::HfSet;

use super::{Arg, EForm, EpsFormula, FiniteStructure, TarskiError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    TopDown,
    BottomUp,
}

/// Largest assignment table the bottom-up strategy builds.
const TABLE_LIMIT: u128 = 1 << 24;

/// `θ ∈ True(X)`, computed top-down.
pub fn truth(x: &FiniteStructure, theta: &EpsFormula) -> Result<bool, TarskiError> {
    truth_with(x, theta, Strategy::TopDown)
}

pub fn truth_with(x: &FiniteStructure, theta: &EpsFormula, s: Strategy) -> Result<bool, TarskiError> {
    satisfies(x, &theta.decode()?, s)
}

/// `X ⊨ f` for a closed formula whose parameters lie in `X`.
pub fn satisfies(x: &FiniteStructure, f: &EForm, s: Strategy) -> Result<bool, TarskiError> {
    if let Some(v) = f.free_vars().into_iter().next() {
        return Err(TarskiError::Open(v));
    }
    if let Some(p) = f.params().into_iter().find(|p| !x.contains(p)) {
        return Err(TarskiError::ForeignParameter(p));
    }
    Ok(match s {
        Strategy::TopDown => TopDown { x, memo: HashMap::new() }.eval(f),
        Strategy::BottomUp => bottom_up(x, f)?,
    })
}

struct TopDown<'a> {
    x: &'a FiniteStructure,
    memo: HashMap<EForm, bool>,
}

fn param(a: &Arg) -> &HfSet {
    match a {
        Arg::Param(p) => p,
        Arg::Var(v) => unreachable!("free variable v{v} in a closed formula"),
    }
}

impl TopDown<'_> {
    fn eval(&mut self, f: &EForm) -> bool {
        match f {
            EForm::Eq(a, b) => param(a) == param(b),
            EForm::In(a, b) => param(b).contains(param(a)),
            EForm::Not(g) => !self.eval(g),
            EForm::Bin(c, g, h) => {
                let a = self.eval(g);
                let b = self.eval(h);
                c.apply(a, b)
            }
            EForm::Quant(q, v, g) => {
                if let Some(&t) = self.memo.get(f) {
                    return t;
                }
                let want = *q == Quant::Exists;
                let x = self.x;
                let t = if x.elements().iter().any(|e| self.eval(&g.subst(*v, e)) == want) { want } else { !want };
                self.memo.insert(f.clone(), t);
                t
            }
        }
    }
}

fn vars_of(f: &EForm, out: &mut Vec<u32>) {
    let mut push = |v: u32| {
        if !out.contains(&v) {
            out.push(v);
        }
    };
    match f {
        EForm::Eq(a, b) | EForm::In(a, b) => {
            for x in [a, b] {
                if let Arg::Var(v) = x {
                    push(*v);
                }
            }
        }
        EForm::Not(g) => vars_of(g, out),
        EForm::Bin(_, g, h) => {
            vars_of(g, out);
            vars_of(h, out);
        }
        EForm::Quant(_, v, g) => {
            push(*v);
            vars_of(g, out);
        }
    }
}

// Over the empty structure every quantifier is decided without looking at its body.
fn empty_structure(f: &EForm) -> bool {
    match f {
        EForm::Eq(..) | EForm::In(..) => unreachable!("closed atom over the empty structure"),
        EForm::Not(g) => !empty_structure(g),
        EForm::Bin(c, g, h) => c.apply(empty_structure(g), empty_structure(h)),
        EForm::Quant(q, ..) => *q == Quant::Forall,
    }
}

struct Tables<'a, 'f> {
    n: usize,
    size: usize,
    vars: Vec<u32>,
    member: Vec<Vec<bool>>,
    x: &'a FiniteStructure,
    memo: HashMap<&'f EForm, Rc<Vec<bool>>>,
}

impl<'f> Tables<'_, 'f> {
    fn stride(&self, v: u32) -> usize {
        let slot = self.vars.iter().position(|w| *w == v).expect("collected");
        self.n.pow(slot as u32)
    }

    fn index(&self, a: &Arg, row: usize) -> usize {
        match a {
            Arg::Var(v) => (row / self.stride(*v)) % self.n,
            Arg::Param(p) => self.x.index_of(p).expect("checked"),
        }
    }

    fn table(&mut self, f: &'f EForm) -> Rc<Vec<bool>> {
        if let Some(t) = self.memo.get(f) {
            return Rc::clone(t);
        }
        let out: Vec<bool> = match f {
            EForm::Eq(a, b) => (0..self.size).map(|r| self.index(a, r) == self.index(b, r)).collect(),
            EForm::In(a, b) => (0..self.size).map(|r| self.member[self.index(a, r)][self.index(b, r)]).collect(),
            EForm::Not(g) => self.table(g).iter().map(|t| !t).collect(),
            EForm::Bin(c, g, h) => {
                let (g, h) = (self.table(g), self.table(h));
                g.iter().zip(h.iter()).map(|(a, b)| c.apply(*a, *b)).collect()
            }
            EForm::Quant(q, v, g) => {
                let g = self.table(g);
                let st = self.stride(*v);
                let want = *q == Quant::Exists;
                (0..self.size)
                    .map(|r| {
                        let base = r - ((r / st) % self.n) * st;
                        let hit = (0..self.n).any(|x| g[base + x * st] == want);
                        if hit {
                            want
                        } else {
                            !want
                        }
                    })
                    .collect()
            }
        };
        let out = Rc::new(out);
        self.memo.insert(f, Rc::clone(&out));
        out
    }
}

fn bottom_up(x: &FiniteStructure, f: &EForm) -> Result<bool, TarskiError> {
    if x.is_empty() {
        return Ok(empty_structure(f));
    }
    let mut vars = Vec::new();
    vars_of(f, &mut vars);
    let n = x.len();
    let needed = (n as u128).checked_pow(vars.len() as u32).unwrap_or(u128::MAX);
    if needed > TABLE_LIMIT {
        return Err(TarskiError::TooLarge { needed, limit: TABLE_LIMIT });
    }
    let el = x.elements();
    let member = el.iter().map(|a| el.iter().map(|b| b.contains(a)).collect()).collect();
    let mut t = Tables { n, size: needed as usize, vars, member, x, memo: HashMap::new() };
    // Closed, so every row holds the same value.
    Ok(t.table(f)[0])
}
