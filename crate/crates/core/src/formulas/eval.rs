//! Tarski evaluation on both sides of the translation.
//!
//! Formulas are compiled into slot-indexed trees first: free variables take the first slots in
//! sorted order, each quantifier gets a fresh slot. Hyper-side quantifiers range over `R_b`;
//! real-side quantifiers range over the grid `{kε : k ∈ R_b}`, the image of `R_b` under
//! projection.

use std::collections::BTreeMap;

use super::{Formula, FormulaError, Quant, Term};
use crate::hyperarith::{HyperElem, HyperParams};
use crate::numbers::Rat;

pub type HyperEnv = BTreeMap<String, HyperElem>;
pub type RealEnv = BTreeMap<String, Rat>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Flavor {
    Ordinary,
    Translated,
}

#[derive(Debug, Clone)]
pub(crate) enum CTerm {
    Var(usize),
    /// Exact value and, on the translated side, its embedding.
    Const(Rat, Option<HyperElem>),
    Add(Box<CTerm>, Box<CTerm>),
    Mul(Box<CTerm>, Box<CTerm>),
}

/// Guard band of one atom: `C` from the error bound, or `None` when wraparound is possible.
pub(crate) type Band = Option<Rat>;

#[derive(Debug, Clone)]
pub(crate) enum CForm {
    Atom(CTerm, CTerm, Band),
    Not(Box<CForm>),
    And(Box<CForm>, Box<CForm>),
    Or(Box<CForm>, Box<CForm>),
    Implies(Box<CForm>, Box<CForm>),
    Quant(Quant, usize, Box<CForm>),
}

pub(crate) struct Compiled {
    pub(crate) form: CForm,
    pub(crate) free: Vec<String>,
    pub(crate) slots: usize,
}

struct Compiler<'a> {
    p: &'a HyperParams,
    flavor: Flavor,
    scope: Vec<(String, usize)>,
    /// Slots bound by quantifiers, which range over all of `R_b`.
    quantified: Vec<bool>,
    free_bound: Option<Rat>,
}

impl Compiler<'_> {
    fn slot(&self, v: &str) -> usize {
        self.scope.iter().rev().find(|(n, _)| n == v).map(|(_, s)| *s).expect("scoped")
    }

    fn term(&self, t: &Term) -> Result<CTerm, FormulaError> {
        let wrong = || match self.flavor {
            Flavor::Ordinary => FormulaError::NotOrdinary,
            Flavor::Translated => FormulaError::NotTranslated,
        };
        let bx = |t: &Term| self.term(t).map(Box::new);
        Ok(match (t, self.flavor) {
            (Term::Var(v), _) => CTerm::Var(self.slot(v)),
            (Term::Const(c), Flavor::Ordinary) => CTerm::Const(c.clone(), None),
            (Term::Embed(c), Flavor::Translated) => CTerm::Const(c.clone(), Some(self.p.embed(c)?)),
            (Term::Add(a, b), Flavor::Ordinary) | (Term::HAdd(a, b), Flavor::Translated) => {
                CTerm::Add(bx(a)?, bx(b)?)
            }
            (Term::Mul(a, b), Flavor::Ordinary) | (Term::HMul(a, b), Flavor::Translated) => {
                CTerm::Mul(bx(a)?, bx(b)?)
            }
            _ => return Err(wrong()),
        })
    }

    fn band(&self, l: &Term, r: &Term) -> Band {
        let free_bound = self.free_bound.as_ref()?;
        let quant_bound = self.p.value(self.p.bounded_max_elem());
        let var_bound = |v: &str| {
            if self.quantified[self.slot(v)] {
                quant_bound.clone()
            } else {
                free_bound.clone()
            }
        };
        let (a, b) = (super::term_bounds(l, &var_bound, self.p), super::term_bounds(r, &var_bound, self.p));
        if a.may_wrap || b.may_wrap {
            None
        } else {
            Some(&a.err + &b.err)
        }
    }

    fn formula(&mut self, f: &Formula) -> Result<CForm, FormulaError> {
        let flavor_ok = |bounded: bool| match self.flavor {
            Flavor::Ordinary => !bounded,
            Flavor::Translated => bounded,
        };
        Ok(match f {
            Formula::Atom(l, rel, r) => {
                let rel_ok = match self.flavor {
                    Flavor::Ordinary => *rel == super::Rel::Eq,
                    Flavor::Translated => *rel == super::Rel::Rho,
                };
                if !rel_ok {
                    return Err(match self.flavor {
                        Flavor::Ordinary => FormulaError::NotOrdinary,
                        Flavor::Translated => FormulaError::NotTranslated,
                    });
                }
                CForm::Atom(self.term(l)?, self.term(r)?, self.band(l, r))
            }
            Formula::Not(a) => CForm::Not(Box::new(self.formula(a)?)),
            Formula::And(a, b) => CForm::And(Box::new(self.formula(a)?), Box::new(self.formula(b)?)),
            Formula::Or(a, b) => CForm::Or(Box::new(self.formula(a)?), Box::new(self.formula(b)?)),
            Formula::Implies(a, b) => {
                CForm::Implies(Box::new(self.formula(a)?), Box::new(self.formula(b)?))
            }
            Formula::Quant { q, bounded, var, body } => {
                if !flavor_ok(*bounded) {
                    return Err(match self.flavor {
                        Flavor::Ordinary => FormulaError::NotOrdinary,
                        Flavor::Translated => FormulaError::NotTranslated,
                    });
                }
                let slot = self.quantified.len();
                self.quantified.push(true);
                self.scope.push((var.clone(), slot));
                let body = self.formula(body);
                self.scope.pop();
                CForm::Quant(*q, slot, Box::new(body?))
            }
        })
    }
}

/// Compiles `f`. With `free_bound`, every atom also gets its guard band, computed with free
/// variables bounded by `free_bound` and quantified ones by the largest bounded value.
pub(crate) fn compile(
    f: &Formula,
    p: &HyperParams,
    flavor: Flavor,
    free_bound: Option<Rat>,
) -> Result<Compiled, FormulaError> {
    let free = f.free_vars();
    let mut c = Compiler {
        p,
        flavor,
        scope: free.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect(),
        quantified: vec![false; free.len()],
        free_bound,
    };
    let form = c.formula(f)?;
    Ok(Compiled { form, free, slots: c.quantified.len() })
}

pub(crate) fn hyper_term(t: &CTerm, p: &HyperParams, env: &[HyperElem]) -> HyperElem {
    match t {
        CTerm::Var(s) => env[*s],
        CTerm::Const(_, k) => k.expect("translated constant"),
        CTerm::Add(a, b) => p.hadd(hyper_term(a, p, env), hyper_term(b, p, env)),
        CTerm::Mul(a, b) => p.hmul(hyper_term(a, p, env), hyper_term(b, p, env)),
    }
}

pub(crate) fn hyper_form(f: &CForm, p: &HyperParams, env: &mut [HyperElem]) -> bool {
    match f {
        CForm::Atom(l, r, _) => p.rho(hyper_term(l, p, env), hyper_term(r, p, env)),
        CForm::Not(a) => !hyper_form(a, p, env),
        CForm::And(a, b) => hyper_form(a, p, env) && hyper_form(b, p, env),
        CForm::Or(a, b) => hyper_form(a, p, env) || hyper_form(b, p, env),
        CForm::Implies(a, b) => !hyper_form(a, p, env) || hyper_form(b, p, env),
        CForm::Quant(q, slot, body) => {
            let mut hit = |k: HyperElem| {
                env[*slot] = k;
                hyper_form(body, p, env)
            };
            let mut dom = p.bounded_elements();
            match q {
                Quant::Exists => dom.any(&mut hit),
                Quant::Forall => dom.all(&mut hit),
            }
        }
    }
}

pub(crate) fn real_term(t: &CTerm, env: &[Rat]) -> Rat {
    match t {
        CTerm::Var(s) => env[*s].clone(),
        CTerm::Const(c, _) => c.clone(),
        CTerm::Add(a, b) => &real_term(a, env) + &real_term(b, env),
        CTerm::Mul(a, b) => &real_term(a, env) * &real_term(b, env),
    }
}

/// The grid `{kε : k ∈ R_b}`, ascending.
pub(crate) fn grid(p: &HyperParams) -> Vec<Rat> {
    p.bounded_elements().map(|k| p.value(k)).collect()
}

/// Three-valued real-side evaluation; atoms are decided by `atom` from the gap `|t − s|`
/// and the atom's band.
pub(crate) fn real_form_kleene(
    f: &CForm,
    grid: &[Rat],
    env: &mut [Rat],
    atom: &dyn Fn(&Rat, &Band) -> Option<bool>,
) -> Option<bool> {
    match f {
        CForm::Atom(l, r, band) => atom(&(&real_term(l, env) - &real_term(r, env)).abs(), band),
        CForm::Not(a) => real_form_kleene(a, grid, env, atom).map(|b| !b),
        CForm::And(a, b) => match real_form_kleene(a, grid, env, atom) {
            Some(false) => Some(false),
            x => match (x, real_form_kleene(b, grid, env, atom)) {
                (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
        },
        CForm::Or(a, b) => match real_form_kleene(a, grid, env, atom) {
            Some(true) => Some(true),
            x => match (x, real_form_kleene(b, grid, env, atom)) {
                (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
        },
        CForm::Implies(a, b) => {
            let neg = CForm::Not(a.clone());
            real_form_kleene(&CForm::Or(Box::new(neg), b.clone()), grid, env, atom)
        }
        CForm::Quant(q, slot, body) => {
            // Existential: true on any true instance, false only if all are false.
            let decisive = *q == Quant::Exists;
            let mut unknown = false;
            for v in grid {
                env[*slot] = v.clone();
                match real_form_kleene(body, grid, env, atom) {
                    Some(b) if b == decisive => return Some(decisive),
                    Some(_) => {}
                    None => unknown = true,
                }
            }
            if unknown {
                None
            } else {
                Some(!decisive)
            }
        }
    }
}

fn slots_from<T: Clone>(
    compiled: &Compiled,
    env: &BTreeMap<String, T>,
    fill: T,
) -> Result<Vec<T>, FormulaError> {
    let mut out = vec![fill; compiled.slots];
    for (i, v) in compiled.free.iter().enumerate() {
        out[i] = env.get(v).cloned().ok_or_else(|| FormulaError::MissingValue(v.clone()))?;
    }
    Ok(out)
}

/// `R ⊨ φ_h[env]`: `ρ`-atoms, quantifiers over `R_b`. Every value in `env` must be bounded.
pub fn eval_hyper(f_h: &Formula, p: &HyperParams, env: &HyperEnv) -> Result<bool, FormulaError> {
    if !f_h.is_fully_translated() {
        return Err(FormulaError::NotTranslated);
    }
    for (name, k) in env {
        if !p.elem_bounded(*k) {
            return Err(FormulaError::UnboundedValue(name.clone()));
        }
    }
    let c = compile(f_h, p, Flavor::Translated, None)?;
    let mut slots = slots_from(&c, env, p.bounded_max_elem())?;
    Ok(hyper_form(&c.form, p, &mut slots))
}

/// Exact evaluation of an ordinary formula; quantifiers range over the projected grid.
pub fn eval_real(f: &Formula, p: &HyperParams, env: &RealEnv) -> Result<bool, FormulaError> {
    if f.is_translated() {
        return Err(FormulaError::NotOrdinary);
    }
    let c = compile(f, p, Flavor::Ordinary, None)?;
    let mut slots = slots_from(&c, env, Rat::zero())?;
    let exact = |gap: &Rat, _: &Band| Some(gap.is_zero());
    Ok(real_form_kleene(&c.form, &grid(p), &mut slots, &exact).expect("two-valued atoms"))
}

/// Evaluates a translated term. Constants go through `embed`, which fails on unbounded values.
pub fn eval_term_hyper(t: &Term, p: &HyperParams, env: &HyperEnv) -> Result<HyperElem, FormulaError> {
    Ok(match t {
        Term::Var(v) => *env.get(v).ok_or_else(|| FormulaError::MissingValue(v.clone()))?,
        Term::Embed(c) => p.embed(c)?,
        Term::HAdd(a, b) => p.hadd(eval_term_hyper(a, p, env)?, eval_term_hyper(b, p, env)?),
        Term::HMul(a, b) => p.hmul(eval_term_hyper(a, p, env)?, eval_term_hyper(b, p, env)?),
        _ => return Err(FormulaError::NotTranslated),
    })
}

pub fn eval_term_real(t: &Term, env: &RealEnv) -> Result<Rat, FormulaError> {
    Ok(match t {
        Term::Var(v) => env.get(v).cloned().ok_or_else(|| FormulaError::MissingValue(v.clone()))?,
        Term::Const(c) => c.clone(),
        Term::Add(a, b) => &eval_term_real(a, env)? + &eval_term_real(b, env)?,
        Term::Mul(a, b) => &eval_term_real(a, env)? * &eval_term_real(b, env)?,
        _ => return Err(FormulaError::NotOrdinary),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::{parse_formula, translate_h};
    use crate::hyperarith::Preset;

    fn h(text: &str) -> Formula {
        translate_h(&parse_formula(text).unwrap()).unwrap()
    }

    fn henv(pairs: &[(&str, i128)], p: &HyperParams) -> HyperEnv {
        pairs.iter().map(|(v, k)| (v.to_string(), p.elem(*k).unwrap())).collect()
    }

    fn renv(pairs: &[(&str, &str)]) -> RealEnv {
        pairs.iter().map(|(v, q)| (v.to_string(), q.parse().unwrap())).collect()
    }

    #[test]
    fn hyper_examples() {
        let p = Preset::Tiny.params();
        let comm = h("x + y = y + x");
        for (x, y) in [(0, 0), (255, 255), (-200, 17)] {
            assert!(eval_hyper(&comm, &p, &henv(&[("x", x), ("y", y)], &p)).unwrap());
        }
        assert!(eval_hyper(&h("exists y. x + y = 0"), &p, &henv(&[("x", 100)], &p)).unwrap());
    }

    #[test]
    fn hyper_mul_assoc_in_safe_range() {
        let p = Preset::Tiny.params();
        let f = h("(x*y)*z = x*(y*z)");
        let c = compile(&f, &p, Flavor::Translated, None).unwrap();
        let mut env = vec![p.bounded_max_elem(); 3];
        for x in -64..=64 {
            for y in -64..=64 {
                for z in -64..=64 {
                    env[0] = p.elem(x).unwrap();
                    env[1] = p.elem(y).unwrap();
                    env[2] = p.elem(z).unwrap();
                    assert!(hyper_form(&c.form, &p, &mut env), "{x} {y} {z}");
                }
            }
        }
    }

    #[test]
    fn hyper_errors() {
        let p = Preset::Tiny.params();
        let f = parse_formula("x = x").unwrap();
        assert_eq!(eval_hyper(&f, &p, &HyperEnv::new()), Err(FormulaError::NotTranslated));
        let g = h("x = x");
        assert_eq!(
            eval_hyper(&g, &p, &henv(&[("x", 300)], &p)),
            Err(FormulaError::UnboundedValue("x".into()))
        );
        assert_eq!(eval_hyper(&g, &p, &HyperEnv::new()), Err(FormulaError::MissingValue("x".into())));
    }

    #[test]
    fn real_examples() {
        let p = Preset::Tiny.params();
        let f = parse_formula("x*y = y*x").unwrap();
        assert!(eval_real(&f, &p, &renv(&[("x", "2/3"), ("y", "7/5")])).unwrap());
        assert!(!eval_real(&parse_formula("exists x. x*x = 2").unwrap(), &p, &RealEnv::new()).unwrap());
        let inv = parse_formula("exists y. x + y = 0").unwrap();
        for k in p.bounded_elements().step_by(7) {
            let env = RealEnv::from([("x".to_string(), p.value(k))]);
            assert!(eval_real(&inv, &p, &env).unwrap());
        }
        assert_eq!(eval_real(&h("x = x"), &p, &RealEnv::new()), Err(FormulaError::NotOrdinary));
    }

    #[test]
    fn single_free_variable_matches_substitution() {
        // Quantifying over R_b agrees with checking every element by hand.
        let p = Preset::Tiny.params();
        let body = h("x * x = x");
        let holds: Vec<i128> = p
            .bounded_elements()
            .filter(|k| eval_hyper(&body, &p, &HyperEnv::from([("x".to_string(), *k)])).unwrap())
            .map(HyperElem::k)
            .collect();
        let exists = h("exists x. x * x = x");
        let forall = h("forall x. x * x = x");
        assert_eq!(eval_hyper(&exists, &p, &HyperEnv::new()).unwrap(), !holds.is_empty());
        assert_eq!(eval_hyper(&forall, &p, &HyperEnv::new()).unwrap(), holds.len() == 511);
        // x*x ≈ x near 0 and 1 only.
        assert!(holds.contains(&0) && holds.contains(&64) && !holds.contains(&128));
    }

    #[test]
    fn term_evaluation() {
        let p = Preset::Tiny.params();
        let t = crate::formulas::translate_term(&crate::formulas::parse_term("1/2 * 1/2").unwrap()).unwrap();
        assert_eq!(eval_term_hyper(&t, &p, &HyperEnv::new()).unwrap().k(), 16);
        let r = crate::formulas::parse_term("x * (y + 1/3)").unwrap();
        assert_eq!(
            eval_term_real(&r, &renv(&[("x", "3"), ("y", "1")])).unwrap(),
            Rat::integer(4)
        );
    }
}
