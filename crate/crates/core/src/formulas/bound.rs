//! Structural bound on how far a translated term can drift from its exact value.

use super::Term;
use crate::hyperarith::HyperParams;
use crate::numbers::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermBound {
    /// Bound on the magnitude of the exact value.
    pub value: Rat,
    /// Bound on `|project(t_h) − t|`.
    pub err: Rat,
    /// Some subterm may reach the edge of `r`, where wraparound voids `err`.
    pub may_wrap: bool,
}

/// Propagates magnitude and error bounds bottom-up:
///
/// * variable or constant: error `ε/2` from rounding into `r`
/// * `t + s`: errors add
/// * `t · s`: `|t|·err(s) + |s|·err(t) + err(t)·err(s) + ε`, the last term for the floor
///
/// Works on ordinary and translated terms alike.
pub fn term_bounds(t: &Term, var_bound: &dyn Fn(&str) -> Rat, p: &HyperParams) -> TermBound {
    let half_eps = &Rat::new(1, 2).expect("nonzero") * p.eps();
    let limit = &Rat::integer(p.omega()) * p.eps();
    let out = match t {
        Term::Var(v) => TermBound { value: var_bound(v), err: half_eps, may_wrap: false },
        Term::Const(c) | Term::Embed(c) => TermBound {
            value: c.abs(),
            err: half_eps,
            may_wrap: !p.ctx().is_bounded(c),
        },
        Term::Add(a, b) | Term::HAdd(a, b) => {
            let (a, b) = (term_bounds(a, var_bound, p), term_bounds(b, var_bound, p));
            TermBound {
                value: &a.value + &b.value,
                err: &a.err + &b.err,
                may_wrap: a.may_wrap || b.may_wrap,
            }
        }
        Term::Mul(a, b) | Term::HMul(a, b) => {
            let (a, b) = (term_bounds(a, var_bound, p), term_bounds(b, var_bound, p));
            let err = &(&(&(&a.value * &b.err) + &(&b.value * &a.err)) + &(&a.err * &b.err)) + p.eps();
            TermBound { value: &a.value * &b.value, err, may_wrap: a.may_wrap || b.may_wrap }
        }
    };
    let reach = &out.value + &out.err;
    TermBound { may_wrap: out.may_wrap || reach >= limit, ..out }
}

/// The error bound `C` for `t` when every variable has magnitude at most `b`.
pub fn term_error_bound(t: &Term, b: &Rat, p: &HyperParams) -> Rat {
    term_bounds(t, &|_| b.clone(), p).err
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::parse_term;
    use crate::hyperarith::Preset;

    #[test]
    fn examples_at_tiny() {
        let p = Preset::Tiny.params();
        let one = Rat::one();
        let x = parse_term("x").unwrap();
        assert_eq!(term_error_bound(&x, &one, &p), Rat::new(1, 128).unwrap());
        let xy = parse_term("x*y").unwrap();
        let expected = ["1/128", "1/128", "1/16384", "1/64"]
            .iter()
            .map(|s| s.parse::<Rat>().unwrap())
            .fold(Rat::zero(), |a, b| &a + &b);
        assert_eq!(term_error_bound(&xy, &one, &p), expected);
    }

    #[test]
    fn wrap_flag() {
        let p = Preset::Tiny.params();
        let t = parse_term("x*x*x").unwrap();
        assert!(!term_bounds(&t, &|_| Rat::one(), &p).may_wrap);
        assert!(term_bounds(&t, &|_| Rat::integer(4), &p).may_wrap);
        assert!(term_bounds(&parse_term("5").unwrap(), &|_| Rat::one(), &p).may_wrap);
    }
}
