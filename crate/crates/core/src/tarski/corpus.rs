//! Seeded random closed formulas.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hfset::HfSet;

use super::{Arg, Conn, EForm};

struct Gen<'a> {
    rng: ChaCha8Rng,
    params: &'a [HfSet],
    vars: u32,
}

impl Gen<'_> {
    fn arg(&mut self, bound: &[u32]) -> Arg {
        if !bound.is_empty() && (self.params.is_empty() || self.rng.gen_bool(0.7)) {
            Arg::Var(*bound.choose(&mut self.rng).expect("nonempty"))
        } else {
            Arg::Param(self.params.choose(&mut self.rng).expect("nonempty").clone())
        }
    }

    fn atom(&mut self, bound: &[u32]) -> EForm {
        let (a, b) = (self.arg(bound), self.arg(bound));
        if self.rng.gen_bool(0.5) {
            EForm::In(a, b)
        } else {
            EForm::Eq(a, b)
        }
    }

    fn quant(&mut self, quants: usize, height: usize, bound: &mut Vec<u32>) -> EForm {
        let v = self.rng.gen_range(0..self.vars);
        let fresh = !bound.contains(&v);
        if fresh {
            bound.push(v);
        }
        let body = self.formula(quants - 1, height.saturating_sub(1), bound);
        if fresh {
            bound.pop();
        }
        if self.rng.gen_bool(0.5) {
            EForm::exists(v, body)
        } else {
            EForm::forall(v, body)
        }
    }

    fn formula(&mut self, quants: usize, height: usize, bound: &mut Vec<u32>) -> EForm {
        let can_atom = !bound.is_empty() || !self.params.is_empty();
        if !can_atom {
            return self.quant(quants.max(1), height, bound);
        }
        if height == 0 {
            return self.atom(bound);
        }
        match self.rng.gen_range(0..8) {
            0 | 1 => self.atom(bound),
            2 => EForm::not(self.formula(quants, height - 1, bound)),
            3..=5 => {
                let c = *Conn::ALL.choose(&mut self.rng).expect("nonempty");
                let a = self.formula(quants, height - 1, bound);
                let b = self.formula(quants, height - 1, bound);
                EForm::bin(c, a, b)
            }
            _ if quants > 0 => self.quant(quants, height, bound),
            _ => self.atom(bound),
        }
    }
}

/// `count` closed formulas over `params`, each with quantifier depth at most `depth` and
/// variables drawn from `v0..v{vars-1}`. With no parameters, atoms only appear under
/// quantifiers, so `depth` must then be positive.
pub fn random_corpus(params: &[HfSet], count: usize, depth: usize, vars: u32, seed: u64) -> Vec<EForm> {
    assert!(vars > 0, "need at least one variable");
    assert!(!params.is_empty() || depth > 0, "no parameters and no quantifiers");
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), params, vars };
    (0..count).map(|_| g.formula(depth, depth + 3, &mut Vec::new())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_and_within_depth() {
        let params: Vec<HfSet> = (0u64..5).map(|c| HfSet::ack_decode(&c.into())).collect();
        let corpus = random_corpus(&params, 500, 4, 3, 1);
        assert!(corpus.iter().all(|f| f.free_vars().is_empty() && f.quantifier_depth() <= 4));
        assert!(corpus.iter().any(|f| f.quantifier_depth() == 4));
        assert_eq!(corpus, random_corpus(&params, 500, 4, 3, 1));
    }

    #[test]
    fn no_parameters() {
        let corpus = random_corpus(&[], 100, 2, 2, 9);
        assert!(corpus.iter().all(|f| f.free_vars().is_empty() && f.params().is_empty()));
    }
}
