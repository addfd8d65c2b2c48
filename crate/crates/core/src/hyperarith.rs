//! The computer arithmetic `R(ω,ε)` on `r = {−ω, …, ω}`.
//!
//! `⊕` is addition modulo `2ω+1` and `k ⊙ m = ⌊kmε⌋ mod (2ω+1)`, both reduced to the symmetric
//! residue system. An element `k` stands for the rational `kε`; it is *bounded* when `kε` is
//! bounded, and two elements are indiscernible (`ρ`) when `kε − mε` is infinitesimal.
//!
//! Elements are native `i128`. [`HyperParams::new`] rejects parameters whose products could
//! leave that range.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::numbers::{FeasibilityContext, NumError, Rat};
use crate::shard;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HyperError {
    #[error("invalid parameters: {0}")]
    Invariant(String),
    #[error("{0} is outside r = [-omega, omega]")]
    OutOfRange(String),
    #[error("element {0} is not bounded")]
    UnboundedElem(i128),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// Largest `ω` accepted; keeps `k·m·num(ε)` inside `i128`.
const OMEGA_LIMIT: i128 = 1 << 60;
const EPS_PART_LIMIT: i128 = 1 << 62;

/// The tuple `(ω, ε, S)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperParams {
    omega: i128,
    eps: Rat,
    eps_num: i128,
    eps_den: i128,
    ctx: FeasibilityContext,
}

/// Named parameter bundles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// ω = 2048, ε = 1/64, S = 4.
    Tiny,
    /// ω = 2^40, ε = 2^-20, S = 2^10.
    Fine,
}

impl Preset {
    pub fn params(self) -> HyperParams {
        let (omega, eps_den, s): (i64, i64, u64) = match self {
            Preset::Tiny => (2048, 64, 4),
            Preset::Fine => (1i64 << 40, 1i64 << 20, 1u64 << 10),
        };
        HyperParams::new(
            BigInt::from(omega),
            Rat::new(1, eps_den).expect("nonzero"),
            FeasibilityContext::new(s).expect("S >= 2"),
        )
        .expect("preset satisfies invariants")
    }
}

/// An element of `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct HyperElem(i128);

impl HyperElem {
    pub fn k(self) -> i128 {
        self.0
    }
}

impl fmt::Display for HyperElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn to_i128(x: &BigInt, what: &str) -> Result<i128, HyperError> {
    x.to_i128()
        .ok_or_else(|| HyperError::Invariant(format!("{what} does not fit the native range")))
}

impl HyperParams {
    /// Validates `0 < ε < 1/S` and `ωε > S`.
    pub fn new(omega: BigInt, eps: Rat, ctx: FeasibilityContext) -> Result<Self, HyperError> {
        if !omega.is_positive() {
            return Err(HyperError::Invariant("omega must be positive".into()));
        }
        if !eps.numer().is_positive() {
            return Err(HyperError::Invariant("eps must be positive".into()));
        }
        if !ctx.is_infinitesimal(&eps) {
            return Err(HyperError::Invariant(format!(
                "eps < 1/S violated: eps = {eps}, S = {}",
                ctx.threshold()
            )));
        }
        let scaled = &Rat::integer(omega.clone()) * &eps;
        if scaled <= Rat::integer(ctx.threshold()) {
            return Err(HyperError::Invariant(format!(
                "omega*eps > S violated: omega*eps = {scaled}, S = {}",
                ctx.threshold()
            )));
        }
        let omega = to_i128(&omega, "omega")?;
        let eps_num = to_i128(eps.numer(), "eps numerator")?;
        let eps_den = to_i128(eps.denom(), "eps denominator")?;
        if omega > OMEGA_LIMIT || eps_num > EPS_PART_LIMIT || eps_den > EPS_PART_LIMIT {
            return Err(HyperError::Invariant("parameters exceed the native range".into()));
        }
        if omega.checked_mul(omega).and_then(|w| w.checked_mul(eps_num)).is_none() {
            return Err(HyperError::Invariant("omega^2 * eps numerator overflows".into()));
        }
        Ok(HyperParams { omega, eps, eps_num, eps_den, ctx })
    }

    pub fn omega(&self) -> i128 {
        self.omega
    }

    pub fn eps(&self) -> &Rat {
        &self.eps
    }

    pub fn ctx(&self) -> &FeasibilityContext {
        &self.ctx
    }

    fn s(&self) -> i128 {
        i128::from(self.ctx.threshold())
    }

    fn modulus(&self) -> i128 {
        2 * self.omega + 1
    }

    /// Reduces into `{−ω, …, ω}`.
    pub fn reduce(&self, x: i128) -> HyperElem {
        let m = self.modulus();
        let r = x.rem_euclid(m);
        HyperElem(if r > self.omega { r - m } else { r })
    }

    pub fn elem(&self, k: i128) -> Result<HyperElem, HyperError> {
        if k.abs() > self.omega {
            return Err(HyperError::OutOfRange(k.to_string()));
        }
        Ok(HyperElem(k))
    }

    /// Every element of `r`, ascending.
    pub fn elements(&self) -> impl Iterator<Item = HyperElem> {
        (-self.omega..=self.omega).map(HyperElem)
    }

    pub fn hadd(&self, a: HyperElem, b: HyperElem) -> HyperElem {
        self.reduce(a.0 + b.0)
    }

    pub fn hneg(&self, a: HyperElem) -> HyperElem {
        HyperElem(-a.0)
    }

    /// `⌊abε⌋ mod (2ω+1)`, floor taken toward −∞.
    pub fn hmul(&self, a: HyperElem, b: HyperElem) -> HyperElem {
        let scaled = a.0 * b.0 * self.eps_num;
        self.reduce(scaled.div_euclid(self.eps_den))
    }

    /// The rational `kε` the element stands for.
    pub fn value(&self, a: HyperElem) -> Rat {
        &Rat::integer(a.0) * &self.eps
    }

    /// `kε` is bounded, i.e. `|k| < S/ε`.
    pub fn elem_bounded(&self, a: HyperElem) -> bool {
        a.0.abs() * self.eps_num < self.s() * self.eps_den
    }

    /// Largest `k` with `elem_bounded(k)`.
    pub fn bounded_max(&self) -> i128 {
        let limit = self.s() * self.eps_den;
        (limit - 1) / self.eps_num
    }

    pub fn bounded_max_elem(&self) -> HyperElem {
        HyperElem(self.bounded_max())
    }

    /// `R_b`, ascending.
    pub fn bounded_elements(&self) -> impl Iterator<Item = HyperElem> {
        let m = self.bounded_max();
        (-m..=m).map(HyperElem)
    }

    /// Smallest `|Δk|` that breaks indiscernibility, `⌈1/(Sε)⌉`.
    pub fn rho_span(&self) -> i128 {
        let d = self.s() * self.eps_num;
        (self.eps_den + d - 1) / d
    }

    /// `kε ≈ mε`: the difference is infinitesimal.
    pub fn rho(&self, a: HyperElem, b: HyperElem) -> bool {
        (a.0 - b.0).abs() * self.s() * self.eps_num < self.eps_den
    }

    /// Nearest element to `q/ε`, halves away from zero. Requires `q` bounded.
    pub fn embed(&self, q: &Rat) -> Result<HyperElem, HyperError> {
        if !self.ctx.is_bounded(q) {
            return Err(NumError::Unbounded(q.clone()).into());
        }
        self.embed_unchecked(q)
    }

    /// Like [`HyperParams::embed`] without the boundedness requirement; still must land in `r`.
    pub fn embed_unchecked(&self, q: &Rat) -> Result<HyperElem, HyperError> {
        let k = q.checked_div(&self.eps)?.round_half_away();
        let k = k.to_i128().ok_or_else(|| HyperError::OutOfRange(k.to_string()))?;
        self.elem(k)
    }

    /// `st(kε)` for bounded `k`.
    pub fn project(&self, a: HyperElem) -> Result<Rat, HyperError> {
        if !self.elem_bounded(a) {
            return Err(HyperError::UnboundedElem(a.0));
        }
        Ok(self.ctx.st(&self.value(a))?)
    }

    /// A greedy net of `R_b`: scanning upward, keep an element once it is at least one
    /// `rho_span` above the last kept one.
    pub fn select_representatives(&self) -> Vec<HyperElem> {
        let m = self.bounded_max();
        let step = self.rho_span();
        let mut reps = Vec::new();
        let mut k = -m;
        while k <= m {
            reps.push(HyperElem(k));
            k += step;
        }
        reps
    }

    /// The representative a bounded element falls to in a net from
    /// [`HyperParams::select_representatives`].
    pub fn representative_of(&self, reps: &[HyperElem], a: HyperElem) -> Option<HyperElem> {
        let i = reps.partition_point(|r| r.0 <= a.0);
        let r = *reps.get(i.checked_sub(1)?)?;
        self.rho(r, a).then_some(r)
    }
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "omega={} eps={} S={}", self.omega, self.eps, self.ctx.threshold())
    }
}

/// Exact algebraic laws probed by [`search_counterexample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    /// `(a⊙b)⊙c = a⊙(b⊙c)`
    MulAssoc,
    /// `a⊙(b⊕c) = (a⊙b)⊕(a⊙c)`
    Distrib,
    /// `(a⊕b)⊕c = a⊕(b⊕c)`
    AddAssoc,
}

impl Law {
    /// Both sides of the law at `(a, b, c)`.
    pub fn sides(self, p: &HyperParams, a: HyperElem, b: HyperElem, c: HyperElem) -> (HyperElem, HyperElem) {
        match self {
            Law::MulAssoc => (p.hmul(p.hmul(a, b), c), p.hmul(a, p.hmul(b, c))),
            Law::Distrib => (p.hmul(a, p.hadd(b, c)), p.hadd(p.hmul(a, b), p.hmul(a, c))),
            Law::AddAssoc => (p.hadd(p.hadd(a, b), c), p.hadd(a, p.hadd(b, c))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub law: Law,
    pub triple: [HyperElem; 3],
    pub lhs: HyperElem,
    pub rhs: HyperElem,
}

impl Witness {
    /// Recomputes both sides from scratch.
    pub fn verify(&self, p: &HyperParams) -> bool {
        let [a, b, c] = self.triple;
        let (l, r) = self.law.sides(p, a, b, c);
        l == self.lhs && r == self.rhs && l != r
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SearchOutcome {
    Found(Witness),
    /// Every triple of `r` was checked.
    Holds { probes: u64 },
    /// The probe budget ran out without a violation.
    BudgetExhausted { probes: u64 },
}

/// Looks for a triple violating `law` exactly. Enumerates `r³` when it fits in `budget`,
/// otherwise samples `budget` triples uniformly from `r³` across deterministic shards.
pub fn search_counterexample(law: Law, p: &HyperParams, budget: u64, seed: u64) -> SearchOutcome {
    let n = p.modulus() as u128;
    if n.pow(3) <= u128::from(budget) {
        for a in p.elements() {
            for b in p.elements() {
                for c in p.elements() {
                    let (lhs, rhs) = law.sides(p, a, b, c);
                    if lhs != rhs {
                        return SearchOutcome::Found(Witness { law, triple: [a, b, c], lhs, rhs });
                    }
                }
            }
        }
        return SearchOutcome::Holds { probes: n.pow(3) as u64 };
    }
    let w = p.omega;
    let hit = shard::first_hit(seed, budget, |rng, count| {
        (0..count).find_map(|_| {
            let t = [0; 3].map(|_: i32| HyperElem(rng.gen_range(-w..=w)));
            let (lhs, rhs) = law.sides(p, t[0], t[1], t[2]);
            (lhs != rhs).then_some(Witness { law, triple: t, lhs, rhs })
        })
    });
    match hit {
        Some(wit) => SearchOutcome::Found(wit),
        None => SearchOutcome::BudgetExhausted { probes: budget },
    }
}

/// `q` as `k` with `kε = q`, if exact.
pub fn exact_index(p: &HyperParams, q: &Rat) -> Option<i128> {
    let k = q.checked_div(p.eps()).ok()?;
    k.denom().is_one().then(|| k.numer().to_i128()).flatten()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tiny() -> HyperParams {
        Preset::Tiny.params()
    }

    fn e(k: i128) -> HyperElem {
        HyperElem(k)
    }

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn presets_validate() {
        let t = tiny();
        assert_eq!(t.omega(), 2048);
        assert_eq!(t.bounded_max(), 255);
        assert_eq!(t.rho_span(), 16);
        let f = Preset::Fine.params();
        assert_eq!(f.bounded_max(), (1 << 30) - 1);
        assert_eq!(f.rho_span(), 1 << 10);
    }

    #[test]
    fn invalid_params_name_the_invariant() {
        let c = FeasibilityContext::new(4).unwrap();
        let err = HyperParams::new(BigInt::from(2048), r("1/4"), c).unwrap_err();
        assert!(err.to_string().contains("eps < 1/S"), "{err}");
        let err = HyperParams::new(BigInt::from(256), r("1/64"), c).unwrap_err();
        assert!(err.to_string().contains("omega*eps > S"), "{err}");
        assert!(HyperParams::new(BigInt::from(0), r("1/64"), c).is_err());
        assert!(HyperParams::new(BigInt::from(2048), r("-1/64"), c).is_err());
        assert!(HyperParams::new(BigInt::from(1u128 << 70), r("1/64"), c).is_err());
    }

    #[test]
    fn hadd_examples() {
        let p = tiny();
        assert_eq!(p.hadd(e(3), e(5)), e(8));
        assert_eq!(p.hadd(e(2048), e(1)), e(-2048));
        assert_eq!(p.hadd(e(-2048), e(-1)), e(2048));
        assert_eq!(p.hadd(e(77), p.hneg(e(77))), e(0));
    }

    #[test]
    fn hmul_examples() {
        let p = tiny();
        assert_eq!(p.hmul(e(64), e(64)), e(64));
        assert_eq!(p.hmul(e(96), e(96)), e(144));
        assert_eq!(p.hmul(e(0), e(1234)), e(0));
        // Floor goes toward -infinity for negative products.
        assert_eq!(p.hmul(e(1), e(-1)), e(-1));
        // 2048 * 2048 / 64 = 65536 = 16 * 4097 - 16
        assert_eq!(p.hmul(e(2048), e(2048)), e(-16));
    }

    #[test]
    fn boundedness_and_rho_boundaries() {
        let p = tiny();
        assert!(p.elem_bounded(e(255)));
        assert!(p.elem_bounded(e(-255)));
        assert!(!p.elem_bounded(e(256)));
        assert!(p.elem_bounded(e(0)));
        assert!(p.rho(e(0), e(15)));
        assert!(!p.rho(e(0), e(16)));
        assert!(p.rho(e(-9), e(-9)));
    }

    #[test]
    fn embed_and_project() {
        let p = tiny();
        assert_eq!(p.embed(&r("1/2")).unwrap(), e(32));
        assert_eq!(p.embed(&Rat::zero()).unwrap(), e(0));
        assert_eq!(p.embed(&r("1/3")).unwrap(), e(21));
        assert_eq!(p.embed(&r("1/128")).unwrap(), e(1));
        assert_eq!(p.embed(&r("-1/128")).unwrap(), e(-1));
        assert!(p.embed(&r("4")).is_err());
        assert_eq!(p.embed_unchecked(&r("4")).unwrap(), e(256));
        assert!(p.embed_unchecked(&r("100")).is_err());
        assert_eq!(p.project(e(64)).unwrap(), Rat::one());
        assert_eq!(p.project(e(0)).unwrap(), Rat::zero());
        assert_eq!(p.project(e(96)).unwrap(), r("3/2"));
        assert!(matches!(p.project(e(256)), Err(HyperError::UnboundedElem(256))));
    }

    #[test]
    fn net_examples() {
        let p = tiny();
        let net = p.select_representatives();
        assert_eq!(&net[..3], &[e(-255), e(-239), e(-223)]);
        assert_eq!(net.len(), 32);
        for a in p.bounded_elements() {
            let rep = p.representative_of(&net, a).expect("covered");
            assert!((rep.k() - a.k()).abs() < 16);
        }
    }

    #[test]
    fn the_three_three_two_thousand_triple() {
        let p = tiny();
        let (l, r) = Law::MulAssoc.sides(&p, e(3), e(3), e(2000));
        assert_eq!((l, r), (e(0), e(4)));
    }

    #[test]
    fn searches() {
        let p = tiny();
        match search_counterexample(Law::MulAssoc, &p, 1_000_000, 1) {
            SearchOutcome::Found(w) => assert!(w.verify(&p)),
            other => panic!("{other:?}"),
        }
        match search_counterexample(Law::Distrib, &p, 1_000_000, 1) {
            SearchOutcome::Found(w) => assert!(w.verify(&p)),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            search_counterexample(Law::AddAssoc, &p, 100_000, 1),
            SearchOutcome::BudgetExhausted { probes: 100_000 }
        );
    }

    #[test]
    fn exhaustive_search_on_small_ring() {
        let c = FeasibilityContext::new(2).unwrap();
        let p = HyperParams::new(BigInt::from(12), r("1/4"), c).unwrap();
        assert_eq!(
            search_counterexample(Law::AddAssoc, &p, 1 << 20, 0),
            SearchOutcome::Holds { probes: 25 * 25 * 25 }
        );
        assert!(matches!(search_counterexample(Law::MulAssoc, &p, 1 << 20, 0), SearchOutcome::Found(_)));
    }

    #[test]
    fn search_is_seed_deterministic() {
        let p = tiny();
        let a = search_counterexample(Law::Distrib, &p, 10_000, 42);
        let b = search_counterexample(Law::Distrib, &p, 10_000, 42);
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn embed_is_sign_symmetric(n in -255i64..=255, d in 1i64..200) {
            let p = tiny();
            let q = Rat::new(n, d).unwrap();
            prop_assume!(p.ctx().is_bounded(&q));
            prop_assert_eq!(p.embed(&-&q).unwrap(), p.hneg(p.embed(&q).unwrap()));
            let k = p.embed(&q).unwrap();
            prop_assert!((&p.value(k) - &q).abs() <= Rat::new(1, 128).unwrap());
        }

        #[test]
        fn fine_group_laws(a in -(1i128 << 40)..=(1i128 << 40), b in -(1i128 << 40)..=(1i128 << 40),
                           c in -(1i128 << 40)..=(1i128 << 40)) {
            let p = Preset::Fine.params();
            let (a, b, c) = (e(a), e(b), e(c));
            prop_assert_eq!(p.hadd(p.hadd(a, b), c), p.hadd(a, p.hadd(b, c)));
            prop_assert_eq!(p.hadd(a, b), p.hadd(b, a));
            prop_assert_eq!(p.hmul(a, b), p.hmul(b, a));
        }
    }
}
