//! A small binary floating-point format, used to show the law violations that `R(ω,ε)` avoids.
//!
//! Values are `±m·2^e` with a `p`-bit normalized mantissa `m` and the leading bit's exponent in
//! `[emin, emax]`. Rounding is to nearest with ties to even. There are no subnormals,
//! infinities or NaNs: magnitudes below `2^emin` round to `0` or `2^emin` (the exact midpoint
//! goes to `0`), and results beyond the largest finite value are an error.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::hyperarith::{HyperElem, HyperError, HyperParams};
use crate::numbers::Rat;
use crate::shard;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FpError {
    #[error("invalid format: {0}")]
    Format(String),
    #[error("{0} overflows the format")]
    Overflow(Rat),
    #[error("absorption triple needs emin <= -{p} and emax >= 0")]
    NoAbsorption { p: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FpFormat {
    pub p: u32,
    pub emin: i32,
    pub emax: i32,
}

impl FpFormat {
    pub fn new(p: u32, emin: i32, emax: i32) -> Result<Self, FpError> {
        if !(2..=63).contains(&p) {
            return Err(FpError::Format(format!("precision {p} outside 2..=63")));
        }
        if emin >= emax {
            return Err(FpError::Format(format!("emin {emin} must be below emax {emax}")));
        }
        Ok(FpFormat { p, emin, emax })
    }

    /// An 8-bit mantissa with a modest exponent range.
    pub fn small() -> Self {
        FpFormat { p: 8, emin: -14, emax: 15 }
    }

    /// The binary64 precision and exponent range.
    pub fn double() -> Self {
        FpFormat { p: 53, emin: -1022, emax: 1023 }
    }

    pub fn max_finite(&self) -> Rat {
        let m = (1u64 << self.p) - 1;
        &Rat::integer(m) * &pow2(self.emax - (self.p as i32 - 1))
    }
}

impl FromStr for FpFormat {
    type Err = FpError;

    /// `p,emin,emax`
    fn from_str(s: &str) -> Result<Self, FpError> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || FpError::Format(format!("expected p,emin,emax, got '{s}'"));
        let [p, lo, hi] = parts.as_slice() else { return Err(bad()) };
        FpFormat::new(p.parse().map_err(|_| bad())?, lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?)
    }
}

impl fmt::Display for FpFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.p, self.emin, self.emax)
    }
}

/// `(-1)^neg · mant · 2^exp`; `mant` is zero or has exactly `p` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FpNum {
    pub neg: bool,
    pub mant: u64,
    pub exp: i32,
}

impl FpNum {
    pub const ZERO: FpNum = FpNum { neg: false, mant: 0, exp: 0 };

    pub fn is_zero(&self) -> bool {
        self.mant == 0
    }

    pub fn value(&self) -> Rat {
        let v = &Rat::integer(self.mant) * &pow2(self.exp);
        if self.neg {
            -v
        } else {
            v
        }
    }

    pub fn neg(self) -> FpNum {
        if self.is_zero() {
            self
        } else {
            FpNum { neg: !self.neg, ..self }
        }
    }
}

impl fmt::Display for FpNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value().fmt(f)
    }
}

fn pow2(e: i32) -> Rat {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rat::integer(p)
    } else {
        Rat::new(1, p).expect("nonzero")
    }
}

/// `floor(log2 a)` for `a > 0`.
fn floor_log2(a: &Rat) -> i64 {
    let (n, d) = (a.numer(), a.denom());
    let e = n.bits() as i64 - d.bits() as i64;
    if a < &pow2(e as i32) {
        e - 1
    } else {
        e
    }
}

/// Nearest representable value, ties to even mantissa.
pub fn fp_round(q: &Rat, fmt: &FpFormat) -> Result<FpNum, FpError> {
    if q.is_zero() {
        return Ok(FpNum::ZERO);
    }
    let neg = q < &Rat::zero();
    let a = q.abs();
    let p = fmt.p as i32;
    let mut e = floor_log2(&a);
    if e < i64::from(fmt.emin) {
        let half_min = pow2(fmt.emin - 1);
        let out = if a > half_min { FpNum { neg, mant: 1 << (p - 1), exp: fmt.emin - (p - 1) } } else { FpNum::ZERO };
        return Ok(out);
    }
    if e > i64::from(fmt.emax) {
        return Err(FpError::Overflow(q.clone()));
    }
    let scaled = &a * &pow2(p - 1 - e as i32);
    let (m, r) = scaled.numer().div_mod_floor(scaled.denom());
    let twice_r: BigInt = r * 2;
    let mut m = match twice_r.cmp(scaled.denom()) {
        std::cmp::Ordering::Greater => m + 1,
        std::cmp::Ordering::Equal if m.is_odd() => m + 1,
        _ => m,
    };
    if m == BigInt::one() << p {
        m = BigInt::one() << (p - 1);
        e += 1;
    }
    if e > i64::from(fmt.emax) {
        return Err(FpError::Overflow(q.clone()));
    }
    let mant = m.abs().to_u64().expect("p <= 63 bits");
    Ok(FpNum { neg, mant, exp: e as i32 - (p - 1) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FpOp {
    Add,
    Mul,
}

/// The exact result of `a op b`, rounded once.
pub fn fp_arith(op: FpOp, a: FpNum, b: FpNum, fmt: &FpFormat) -> Result<FpNum, FpError> {
    let exact = match op {
        FpOp::Add => &a.value() + &b.value(),
        FpOp::Mul => &a.value() * &b.value(),
    };
    fp_round(&exact, fmt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FpLaw {
    /// `(a+b)+c = a+(b+c)`
    AddAssoc,
    /// `a·(b+c) = a·b + a·c`
    Distrib,
}

/// One rounded operation with its exact input and output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FpStep {
    pub expr: String,
    pub exact: Rat,
    pub rounded: FpNum,
    pub rounded_value: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FpWitness {
    pub law: FpLaw,
    pub format: FpFormat,
    pub triple: [FpNum; 3],
    pub values: [Rat; 3],
    pub steps: Vec<FpStep>,
    pub lhs: Rat,
    pub rhs: Rat,
}

impl FpWitness {
    pub fn violates(&self) -> bool {
        self.lhs != self.rhs
    }
}

struct Trace<'a> {
    fmt: &'a FpFormat,
    steps: Vec<FpStep>,
}

impl Trace<'_> {
    fn op(&mut self, op: FpOp, a: (&str, FpNum), b: (&str, FpNum)) -> Result<(String, FpNum), FpError> {
        let sym = if op == FpOp::Add { "+" } else { "*" };
        let expr = format!("({} {sym} {})", a.0, b.0);
        let exact = match op {
            FpOp::Add => &a.1.value() + &b.1.value(),
            FpOp::Mul => &a.1.value() * &b.1.value(),
        };
        let rounded = fp_round(&exact, self.fmt)?;
        self.steps.push(FpStep { expr: expr.clone(), exact, rounded, rounded_value: rounded.value() });
        Ok((expr, rounded))
    }
}

/// Evaluates both sides of `law` at `t`, recording every intermediate value.
pub fn evaluate_law(law: FpLaw, t: [FpNum; 3], fmt: &FpFormat) -> Result<FpWitness, FpError> {
    let mut tr = Trace { fmt, steps: Vec::new() };
    let [a, b, c] = [("a", t[0]), ("b", t[1]), ("c", t[2])];
    let (lhs, rhs) = match law {
        FpLaw::AddAssoc => {
            let ab = tr.op(FpOp::Add, a, b)?;
            let l = tr.op(FpOp::Add, (&ab.0, ab.1), c)?;
            let bc = tr.op(FpOp::Add, b, c)?;
            let r = tr.op(FpOp::Add, a, (&bc.0, bc.1))?;
            (l.1, r.1)
        }
        FpLaw::Distrib => {
            let bc = tr.op(FpOp::Add, b, c)?;
            let l = tr.op(FpOp::Mul, a, (&bc.0, bc.1))?;
            let ab = tr.op(FpOp::Mul, a, b)?;
            let ac = tr.op(FpOp::Mul, a, c)?;
            let r = tr.op(FpOp::Add, (&ab.0, ab.1), (&ac.0, ac.1))?;
            (l.1, r.1)
        }
    };
    Ok(FpWitness {
        law,
        format: *fmt,
        triple: t,
        values: t.map(|x| x.value()),
        steps: tr.steps,
        lhs: lhs.value(),
        rhs: rhs.value(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum FpSearch {
    Found(FpWitness),
    BudgetExhausted { probes: u64 },
}

/// Leading-bit exponents used by the search: around 1, so sums mix magnitudes that differ by
/// about one mantissa width while every value stays below 4.
fn search_window(fmt: &FpFormat) -> (i32, i32) {
    let lo = fmt.emin.max(-(fmt.p as i32 + 2));
    let hi = fmt.emax.min(1).max(lo);
    (lo, hi)
}

fn random_num<R: Rng>(rng: &mut R, fmt: &FpFormat) -> FpNum {
    let (lo, hi) = search_window(fmt);
    let p = fmt.p;
    let mant = rng.gen_range(1u64 << (p - 1)..1u64 << p);
    let lead = rng.gen_range(lo..=hi);
    FpNum { neg: rng.gen_bool(0.5), mant, exp: lead - (p as i32 - 1) }
}

/// Random search for a triple violating `law`, split across deterministic shards.
pub fn find_fp_witness(law: FpLaw, fmt: &FpFormat, budget: u64, seed: u64) -> FpSearch {
    let hit = shard::first_hit(seed, budget, |rng, count| {
        (0..count).find_map(|_| {
            let t = [0; 3].map(|_: u8| random_num(rng, fmt));
            evaluate_law(law, t, fmt).ok().filter(FpWitness::violates)
        })
    });
    match hit {
        Some(w) => FpSearch::Found(w),
        None => FpSearch::BudgetExhausted { probes: budget },
    }
}

/// `(1, 2^-p, 2^-p)`: each small term is exactly half an ulp of 1 and is absorbed on its own,
/// while their sum is a full ulp.
pub fn absorption_triple(fmt: &FpFormat) -> Result<[FpNum; 3], FpError> {
    let p = fmt.p as i32;
    if fmt.emin > -p || fmt.emax < 0 {
        return Err(FpError::NoAbsorption { p: fmt.p });
    }
    let one = fp_round(&Rat::one(), fmt)?;
    let tiny = fp_round(&pow2(-p), fmt)?;
    Ok([one, tiny, tiny])
}

/// The witness triple carried into `R(ω,ε)` and checked for `⊕`-associativity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Contrast {
    pub embedded: [HyperElem; 3],
    pub lhs: HyperElem,
    pub rhs: HyperElem,
    pub associates: bool,
}

pub fn contrast_hadd(triple: &[FpNum; 3], p: &HyperParams) -> Result<Contrast, HyperError> {
    let e = [p.embed(&triple[0].value())?, p.embed(&triple[1].value())?, p.embed(&triple[2].value())?];
    let lhs = p.hadd(p.hadd(e[0], e[1]), e[2]);
    let rhs = p.hadd(e[0], p.hadd(e[1], e[2]));
    Ok(Contrast { embedded: e, lhs, rhs, associates: lhs == rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperarith::Preset;
    use proptest::prelude::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn fmt8() -> FpFormat {
        FpFormat::new(8, -6, 6).unwrap()
    }

    // Every representable value of a small format, with its mantissa.
    fn all_values(f: &FpFormat) -> Vec<(Rat, u64)> {
        let mut out = vec![(Rat::zero(), 0)];
        for lead in f.emin..=f.emax {
            for mant in 1u64 << (f.p - 1)..1u64 << f.p {
                let v = &Rat::integer(mant) * &pow2(lead - (f.p as i32 - 1));
                out.push((-v.clone(), mant));
                out.push((v, mant));
            }
        }
        out
    }

    // Nearest by exhaustive scan; ties prefer an even mantissa, then the smaller magnitude.
    fn oracle(q: &Rat, all: &[(Rat, u64)]) -> Rat {
        let key = |(v, m): &(Rat, u64)| ((v - q).abs(), m % 2, v.abs());
        all.iter().min_by(|a, b| key(a).cmp(&key(b))).unwrap().0.clone()
    }

    #[test]
    fn rounding_examples() {
        let f = fmt8();
        let half = fp_round(&r("1/2"), &f).unwrap();
        assert_eq!(half.value(), r("1/2"));
        let third = fp_round(&r("1/3"), &f).unwrap();
        assert_eq!(third.value(), oracle(&r("1/3"), &all_values(&f)));
        assert_eq!(third.value(), r("171/512"));
        assert!(matches!(fp_round(&Rat::integer(1000), &f), Err(FpError::Overflow(_))));
    }

    #[test]
    fn rounding_matches_exhaustive_search() {
        let f = FpFormat::new(4, -3, 3).unwrap();
        let all = all_values(&f);
        let max = f.max_finite();
        for num in -1200..=1200 {
            let q = Rat::new(num, 97).unwrap();
            if q.abs() > max {
                continue;
            }
            assert_eq!(fp_round(&q, &f).unwrap().value(), oracle(&q, &all), "{q}");
        }
    }

    #[test]
    fn arithmetic_identities_and_absorption() {
        let f = fmt8();
        let x = fp_round(&r("37/16"), &f).unwrap();
        assert_eq!(fp_arith(FpOp::Add, x, FpNum::ZERO, &f).unwrap(), x);
        let one = fp_round(&Rat::one(), &f).unwrap();
        assert_eq!(fp_arith(FpOp::Mul, one, x, &f).unwrap(), x);
        // Half an ulp of 4 is 1/64; anything below vanishes.
        let big = fp_round(&Rat::integer(4), &f).unwrap();
        let tiny = fp_round(&r("1/128"), &f).unwrap();
        assert_eq!(fp_arith(FpOp::Add, big, tiny, &f).unwrap(), big);
    }

    #[test]
    fn absorption_breaks_associativity() {
        for f in [FpFormat::small(), FpFormat::double()] {
            let t = absorption_triple(&f).unwrap();
            let w = evaluate_law(FpLaw::AddAssoc, t, &f).unwrap();
            assert!(w.violates(), "p={}", f.p);
            assert_eq!(w.lhs, Rat::one());
        }
        assert!(absorption_triple(&FpFormat::new(8, -4, 4).unwrap()).is_err());
    }

    #[test]
    fn searches_find_witnesses() {
        let f = FpFormat::small();
        for law in [FpLaw::AddAssoc, FpLaw::Distrib] {
            match find_fp_witness(law, &f, 100_000, 1) {
                FpSearch::Found(w) => {
                    assert!(w.violates());
                    assert_eq!(evaluate_law(law, w.triple, &f).unwrap(), w);
                }
                other => panic!("{law:?}: {other:?}"),
            }
        }
        assert!(matches!(find_fp_witness(FpLaw::AddAssoc, &FpFormat::double(), 100_000, 2), FpSearch::Found(_)));
    }

    #[test]
    fn witness_associates_under_hadd() {
        let p = Preset::Tiny.params();
        let f = FpFormat::small();
        let FpSearch::Found(w) = find_fp_witness(FpLaw::AddAssoc, &f, 100_000, 7) else { panic!() };
        assert!(contrast_hadd(&w.triple, &p).unwrap().associates);
        assert!(contrast_hadd(&absorption_triple(&f).unwrap(), &p).unwrap().associates);
    }

    #[test]
    fn format_parsing() {
        assert_eq!("8,-14,15".parse::<FpFormat>().unwrap(), FpFormat::small());
        assert!("8,3,3".parse::<FpFormat>().is_err());
        assert!("1,-3,3".parse::<FpFormat>().is_err());
        assert!("8,-3".parse::<FpFormat>().is_err());
    }

    fn arb_rat() -> impl Strategy<Value = Rat> {
        (-100_000i64..100_000, 1i64..5000).prop_map(|(n, d)| Rat::new(n, d).unwrap())
    }

    proptest! {
        #[test]
        fn monotone_and_symmetric(a in arb_rat(), b in arb_rat()) {
            let f = FpFormat::new(8, -6, 20).unwrap();
            let (ra, rb) = (fp_round(&a, &f).unwrap(), fp_round(&b, &f).unwrap());
            if a <= b {
                prop_assert!(ra.value() <= rb.value());
            }
            prop_assert_eq!(fp_round(&-a.clone(), &f).unwrap(), ra.neg());
        }

        #[test]
        fn operations_commute(a in arb_rat(), b in arb_rat()) {
            let f = FpFormat::new(8, -6, 40).unwrap();
            let (x, y) = (fp_round(&a, &f).unwrap(), fp_round(&b, &f).unwrap());
            for op in [FpOp::Add, FpOp::Mul] {
                prop_assert_eq!(fp_arith(op, x, y, &f), fp_arith(op, y, x, &f));
            }
        }
    }
}
