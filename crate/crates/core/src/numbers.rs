//! Integers and rationals in set-theoretic dress, plus a finite model of smallness.
//!
//! [`Int`] mirrors the two-branch representation `ℤ = {0}×ℕ ∪ ℕ×{0}`; [`Rat`] is a reduced
//! fraction with positive denominator. [`FeasibilityContext`] fixes a threshold `S` that stands
//! in for the class of small numbers: `n` is small iff `n ≤ S`, a rational is bounded iff its
//! magnitude is below `S`, and infinitesimal iff its magnitude is below `1/S`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("inverse of zero")]
    InverseOfZero,
    #[error("{0} is not bounded")]
    Unbounded(Rat),
    #[error("invalid number literal '{0}'")]
    Literal(String),
    #[error("smallness threshold must be at least 2, got {0}")]
    Threshold(u64),
}

/// An integer as one of the two branches `⟨n,0⟩` (nonnegative) or `⟨0,n⟩` with `n > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Int {
    NonNeg(BigUint),
    Neg(BigUint),
}

impl Int {
    pub fn zero() -> Self {
        Int::NonNeg(BigUint::zero())
    }

    /// The pair of naturals this integer is tagged with.
    pub fn as_pair(&self) -> (BigUint, BigUint) {
        match self {
            Int::NonNeg(n) => (n.clone(), BigUint::zero()),
            Int::Neg(n) => (BigUint::zero(), n.clone()),
        }
    }

    pub fn to_bigint(&self) -> BigInt {
        match self {
            Int::NonNeg(n) => BigInt::from_biguint(Sign::Plus, n.clone()),
            Int::Neg(n) => BigInt::from_biguint(Sign::Minus, n.clone()),
        }
    }

    pub fn add(&self, other: &Int) -> Int {
        Int::from(self.to_bigint() + other.to_bigint())
    }

    pub fn mul(&self, other: &Int) -> Int {
        Int::from(self.to_bigint() * other.to_bigint())
    }

    pub fn neg(&self) -> Int {
        Int::from(-self.to_bigint())
    }
}

impl From<BigInt> for Int {
    fn from(v: BigInt) -> Self {
        let (sign, mag) = v.into_parts();
        match sign {
            Sign::Minus => Int::Neg(mag),
            _ => Int::NonNeg(mag),
        }
    }
}

impl From<i64> for Int {
    fn from(v: i64) -> Self {
        Int::from(BigInt::from(v))
    }
}

impl Ord for Int {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Int::NonNeg(a), Int::NonNeg(b)) => a.cmp(b),
            (Int::Neg(a), Int::Neg(b)) => b.cmp(a),
            (Int::Neg(_), Int::NonNeg(_)) => Ordering::Less,
            (Int::NonNeg(_), Int::Neg(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for Int {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Int::NonNeg(n) => write!(f, "{n}"),
            Int::Neg(n) => write!(f, "-{n}"),
        }
    }
}

/// An exact rational in lowest terms with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rat {
    num: BigInt,
    den: BigInt,
}

impl Rat {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Rat, NumError> {
        let (num, den) = (num.into(), den.into());
        if den.is_zero() {
            return Err(NumError::ZeroDenominator);
        }
        Ok(Rat::reduce(num, den))
    }

    fn reduce(mut num: BigInt, mut den: BigInt) -> Rat {
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        let g = num.gcd(&den);
        if !g.is_one() && !g.is_zero() {
            num /= &g;
            den /= &g;
        }
        Rat { num, den }
    }

    pub fn zero() -> Rat {
        Rat { num: BigInt::zero(), den: BigInt::one() }
    }

    pub fn one() -> Rat {
        Rat::integer(1)
    }

    pub fn integer(n: impl Into<BigInt>) -> Rat {
        Rat { num: n.into(), den: BigInt::one() }
    }

    /// `1/n`.
    pub fn recip_of(n: impl Into<BigInt>) -> Result<Rat, NumError> {
        Rat::new(1, n)
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    /// Numerator in the tagged integer representation.
    pub fn numer_int(&self) -> Int {
        Int::from(self.num.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one()
    }

    pub fn abs(&self) -> Rat {
        Rat { num: self.num.abs(), den: self.den.clone() }
    }

    pub fn inv(&self) -> Result<Rat, NumError> {
        if self.is_zero() {
            return Err(NumError::InverseOfZero);
        }
        Ok(Rat::reduce(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, other: &Rat) -> Result<Rat, NumError> {
        Ok(self * &other.inv()?)
    }

    /// Greatest integer not above `self`.
    pub fn floor(&self) -> BigInt {
        self.num.div_floor(&self.den)
    }

    pub fn ceil(&self) -> BigInt {
        -((-self).floor())
    }

    /// Nearest integer, halves rounded away from zero.
    pub fn round_half_away(&self) -> BigInt {
        let twice: BigInt = &self.num * 2;
        let mag = (twice.abs() + &self.den).div_floor(&(&self.den * 2));
        if self.num.is_negative() {
            -mag
        } else {
            mag
        }
    }

    /// Exact decimal expansion; a repeating block is wrapped in brackets, e.g. `0.1[6]`.
    pub fn to_decimal(&self) -> String {
        let neg = self.num.is_negative();
        let mag = self.num.abs();
        let (int_part, mut rem) = mag.div_rem(&self.den);
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&int_part.to_string());
        if rem.is_zero() {
            return out;
        }
        out.push('.');
        let mut digits = String::new();
        let mut seen: std::collections::HashMap<BigInt, usize> = Default::default();
        while !rem.is_zero() {
            if let Some(&start) = seen.get(&rem) {
                digits.insert(start, '[');
                digits.push(']');
                break;
            }
            seen.insert(rem.clone(), digits.len());
            rem *= 10;
            let (d, r) = rem.div_rem(&self.den);
            digits.push_str(&d.to_string());
            rem = r;
        }
        out.push_str(&digits);
        out
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Rat {
    type Output = Rat;
    fn add(self, rhs: &Rat) -> Rat {
        Rat::reduce(&self.num * &rhs.den + &rhs.num * &self.den, &self.den * &rhs.den)
    }
}

impl Sub for &Rat {
    type Output = Rat;
    fn sub(self, rhs: &Rat) -> Rat {
        Rat::reduce(&self.num * &rhs.den - &rhs.num * &self.den, &self.den * &rhs.den)
    }
}

impl Mul for &Rat {
    type Output = Rat;
    fn mul(self, rhs: &Rat) -> Rat {
        Rat::reduce(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat { num: -&self.num, den: self.den.clone() }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat { num: -self.num, den: self.den }
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::integer(n)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Rat {
    type Err = NumError;

    /// Accepts `n`, `-n`, `p/q` and `-p/q`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NumError::Literal(s.to_string());
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let digits_ok = |x: &str| {
            let x = x.strip_prefix('-').unwrap_or(x);
            !x.is_empty() && x.bytes().all(|b| b.is_ascii_digit())
        };
        if !digits_ok(n) || !d.bytes().all(|b| b.is_ascii_digit()) || d.is_empty() {
            return Err(bad());
        }
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        Rat::new(n, d)
    }
}

impl serde::Serialize for Rat {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Threshold `S` modeling the boundary of the small naturals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeasibilityContext {
    s: u64,
}

impl FeasibilityContext {
    pub fn new(s: u64) -> Result<Self, NumError> {
        if s < 2 {
            return Err(NumError::Threshold(s));
        }
        Ok(FeasibilityContext { s })
    }

    pub fn threshold(&self) -> u64 {
        self.s
    }

    pub fn is_small(&self, n: &BigUint) -> bool {
        *n <= BigUint::from(self.s)
    }

    /// `|q| < S`.
    pub fn is_bounded(&self, q: &Rat) -> bool {
        q.num.abs() < &q.den * self.s
    }

    /// `|q| < 1/S`.
    pub fn is_infinitesimal(&self, q: &Rat) -> bool {
        q.num.abs() * self.s < q.den
    }

    /// Standard rationals of the model: `|p| ≤ S` and `q ≤ S`.
    pub fn is_standard(&self, q: &Rat) -> bool {
        q.num.abs() <= BigInt::from(self.s) && q.den <= BigInt::from(self.s)
    }

    /// Standard part as the identity embedding; defined on bounded rationals only.
    pub fn st(&self, q: &Rat) -> Result<Rat, NumError> {
        if self.is_bounded(q) {
            Ok(q.clone())
        } else {
            Err(NumError::Unbounded(q.clone()))
        }
    }

    /// Equality of standard parts: `a − b` is infinitesimal.
    pub fn close(&self, a: &Rat, b: &Rat) -> bool {
        self.is_infinitesimal(&(a - b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn ctx(s: u64) -> FeasibilityContext {
        FeasibilityContext::new(s).unwrap()
    }

    fn lowest(q: &Rat) -> bool {
        q.denom().is_positive() && q.numer().gcd(q.denom()).is_one()
            || (q.is_zero() && q.denom().is_one())
    }

    #[test]
    fn int_examples() {
        let a = Int::Neg(BigUint::from(3u8));
        let b = Int::NonNeg(BigUint::from(5u8));
        assert_eq!(a.add(&b), Int::NonNeg(BigUint::from(2u8)));
        assert_eq!(a.mul(&Int::zero()), Int::zero());
        assert_eq!(Int::from(-1).cmp(&Int::from(1)), Ordering::Less);
        assert_eq!(Int::from(0).as_pair(), (BigUint::zero(), BigUint::zero()));
        assert_eq!(Int::from(-2).as_pair(), (BigUint::zero(), BigUint::from(2u8)));
        assert_eq!(Int::from(0).neg(), Int::zero());
    }

    #[test]
    fn rat_examples() {
        assert_eq!(&r("1/2") + &r("1/3"), r("5/6"));
        assert_eq!(&r("2/3") * &r("3/2"), r("1"));
        assert_eq!(Rat::zero().inv(), Err(NumError::InverseOfZero));
        assert_eq!(Rat::new(4, -6).unwrap(), r("-2/3"));
        assert!(matches!("1/0".parse::<Rat>(), Err(NumError::ZeroDenominator)));
        assert!("x/2".parse::<Rat>().is_err());
        assert!("1/-2".parse::<Rat>().is_err());
    }

    #[test]
    fn rounding() {
        assert_eq!(r("7/2").round_half_away(), BigInt::from(4));
        assert_eq!(r("-7/2").round_half_away(), BigInt::from(-4));
        assert_eq!(r("64/3").round_half_away(), BigInt::from(21));
        assert_eq!(r("-1/3").floor(), BigInt::from(-1));
        assert_eq!(r("-1/3").ceil(), BigInt::from(0));
    }

    #[test]
    fn decimal_printing() {
        assert_eq!(r("1/2").to_decimal(), "0.5");
        assert_eq!(r("1/3").to_decimal(), "0.[3]");
        assert_eq!(r("1/6").to_decimal(), "0.1[6]");
        assert_eq!(r("-22/7").to_decimal(), "-3.[142857]");
        assert_eq!(r("5").to_decimal(), "5");
    }

    #[test]
    fn feasibility_examples() {
        let c = ctx(4);
        assert!(c.is_small(&BigUint::from(0u8)));
        assert!(c.is_small(&BigUint::from(4u8)));
        assert!(!c.is_small(&BigUint::from(5u8)));
        assert!(c.is_bounded(&r("7/2")));
        assert!(!c.is_bounded(&r("4")));
        assert!(c.is_bounded(&Rat::zero()));
        assert!(c.is_infinitesimal(&Rat::zero()));
        assert!(c.is_infinitesimal(&r("1/5")));
        assert!(!c.is_infinitesimal(&r("1/4")));
        assert_eq!(c.st(&r("1/2")).unwrap(), r("1/2"));
        assert!(matches!(c.st(&r("5")), Err(NumError::Unbounded(_))));
        assert!(c.close(&r("1/2"), &r("33/64")));
        assert!(FeasibilityContext::new(1).is_err());
    }

    #[test]
    fn standard_extremes() {
        let c = ctx(4);
        assert!(c.is_standard(&r("-4/3")));
        assert!(!c.is_standard(&r("1/5")));
        assert!(!c.is_standard(&r("5")));
    }

    #[test]
    fn kernel_of_st_is_infinitesimals() {
        let c = ctx(4);
        for a in -40i64..=40 {
            for b in -40i64..=40 {
                let (x, y) = (Rat::new(a, 32).unwrap(), Rat::new(b, 32).unwrap());
                assert_eq!(c.close(&x, &y), c.is_infinitesimal(&(&x - &y)));
            }
        }
    }

    fn small_rat() -> impl Strategy<Value = Rat> {
        (-2000i64..2000, 1i64..500).prop_map(|(n, d)| Rat::new(n, d).unwrap())
    }

    proptest! {
        #[test]
        fn results_in_lowest_terms(a in small_rat(), b in small_rat()) {
            prop_assert!(lowest(&(&a + &b)));
            prop_assert!(lowest(&(&a - &b)));
            prop_assert!(lowest(&(&a * &b)));
            prop_assert!(lowest(&-&a));
            if let Ok(i) = a.inv() {
                prop_assert!(lowest(&i));
                prop_assert_eq!(&a * &i, Rat::one());
            }
        }

        #[test]
        fn parse_print_roundtrip(a in small_rat()) {
            prop_assert_eq!(a.to_string().parse::<Rat>().unwrap(), a);
        }

        #[test]
        fn graded_ideal(an in -1000i64..1000, bn in -1000i64..1000) {
            // |a| < 1/S² and |b| < S imply |ab| < 1/S at S = 8.
            let c = ctx(8);
            let a = Rat::new(an, 64_000).unwrap();
            let b = Rat::new(bn, 125).unwrap();
            prop_assume!(a.abs() < Rat::new(1, 64).unwrap() && c.is_bounded(&b));
            prop_assert!(c.is_infinitesimal(&(&a * &b)));
        }

        #[test]
        fn st_is_a_homomorphism(a in small_rat(), b in small_rat()) {
            let c = ctx(1 << 12);
            prop_assume!(c.is_bounded(&a) && c.is_bounded(&b));
            let sum = &a + &b;
            let prod = &a * &b;
            prop_assume!(c.is_bounded(&sum) && c.is_bounded(&prod));
            prop_assert_eq!(c.st(&sum).unwrap(), &c.st(&a).unwrap() + &c.st(&b).unwrap());
            prop_assert_eq!(c.st(&prod).unwrap(), &c.st(&a).unwrap() * &c.st(&b).unwrap());
        }

        #[test]
        fn close_is_reflexive_symmetric_and_doubly_transitive(
            a in small_rat(), b in small_rat(), d in small_rat()
        ) {
            let c = ctx(4);
            prop_assert!(c.close(&a, &a));
            prop_assert_eq!(c.close(&a, &b), c.close(&b, &a));
            if c.close(&a, &b) && c.close(&b, &d) {
                prop_assert!((&a - &d).abs() < Rat::new(2, 4).unwrap());
            }
        }
    }
}
