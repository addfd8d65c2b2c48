//! Hereditarily finite sets in canonical form.
//!
//! Every [`HfSet`] keeps its members sorted strictly ascending by Ackermann code, so structural
//! equality is set equality and the derived order is the order of codes. The order is computed
//! recursively (highest differing member wins), which never materializes a code.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

/// Default cap on the number of elements a single set construction may produce.
pub const DEFAULT_CONSTRUCTION_BOUND: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HfError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("construction needs {needed} elements, bound is {bound}")]
    ResourceGuard { needed: BigUint, bound: usize },
}

/// A hereditarily finite set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HfSet(Arc<Vec<HfSet>>);

/// The Ackermann image of an [`HfSet`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AckCode(pub BigUint);

/// A natural number, standing in for a von Neumann ordinal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Nat(pub BigUint);

impl From<u64> for AckCode {
    fn from(n: u64) -> Self {
        AckCode(BigUint::from(n))
    }
}

impl From<u64> for Nat {
    fn from(n: u64) -> Self {
        Nat(BigUint::from(n))
    }
}

impl fmt::Display for AckCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl HfSet {
    pub fn empty() -> Self {
        HfSet(Arc::new(Vec::new()))
    }

    /// Builds a set from arbitrary members, sorting and removing duplicates.
    pub fn from_members<I: IntoIterator<Item = HfSet>>(members: I) -> Self {
        let mut v: Vec<HfSet> = members.into_iter().collect();
        v.sort();
        v.dedup();
        HfSet(Arc::new(v))
    }

    /// Wraps members that are already strictly ascending.
    fn from_sorted_unchecked(v: Vec<HfSet>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        HfSet(Arc::new(v))
    }

    pub fn singleton(x: HfSet) -> Self {
        HfSet::from_sorted_unchecked(vec![x])
    }

    /// `{x, y}`.
    pub fn pair(x: HfSet, y: HfSet) -> Self {
        HfSet::from_members([x, y])
    }

    /// The ordered pair `{{x}, {x, y}}`.
    pub fn kpair(x: &HfSet, y: &HfSet) -> Self {
        HfSet::pair(HfSet::singleton(x.clone()), HfSet::pair(x.clone(), y.clone()))
    }

    /// Members in ascending Ackermann order.
    pub fn members(&self) -> &[HfSet] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of members, as a machine integer.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// `♯(x)`.
    pub fn size(&self) -> Nat {
        Nat(BigUint::from(self.len()))
    }

    pub fn contains(&self, y: &HfSet) -> bool {
        self.0.binary_search(y).is_ok()
    }

    /// `x ∪ {y}`.
    pub fn adjoin(&self, y: HfSet) -> HfSet {
        match self.0.binary_search(&y) {
            Ok(_) => self.clone(),
            Err(at) => {
                let mut v = Vec::with_capacity(self.len() + 1);
                v.extend_from_slice(&self.0[..at]);
                v.push(y);
                v.extend_from_slice(&self.0[at..]);
                HfSet::from_sorted_unchecked(v)
            }
        }
    }

    pub fn union(&self, other: &HfSet) -> HfSet {
        let (a, b) = (self.members(), other.members());
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push(a[i].clone());
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        HfSet::from_sorted_unchecked(out)
    }

    /// The von Neumann natural `n = {0, …, n−1}`.
    pub fn von_neumann(n: usize) -> HfSet {
        // Codes of von Neumann naturals increase with n, so pushing in order keeps the
        // member list canonical.
        let mut members: Vec<HfSet> = Vec::with_capacity(n);
        let mut current = HfSet::empty();
        for _ in 0..n {
            members.push(current.clone());
            current = HfSet::from_sorted_unchecked(members.clone());
        }
        current
    }

    /// Cartesian product `x × y` of Kuratowski pairs, refusing to build more than `bound` pairs.
    pub fn product(&self, other: &HfSet, bound: usize) -> Result<HfSet, HfError> {
        let needed = BigUint::from(self.len()) * BigUint::from(other.len());
        if needed > BigUint::from(bound) {
            return Err(HfError::ResourceGuard { needed, bound });
        }
        Ok(HfSet::from_members(
            self.members()
                .iter()
                .flat_map(|a| other.members().iter().map(move |b| HfSet::kpair(a, b))),
        ))
    }

    /// Ackermann code. Panics if some member's code does not fit in a machine word, since the
    /// result could not be stored anyway.
    pub fn ack_encode(&self) -> AckCode {
        let mut acc = BigUint::zero();
        for m in self.members() {
            let bit = m
                .ack_encode()
                .0
                .to_u64()
                .expect("Ackermann code exceeds addressable range");
            acc.set_bit(bit, true);
        }
        AckCode(acc)
    }

    /// Inverse of [`HfSet::ack_encode`]: member `i` is present iff bit `i` of `n` is set.
    pub fn ack_decode(n: &AckCode) -> HfSet {
        let bits = n.0.bits();
        let members = (0..bits)
            .filter(|&i| n.0.bit(i))
            .map(|i| HfSet::ack_decode(&AckCode::from(i)))
            .collect();
        // Bits ascend and decoding is order-preserving.
        HfSet::from_sorted_unchecked(members)
    }

    /// True when members are strictly ascending at every depth.
    pub fn is_canonical(&self) -> bool {
        self.0.windows(2).all(|w| w[0] < w[1]) && self.0.iter().all(HfSet::is_canonical)
    }

    /// Nesting depth; `∅` has rank 0.
    pub fn rank(&self) -> usize {
        self.0.iter().map(|m| m.rank() + 1).max().unwrap_or(0)
    }
}

impl Ord for HfSet {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        // Compare as binary numbers: scan from the highest member down.
        let (a, b) = (self.members(), other.members());
        let mut ia = a.iter().rev();
        let mut ib = b.iter().rev();
        loop {
            match (ia.next(), ib.next()) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(x), Some(y)) => match x.cmp(y) {
                    Ordering::Equal => continue,
                    ord => return ord,
                },
            }
        }
    }
}

impl PartialOrd for HfSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Default for HfSet {
    fn default() -> Self {
        HfSet::empty()
    }
}

impl fmt::Display for HfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.members().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for HfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses one set literal starting at `*pos`, skipping whitespace.
pub(crate) fn parse_literal_at(src: &str, pos: &mut usize) -> Result<HfSet, HfError> {
    let bytes = src.as_bytes();
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    skip_ws(pos);
    if bytes.get(*pos) != Some(&b'{') {
        return Err(HfError::Parse { pos: *pos, msg: "expected '{'".into() });
    }
    *pos += 1;
    let mut members = Vec::new();
    skip_ws(pos);
    if bytes.get(*pos) == Some(&b'}') {
        *pos += 1;
        return Ok(HfSet::empty());
    }
    loop {
        members.push(parse_literal_at(src, pos)?);
        skip_ws(pos);
        match bytes.get(*pos) {
            Some(b',') => *pos += 1,
            Some(b'}') => {
                *pos += 1;
                return Ok(HfSet::from_members(members));
            }
            Some(_) => {
                return Err(HfError::Parse { pos: *pos, msg: "expected ',' or '}'".into() })
            }
            None => return Err(HfError::Parse { pos: *pos, msg: "unterminated set".into() }),
        }
    }
}

impl FromStr for HfSet {
    type Err = HfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut pos = 0;
        let set = parse_literal_at(s, &mut pos)?;
        if s[pos..].trim().is_empty() {
            Ok(set)
        } else {
            let offset = s[pos..].len() - s[pos..].trim_start().len();
            Err(HfError::Parse { pos: pos + offset, msg: "trailing input".into() })
        }
    }
}

fn nat_to_usize(x: &Nat, bound: usize) -> Result<usize, HfError> {
    x.0.to_usize()
        .filter(|&n| n <= bound)
        .ok_or_else(|| HfError::ResourceGuard { needed: x.0.clone(), bound })
}

/// `x + y = ♯(x ∪ {0}×y)`, computed on materialized von Neumann sets.
pub fn nat_add(x: &Nat, y: &Nat, bound: usize) -> Result<Nat, HfError> {
    let total = &x.0 + &y.0;
    if total > BigUint::from(bound) {
        return Err(HfError::ResourceGuard { needed: total, bound });
    }
    let xs = HfSet::von_neumann(nat_to_usize(x, bound)?);
    let ys = HfSet::von_neumann(nat_to_usize(y, bound)?);
    let zero = HfSet::singleton(HfSet::empty());
    let tagged = zero.product(&ys, bound)?;
    Ok(xs.union(&tagged).size())
}

/// `x · y = ♯(x × y)`.
pub fn nat_mul(x: &Nat, y: &Nat, bound: usize) -> Result<Nat, HfError> {
    let xs = HfSet::von_neumann(nat_to_usize(x, bound)?);
    let ys = HfSet::von_neumann(nat_to_usize(y, bound)?);
    Ok(xs.product(&ys, bound)?.size())
}
