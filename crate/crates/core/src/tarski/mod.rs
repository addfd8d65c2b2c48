//! Coded `∈`-formulas, satisfaction over finite structures, and definable closure.
//!
//! Formulas are coded as sequences of naturals in prefix order. The alphabet is
//!
//! | code       | symbol                                   |
//! |------------|------------------------------------------|
//! | 0          | `=`                                      |
//! | 1          | `∈`                                      |
//! | 2          | `¬`                                      |
//! | 3, 4, 5, 6 | `∨`, `∧`, `→`, `↔`                       |
//! | 7, 8       | `∃`, `∀` (followed by a variable code)    |
//! | 9 + 2i     | variable `v_i`                           |
//! | 10 + 2a    | the set parameter with Ackermann code `a` |
//!
//! Every connective has fixed arity, so no punctuation is needed: `⌈∅ = ∅⌉` is `[0, 10, 10]`.

mod corpus;
mod define;
mod truth;

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::formulas::parse::{Cursor, Tok};
use crate::formulas::{FormulaError, Quant};
use crate::hfset::{AckCode, HfError, HfSet};

pub use corpus::random_corpus;
pub use define::{
    def_closure, def_closure_with, definable_sets, elementary_check, is_closed, Closure, DefConfig,
    Definition, ElementaryReport,
};
pub use truth::{satisfies, truth, truth_with, Strategy};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TarskiError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("malformed code sequence at position {at}: {msg}")]
    Malformed { at: usize, msg: String },
    #[error("formula is not closed: v{0} is free")]
    Open(u32),
    #[error("parameter {0} is not in the structure")]
    ForeignParameter(HfSet),
    #[error("structure file line {line}: {source}")]
    Structure { line: usize, source: HfError },
    #[error("universe bound must be between 1 and {max}, got {got}")]
    Bound { got: u64, max: u64 },
    #[error("table of {needed} entries exceeds the limit of {limit}")]
    TooLarge { needed: u128, limit: u128 },
    #[error("enumeration budget exhausted at code length {len}")]
    Budget { len: usize },
    #[error("i/o: {0}")]
    Io(String),
}

impl From<FormulaError> for TarskiError {
    fn from(e: FormulaError) -> Self {
        match e {
            FormulaError::Syntax { pos, msg } => TarskiError::Syntax { pos, msg },
            other => TarskiError::Syntax { pos: 0, msg: other.to_string() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Arg {
    Var(u32),
    Param(HfSet),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Conn {
    Or,
    And,
    Implies,
    Iff,
}

impl Conn {
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            Conn::Or => a || b,
            Conn::And => a && b,
            Conn::Implies => !a || b,
            Conn::Iff => a == b,
        }
    }

    const ALL: [Conn; 4] = [Conn::Or, Conn::And, Conn::Implies, Conn::Iff];
}

/// Source-level `∈`-formula with set parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EForm {
    Eq(Arg, Arg),
    In(Arg, Arg),
    Not(Box<EForm>),
    Bin(Conn, Box<EForm>, Box<EForm>),
    Quant(Quant, u32, Box<EForm>),
}

impl EForm {
    pub fn not(f: EForm) -> EForm {
        EForm::Not(Box::new(f))
    }

    pub fn bin(c: Conn, a: EForm, b: EForm) -> EForm {
        EForm::Bin(c, Box::new(a), Box::new(b))
    }

    pub fn exists(v: u32, f: EForm) -> EForm {
        EForm::Quant(Quant::Exists, v, Box::new(f))
    }

    pub fn forall(v: u32, f: EForm) -> EForm {
        EForm::Quant(Quant::Forall, v, Box::new(f))
    }

    pub fn free_vars(&self) -> BTreeSet<u32> {
        fn go(f: &EForm, bound: &mut Vec<u32>, out: &mut BTreeSet<u32>) {
            match f {
                EForm::Eq(a, b) | EForm::In(a, b) => {
                    for x in [a, b] {
                        if let Arg::Var(v) = x {
                            if !bound.contains(v) {
                                out.insert(*v);
                            }
                        }
                    }
                }
                EForm::Not(g) => go(g, bound, out),
                EForm::Bin(_, g, h) => {
                    go(g, bound, out);
                    go(h, bound, out);
                }
                EForm::Quant(_, v, g) => {
                    bound.push(*v);
                    go(g, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn params(&self) -> BTreeSet<HfSet> {
        let mut out = BTreeSet::new();
        self.visit_args(&mut |a| {
            if let Arg::Param(p) = a {
                out.insert(p.clone());
            }
        });
        out
    }

    fn visit_args(&self, f: &mut dyn FnMut(&Arg)) {
        match self {
            EForm::Eq(a, b) | EForm::In(a, b) => {
                f(a);
                f(b);
            }
            EForm::Not(g) | EForm::Quant(_, _, g) => g.visit_args(f),
            EForm::Bin(_, g, h) => {
                g.visit_args(f);
                h.visit_args(f);
            }
        }
    }

    /// Replaces the free occurrences of `v` by the parameter `x`.
    pub fn subst(&self, v: u32, x: &HfSet) -> EForm {
        let arg = |a: &Arg| match a {
            Arg::Var(w) if *w == v => Arg::Param(x.clone()),
            other => other.clone(),
        };
        match self {
            EForm::Eq(a, b) => EForm::Eq(arg(a), arg(b)),
            EForm::In(a, b) => EForm::In(arg(a), arg(b)),
            EForm::Not(g) => EForm::not(g.subst(v, x)),
            EForm::Bin(c, g, h) => EForm::bin(*c, g.subst(v, x), h.subst(v, x)),
            EForm::Quant(_, w, _) if *w == v => self.clone(),
            EForm::Quant(q, w, g) => EForm::Quant(*q, *w, Box::new(g.subst(v, x))),
        }
    }

    /// Quantifier nesting depth.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            EForm::Eq(..) | EForm::In(..) => 0,
            EForm::Not(g) => g.quantifier_depth(),
            EForm::Bin(_, g, h) => g.quantifier_depth().max(h.quantifier_depth()),
            EForm::Quant(_, _, g) => 1 + g.quantifier_depth(),
        }
    }

    /// Number of codes in `⌈self⌉`.
    pub fn code_len(&self) -> usize {
        match self {
            EForm::Eq(..) | EForm::In(..) => 3,
            EForm::Not(g) => 1 + g.code_len(),
            EForm::Bin(_, g, h) => 1 + g.code_len() + h.code_len(),
            EForm::Quant(_, _, g) => 2 + g.code_len(),
        }
    }
}

// Coding

const EQ: u32 = 0;
const IN: u32 = 1;
const NOT: u32 = 2;
const EXISTS: u32 = 7;
const FORALL: u32 = 8;

fn conn_code(c: Conn) -> u32 {
    match c {
        Conn::Or => 3,
        Conn::And => 4,
        Conn::Implies => 5,
        Conn::Iff => 6,
    }
}

/// The code `⌈φ⌉` of a formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EpsFormula(pub Vec<BigUint>);

impl EpsFormula {
    pub fn encode(f: &EForm) -> EpsFormula {
        let mut out = Vec::with_capacity(f.code_len());
        encode_into(f, &mut out);
        EpsFormula(out)
    }

    pub fn decode(&self) -> Result<EForm, TarskiError> {
        let mut at = 0;
        let f = decode_at(&self.0, &mut at)?;
        if at != self.0.len() {
            return Err(TarskiError::Malformed { at, msg: "trailing codes".into() });
        }
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for EpsFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

fn var_code(v: u32) -> BigUint {
    BigUint::from(9u64 + 2 * u64::from(v))
}

fn arg_code(a: &Arg) -> BigUint {
    match a {
        Arg::Var(v) => var_code(*v),
        Arg::Param(p) => BigUint::from(10u32) + (p.ack_encode().0 << 1u32),
    }
}

fn encode_into(f: &EForm, out: &mut Vec<BigUint>) {
    match f {
        EForm::Eq(a, b) | EForm::In(a, b) => {
            out.push(BigUint::from(if matches!(f, EForm::Eq(..)) { EQ } else { IN }));
            out.push(arg_code(a));
            out.push(arg_code(b));
        }
        EForm::Not(g) => {
            out.push(BigUint::from(NOT));
            encode_into(g, out);
        }
        EForm::Bin(c, g, h) => {
            out.push(BigUint::from(conn_code(*c)));
            encode_into(g, out);
            encode_into(h, out);
        }
        EForm::Quant(q, v, g) => {
            out.push(BigUint::from(if *q == Quant::Exists { EXISTS } else { FORALL }));
            out.push(var_code(*v));
            encode_into(g, out);
        }
    }
}

fn decode_arg(code: &BigUint, at: usize) -> Result<Arg, TarskiError> {
    if code < &BigUint::from(9u32) {
        return Err(TarskiError::Malformed { at, msg: format!("symbol {code} where a term was expected") });
    }
    let rest = code - 9u32;
    if rest.bit(0) {
        let a = (rest - 1u32) >> 1u32;
        Ok(Arg::Param(HfSet::ack_decode(&AckCode(a))))
    } else {
        let i = (rest >> 1u32)
            .to_u32()
            .ok_or_else(|| TarskiError::Malformed { at, msg: "variable index too large".into() })?;
        Ok(Arg::Var(i))
    }
}

fn decode_at(codes: &[BigUint], at: &mut usize) -> Result<EForm, TarskiError> {
    let here = *at;
    let head = codes
        .get(here)
        .ok_or_else(|| TarskiError::Malformed { at: here, msg: "unexpected end of sequence".into() })?;
    *at += 1;
    let sym = head.to_u32().filter(|s| *s <= FORALL).ok_or_else(|| TarskiError::Malformed {
        at: here,
        msg: format!("code {head} where a formula was expected"),
    })?;
    let arg = |at: &mut usize| -> Result<Arg, TarskiError> {
        let i = *at;
        let c = codes
            .get(i)
            .ok_or_else(|| TarskiError::Malformed { at: i, msg: "unexpected end of sequence".into() })?;
        *at += 1;
        decode_arg(c, i)
    };
    Ok(match sym {
        EQ => EForm::Eq(arg(at)?, arg(at)?),
        IN => EForm::In(arg(at)?, arg(at)?),
        NOT => EForm::not(decode_at(codes, at)?),
        3..=6 => {
            let c = Conn::ALL[(sym - 3) as usize];
            let g = decode_at(codes, at)?;
            let h = decode_at(codes, at)?;
            EForm::bin(c, g, h)
        }
        _ => {
            let q = if sym == EXISTS { Quant::Exists } else { Quant::Forall };
            let i = *at;
            match arg(at)? {
                Arg::Var(v) => EForm::Quant(q, v, Box::new(decode_at(codes, at)?)),
                Arg::Param(_) => {
                    return Err(TarskiError::Malformed { at: i, msg: "quantifier over a parameter".into() })
                }
            }
        }
    })
}

impl From<&EForm> for EpsFormula {
    fn from(f: &EForm) -> Self {
        EpsFormula::encode(f)
    }
}

// Printing

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Var(v) => write!(f, "v{v}"),
            Arg::Param(p) => write!(f, "{p}"),
        }
    }
}

fn prec(f: &EForm) -> u8 {
    match f {
        EForm::Quant(..) => 0,
        EForm::Bin(Conn::Iff, ..) => 1,
        EForm::Bin(Conn::Implies, ..) => 2,
        EForm::Bin(Conn::Or, ..) => 3,
        EForm::Bin(Conn::And, ..) => 4,
        _ => 5,
    }
}

fn write_at(f: &EForm, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(f) < min {
        out.write_str("(")?;
        write_at(f, 0, out)?;
        return out.write_str(")");
    }
    match f {
        EForm::Eq(a, b) => write!(out, "{a} = {b}"),
        EForm::In(a, b) => write!(out, "{a} in {b}"),
        EForm::Not(g) => {
            out.write_str("not ")?;
            write_at(g, 5, out)
        }
        EForm::Bin(c, g, h) => {
            let (kw, p) = match c {
                Conn::Or => ("or", 3),
                Conn::And => ("and", 4),
                Conn::Implies => ("implies", 2),
                Conn::Iff => ("iff", 1),
            };
            // `or`/`and` associate left, `implies`/`iff` right; the other side gets parentheses.
            let (lp, rp) = if matches!(c, Conn::Or | Conn::And) { (p, p + 1) } else { (p + 1, p) };
            write_at(g, lp, out)?;
            write!(out, " {kw} ")?;
            write_at(h, rp, out)
        }
        EForm::Quant(q, v, g) => {
            let kw = if *q == Quant::Exists { "exists" } else { "forall" };
            write!(out, "{kw} v{v}. ")?;
            write_at(g, 0, out)
        }
    }
}

impl fmt::Display for EForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, 0, f)
    }
}

// Parsing
//
// formula := ("forall" | "exists") ident "." formula | iff
// iff     := imp ["iff" iff]
// imp     := disj ["implies" imp]
// disj    := conj {"or" conj}
// conj    := lit {"and" lit}
// lit     := "not" lit | "(" formula ")" | arg ("=" | "in") arg
// arg     := ident | "{" [set {"," set}] "}"

struct EParser {
    cur: Cursor,
    names: Vec<String>,
    reserved: BTreeSet<u32>,
}

fn explicit_index(name: &str) -> Option<u32> {
    let digits = name.strip_prefix('v')?;
    if digits.is_empty() || (digits.len() > 1 && digits.starts_with('0')) {
        return None;
    }
    digits.parse().ok()
}

impl EParser {
    fn var(&mut self, name: &str) -> u32 {
        if let Some(i) = explicit_index(name) {
            return i;
        }
        if let Some(i) = self.names.iter().position(|n| n == name) {
            return self.index_of_named(i);
        }
        self.names.push(name.to_string());
        self.index_of_named(self.names.len() - 1)
    }

    // The i-th distinct plain name takes the i-th index not written as `v<digits>`.
    fn index_of_named(&self, i: usize) -> u32 {
        (0u32..).filter(|k| !self.reserved.contains(k)).nth(i).expect("unbounded range")
    }

    fn formula(&mut self) -> Result<EForm, TarskiError> {
        for (kw, q) in [("forall", Quant::Forall), ("exists", Quant::Exists)] {
            if self.cur.is_kw(kw) {
                self.cur.bump();
                let (name, _) = self.cur.ident()?;
                let v = self.var(&name);
                self.cur.expect(Tok::Dot, "'.'")?;
                return Ok(EForm::Quant(q, v, Box::new(self.formula()?)));
            }
        }
        self.iff()
    }

    fn iff(&mut self) -> Result<EForm, TarskiError> {
        let lhs = self.imp()?;
        if self.cur.is_kw("iff") {
            self.cur.bump();
            return Ok(EForm::bin(Conn::Iff, lhs, self.iff_rhs()?));
        }
        Ok(lhs)
    }

    fn iff_rhs(&mut self) -> Result<EForm, TarskiError> {
        if self.cur.is_kw("forall") || self.cur.is_kw("exists") {
            self.formula()
        } else {
            self.iff()
        }
    }

    fn imp(&mut self) -> Result<EForm, TarskiError> {
        let lhs = self.disj()?;
        if self.cur.is_kw("implies") {
            self.cur.bump();
            let rhs = if self.cur.is_kw("forall") || self.cur.is_kw("exists") {
                self.formula()?
            } else {
                self.imp()?
            };
            return Ok(EForm::bin(Conn::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> Result<EForm, TarskiError> {
        let mut f = self.conj()?;
        while self.cur.is_kw("or") {
            self.cur.bump();
            f = EForm::bin(Conn::Or, f, self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<EForm, TarskiError> {
        let mut f = self.lit()?;
        while self.cur.is_kw("and") {
            self.cur.bump();
            f = EForm::bin(Conn::And, f, self.lit()?);
        }
        Ok(f)
    }

    fn lit(&mut self) -> Result<EForm, TarskiError> {
        if self.cur.is_kw("not") {
            self.cur.bump();
            return Ok(EForm::not(self.lit()?));
        }
        if self.cur.peek() == Some(&Tok::LParen) {
            self.cur.bump();
            let f = self.formula()?;
            self.cur.expect(Tok::RParen, "')'")?;
            return Ok(f);
        }
        let a = self.arg()?;
        let is_eq = if self.cur.peek() == Some(&Tok::Eq) {
            true
        } else if self.cur.is_kw("in") {
            false
        } else {
            return Err(self.cur.error("'=' or 'in'").into());
        };
        self.cur.bump();
        let b = self.arg()?;
        Ok(if is_eq { EForm::Eq(a, b) } else { EForm::In(a, b) })
    }

    fn arg(&mut self) -> Result<Arg, TarskiError> {
        if self.cur.peek() == Some(&Tok::LBrace) {
            return Ok(Arg::Param(self.set()?));
        }
        let (name, _) = self.cur.ident().map_err(|_| TarskiError::from(self.cur.error("variable or set literal")))?;
        Ok(Arg::Var(self.var(&name)))
    }

    fn set(&mut self) -> Result<HfSet, TarskiError> {
        self.cur.expect(Tok::LBrace, "'{'")?;
        let mut members = Vec::new();
        if self.cur.peek() == Some(&Tok::RBrace) {
            self.cur.bump();
            return Ok(HfSet::empty());
        }
        loop {
            members.push(self.set()?);
            match self.cur.peek() {
                Some(Tok::Comma) => {
                    self.cur.bump();
                }
                Some(Tok::RBrace) => {
                    self.cur.bump();
                    return Ok(HfSet::from_members(members));
                }
                _ => return Err(self.cur.error("',' or '}'").into()),
            }
        }
    }
}

/// Parses the text syntax. Names of the form `v<digits>` denote that variable index; other
/// names take the free indices in order of first appearance.
pub fn parse_eform(text: &str) -> Result<EForm, TarskiError> {
    let cur = Cursor::new(text)?;
    let reserved = cur
        .toks
        .iter()
        .filter_map(|(t, _)| match t {
            Tok::Ident(s) => explicit_index(s),
            _ => None,
        })
        .collect();
    let mut p = EParser { cur, names: Vec::new(), reserved };
    let f = p.formula()?;
    p.cur.finish()?;
    Ok(f)
}

impl std::str::FromStr for EForm {
    type Err = TarskiError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_eform(s)
    }
}

// Structures

/// A finite class `X` of sets with membership inherited from the universe of sets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FiniteStructure {
    elements: Vec<HfSet>,
}

impl FiniteStructure {
    pub fn new<I: IntoIterator<Item = HfSet>>(elements: I) -> Self {
        let set: BTreeSet<HfSet> = elements.into_iter().collect();
        FiniteStructure { elements: set.into_iter().collect() }
    }

    /// Elements in ascending Ackermann order.
    pub fn elements(&self) -> &[HfSet] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: &HfSet) -> bool {
        self.elements.binary_search(x).is_ok()
    }

    pub fn index_of(&self, x: &HfSet) -> Option<usize> {
        self.elements.binary_search(x).ok()
    }

    pub fn is_subset(&self, other: &FiniteStructure) -> bool {
        self.elements.iter().all(|x| other.contains(x))
    }

    /// One set literal per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, TarskiError> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            out.push(line.parse().map_err(|source| TarskiError::Structure { line: i + 1, source })?);
        }
        Ok(FiniteStructure::new(out))
    }

    pub fn load(path: &Path) -> Result<Self, TarskiError> {
        let text = std::fs::read_to_string(path).map_err(|e| TarskiError::Io(format!("{}: {e}", path.display())))?;
        FiniteStructure::parse(&text)
    }

    pub fn to_text(&self) -> String {
        self.elements.iter().map(|x| format!("{x}\n")).collect()
    }

    /// Ackermann codes of the elements, ascending.
    pub fn codes(&self) -> Vec<BigUint> {
        self.elements.iter().map(|x| x.ack_encode().0).collect()
    }
}

impl FromIterator<HfSet> for FiniteStructure {
    fn from_iter<I: IntoIterator<Item = HfSet>>(iter: I) -> Self {
        FiniteStructure::new(iter)
    }
}

/// Largest supported universe bound.
pub const MAX_UNIVERSE_BOUND: u64 = 1 << 16;

/// The sets with Ackermann code below `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundedUniverse {
    bound: u64,
}

impl BoundedUniverse {
    pub fn new(bound: u64) -> Result<Self, TarskiError> {
        if bound == 0 || bound > MAX_UNIVERSE_BOUND {
            return Err(TarskiError::Bound { got: bound, max: MAX_UNIVERSE_BOUND });
        }
        Ok(BoundedUniverse { bound })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn size(&self) -> usize {
        self.bound as usize
    }

    pub fn element(&self, code: u64) -> HfSet {
        HfSet::ack_decode(&AckCode::from(code))
    }

    /// Code of `x` if `x` lies in the universe.
    pub fn code_of(&self, x: &HfSet) -> Option<u64> {
        let c = x.ack_encode().0;
        c.to_u64().filter(|c| *c < self.bound)
    }

    pub fn structure(&self) -> FiniteStructure {
        FiniteStructure { elements: (0..self.bound).map(|c| self.element(c)).collect() }
    }

    pub fn contains(&self, x: &HfSet) -> bool {
        self.code_of(x).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, prop_oneof, proptest, Strategy};

    fn codes(xs: &[u64]) -> EpsFormula {
        EpsFormula(xs.iter().map(|&x| BigUint::from(x)).collect())
    }

    #[test]
    fn smallest_atom_code() {
        let f = parse_eform("{} = {}").unwrap();
        assert_eq!(EpsFormula::encode(&f), codes(&[0, 10, 10]));
    }

    #[test]
    fn documented_codes() {
        let f = parse_eform("exists v. v in {{}}").unwrap();
        // {{}} has code 1, so its parameter code is 12.
        assert_eq!(EpsFormula::encode(&f), codes(&[7, 9, 1, 9, 12]));
        assert_eq!(EpsFormula::encode(&f).decode().unwrap(), f);
    }

    #[test]
    fn garbage_is_rejected() {
        for bad in [&[][..], &[1, 9], &[0, 10, 10, 10], &[42], &[7, 10, 0, 9, 9], &[0, 2, 9]] {
            assert!(matches!(codes(bad).decode(), Err(TarskiError::Malformed { .. })), "{bad:?}");
        }
    }

    #[test]
    fn names_map_to_indices() {
        let f = parse_eform("forall x. exists v0. x in v0").unwrap();
        assert_eq!(f, EForm::forall(1, EForm::exists(0, EForm::In(Arg::Var(1), Arg::Var(0)))));
        assert_eq!(f.to_string(), "forall v1. exists v0. v1 in v0");
    }

    #[test]
    fn syntax_errors() {
        assert!(parse_eform("x in").is_err());
        assert!(parse_eform("x + y").is_err());
        assert!(parse_eform("{ in x").is_err());
        assert!(parse_eform("exists x x in x").is_err());
    }

    #[test]
    fn structure_file() {
        let s = FiniteStructure::parse("# two sets\n{}\n\n{{}}\n{}\n").unwrap();
        assert_eq!(s.len(), 2);
        assert!(FiniteStructure::parse("{}\n{\n").is_err());
    }

    #[test]
    fn universe_codes() {
        let u = BoundedUniverse::new(16).unwrap();
        assert_eq!(u.structure().len(), 16);
        assert_eq!(u.code_of(&"{{},{{}}}".parse().unwrap()), Some(3));
        assert_eq!(u.code_of(&"{{{{}}}}".parse().unwrap()), Some(4));
        assert!(BoundedUniverse::new(0).is_err());
    }

    pub(crate) fn arb_set() -> impl Strategy<Value = HfSet> {
        (0u64..300).prop_map(|c| HfSet::ack_decode(&AckCode::from(c)))
    }

    fn arb_arg() -> impl Strategy<Value = Arg> {
        prop_oneof![(0u32..4).prop_map(Arg::Var), arb_set().prop_map(Arg::Param)]
    }

    pub(crate) fn arb_eform() -> impl Strategy<Value = EForm> {
        let leaf = prop_oneof![
            (arb_arg(), arb_arg()).prop_map(|(a, b)| EForm::Eq(a, b)),
            (arb_arg(), arb_arg()).prop_map(|(a, b)| EForm::In(a, b)),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(EForm::not),
                (0usize..4, inner.clone(), inner.clone()).prop_map(|(c, a, b)| EForm::bin(Conn::ALL[c], a, b)),
                (any::<bool>(), 0u32..4, inner).prop_map(|(e, v, g)| if e {
                    EForm::exists(v, g)
                } else {
                    EForm::forall(v, g)
                }),
            ]
        })
    }

    proptest! {
        #[test]
        fn code_round_trip(f in arb_eform()) {
            let c = EpsFormula::encode(&f);
            prop_assert_eq!(c.len(), f.code_len());
            prop_assert_eq!(c.decode().unwrap(), f);
        }

        #[test]
        fn text_round_trip(f in arb_eform()) {
            prop_assert_eq!(parse_eform(&f.to_string()).unwrap(), f);
        }

        #[test]
        fn truncation_is_malformed(f in arb_eform(), cut in 0usize..100) {
            let c = EpsFormula::encode(&f);
            let cut = cut % c.len();
            prop_assert!(EpsFormula(c.0[..cut].to_vec()).decode().is_err());
        }
    }
}
