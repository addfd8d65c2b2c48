//! Definable closure inside a bounded universe, and elementary-submodel checks.
//!
//! Formulas are enumerated by code length over a fixed pool of variables `v0..v{k-1}`. Two
//! formulas with the same free variables and the same satisfying assignments in `U` are
//! interchangeable inside any larger formula, so each length stratum keeps one representative
//! (the first found) per denotation. A denotation is a bitset over `U^m` for the `m` free
//! variables of the formula.
//!
//! A set `u ∈ U` is defined by `θ(v0)` when `u = {y ∈ U : U ⊨ θ(y)}`. Universe element `i` is the
//! set with Ackermann code `i`, so `i ∈ j` iff bit `i` of `j` is set.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;

use crate::formulas::Quant;
use crate::hfset::HfSet;

use super::truth::{satisfies, Strategy};
use super::{Arg, BoundedUniverse, Conn, EForm, FiniteStructure, TarskiError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DefConfig {
    /// Longest formula code considered.
    pub maxlen: usize,
    /// Size of the variable pool; `v0` is the defining variable.
    pub max_vars: u32,
    /// Cap on the total number of stored denotation bits.
    pub max_bits: u64,
}

impl Default for DefConfig {
    fn default() -> Self {
        DefConfig { maxlen: 24, max_vars: 2, max_bits: 1 << 32 }
    }
}

impl DefConfig {
    pub fn with_maxlen(maxlen: usize) -> Self {
        DefConfig { maxlen, ..Default::default() }
    }
}

/// A set together with the shortest formula found that defines it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub code: u64,
    pub set: HfSet,
    pub formula: EForm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    pub structure: FiniteStructure,
    /// How each element outside the starting class entered, in order of discovery.
    pub definitions: Vec<Definition>,
    /// Enumeration passes run.
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Den {
    mask: u8,
    bits: Vec<u64>,
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Atom { eq: bool, a: ArgI, b: ArgI },
    Not(usize, usize),
    Quant(Quant, u32, usize, usize),
    Bin(Conn, (usize, usize), (usize, usize)),
}

#[derive(Debug, Clone, Copy)]
enum Group {
    Atoms(ArgI),
    Not(usize, usize),
    Quant(usize, usize),
    /// Left operand `(level, index)` against every entry of the right level.
    Bin(usize, usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ArgI {
    Var(u32),
    Param(u64),
}

/// Operand groups evaluated between growth checks.
const CHUNK: usize = 64;

struct Entry {
    den: Den,
    form: EForm,
}

fn get(bits: &[u64], i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

fn set(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn vars_of(mask: u8) -> Vec<u32> {
    (0..8).filter(|v| mask >> v & 1 == 1).collect()
}

struct Engine<'a> {
    n: usize,
    cfg: &'a DefConfig,
    params: Vec<u64>,
    levels: Vec<Vec<Entry>>,
    seen: HashSet<Den>,
    bits_used: u64,
}

impl Engine<'_> {
    fn size(&self, mask: u8) -> usize {
        self.n.pow(mask.count_ones())
    }

    fn words(&self, mask: u8) -> usize {
        self.size(mask).div_ceil(64)
    }

    fn member(i: u64, j: u64) -> bool {
        i < 64 && j >> i & 1 == 1
    }

    fn atom(&self, eq: bool, a: ArgI, b: ArgI) -> Den {
        let mut mask = 0u8;
        for x in [a, b] {
            if let ArgI::Var(v) = x {
                mask |= 1 << v;
            }
        }
        let vars = vars_of(mask);
        let weight = |v: u32| self.n.pow(vars.iter().position(|w| *w == v).expect("in mask") as u32);
        let (wa, wb) = [a, b].map(|x| if let ArgI::Var(v) = x { weight(v) } else { 0 }).into();
        let mut bits = vec![0u64; self.words(mask)];
        for idx in 0..self.size(mask) {
            let val = |x: ArgI, w: usize| match x {
                ArgI::Param(c) => c,
                ArgI::Var(_) => ((idx / w) % self.n) as u64,
            };
            let (a, b) = (val(a, wa), val(b, wb));
            let t = if eq { a == b } else { Self::member(a, b) };
            if t {
                set(&mut bits, idx);
            }
        }
        Den { mask, bits }
    }

    fn clear_tail(&self, d: &mut Den) {
        let size = self.size(d.mask);
        if size % 64 != 0 {
            let last = d.bits.len() - 1;
            d.bits[last] &= (1u64 << (size % 64)) - 1;
        }
    }

    fn not(&self, d: &Den) -> Den {
        let mut out = Den { mask: d.mask, bits: d.bits.iter().map(|w| !w).collect() };
        self.clear_tail(&mut out);
        out
    }

    fn expand(&self, d: &Den, to: u8) -> Vec<u64> {
        if d.mask == to {
            return d.bits.clone();
        }
        let to_vars = vars_of(to);
        let from_vars = vars_of(d.mask);
        // Weight of each target digit in the source index (0 when the source ignores it).
        let weights: Vec<usize> = to_vars
            .iter()
            .map(|v| from_vars.iter().position(|w| w == v).map_or(0, |j| self.n.pow(j as u32)))
            .collect();
        let mut out = vec![0u64; self.words(to)];
        for idx in 0..self.size(to) {
            let mut rest = idx;
            let mut from = 0;
            for w in &weights {
                from += (rest % self.n) * w;
                rest /= self.n;
            }
            if get(&d.bits, from) {
                set(&mut out, idx);
            }
        }
        out
    }

    fn bin(&self, c: Conn, a: &Den, b: &Den) -> Den {
        let mask = a.mask | b.mask;
        let (x, y) = (self.expand(a, mask), self.expand(b, mask));
        let bits = x
            .iter()
            .zip(&y)
            .map(|(p, q)| match c {
                Conn::Or => p | q,
                Conn::And => p & q,
                Conn::Implies => !p | q,
                Conn::Iff => !(p ^ q),
            })
            .collect();
        let mut out = Den { mask, bits };
        self.clear_tail(&mut out);
        out
    }

    fn quant(&self, q: Quant, v: u32, d: &Den) -> Option<Den> {
        if d.mask >> v & 1 == 0 {
            return None;
        }
        let mask = d.mask & !(1 << v);
        let from_vars = vars_of(d.mask);
        let slot = from_vars.iter().position(|w| *w == v).expect("in mask");
        let stride = self.n.pow(slot as u32);
        let want = q == Quant::Exists;
        let mut bits = vec![0u64; self.words(mask)];
        for idx in 0..self.size(mask) {
            // Insert a zero digit for `v` at its slot.
            let low = idx % stride;
            let base = low + (idx - low) * self.n;
            let hit = (0..self.n).any(|x| get(&d.bits, base + x * stride) == want);
            if hit == want {
                set(&mut bits, idx);
            }
        }
        Some(Den { mask, bits })
    }

    fn form(&self, op: &Op) -> EForm {
        let arg = |x: ArgI| match x {
            ArgI::Var(v) => Arg::Var(v),
            ArgI::Param(c) => Arg::Param(HfSet::ack_decode(&c.into())),
        };
        match *op {
            Op::Atom { eq: true, a, b } => EForm::Eq(arg(a), arg(b)),
            Op::Atom { eq: false, a, b } => EForm::In(arg(a), arg(b)),
            Op::Not(l, i) => EForm::not(self.levels[l][i].form.clone()),
            Op::Quant(q, v, l, i) => EForm::Quant(q, v, Box::new(self.levels[l][i].form.clone())),
            Op::Bin(c, (la, ia), (lb, ib)) => {
                EForm::bin(c, self.levels[la][ia].form.clone(), self.levels[lb][ib].form.clone())
            }
        }
    }

    fn compute(&self, op: &Op) -> Option<Den> {
        match *op {
            Op::Atom { eq, a, b } => Some(self.atom(eq, a, b)),
            Op::Not(l, i) => Some(self.not(&self.levels[l][i].den)),
            Op::Quant(q, v, l, i) => self.quant(q, v, &self.levels[l][i].den),
            Op::Bin(c, (la, ia), (lb, ib)) => Some(self.bin(c, &self.levels[la][ia].den, &self.levels[lb][ib].den)),
        }
    }

    /// Result mask of `op`, known before computing it.
    fn result_mask(&self, op: &Op) -> u8 {
        match *op {
            Op::Atom { a, b, .. } => [a, b]
                .iter()
                .map(|x| if let ArgI::Var(v) = x { 1u8 << v } else { 0 })
                .fold(0, |m, b| m | b),
            Op::Not(l, i) => self.levels[l][i].den.mask,
            Op::Quant(_, v, l, i) => self.levels[l][i].den.mask & !(1 << v),
            Op::Bin(_, (la, ia), (lb, ib)) => self.levels[la][ia].den.mask | self.levels[lb][ib].den.mask,
        }
    }

    /// Operations producing length `len`, grouped by their first operand so they can be
    /// evaluated in parallel and merged in a fixed order.
    fn groups(&self, len: usize) -> Vec<Group> {
        if len == 3 {
            let k = self.cfg.max_vars;
            return (0..k).map(ArgI::Var).chain(self.params.iter().map(|c| ArgI::Param(*c))).map(Group::Atoms).collect();
        }
        let mut groups: Vec<Group> = (0..self.levels[len - 1].len()).map(|i| Group::Not(len - 1, i)).collect();
        if len >= 5 {
            groups.extend((0..self.levels[len - 2].len()).map(|i| Group::Quant(len - 2, i)));
        }
        for la in 3..len.saturating_sub(3) {
            groups.extend((0..self.levels[la].len()).map(|ia| Group::Bin(la, ia, len - 1 - la)));
        }
        groups
    }

    fn ops<'s>(&'s self, g: Group) -> Box<dyn Iterator<Item = Op> + 's> {
        let k = self.cfg.max_vars;
        match g {
            Group::Atoms(a) => {
                let args = (0..k).map(ArgI::Var).chain(self.params.iter().map(|c| ArgI::Param(*c)));
                // A closed atom is true or false; `p = p` and `p ∈ p` represent both.
                let partners =
                    args.filter(move |&b| matches!(a, ArgI::Var(_)) || matches!(b, ArgI::Var(_)) || a == b);
                Box::new(partners.flat_map(move |b| [true, false].map(|eq| Op::Atom { eq, a, b })))
            }
            Group::Not(l, i) => Box::new(std::iter::once(Op::Not(l, i))),
            Group::Quant(l, i) => {
                Box::new((0..k).flat_map(move |v| [Quant::Exists, Quant::Forall].map(|q| Op::Quant(q, v, l, i))))
            }
            Group::Bin(la, ia, lb) => Box::new(
                (0..self.levels[lb].len()).flat_map(move |ib| Conn::ALL.map(|c| Op::Bin(c, (la, ia), (lb, ib)))),
            ),
        }
    }

    /// Evaluates the operations selected by `keep` and appends the new denotations to `len`.
    /// Returns the index range of the added entries.
    fn batch(
        &mut self,
        len: usize,
        groups: &[Group],
        keep: &(dyn Fn(u8) -> bool + Sync),
    ) -> Result<std::ops::Range<usize>, TarskiError> {
        let this = &*self;
        let found: Vec<Vec<(Den, Op)>> = groups
            .par_iter()
            .map(|g| {
                let mut local = HashSet::new();
                let mut out = Vec::new();
                for op in this.ops(*g) {
                    let op = &op;
                    if !keep(this.result_mask(op)) {
                        continue;
                    }
                    if let Some(d) = this.compute(op) {
                        if !this.seen.contains(&d) && local.insert(d.clone()) {
                            out.push((d, *op));
                        }
                    }
                }
                out
            })
            .collect();
        let start = self.levels[len].len();
        for (den, op) in found.into_iter().flatten() {
            if self.seen.contains(&den) {
                continue;
            }
            self.bits_used += self.size(den.mask) as u64;
            if self.bits_used > self.cfg.max_bits {
                return Err(TarskiError::Budget { len });
            }
            let form = self.form(&op);
            self.seen.insert(den.clone());
            self.levels[len].push(Entry { den, form });
        }
        Ok(start..self.levels[len].len())
    }

    /// The universe elements defined by entries `range` of stratum `len`.
    fn defined(&self, len: usize, range: std::ops::Range<usize>) -> Vec<(u64, EForm)> {
        let bound = self.n as u64;
        let mut out = Vec::new();
        for e in &self.levels[len][range] {
            if e.den.mask & !1 != 0 {
                continue;
            }
            // Members of the defined subset of U; its code is the sum of 2^i.
            let members: Vec<u64> = if e.den.mask == 0 {
                if get(&e.den.bits, 0) {
                    (0..bound).collect()
                } else {
                    Vec::new()
                }
            } else {
                (0..bound).filter(|i| get(&e.den.bits, *i as usize)).collect()
            };
            let code = members.iter().try_fold(0u64, |acc, i| if *i < 63 { Some(acc | 1 << i) } else { None });
            if let Some(code) = code.filter(|c| *c < bound) {
                out.push((code, e.form.clone()));
            }
        }
        out
    }

    /// Enumerates up to `maxlen`. With `known` given, stops after the first batch that defines
    /// an element outside it and returns only those elements.
    fn run(&mut self, known: Option<&BTreeSet<u64>>) -> Result<BTreeMap<u64, EForm>, TarskiError> {
        let mut out = BTreeMap::new();
        self.levels = (0..=self.cfg.maxlen).map(|_| Vec::new()).collect();
        for len in 3..=self.cfg.maxlen {
            let groups = self.groups(len);
            // Single-variable results first, so growth is seen before the costlier strata.
            let defining = |m: u8| m & !1 == 0;
            let rest = |m: u8| m & !1 != 0;
            for keep in [&defining as &(dyn Fn(u8) -> bool + Sync), &rest] {
                for chunk in groups.chunks(CHUNK) {
                    let range = self.batch(len, chunk, keep)?;
                    for (code, form) in self.defined(len, range) {
                        if known.map_or(true, |k| !k.contains(&code)) {
                            out.entry(code).or_insert(form);
                        }
                    }
                    if known.is_some() && !out.is_empty() {
                        return Ok(out);
                    }
                }
            }
        }
        Ok(out)
    }
}

fn engine<'a>(params: &FiniteStructure, u: &BoundedUniverse, cfg: &'a DefConfig) -> Result<Engine<'a>, TarskiError> {
    let n = u.size();
    let needed = (n as u128).pow(cfg.max_vars);
    const LIMIT: u128 = 1 << 26;
    if cfg.max_vars == 0 || cfg.max_vars > 8 || needed > LIMIT {
        return Err(TarskiError::TooLarge { needed, limit: LIMIT });
    }
    let params = params
        .elements()
        .iter()
        .map(|x| u.code_of(x).ok_or_else(|| TarskiError::ForeignParameter(x.clone())))
        .collect::<Result<_, _>>()?;
    Ok(Engine { n, cfg, params, levels: Vec::new(), seen: HashSet::new(), bits_used: 0 })
}

fn definition(u: &BoundedUniverse, code: u64, formula: EForm) -> Definition {
    Definition { code, set: u.element(code), formula }
}

/// Every element of `U` defined by a formula of code length at most `maxlen` with parameters
/// from `params`.
pub fn definable_sets(
    params: &FiniteStructure,
    u: &BoundedUniverse,
    cfg: &DefConfig,
) -> Result<Vec<Definition>, TarskiError> {
    let found = engine(params, u, cfg)?.run(None)?;
    Ok(found.into_iter().map(|(c, f)| definition(u, c, f)).collect())
}

/// The least `C ⊇ X` such that every element of `U` definable from `C` within `maxlen` codes
/// lies in `C`.
pub fn def_closure_with(x: &FiniteStructure, u: &BoundedUniverse, cfg: &DefConfig) -> Result<Closure, TarskiError> {
    let mut codes: BTreeSet<u64> = x
        .elements()
        .iter()
        .map(|e| u.code_of(e).ok_or_else(|| TarskiError::ForeignParameter(e.clone())))
        .collect::<Result<_, _>>()?;
    let mut definitions = Vec::new();
    let mut rounds = 0;
    // Once C is all of U nothing new can be defined.
    while codes.len() < u.size() {
        let current: FiniteStructure = codes.iter().map(|c| u.element(*c)).collect();
        rounds += 1;
        let found = engine(&current, u, cfg)?.run(Some(&codes))?;
        if found.is_empty() {
            break;
        }
        for (code, form) in found {
            codes.insert(code);
            definitions.push(definition(u, code, form));
        }
    }
    Ok(Closure { structure: codes.iter().map(|c| u.element(*c)).collect(), definitions, rounds })
}

pub fn def_closure(x: &FiniteStructure, u: &BoundedUniverse, maxlen: usize) -> Result<FiniteStructure, TarskiError> {
    Ok(def_closure_with(x, u, &DefConfig::with_maxlen(maxlen))?.structure)
}

/// Whether every element definable from `c` within `maxlen` codes is already in `c`.
pub fn is_closed(c: &FiniteStructure, u: &BoundedUniverse, cfg: &DefConfig) -> Result<bool, TarskiError> {
    if c.len() == u.size() && c.elements().iter().all(|x| u.contains(x)) {
        return Ok(true);
    }
    Ok(definable_sets(c, u, cfg)?.iter().all(|d| c.contains(&d.set)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryReport {
    pub checked: usize,
    /// Formulas on which `C` and `M` disagree, with the truth value in `C`.
    pub disagreements: Vec<(EForm, bool)>,
}

impl ElementaryReport {
    pub fn holds(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Compares truth in `C` and in `M` on every corpus formula. Parameters must come from `C`.
pub fn elementary_check(
    c: &FiniteStructure,
    m: &FiniteStructure,
    corpus: &[EForm],
) -> Result<ElementaryReport, TarskiError> {
    if let Some(x) = c.elements().iter().find(|x| !m.contains(x)) {
        return Err(TarskiError::ForeignParameter(x.clone()));
    }
    let eval = |s: &FiniteStructure, f: &EForm| match satisfies(s, f, Strategy::BottomUp) {
        Err(TarskiError::TooLarge { .. }) => satisfies(s, f, Strategy::TopDown),
        other => other,
    };
    let mut disagreements = Vec::new();
    for f in corpus {
        let (in_c, in_m) = (eval(c, f)?, eval(m, f)?);
        if in_c != in_m {
            disagreements.push((f.clone(), in_c));
        }
    }
    Ok(ElementaryReport { checked: corpus.len(), disagreements })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tarski::{parse_eform, random_corpus};

    fn codes(s: &FiniteStructure, u: &BoundedUniverse) -> Vec<u64> {
        s.elements().iter().map(|x| u.code_of(x).unwrap()).collect()
    }

    #[test]
    fn empty_set_and_singleton_are_definable() {
        let u = BoundedUniverse::new(16).unwrap();
        let defs = definable_sets(&FiniteStructure::default(), &u, &DefConfig::with_maxlen(8)).unwrap();
        let by_code: BTreeMap<u64, &EForm> = defs.iter().map(|d| (d.code, &d.formula)).collect();
        assert!(by_code.contains_key(&0));
        // {∅} needs a quantifier: e.g. forall w. not w in v0.
        let f = by_code[&1];
        assert!(f.quantifier_depth() >= 1, "{f}");
    }

    #[test]
    fn singleton_definition_checks_out() {
        // {y : forall w. (w in y iff w = {})} picks out {{}}.
        let u = BoundedUniverse::new(16).unwrap();
        let theta = parse_eform("forall w. (w in v0 iff w = {})").unwrap();
        let m = u.structure();
        let defined: Vec<u64> =
            (0..16).filter(|c| satisfies(&m, &theta.subst(0, &u.element(*c)), Strategy::TopDown).unwrap()).collect();
        assert_eq!(defined, vec![1]);
        let defs = definable_sets(&FiniteStructure::new([HfSet::empty()]), &u, &DefConfig::with_maxlen(theta.code_len()))
            .unwrap();
        assert!(defs.iter().any(|d| d.code == 1));
    }

    #[test]
    fn witnesses_define_their_sets() {
        let u = BoundedUniverse::new(16).unwrap();
        let m = u.structure();
        for d in definable_sets(&FiniteStructure::default(), &u, &DefConfig::with_maxlen(9)).unwrap() {
            assert!(d.formula.free_vars().iter().all(|v| *v == 0));
            assert!(d.formula.code_len() <= 9);
            let ext: Vec<u64> = (0..16)
                .filter(|c| satisfies(&m, &d.formula.subst(0, &u.element(*c)), Strategy::TopDown).unwrap())
                .collect();
            let code: u64 = ext.iter().map(|i| 1u64 << i).sum();
            assert_eq!(code, d.code, "{}", d.formula);
        }
    }

    #[test]
    fn short_closure_is_singleton_chain() {
        let u = BoundedUniverse::new(16).unwrap();
        let c = def_closure(&FiniteStructure::default(), &u, 3).unwrap();
        assert_eq!(codes(&c, &u), vec![0, 1, 2, 4]);
        assert!(is_closed(&c, &u, &DefConfig::with_maxlen(3)).unwrap());
    }

    #[test]
    fn closure_is_monotone_and_closed() {
        let u = BoundedUniverse::new(16).unwrap();
        let mut prev = FiniteStructure::default();
        for maxlen in 3..=8 {
            let cfg = DefConfig::with_maxlen(maxlen);
            let c = def_closure_with(&FiniteStructure::default(), &u, &cfg).unwrap().structure;
            assert!(prev.is_subset(&c), "maxlen {maxlen}");
            assert!(is_closed(&c, &u, &cfg).unwrap());
            prev = c;
        }
    }

    #[test]
    fn single_step_is_not_closed() {
        let u = BoundedUniverse::new(16).unwrap();
        let cfg = DefConfig::with_maxlen(3);
        let step: FiniteStructure =
            definable_sets(&FiniteStructure::default(), &u, &cfg).unwrap().into_iter().map(|d| d.set).collect();
        assert!(!is_closed(&step, &u, &cfg).unwrap());
    }

    #[test]
    fn elementary_examples() {
        let u = BoundedUniverse::new(16).unwrap();
        let m = u.structure();
        let corpus = random_corpus(m.elements(), 30, 2, 2, 4);
        assert!(elementary_check(&m, &m, &corpus).unwrap().holds());

        // {{{}}} has its only member {{}} outside C.
        let p: HfSet = "{{{}}}".parse().unwrap();
        let c = FiniteStructure::new([HfSet::empty(), p.clone()]);
        let f = EForm::exists(0, EForm::In(Arg::Var(0), Arg::Param(p)));
        let rep = elementary_check(&c, &m, &[f]).unwrap();
        assert!(!rep.holds());
    }

    #[test]
    fn budget_is_reported() {
        let u = BoundedUniverse::new(16).unwrap();
        let cfg = DefConfig { maxlen: 9, max_vars: 2, max_bits: 1000 };
        assert!(matches!(definable_sets(&u.structure(), &u, &cfg), Err(TarskiError::Budget { .. })));
    }
}
