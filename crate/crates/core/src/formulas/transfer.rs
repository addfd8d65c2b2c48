//! Guard-banded comparison of `R ⊨ φ_h(a)` with `φ` at the projected point.
//!
//! For each assignment the translated formula is evaluated in `R(ω,ε)` and the original
//! formula is evaluated exactly at the projected values. Every real-side atom whose gap
//! `|t − s|` lies in `[1/S − C, 1/S + C]`, where `C` is the atom's structural error bound, is
//! undecided; undecided atoms propagate through the connectives three-valued. A row whose real
//! side is undecided is a `Boundary` verdict, otherwise the two truth values are compared.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use rand::Rng;
use serde::Serialize;

use super::eval::{compile, grid, hyper_form, real_form_kleene, Band, Compiled, Flavor};
use super::{translate_h, Formula, FormulaError};
use crate::hyperarith::{HyperElem, HyperParams};
use crate::numbers::Rat;
use crate::shard;

/// How a real-side atom `t = s` is decided outside the guard band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AtomSemantics {
    /// `t = s` exactly.
    #[default]
    Exact,
    /// `|t − s| < 1/S`, i.e. equal standard parts.
    Tolerance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sampling {
    /// `samples` assignments drawn uniformly from grid points with `|kε| ≤ bound`.
    Random { samples: u64, bound: Rat, seed: u64 },
    /// Every grid assignment with `|kε| ≤ bound`.
    Exhaustive { bound: Rat },
    /// Given rational points; the hyper side gets their embeddings.
    Explicit(Vec<BTreeMap<String, Rat>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Agree,
    Disagree,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Binding {
    pub var: String,
    pub k: HyperElem,
    pub value: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Row {
    pub assignment: Vec<Binding>,
    pub hyper: bool,
    pub real: Option<bool>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TransferSummary {
    pub rows: u64,
    pub agree: u64,
    pub disagree: u64,
    pub boundary: u64,
}

impl TransferSummary {
    pub fn boundary_fraction(&self) -> f64 {
        if self.rows == 0 {
            0.0
        } else {
            self.boundary as f64 / self.rows as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransferReport {
    pub formula: String,
    pub translated: String,
    /// Constants are outside the pure `⟨+,·⟩` language; reports flag them.
    pub uses_constants: bool,
    pub semantics: AtomSemantics,
    pub summary: TransferSummary,
    pub rows: Vec<Row>,
}

struct Sides<'a> {
    p: &'a HyperParams,
    hyper: Compiled,
    real: Compiled,
    grid: &'a [Rat],
    semantics: AtomSemantics,
}

impl Sides<'_> {
    fn row(&self, ks: &[HyperElem], values: &[Rat]) -> Row {
        let threshold = Rat::new(1, self.p.ctx().threshold()).expect("S >= 2");
        let semantics = self.semantics;
        let atom = |gap: &Rat, band: &Band| -> Option<bool> {
            let c = band.as_ref()?;
            if *gap >= &threshold - c && *gap <= &threshold + c {
                return None;
            }
            Some(match semantics {
                AtomSemantics::Exact => gap.is_zero(),
                AtomSemantics::Tolerance => *gap < threshold,
            })
        };
        let mut henv = vec![self.p.bounded_max_elem(); self.hyper.slots];
        henv[..ks.len()].copy_from_slice(ks);
        let mut renv = vec![Rat::zero(); self.real.slots];
        renv[..values.len()].clone_from_slice(values);
        let hyper = hyper_form(&self.hyper.form, self.p, &mut henv);
        let real = real_form_kleene(&self.real.form, self.grid, &mut renv, &atom);
        let verdict = match real {
            None => Verdict::Boundary,
            Some(r) if r == hyper => Verdict::Agree,
            Some(_) => Verdict::Disagree,
        };
        let assignment = self
            .hyper
            .free
            .iter()
            .zip(ks.iter().zip(values))
            .map(|(v, (k, q))| Binding { var: v.clone(), k: *k, value: q.clone() })
            .collect();
        Row { assignment, hyper, real, verdict }
    }
}

fn grid_radius(p: &HyperParams, bound: &Rat) -> i128 {
    let k = bound.checked_div(p.eps()).expect("eps > 0").floor();
    k.to_i128().unwrap_or(i128::MAX).clamp(0, p.bounded_max())
}

/// Compares `φ_h` in `R(ω,ε)` with `φ` over the sampled assignments.
pub fn transfer_check(
    f: &Formula,
    p: &HyperParams,
    sampling: &Sampling,
    semantics: AtomSemantics,
) -> Result<TransferReport, FormulaError> {
    let f_h = translate_h(f)?;
    let grid = grid(p);
    let sides = |free_bound: Rat| -> Result<Sides<'_>, FormulaError> {
        Ok(Sides {
            p,
            hyper: compile(&f_h, p, Flavor::Translated, None)?,
            real: compile(f, p, Flavor::Ordinary, Some(free_bound))?,
            grid: &grid,
            semantics,
        })
    };
    let arity = f.free_vars().len();
    let rows = match sampling {
        Sampling::Random { samples, bound, seed } => {
            let s = sides(bound.clone())?;
            let radius = grid_radius(p, bound);
            let total = if arity == 0 { 1 } else { *samples };
            shard::collect(*seed, total, |rng, n| {
                (0..n)
                    .map(|_| {
                        let ks: Vec<HyperElem> = (0..arity)
                            .map(|_| p.elem(rng.gen_range(-radius..=radius)).expect("in range"))
                            .collect();
                        let vals: Vec<Rat> = ks.iter().map(|k| p.value(*k)).collect();
                        s.row(&ks, &vals)
                    })
                    .collect()
            })
        }
        Sampling::Exhaustive { bound } => {
            let s = sides(bound.clone())?;
            let radius = grid_radius(p, bound);
            let mut rows = Vec::new();
            let mut ks = vec![-radius; arity];
            loop {
                let elems: Vec<HyperElem> = ks.iter().map(|k| p.elem(*k).expect("in range")).collect();
                let vals: Vec<Rat> = elems.iter().map(|k| p.value(*k)).collect();
                rows.push(s.row(&elems, &vals));
                // Odometer increment; stops after the last assignment.
                let Some(i) = ks.iter().rposition(|k| *k < radius) else { break };
                ks[i] += 1;
                for k in &mut ks[i + 1..] {
                    *k = -radius;
                }
            }
            rows
        }
        Sampling::Explicit(points) => {
            let mut rows = Vec::with_capacity(points.len());
            for point in points {
                let bound = point.values().map(Rat::abs).max().unwrap_or_else(Rat::zero);
                let s = sides(bound)?;
                let mut ks = Vec::with_capacity(arity);
                let mut vals = Vec::with_capacity(arity);
                for v in &s.real.free {
                    let q = point.get(v).ok_or_else(|| FormulaError::MissingValue(v.clone()))?;
                    ks.push(p.embed(q)?);
                    vals.push(q.clone());
                }
                rows.push(s.row(&ks, &vals));
            }
            rows
        }
    };
    let mut summary = TransferSummary { rows: rows.len() as u64, ..Default::default() };
    for r in &rows {
        match r.verdict {
            Verdict::Agree => summary.agree += 1,
            Verdict::Disagree => summary.disagree += 1,
            Verdict::Boundary => summary.boundary += 1,
        }
    }
    Ok(TransferReport {
        formula: f.to_string(),
        translated: f_h.to_string(),
        uses_constants: f.has_constants(),
        semantics,
        summary,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::parse_formula;
    use crate::hyperarith::Preset;

    fn random(samples: u64) -> Sampling {
        Sampling::Random { samples, bound: Rat::one(), seed: 3 }
    }

    #[test]
    fn commutativity_agrees_everywhere() {
        let p = Preset::Tiny.params();
        let f = parse_formula("x * y = y * x").unwrap();
        let rep = transfer_check(&f, &p, &random(2000), AtomSemantics::Exact).unwrap();
        assert_eq!(rep.summary.agree, 2000);
    }

    #[test]
    fn distributivity_has_no_disagreement() {
        let p = Preset::Tiny.params();
        let f = parse_formula("x * (y + z) = x * y + x * z").unwrap();
        let rep = transfer_check(&f, &p, &random(2000), AtomSemantics::Exact).unwrap();
        assert_eq!(rep.summary.disagree, 0);
        assert_eq!(rep.summary.boundary, 0);
    }

    #[test]
    fn near_threshold_atom_is_boundary() {
        let p = Preset::Tiny.params();
        let f = parse_formula("x = y").unwrap();
        // gap = 1/4 - eps/4 = 63/256
        let point = BTreeMap::from([
            ("x".to_string(), Rat::zero()),
            ("y".to_string(), Rat::new(63, 256).unwrap()),
        ]);
        for sem in [AtomSemantics::Exact, AtomSemantics::Tolerance] {
            let rep = transfer_check(&f, &p, &Sampling::Explicit(vec![point.clone()]), sem).unwrap();
            assert_eq!(rep.rows[0].verdict, Verdict::Boundary);
        }
    }

    #[test]
    fn false_identity_disagrees_only_under_exact_atoms() {
        let p = Preset::Tiny.params();
        let f = parse_formula("x * y = x + y").unwrap();
        let exact = transfer_check(&f, &p, &random(2000), AtomSemantics::Exact).unwrap();
        assert!(exact.summary.disagree > 0);
        let tol = transfer_check(&f, &p, &random(2000), AtomSemantics::Tolerance).unwrap();
        assert_eq!(tol.summary.disagree, 0);
    }

    #[test]
    fn closed_formula_has_one_row() {
        let p = Preset::Tiny.params();
        let f = parse_formula("exists x. x + x = 1").unwrap();
        let rep = transfer_check(&f, &p, &random(50), AtomSemantics::Exact).unwrap();
        assert_eq!(rep.summary.rows, 1);
        assert_eq!(rep.rows[0].verdict, Verdict::Agree);
    }

    #[test]
    fn exhaustive_counts_every_point() {
        let p = Preset::Tiny.params();
        let f = parse_formula("x + 0 = x").unwrap();
        let rep =
            transfer_check(&f, &p, &Sampling::Exhaustive { bound: Rat::new(1, 8).unwrap() }, AtomSemantics::Exact)
                .unwrap();
        assert_eq!(rep.summary.rows, 17);
        assert_eq!(rep.summary.agree, 17);
    }
}
