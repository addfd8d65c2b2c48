//! A floating-point associativity failure next to R(ω,ε) addition on the same values.
use hyperlab::toyfp::{absorption_triple, contrast_hadd, evaluate_law, find_fp_witness, FpFormat, FpLaw, FpSearch};
use hyperlab::Preset;

fn main() {
    let p = Preset::Tiny.params();
    let fmt: FpFormat = "8,-14,15".parse().expect("format");
    let FpSearch::Found(w) = find_fp_witness(FpLaw::AddAssoc, &fmt, 100_000, 1) else {
        panic!("no witness");
    };
    for s in &w.steps {
        println!("{:<16} exact {:<14} rounded {}", s.expr, s.exact.to_string(), s.rounded_value);
    }
    let c = contrast_hadd(&w.triple, &p).expect("embeds");
    println!("hadd on {:?}: {} vs {} (associates: {})", c.embedded.map(|e| e.k()), c.lhs, c.rhs, c.associates);
    let d = FpFormat::double();
    let t = absorption_triple(&d).expect("triple");
    let w = evaluate_law(FpLaw::AddAssoc, t, &d).expect("finite");
    println!("binary64: (1 + u) + u = {}  1 + (u + u) = {}", w.lhs, w.rhs);
}
