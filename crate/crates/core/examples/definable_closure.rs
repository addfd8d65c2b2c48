//! Definable closure of the empty parameter set inside V_B.
use hyperlab::tarski::{def_closure_with, elementary_check, random_corpus, BoundedUniverse, DefConfig, FiniteStructure};

fn main() {
    let u = BoundedUniverse::new(16).expect("bound");
    let cl = def_closure_with(&FiniteStructure::default(), &u, &DefConfig::with_maxlen(6)).expect("closure");
    for d in &cl.definitions {
        println!("{:>3}  {:<12} {}", d.code, d.set.to_string(), d.formula);
    }
    println!("{} of {} elements after {} rounds", cl.structure.len(), u.size(), cl.rounds);
    let corpus = random_corpus(cl.structure.elements(), 50, 2, 2, 3);
    let report = elementary_check(&cl.structure, &u.structure(), &corpus).expect("check");
    println!("elementary on {} formulas: {}", report.checked, report.holds());
}
