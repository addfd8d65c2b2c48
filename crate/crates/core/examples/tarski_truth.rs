//! Truth of coded ∈-formulas in a finite structure, by both strategies.
use hyperlab::tarski::{parse_eform, satisfies, truth, EpsFormula, FiniteStructure, Strategy};

fn main() {
    let x = FiniteStructure::parse("{}\n{{}}\n{{},{{}}}\n").expect("structure");
    for text in [
        "exists v. v in {{}}",
        "forall v. exists w. v in w",
        "exists v. forall w. not w in v",
        "forall v. forall w. (forall u. (u in v iff u in w)) implies v = w",
    ] {
        let f = parse_eform(text).expect("formula");
        let code = EpsFormula::encode(&f);
        let t = truth(&x, &code).expect("closed");
        assert_eq!(t, satisfies(&x, &f, Strategy::BottomUp).expect("closed"));
        println!("{t:<5}  {f}\n       code {code}");
    }
}
