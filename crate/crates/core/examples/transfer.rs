//! Transfer of ring identities between exact rationals and R(ω,ε).
use hyperlab::formulas::{parse_corpus, transfer_check, AtomSemantics, Sampling};
use hyperlab::{Preset, Rat};

fn main() {
    let p = Preset::Tiny.params();
    let corpus = parse_corpus(include_str!("../corpus/identities.txt")).expect("corpus");
    let false_one = parse_corpus("sum_is_product : x * y = x + y").expect("corpus");
    for e in corpus.iter().chain(&false_one) {
        let s = Sampling::Random { samples: 2000, bound: Rat::one(), seed: 1 };
        let r = transfer_check(&e.formula, &p, &s, AtomSemantics::Exact).expect("transfer");
        let t = r.summary;
        println!(
            "{:<15} agree {:>5}  disagree {:>4}  boundary {:>4}   {}",
            e.name, t.agree, t.disagree, t.boundary, r.translated
        );
    }
}
