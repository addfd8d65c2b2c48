//! R(ω,ε) at the TINY preset: wraparound addition, floored multiplication and the
//! non-associativity of multiplication.
use hyperlab::hyperarith::{search_counterexample, Law, SearchOutcome};
use hyperlab::{Preset, Rat};

fn main() {
    let p = Preset::Tiny.params();
    println!("omega = {}, eps = {}, bounded up to k = {}", p.omega(), p.eps(), p.bounded_max());
    let half = p.embed(&Rat::new(1, 2).expect("rational")).expect("bounded");
    let q = p.hmul(half, half);
    println!("1/2 (*) 1/2 = {} (k = {})", p.value(q), q.k());
    let top = p.elem(p.omega()).expect("in range");
    let one = p.elem(1).expect("in range");
    println!("omega (+) 1 = k {}", p.hadd(top, one).k());
    let [a, b, c] = [3, 3, 2000].map(|k| p.elem(k).expect("in range"));
    let (l, r) = Law::MulAssoc.sides(&p, a, b, c);
    println!("(3*3)*2000 = {}, 3*(3*2000) = {}", l.k(), r.k());
    match search_counterexample(Law::MulAssoc, &p, 100_000, 7) {
        SearchOutcome::Found(w) => println!("search found {:?} -> {} vs {}", w.triple.map(|x| x.k()), w.lhs.k(), w.rhs.k()),
        other => println!("search: {other:?}"),
    }
}
