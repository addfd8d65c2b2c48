//! The greedy net of ρ-representatives covering the bounded part.
use hyperlab::Preset;

fn main() {
    let p = Preset::Tiny.params();
    let reps = p.select_representatives();
    println!("{} representatives, rho span {}", reps.len(), p.rho_span());
    let ks: Vec<String> = reps.iter().map(|r| r.k().to_string()).collect();
    println!("{}", ks.join(" "));
    let x = p.elem(100).expect("in range");
    let r = p.representative_of(&reps, x).expect("bounded");
    println!("k=100 is covered by k={} (rho: {})", r.k(), p.rho(x, r));
}
