//! Natural-number arithmetic by counting constructed sets.
use hyperlab::hfset::{nat_add, nat_mul};
use hyperlab::{HfSet, Nat};

fn main() {
    println!("3 as a von Neumann ordinal: {}", HfSet::von_neumann(3));
    for (a, b) in [(2u32, 3u32), (4, 5), (7, 0)] {
        let (x, y) = (Nat(a.into()), Nat(b.into()));
        let s = nat_add(&x, &y, 1024).expect("within bound");
        let p = nat_mul(&x, &y, 1024).expect("within bound");
        println!("{a} + {b} = {}   {a} * {b} = {}", s.0, p.0);
    }
}
