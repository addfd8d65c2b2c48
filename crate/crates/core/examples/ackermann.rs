//! Ackermann coding: codes 0..16 decoded, and a literal encoded back.
use hyperlab::{AckCode, HfSet};

fn main() {
    for n in 0u32..16 {
        let s = HfSet::ack_decode(&AckCode(n.into()));
        println!("{n:>3}  rank {}  {s}", s.rank());
    }
    let x: HfSet = "{{},{{}},{{{}}}}".parse().expect("literal");
    println!("ac({x}) = {}", x.ack_encode());
}
