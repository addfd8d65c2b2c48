//! Bounded, infinitesimal and standard rationals under a smallness threshold.
use hyperlab::{FeasibilityContext, Rat};

fn main() {
    let ctx = FeasibilityContext::new(4).expect("threshold");
    for q in ["3/2", "1/5", "1/64", "100", "33/16"] {
        let q: Rat = q.parse().expect("rational");
        let st = ctx.st(&q).map(|s| s.to_string()).unwrap_or_else(|e| format!("({e})"));
        println!(
            "{:>6}  bounded={:<5}  infinitesimal={:<5}  st={st}",
            q.to_string(),
            ctx.is_bounded(&q),
            ctx.is_infinitesimal(&q)
        );
    }
}
