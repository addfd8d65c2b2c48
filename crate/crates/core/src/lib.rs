//! Exact-arithmetic laboratory for hyperfinite computer arithmetic.
//!
//! * [`hfset`]: hereditarily finite sets, Ackermann coding, set-built natural arithmetic
//! * [`numbers`]: tagged integers, reduced rationals, and a finite smallness model
//! * [`hyperarith`]: the arithmetic `R(ω,ε)`, its indiscernibility relation and nets
//! * [`formulas`]: first-order formulas over `+` and `·`, their hyperfinite analogs, and a
//!   transfer harness comparing the two
//! * [`tarski`]: coded `∈`-formulas, satisfaction over finite structures, definable closure
//! * [`toyfp`]: a small binary floating-point format used as a foil
//! * [`cli`]: the command-line front end

pub mod cli;
pub mod formulas;
pub mod hfset;
pub mod hyperarith;
pub mod numbers;
pub mod shard;
pub mod tarski;
pub mod toyfp;

pub use hfset::{AckCode, HfSet, Nat};
pub use hyperarith::{HyperElem, HyperParams, Preset};
pub use numbers::{FeasibilityContext, Int, Rat};
