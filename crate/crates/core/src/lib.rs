//! Exact decision procedure for whether the power GCD matrix `(S^e)`
//! divides the power LCM matrix `[S^e]` in `M_n(Z)` on gcd-closed sets `S`.
//!
//! The structural criterion is condition C on greatest-type divisors; the
//! direct route builds the closed-form inverse of `(S^e)` and checks the
//! quotient for integrality. Both are implemented and checked against each
//! other, together with constructive non-integrality witnesses.

pub mod arith;
pub mod error;
pub mod explore;
pub mod matrices;
pub mod setalg;
pub mod theorem;

pub use arith::{Int, Nat, Ratio};
pub use error::{Error, ReproBundle, Result};
