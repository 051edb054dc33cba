//! Nonlocality toolkit for permutation-symmetric multiqubit states.
//!
//! The crate builds symmetric states and their Majorana representation,
//! evaluates the single-positive-term Bell expressions `P^n` and `Q^n_d`
//! and the Dicke-state expression `L(n,k)`, finds measurement settings
//! (Majorana prescription, closed-form bases, multistart local search),
//! computes exact classical bounds by enumerating deterministic strategies,
//! and audits monogamy of correlation boxes with linear programming.

pub mod analysis;
pub mod bell;
pub mod error;
pub mod lhv;
pub mod lp;
pub mod measurement;
pub mod monogamy;
mod neldermead;
pub mod prescription;
pub mod reference;
mod roots;
pub mod symstate;

pub use error::{Error, Result};

/// Binomial coefficient as a float (exact for the sizes used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k)
        .fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        .round()
}
