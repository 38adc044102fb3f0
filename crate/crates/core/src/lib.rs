//! Finite-N arithmetic of k-full numbers.
//!
//! The crate enumerates k-full integers through their unique representation
//! `m^k · n_1^(k+1) ⋯ n_(k-1)^(2k-1)`, evaluates the Erdős–Szekeres constant
//! `c_k` by two independent routes, and computes finite-N versions of the
//! averages of `f(T^Ω(n) x)`, Erdős–Kac windows and Weyl sums restricted to
//! k-full numbers, together with the decomposition that relates them to
//! averages along k-th powers.

pub mod arith;
pub mod averages;
pub mod constants;
pub mod decomposition;
pub mod dynamics;
pub mod error;
pub mod kfull;
pub mod sum;

pub use error::{Error, Result};

/// Version string embedded in machine-readable output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
