//! Exact enumeration of labeled weighted bi-colored plane trees.
//!
//! The crate realizes a bijection between tree permutations of a full
//! passport and twice-marked plane trees (the combing and folding maps),
//! evaluates the partition-sum counting formulas, and cross-verifies the two
//! routes against brute-force oracles.

pub mod error;
pub mod weight;
pub mod passport;
pub mod permutation;
pub mod planetree;
pub mod combing;

pub use error::{Error, Result};
