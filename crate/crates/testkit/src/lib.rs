//! Generators and brute-force oracles used by the test suites of
//! `adfd-core` and `adfd-cli`.
//!
//! The oracles share no code with the library beyond the model accessors:
//! they recompute closures, flows and match sets from the definitions.

pub mod ast;
pub mod diagrams;
pub mod oracle;

use rand::SeedableRng;

/// Deterministic RNG for a test case.
pub fn rng(seed: u64) -> rand::rngs::StdRng {
    rand::rngs::StdRng::seed_from_u64(seed)
}
