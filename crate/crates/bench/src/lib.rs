//! Shared fixtures for the criterion benchmarks.

use msk_core::{Family, Instance};

pub fn coverage_instance(n: usize, seed: u64) -> Instance {
    Family::Coverage { n }
        .generate(seed, 0)
        .expect("benchmark instance generates")
}
