//! Seeded random instance families for property suites and ratio sweeps.
//!
//! Coverage family: each element owns 1–3 random subintervals of `[0, 1)`
//! (overlaps within an element are merged); weights are uniform in `(0, 1]`;
//! the capacity is uniform in `(0.3 · w(E), 0.9 · w(E))`, which makes
//! rejections frequent. The modular family draws values uniform in `(0, 1]`
//! with the same weight and capacity rules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::element::splitmix64;
use crate::error::Result;
use crate::instance::Instance;
use crate::interval::IntervalSet;
use crate::oracle::SetFunctionOracle;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Family {
    Coverage { n: usize },
    Modular { n: usize },
}

impl Family {
    pub fn n(&self) -> usize {
        match *self {
            Family::Coverage { n } | Family::Modular { n } => n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Coverage { .. } => "coverage",
            Family::Modular { .. } => "modular",
        }
    }

    /// Deterministic per-trial instance: the stream depends only on
    /// `(seed, trial)`, never on evaluation order across trials.
    pub fn generate(&self, seed: u64, trial: u32) -> Result<Instance> {
        let mut rng = trial_rng(seed, trial);
        match *self {
            Family::Coverage { n } => random_coverage(n, &mut rng),
            Family::Modular { n } => random_modular(n, &mut rng),
        }
    }
}

pub fn trial_rng(seed: u64, trial: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(splitmix64(seed) ^ trial as u64))
}

pub fn random_coverage(n: usize, rng: &mut impl Rng) -> Result<Instance> {
    let mut intervals = Vec::with_capacity(n);
    for _ in 0..n {
        let count = rng.gen_range(1..=3);
        let mut spans = Vec::with_capacity(count);
        for _ in 0..count {
            spans.push(random_span(rng));
        }
        intervals.push(IntervalSet::new(spans)?);
    }
    let (weights, capacity) = random_weights(n, rng);
    Instance::new(weights, capacity, SetFunctionOracle::coverage(intervals))
}

pub fn random_modular(n: usize, rng: &mut impl Rng) -> Result<Instance> {
    let values: Vec<f64> = (0..n).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let (weights, capacity) = random_weights(n, rng);
    Instance::new(weights, capacity, SetFunctionOracle::modular(values)?)
}

fn random_span(rng: &mut impl Rng) -> (f64, f64) {
    loop {
        let a = rng.gen::<f64>();
        let b = rng.gen::<f64>();
        if a < b {
            return (a, b);
        }
        if b < a {
            return (b, a);
        }
    }
}

fn random_weights(n: usize, rng: &mut impl Rng) -> (Vec<f64>, f64) {
    let weights: Vec<f64> = (0..n).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    let capacity = if n == 0 {
        1.0
    } else {
        rng.gen_range(0.3..0.9) * total
    };
    (weights, capacity)
}
