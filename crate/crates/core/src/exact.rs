//! Brute-force ground truth and the approximation-ratio sweep harness.

use rayon::prelude::*;
use serde::Serialize;

use crate::algorithms::Algorithm;
use crate::element::ElementSet;
use crate::error::{Error, Result};
use crate::families::Family;
use crate::instance::Problem;
use crate::oracle::ValueOracle;

/// Largest ground set brute force will enumerate (2^n subsets).
pub const BRUTE_FORCE_MAX_N: usize = 22;

/// Exhaustive optimum over all feasible subsets. Returns the maximum value
/// and the lexicographically-first maximizing set (tuple order on sorted
/// ids).
pub fn brute_force_opt<O: ValueOracle + ?Sized>(p: &Problem<'_, O>) -> Result<(f64, ElementSet)> {
    let n = p.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::SizeLimit {
            what: "brute-force ground set",
            limit: BRUTE_FORCE_MAX_N,
            got: n,
        });
    }
    let mut best_value = f64::NEG_INFINITY;
    let mut best_set = ElementSet::new();
    for mask in 0u64..(1u64 << n) {
        let mut weight = 0.0;
        let mut m = mask;
        while m != 0 {
            let b = m.trailing_zeros();
            weight += p.weights[b as usize];
            m &= m - 1;
        }
        if !p.fits(weight) {
            continue;
        }
        let set = ElementSet::from_mask(mask);
        let value = p.oracle.evaluate(&set)?;
        if value > best_value || (value == best_value && set < best_set) {
            best_value = value;
            best_set = set;
        }
    }
    Ok((best_value, best_set))
}

/// One (instance, algorithm) measurement of a sweep.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct RatioRecord {
    pub trial: u32,
    pub n: usize,
    pub alg: String,
    pub alg_value: f64,
    pub opt_value: f64,
    pub ratio: f64,
    pub oracle_calls: u64,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub family: Family,
    pub algorithms: Vec<Algorithm>,
    pub trials: u32,
    pub seed: u64,
}

/// Runs every configured algorithm against brute force on `trials` seeded
/// instances. Trials run in parallel; records are returned in canonical
/// (trial, algorithm) order, so output is reproducible bit-for-bit from
/// `(family, trials, seed)`.
pub fn ratio_sweep(cfg: &SweepConfig) -> Result<Vec<RatioRecord>> {
    if cfg.family.n() > BRUTE_FORCE_MAX_N {
        return Err(Error::SizeLimit {
            what: "sweep instance size",
            limit: BRUTE_FORCE_MAX_N,
            got: cfg.family.n(),
        });
    }
    let per_trial: Vec<Vec<RatioRecord>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<RatioRecord>> {
            let inst = cfg.family.generate(cfg.seed, trial)?;
            let p = inst.problem();
            let (opt_value, _) = brute_force_opt(&p)?;
            let mut records = Vec::with_capacity(cfg.algorithms.len());
            for alg in &cfg.algorithms {
                let result = alg.run(&p)?;
                let ratio = if opt_value > 0.0 {
                    result.value / opt_value
                } else {
                    1.0
                };
                records.push(RatioRecord {
                    trial,
                    n: inst.n(),
                    alg: alg.to_string(),
                    alg_value: result.value,
                    opt_value,
                    ratio,
                    oracle_calls: result.oracle_calls,
                });
            }
            Ok(records)
        })
        .collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}
