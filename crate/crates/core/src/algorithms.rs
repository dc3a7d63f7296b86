//! Seeded-enumeration greedy and the greedy-or-best-singleton heuristic,
//! with oracle-call accounting.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::element::{ElementId, ElementSet};
use crate::error::{Error, Result};
use crate::greedy::{greedy, run_greedy, GreedyVariant};
use crate::instance::Problem;
use crate::oracle::{Contracted, ValueOracle};

/// Largest enumeration size; nothing here needs more than seeds of three.
pub const MAX_KAPPA: usize = 3;

#[derive(Clone, PartialEq, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BestSeed {
    /// The greedy branch won (or there was nothing else).
    Greedy,
    /// A single element beat the greedy output.
    Singleton { element: ElementId },
    /// The enumerated seed the best solution grew from.
    Seed { elements: Vec<ElementId> },
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct AlgorithmResult {
    pub solution: ElementSet,
    pub value: f64,
    pub oracle_calls: u64,
    pub best_seed: BestSeed,
}

/// Extends every feasible seed `G` with `|G| ≤ kappa` (visited in
/// lexicographic order of sorted id tuples) by a greedy run on the contracted
/// residual instance, and keeps the best `f(A ∪ G)`. Ties keep the first
/// maximizer encountered; seeds heavier than the capacity are skipped.
pub fn enum_greedy<O: ValueOracle + ?Sized>(
    p: &Problem<'_, O>,
    kappa: usize,
) -> Result<AlgorithmResult> {
    if kappa > MAX_KAPPA {
        return Err(Error::InvalidArgument(format!(
            "enumeration size {kappa} exceeds {MAX_KAPPA}"
        )));
    }
    let calls_before = p.oracle.calls();
    let n = p.n() as u32;
    let mut best: Option<(f64, ElementSet, Vec<ElementId>)> = None;

    // depth-first enumeration emits seeds in lexicographic tuple order:
    // (), (0), (0,1), (0,1,2), ..., (0,2), ..., (1), ...
    let mut stack: Vec<Vec<ElementId>> = vec![Vec::new()];
    while let Some(seed) = stack.pop() {
        if seed.len() < kappa {
            let start = seed.last().map_or(0, |e| e.0 + 1);
            // push in reverse so the smallest extension pops first
            for next in (start..n).rev() {
                let mut child = seed.clone();
                child.push(ElementId(next));
                stack.push(child);
            }
        }
        let g = ElementSet::from_ids(seed.iter().copied());
        let g_weight = p.set_weight(&g);
        if !p.fits(g_weight) {
            continue;
        }
        let contracted = Contracted::new(p.oracle, g.clone())?;
        let residual = Problem {
            oracle: &contracted,
            weights: p.weights,
            capacity: p.capacity - g_weight,
        };
        let trace = greedy(&residual)?;
        let candidate = g.union(&trace.final_set);
        let value = p.oracle.evaluate(&candidate)?;
        if best.as_ref().is_none_or(|(bv, _, _)| value > *bv) {
            best = Some((value, candidate, seed));
        }
    }

    let (_, solution, seed) = best.expect("the empty seed is always feasible");
    let value = p.oracle.evaluate(&solution)?;
    Ok(AlgorithmResult {
        solution,
        value,
        oracle_calls: p.oracle.calls() - calls_before,
        best_seed: BestSeed::Seed { elements: seed },
    })
}

/// Runs greedy, then returns the better of its output and the best feasible
/// singleton (ties toward the greedy output, singleton ties toward the
/// smallest id).
pub fn greedy_plus_singleton<O: ValueOracle + ?Sized>(
    p: &Problem<'_, O>,
    variant: GreedyVariant,
) -> Result<AlgorithmResult> {
    let calls_before = p.oracle.calls();
    let trace = run_greedy(p, variant)?;
    let mut result = greedy_plus_singleton_from_trace(p, &trace)?;
    result.oracle_calls = p.oracle.calls() - calls_before;
    Ok(result)
}

/// The singleton-vs-greedy decision given an existing greedy trace; lets a
/// verifier that already ran greedy avoid a second full run.
/// `oracle_calls` covers only the singleton scan and the final evaluation.
pub fn greedy_plus_singleton_from_trace<O: ValueOracle + ?Sized>(
    p: &Problem<'_, O>,
    trace: &crate::greedy::GreedyTrace,
) -> Result<AlgorithmResult> {
    let calls_before = p.oracle.calls();
    let greedy_value = trace.final_value();

    let mut best_single: Option<(ElementId, f64)> = None;
    for e in p.element_ids() {
        if !p.fits(p.weight(e)) {
            continue;
        }
        let v = p.oracle.evaluate(&ElementSet::singleton(e))?;
        if best_single.is_none_or(|(_, bv)| v > bv) {
            best_single = Some((e, v));
        }
    }

    let (solution, best_seed) = match best_single {
        Some((e, v)) if greedy_value < v => (
            ElementSet::singleton(e),
            BestSeed::Singleton { element: e },
        ),
        _ => (trace.final_set.clone(), BestSeed::Greedy),
    };
    let value = p.oracle.evaluate(&solution)?;
    Ok(AlgorithmResult {
        solution,
        value,
        oracle_calls: p.oracle.calls() - calls_before,
        best_seed,
    })
}

/// Named algorithm selector shared by the sweep harness and the CLI.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Algorithm {
    Greedy,
    Enum(u8),
    GreedyPlusSingleton,
}

impl Algorithm {
    /// Instances at or above this size run the lazy greedy; below it the
    /// plain scan is used. Only coverage and modular oracles reach large
    /// sizes, and for those the two variants produce identical traces.
    pub const LAZY_THRESHOLD: usize = 2048;

    pub fn run<O: ValueOracle + ?Sized>(&self, p: &Problem<'_, O>) -> Result<AlgorithmResult> {
        let variant = if p.n() >= Self::LAZY_THRESHOLD {
            GreedyVariant::Lazy
        } else {
            GreedyVariant::Plain
        };
        match self {
            Algorithm::Greedy => {
                let calls_before = p.oracle.calls();
                let trace = run_greedy(p, variant)?;
                let value = p.oracle.evaluate(&trace.final_set)?;
                Ok(AlgorithmResult {
                    solution: trace.final_set,
                    value,
                    oracle_calls: p.oracle.calls() - calls_before,
                    best_seed: BestSeed::Greedy,
                })
            }
            Algorithm::Enum(kappa) => enum_greedy(p, *kappa as usize),
            Algorithm::GreedyPlusSingleton => greedy_plus_singleton(p, variant),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Algorithm::Greedy),
            "enum0" => Ok(Algorithm::Enum(0)),
            "enum1" => Ok(Algorithm::Enum(1)),
            "enum2" => Ok(Algorithm::Enum(2)),
            "enum3" => Ok(Algorithm::Enum(3)),
            "gps" => Ok(Algorithm::GreedyPlusSingleton),
            other => Err(Error::InvalidArgument(format!(
                "unknown algorithm {other:?} (expected greedy, enum0..enum3, or gps)"
            ))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Greedy => write!(f, "greedy"),
            Algorithm::Enum(k) => write!(f, "enum{k}"),
            Algorithm::GreedyPlusSingleton => write!(f, "gps"),
        }
    }
}

/// Measures enumeration-greedy oracle calls over a family of growing
/// instances; used to fit the empirical growth exponent.
pub fn count_complexity<F>(make: F, sizes: &[usize], kappa: usize) -> Result<Vec<(usize, u64)>>
where
    F: Fn(usize) -> Result<crate::instance::Instance>,
{
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let inst = make(n)?;
        let result = enum_greedy(&inst.problem(), kappa)?;
        rows.push((n, result.oracle_calls));
    }
    Ok(rows)
}

/// Least-squares slope of `ln(calls)` against `ln(n)`.
pub fn fit_loglog_slope(rows: &[(usize, u64)]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|&(n, c)| ((n as f64).ln(), (c as f64).ln()))
        .collect();
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (m * sxy - sx * sy) / (m * sxx - sx * sx)
}
