//! Set-function value oracles: modular, explicit-table, and interval-coverage
//! kinds, plus contraction wrappers and brute-force structural checkers.
//!
//! Every top-level evaluation charges the call counter exactly 1 regardless
//! of kind; a marginal charges 2; a contraction delegates to (and counts
//! against) its parent. This is the cost model all complexity measurements
//! use.
//!
//! Coverage oracles keep an internal union cache so that greedy-style call
//! patterns (`f(A ∪ {e})` for a slowly growing base `A`) stay cheap at large
//! ground sets. The cache never changes results: coverage measures are always
//! the left-to-right sum over the canonical merged span list of the queried
//! set, so cached and from-scratch paths are bit-identical.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use crate::element::{ElementId, ElementSet};
use crate::error::{Error, Result};
use crate::interval::{canonical_merge, merged_measure, sum_spans, IntervalSet};

/// Tolerance for the structural checkers: violations smaller than this pass.
pub const STRUCTURE_TOL: f64 = 1e-9;

/// Largest ground set for which an explicit table oracle may be built.
pub const TABLE_MAX_N: usize = 24;

/// Largest ground set accepted by [`check_monotone_submodular`].
pub const STRUCTURE_CHECK_MAX_N: usize = 16;

/// Black-box access to a set function with call accounting.
///
/// `evaluate_ext(base, extras)` computes `f(base ∪ extras)`. Passing the
/// variable part separately lets implementations reuse work across the
/// `f(A ∪ {e})` probes that dominate greedy runs; results are identical to
/// materializing the union.
pub trait ValueOracle: Sync {
    fn ground_size(&self) -> usize;

    /// Total evaluations charged so far.
    fn calls(&self) -> u64;

    /// `f(base ∪ extras)`; charges one call.
    fn evaluate_ext(&self, base: &ElementSet, extras: &[ElementId]) -> Result<f64>;

    /// `f(s)`; charges one call.
    fn evaluate(&self, s: &ElementSet) -> Result<f64> {
        self.evaluate_ext(s, &[])
    }

    /// `f(base ∪ s) − f(base)`; charges exactly two calls, no caching.
    fn marginal(&self, base: &ElementSet, s: &ElementSet) -> Result<f64> {
        let joint = self.evaluate_ext(base, s.ids())?;
        let alone = self.evaluate_ext(base, &[])?;
        Ok(joint - alone)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OracleKind {
    Modular,
    Table,
    Coverage,
}

#[derive(Debug, Default)]
struct CoverageCache {
    valid: bool,
    base_token: u128,
    base_len: usize,
    /// Membership bitmask of the cached base set.
    member: Vec<u64>,
    /// Canonical merged union of the cached base's intervals.
    segments: Vec<(f64, f64)>,
}

#[derive(Debug)]
enum Payload {
    Modular {
        values: Vec<f64>,
    },
    Table {
        n: usize,
        values: Vec<f64>,
    },
    Coverage {
        intervals: Vec<IntervalSet>,
        cache: Mutex<CoverageCache>,
    },
}

/// A concrete set-function oracle over ids `0..n`.
#[derive(Debug)]
pub struct SetFunctionOracle {
    payload: Payload,
    calls: AtomicU64,
}

impl SetFunctionOracle {
    /// `f(S) = Σ_{e∈S} v(e)` with `v(e) ≥ 0`.
    pub fn modular(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::MalformedOracle(format!(
                    "modular value for element {i} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(Self::from_payload(Payload::Modular { values }))
    }

    /// Explicit table over all `2^n` subsets, indexed by bitmask.
    pub fn table(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > TABLE_MAX_N {
            return Err(Error::SizeLimit {
                what: "table oracle ground set",
                limit: TABLE_MAX_N,
                got: n,
            });
        }
        if values.len() != 1usize << n {
            return Err(Error::MalformedOracle(format!(
                "table oracle over {n} elements needs {} values, got {}",
                1usize << n,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::MalformedOracle(format!(
                "table oracle value {v} is not finite"
            )));
        }
        Ok(Self::from_payload(Payload::Table { n, values }))
    }

    /// `f(S) = μ(⋃_{e∈S} intervals(e))`: monotone and submodular by
    /// construction.
    pub fn coverage(intervals: Vec<IntervalSet>) -> Self {
        Self::from_payload(Payload::Coverage {
            intervals,
            cache: Mutex::new(CoverageCache::default()),
        })
    }

    fn from_payload(payload: Payload) -> Self {
        SetFunctionOracle {
            payload,
            calls: AtomicU64::new(0),
        }
    }

    pub fn kind(&self) -> OracleKind {
        match self.payload {
            Payload::Modular { .. } => OracleKind::Modular,
            Payload::Table { .. } => OracleKind::Table,
            Payload::Coverage { .. } => OracleKind::Coverage,
        }
    }

    pub fn modular_values(&self) -> Option<&[f64]> {
        match &self.payload {
            Payload::Modular { values } => Some(values),
            _ => None,
        }
    }

    pub fn table_values(&self) -> Option<&[f64]> {
        match &self.payload {
            Payload::Table { values, .. } => Some(values),
            _ => None,
        }
    }

    pub fn coverage_intervals(&self) -> Option<&[IntervalSet]> {
        match &self.payload {
            Payload::Coverage { intervals, .. } => Some(intervals),
            _ => None,
        }
    }

    fn check_ids(&self, base: &ElementSet, extras: &[ElementId]) -> Result<()> {
        let n = self.ground_size();
        // base is sorted, so its last id bounds all of them
        if let Some(&last) = base.ids().last() {
            if last.index() >= n {
                return Err(Error::UnknownElement(last));
            }
        }
        for &e in extras {
            if e.index() >= n {
                return Err(Error::UnknownElement(e));
            }
        }
        Ok(())
    }
}

fn modular_sum(values: &[f64], base: &ElementSet, extras: &[ElementId]) -> f64 {
    if extras.is_empty() {
        let mut total = 0.0;
        for e in base.iter() {
            total += values[e.index()];
        }
        return total;
    }
    let mut ex: Vec<ElementId> = extras.to_vec();
    ex.sort_unstable();
    ex.dedup();
    // ascending merge walk so the summation order is canonical for the union
    let mut total = 0.0;
    let (mut i, mut j) = (0, 0);
    let ids = base.ids();
    while i < ids.len() || j < ex.len() {
        let take = match (ids.get(i), ex.get(j)) {
            (Some(&a), Some(&b)) => {
                if a <= b {
                    if a == b {
                        j += 1;
                    }
                    i += 1;
                    a
                } else {
                    j += 1;
                    b
                }
            }
            (Some(&a), None) => {
                i += 1;
                a
            }
            (None, Some(&b)) => {
                j += 1;
                b
            }
            (None, None) => unreachable!(),
        };
        total += values[take.index()];
    }
    total
}

fn table_mask(base: &ElementSet, extras: &[ElementId]) -> u32 {
    let mut mask = 0u32;
    for e in base.iter() {
        mask |= 1 << e.0;
    }
    for &e in extras {
        mask |= 1 << e.0;
    }
    mask
}

fn coverage_measure(
    intervals: &[IntervalSet],
    cache: &Mutex<CoverageCache>,
    base: &ElementSet,
    extras: &[ElementId],
) -> f64 {
    let mut c = cache.lock().unwrap();
    let hit = c.valid && c.base_token == base.token() && c.base_len == base.len();
    if !hit {
        let mut advanced = false;
        if c.valid && base.len() >= c.base_len {
            // subset test: every cached element must reappear in `base`
            let mut hits = 0usize;
            let mut missing: Vec<ElementId> = Vec::new();
            for e in base.iter() {
                let (w, b) = (e.index() / 64, e.index() % 64);
                if c.member.get(w).is_some_and(|word| word >> b & 1 == 1) {
                    hits += 1;
                } else {
                    missing.push(e);
                }
            }
            if hits == c.base_len {
                for &e in &missing {
                    let (w, b) = (e.index() / 64, e.index() % 64);
                    c.member[w] |= 1 << b;
                    c.segments.extend_from_slice(intervals[e.index()].spans());
                }
                canonical_merge(&mut c.segments);
                c.base_token = base.token();
                c.base_len = base.len();
                advanced = true;
            }
        }
        if !advanced {
            let words = intervals.len().div_ceil(64);
            c.member.clear();
            c.member.resize(words, 0);
            c.segments.clear();
            for e in base.iter() {
                let (w, b) = (e.index() / 64, e.index() % 64);
                c.member[w] |= 1 << b;
                c.segments.extend_from_slice(intervals[e.index()].spans());
            }
            canonical_merge(&mut c.segments);
            c.base_token = base.token();
            c.base_len = base.len();
            c.valid = true;
        }
    }
    if extras.is_empty() {
        return sum_spans(&c.segments);
    }
    let mut extra_spans: Vec<(f64, f64)> = Vec::new();
    for &e in extras {
        extra_spans.extend_from_slice(intervals[e.index()].spans());
    }
    canonical_merge(&mut extra_spans);
    merged_measure(&c.segments, &extra_spans)
}

impl ValueOracle for SetFunctionOracle {
    fn ground_size(&self) -> usize {
        match &self.payload {
            Payload::Modular { values } => values.len(),
            Payload::Table { n, .. } => *n,
            Payload::Coverage { intervals, .. } => intervals.len(),
        }
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn evaluate_ext(&self, base: &ElementSet, extras: &[ElementId]) -> Result<f64> {
        self.check_ids(base, extras)?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(match &self.payload {
            Payload::Modular { values } => modular_sum(values, base, extras),
            Payload::Table { values, .. } => values[table_mask(base, extras) as usize],
            Payload::Coverage { intervals, cache } => {
                coverage_measure(intervals, cache, base, extras)
            }
        })
    }
}

/// The contracted function `f_G(S) = f(G ∪ S) − f(G)`.
///
/// `f(G)` is evaluated once at construction; every wrapper evaluation
/// delegates a single call to the parent.
pub struct Contracted<'a, O: ValueOracle + ?Sized> {
    parent: &'a O,
    base: ElementSet,
    base_value: f64,
}

impl<'a, O: ValueOracle + ?Sized> Contracted<'a, O> {
    pub fn new(parent: &'a O, base: ElementSet) -> Result<Self> {
        let base_value = parent.evaluate(&base)?;
        Ok(Contracted {
            parent,
            base,
            base_value,
        })
    }

    pub fn base(&self) -> &ElementSet {
        &self.base
    }

    pub fn base_value(&self) -> f64 {
        self.base_value
    }
}

impl<O: ValueOracle + ?Sized> ValueOracle for Contracted<'_, O> {
    fn ground_size(&self) -> usize {
        self.parent.ground_size()
    }

    fn calls(&self) -> u64 {
        self.parent.calls()
    }

    fn evaluate_ext(&self, base: &ElementSet, extras: &[ElementId]) -> Result<f64> {
        let joint = if self.base.is_empty() {
            self.parent.evaluate_ext(base, extras)?
        } else {
            let mut ext: Vec<ElementId> = Vec::with_capacity(extras.len() + self.base.len());
            ext.extend_from_slice(extras);
            ext.extend_from_slice(self.base.ids());
            self.parent.evaluate_ext(base, &ext)?
        };
        Ok(joint - self.base_value)
    }
}

/// Result of the exhaustive structure check.
#[derive(Clone, Debug)]
pub struct StructureReport {
    pub monotone: bool,
    pub submodular: bool,
    /// `(S, T)` with `S ⊆ T` but `f(S) > f(T)` beyond tolerance.
    pub monotone_witness: Option<(ElementSet, ElementSet)>,
    /// `(A, B, e)` with `A ⊆ B`, `e ∉ B` but `f_A(e) < f_B(e)` beyond
    /// tolerance.
    pub submodular_witness: Option<(ElementSet, ElementSet, ElementId)>,
}

/// Exhaustively checks monotonicity and submodularity of `oracle` over all
/// subsets of `0..n`. Requires `n ≤ 16` and `n` equal to the oracle's ground
/// size; evaluates each of the `2^n` subsets exactly once.
pub fn check_monotone_submodular<O: ValueOracle + ?Sized>(
    oracle: &O,
    n: usize,
) -> Result<StructureReport> {
    if n > STRUCTURE_CHECK_MAX_N {
        return Err(Error::SizeLimit {
            what: "structure check ground set",
            limit: STRUCTURE_CHECK_MAX_N,
            got: n,
        });
    }
    if n != oracle.ground_size() {
        return Err(Error::InvalidArgument(format!(
            "structure check over {n} elements but oracle has ground size {}",
            oracle.ground_size()
        )));
    }
    let full = 1usize << n;
    let mut values = Vec::with_capacity(full);
    for mask in 0..full {
        values.push(oracle.evaluate(&ElementSet::from_mask(mask as u64))?);
    }

    let mut monotone = true;
    let mut monotone_witness = None;
    'mono: for mask in 0..full {
        for e in 0..n {
            if mask >> e & 1 == 0 {
                let with = mask | 1 << e;
                if values[with] < values[mask] - STRUCTURE_TOL {
                    monotone = false;
                    monotone_witness = Some((
                        ElementSet::from_mask(mask as u64),
                        ElementSet::from_mask(with as u64),
                    ));
                    break 'mono;
                }
            }
        }
    }

    let mut submodular = true;
    let mut submodular_witness = None;
    'sub: for e in 0..n {
        for b in 0..full {
            if b >> e & 1 == 1 {
                continue;
            }
            let gain_b = values[b | 1 << e] - values[b];
            // walk all A ⊆ B via submask enumeration
            let mut a = b;
            loop {
                let gain_a = values[a | 1 << e] - values[a];
                if gain_a < gain_b - STRUCTURE_TOL {
                    submodular = false;
                    submodular_witness = Some((
                        ElementSet::from_mask(a as u64),
                        ElementSet::from_mask(b as u64),
                        ElementId(e as u32),
                    ));
                    break 'sub;
                }
                if a == 0 {
                    break;
                }
                a = (a - 1) & b;
            }
        }
    }

    Ok(StructureReport {
        monotone,
        submodular,
        monotone_witness,
        submodular_witness,
    })
}
