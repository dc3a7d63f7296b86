//! Generator and verifier for the hard Greedy+Singleton instance: a coverage
//! instance on blocks X, Y, Z plus a ladder of small elements I_1, …, I_{k2}
//! that bait the greedy into covering slivers of all three blocks and then Z
//! itself, leaving no room for X or Y. The optimum {X, Y, Z} has value 1 and
//! weight exactly the capacity, while greedy-or-best-singleton stays below
//! 0.42945.
//!
//! Geometry: X = [0, f_X), Y = [1, 1 + f_Y), Z = [2, 2 + f_Z). Phase-1
//! elements tile Z from the left in slices of length ε (the last slice is
//! ragged so the phase covers exactly μ(Z) − (μ(X)/w(X))·w(Z)); phase-2
//! elements each take consecutive slivers of X, Y, and the rest of Z with
//! measures ε·w(X), ε·w(Y), ε·w(Z). Weights are chosen so the planned
//! selection at step j has marginal density d_j + η for a margin η that
//! replaces exact density ties: floating point cannot reproduce the ideal
//! construction's ties across independently rounded measures, so every
//! ordering the run depends on is engineered strict and then validated on
//! the exact run-time floats. Phase-2 slivers of Z are shortened by the
//! factor (1 − η), which leaves Z ahead of X and Y by (j − k1)·ε·η when the
//! ladder runs out. The generator simulates the oracle's arithmetic while
//! deriving weights, so predicted densities equal the run's densities
//! bit-for-bit.

use serde::{Deserialize, Serialize};

use crate::algorithms::{greedy_plus_singleton_from_trace, BestSeed};
use crate::element::{ElementId, ElementSet};
use crate::error::{Error, Result};
use crate::greedy::greedy_lazy;
use crate::instance::{Instance, FEAS_TOL};
use crate::interval::{canonical_merge, merged_measure, sum_spans, IntervalSet};
use crate::oracle::{SetFunctionOracle, ValueOracle};

pub const F_X: f64 = 0.42943;
pub const F_Y: f64 = 0.42943;
pub const F_Z: f64 = 0.14114;
pub const W_X: f64 = 0.4584;
pub const W_Y: f64 = 0.4584;
pub const W_Z: f64 = 0.0832;
pub const RHO: f64 = 0.62233;
pub const CAPACITY: f64 = 1.0;
/// The Greedy+Singleton upper bound this instance family establishes.
pub const BETA: f64 = 0.42945;

/// Density margin that replaces the ideal construction's exact ties.
const ETA: f64 = 1e-10;
/// Every ordering the run depends on must hold by at least this much.
const MARGIN_FLOOR: f64 = 1e-12;
/// Below this ε the margins drown in rounding noise.
const MIN_EPSILON: f64 = 1e-7;

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct AdversarialParams {
    pub f_x: f64,
    pub f_y: f64,
    pub f_z: f64,
    pub w_x: f64,
    pub w_y: f64,
    pub w_z: f64,
    pub capacity: f64,
    pub rho: f64,
    pub beta: f64,
    pub epsilon_requested: f64,
    /// Adjusted so that (k2 − k1)·ε = μ(X)/w(X) − ρ exactly.
    pub epsilon: f64,
    pub eta: f64,
    pub k1: usize,
    pub k2: usize,
    /// Length of the final phase-1 slice, in (0, ε].
    pub ragged_len: f64,
    pub structure_only: bool,
    /// 1 − 2·ρ·w(X), the value the greedy branch is pinned to.
    pub gps_bound: f64,
    pub predicted_gps_value: f64,
    pub predicted_opt_value: f64,
}

/// One planned selection with the exact density and prefix the run must
/// reproduce.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct PredictedStep {
    pub element: ElementId,
    pub density: f64,
    pub prefix_weight: f64,
    pub prefix_value: f64,
}

#[derive(Debug)]
pub struct AdversarialInstance {
    pub instance: Instance,
    pub params: AdversarialParams,
    /// I_1, …, I_{k2}, Z in selection order.
    pub predicted: Vec<PredictedStep>,
}

/// Replays the coverage oracle's exact arithmetic: canonical merged segments
/// of the selected prefix, canonical left-to-right sums.
struct CoverSim {
    segs: Vec<(f64, f64)>,
    total: f64,
}

impl CoverSim {
    fn new() -> Self {
        CoverSim {
            segs: Vec::new(),
            total: 0.0,
        }
    }

    fn marginal(&self, spans: &[(f64, f64)]) -> f64 {
        merged_measure(&self.segs, spans) - self.total
    }

    fn insert(&mut self, spans: &[(f64, f64)]) {
        self.segs.extend_from_slice(spans);
        canonical_merge(&mut self.segs);
        self.total = sum_spans(&self.segs);
    }
}

fn infeasible(check: impl Into<String>) -> Error {
    Error::ConstructionInfeasible {
        check: check.into(),
    }
}

/// Builds the instance for a requested ε. Strict mode additionally demands
/// that the selected weight exceed 1 − w(X), which pins the final solution;
/// that inequality has a limit margin of ≈ 4.6e−6 and fails for ε larger
/// than about 9e−6, so structure-only mode exists for quick desk-scale runs
/// that only reproduce the selection order and densities.
pub fn gen_adversarial(epsilon: f64, structure_only: bool) -> Result<AdversarialInstance> {
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be in (0, 1), got {epsilon}"
        )));
    }
    if epsilon < MIN_EPSILON {
        return Err(infeasible(format!(
            "epsilon {epsilon} below {MIN_EPSILON}: density margins would drown in rounding noise"
        )));
    }
    let ratio = F_X / W_X; // μ(X)/w(X)
    let span = ratio - RHO; // (k2 − k1)·ε
    let m = (span / epsilon).round() as usize;
    if m < 1 {
        return Err(infeasible(format!(
            "epsilon {epsilon} too large: k2 - k1 = round({span}/{epsilon}) < 1"
        )));
    }
    let eps = span / m as f64;
    let l1 = F_Z - ratio * W_Z; // total phase-1 length
    let k1 = (l1 / eps).ceil() as usize;
    if k1 < 1 {
        return Err(infeasible("phase 1 needs at least one slice".to_string()));
    }
    let ragged = l1 - (k1 - 1) as f64 * eps;
    if ragged <= 0.0 || ragged > eps * (1.0 + 1e-9) {
        return Err(infeasible(format!(
            "ragged phase-1 slice length {ragged} out of (0, eps]"
        )));
    }
    if ragged / W_Z < MIN_EPSILON {
        return Err(infeasible(format!(
            "ragged slice too short ({ragged}): the phase boundary ordering loses its margin; \
             pick a slightly different epsilon"
        )));
    }
    let k2 = k1 + m;
    let n = k2 + 3;
    let z_id = ElementId(k2 as u32);
    let x_id = ElementId((k2 + 1) as u32);
    let y_id = ElementId((k2 + 2) as u32);

    let c_x = eps * W_X;
    let c_y = eps * W_Y;
    let c_z = eps * W_Z * (1.0 - ETA);
    let z0 = 2.0 + l1;
    if m as f64 * c_x >= F_X {
        return Err(infeasible("phase-2 slivers would not fit inside X".to_string()));
    }
    if z0 + m as f64 * c_z >= 2.0 + F_Z {
        return Err(infeasible("phase-2 slivers would not fit inside Z".to_string()));
    }

    // spans per ladder element
    let mut spans: Vec<Vec<(f64, f64)>> = Vec::with_capacity(n);
    for j in 1..=k1 {
        let a = 2.0 + (j - 1) as f64 * eps;
        let b = if j < k1 { 2.0 + j as f64 * eps } else { z0 };
        spans.push(vec![(a, b)]);
    }
    for t in 1..=m {
        spans.push(vec![
            ((t - 1) as f64 * c_x, t as f64 * c_x),
            (1.0 + (t - 1) as f64 * c_y, 1.0 + t as f64 * c_y),
            (z0 + (t - 1) as f64 * c_z, z0 + t as f64 * c_z),
        ]);
    }
    let z_spans = vec![(2.0, 2.0 + F_Z)];
    let x_spans = vec![(0.0, F_X)];
    let y_spans = vec![(1.0, 1.0 + F_Y)];
    spans.push(z_spans.clone());
    spans.push(x_spans.clone());
    spans.push(y_spans.clone());

    // derive ladder weights from the exact marginals the run will see, and
    // validate each step's ordering on those exact values
    let mut sim = CoverSim::new();
    let mut weights = vec![0.0f64; n];
    weights[z_id.index()] = W_Z;
    weights[x_id.index()] = W_X;
    weights[y_id.index()] = W_Y;
    let mut predicted = Vec::with_capacity(k2 + 1);
    let mut prefix_weight = 0.0;
    for j in 1..=k2 {
        let marginal = sim.marginal(&spans[j - 1]);
        let d_target = if j <= k1 {
            (F_Z - (j - 1) as f64 * eps) / W_Z
        } else {
            ratio - (j - 1 - k1) as f64 * eps
        };
        let w_j = marginal / (d_target + ETA);
        weights[j - 1] = w_j;
        let density = marginal / w_j;
        let d_z = sim.marginal(&z_spans) / W_Z;
        let d_x = sim.marginal(&x_spans) / W_X;
        let d_y = sim.marginal(&y_spans) / W_Y;
        let margin = density - d_z.max(d_x).max(d_y);
        if margin < MARGIN_FLOOR {
            return Err(infeasible(format!(
                "step {j}: ladder density {density} leads Z/X/Y by only {margin:e}"
            )));
        }
        sim.insert(&spans[j - 1]);
        prefix_weight += w_j;
        predicted.push(PredictedStep {
            element: ElementId((j - 1) as u32),
            density,
            prefix_weight,
            prefix_value: sim.total,
        });
    }
    // ladder exhausted: Z must lead X and Y
    let d_z = sim.marginal(&z_spans) / W_Z;
    let d_x = sim.marginal(&x_spans) / W_X;
    let d_y = sim.marginal(&y_spans) / W_Y;
    let z_margin = d_z - d_x.max(d_y);
    if z_margin < MARGIN_FLOOR {
        return Err(infeasible(format!(
            "after the ladder, Z leads X/Y by only {z_margin:e}"
        )));
    }
    let selected_weight = prefix_weight + W_Z;
    // (a): Z itself must still fit
    if !crate::instance::weight_within_capacity(selected_weight, CAPACITY) {
        return Err(infeasible(format!(
            "inequality (a): w(ladder) + w(Z) = {selected_weight} exceeds the capacity"
        )));
    }
    // (b): afterwards X and Y must not fit; limit margin ≈ 4.6e−6
    let b_margin = selected_weight - (1.0 - W_X);
    if !structure_only && selected_weight + W_X <= CAPACITY * (1.0 + FEAS_TOL) {
        return Err(infeasible(format!(
            "inequality (b): w(ladder) + w(Z) = {selected_weight} must exceed 1 - w(X) = {} \
             (margin {b_margin:+e}); shrink epsilon or use structure-only mode",
            1.0 - W_X
        )));
    }
    let z_marginal = sim.marginal(&z_spans);
    sim.insert(&z_spans);
    predicted.push(PredictedStep {
        element: z_id,
        density: z_marginal / W_Z,
        prefix_weight: selected_weight,
        prefix_value: sim.total,
    });
    let predicted_gps_value = sim.total;
    let gps_bound = 1.0 - 2.0 * RHO * W_X;
    if (predicted_gps_value - gps_bound).abs() > 1e-9 {
        return Err(infeasible(format!(
            "greedy value {predicted_gps_value} strays from the pinned bound {gps_bound}"
        )));
    }
    if predicted_gps_value >= BETA {
        return Err(infeasible(format!(
            "greedy value {predicted_gps_value} is not below beta = {BETA}"
        )));
    }
    if predicted_gps_value <= F_X {
        return Err(infeasible(
            "the greedy branch must beat the best singleton".to_string(),
        ));
    }

    let mut opt_sim = CoverSim::new();
    opt_sim.insert(&x_spans);
    opt_sim.insert(&y_spans);
    opt_sim.insert(&z_spans);
    let predicted_opt_value = opt_sim.total;
    if (predicted_opt_value - 1.0).abs() > 1e-12 {
        return Err(infeasible(format!(
            "f({{X,Y,Z}}) = {predicted_opt_value} is not 1"
        )));
    }

    let interval_sets: Result<Vec<IntervalSet>> = spans.into_iter().map(IntervalSet::new).collect();
    let instance = Instance::new(
        weights,
        CAPACITY,
        SetFunctionOracle::coverage(interval_sets?),
    )?;
    let params = AdversarialParams {
        f_x: F_X,
        f_y: F_Y,
        f_z: F_Z,
        w_x: W_X,
        w_y: W_Y,
        w_z: W_Z,
        capacity: CAPACITY,
        rho: RHO,
        beta: BETA,
        epsilon_requested: epsilon,
        epsilon: eps,
        eta: ETA,
        k1,
        k2,
        ragged_len: ragged,
        structure_only,
        gps_bound,
        predicted_gps_value,
        predicted_opt_value,
    };
    Ok(AdversarialInstance {
        instance,
        params,
        predicted,
    })
}

impl AdversarialInstance {
    /// Reassembles predictions for an instance loaded from disk: the
    /// simulation only needs the stored spans and weights, which round-trip
    /// exactly.
    pub fn from_parts(instance: Instance, params: AdversarialParams) -> Result<Self> {
        if instance.n() != params.k2 + 3 {
            return Err(Error::MalformedInstance(format!(
                "adversarial metadata says k2 = {} but the instance has {} elements",
                params.k2,
                instance.n()
            )));
        }
        let intervals = instance.oracle().coverage_intervals().ok_or_else(|| {
            Error::MalformedInstance("adversarial instance must use a coverage oracle".into())
        })?;
        let mut sim = CoverSim::new();
        let mut predicted = Vec::with_capacity(params.k2 + 1);
        let mut prefix_weight = 0.0;
        for (idx, set) in intervals.iter().enumerate().take(params.k2 + 1) {
            let spans = set.spans();
            let marginal = sim.marginal(spans);
            let w = instance.weights()[idx];
            sim.insert(spans);
            prefix_weight += w;
            predicted.push(PredictedStep {
                element: ElementId(idx as u32),
                density: marginal / w,
                prefix_weight,
                prefix_value: sim.total,
            });
        }
        Ok(AdversarialInstance {
            instance,
            params,
            predicted,
        })
    }

    pub fn meta_json(&self) -> serde_json::Value {
        serde_json::to_value(self.params).expect("params serialize")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AdversarialReport {
    pub trace_match: bool,
    pub gps_value: f64,
    pub opt_value: f64,
    pub ratio: f64,
    pub structure_only: bool,
    pub selected: usize,
    pub considered: usize,
    /// Worst |actual − predicted| over the selected densities.
    pub density_max_err: f64,
    /// Worst deviation of the run from the closed-form density schedule
    /// (ladder steps and the X/Y/Z marginals at the checkpoints).
    pub formula_max_err: f64,
    /// Strict mode: whether X and Y were both rejected for capacity.
    pub xy_rejected: Option<bool>,
    pub max_singleton: f64,
    pub gps_from_singleton: bool,
    pub first_divergence: Option<String>,
}

/// Runs the lazy greedy on the instance and checks the run against the
/// prediction: selection order I_1, …, I_{k2}, Z (exactly, in strict mode;
/// as a prefix in structure-only mode), density agreement, the closed-form
/// X/Y/Z marginal schedule, and the Greedy+Singleton outcome against the
/// directly evaluated optimum f({X, Y, Z}).
pub fn verify_adversarial(adv: &AdversarialInstance) -> Result<AdversarialReport> {
    let p = adv.instance.problem();
    let params = &adv.params;
    let trace = greedy_lazy(&p)?;

    let mut trace_match = true;
    let mut first_divergence = None;
    let diverge = |match_flag: &mut bool, slot: &mut Option<String>, msg: String| {
        if *match_flag {
            *match_flag = false;
            *slot = Some(msg);
        }
    };

    let densities = trace.selected_densities();
    let mut density_max_err = 0.0f64;
    for (i, step) in adv.predicted.iter().enumerate() {
        match trace.selected.get(i) {
            None => {
                diverge(
                    &mut trace_match,
                    &mut first_divergence,
                    format!(
                        "run selected only {} elements, expected {} (first missing: {})",
                        trace.selected.len(),
                        adv.predicted.len(),
                        step.element
                    ),
                );
                break;
            }
            Some(sel) if sel.element != step.element => {
                diverge(
                    &mut trace_match,
                    &mut first_divergence,
                    format!(
                        "selection {} is element {} (density {}), expected {} (density {})",
                        i + 1,
                        sel.element,
                        densities[i],
                        step.element,
                        step.density
                    ),
                );
                break;
            }
            Some(sel) => {
                density_max_err = density_max_err.max((densities[i] - step.density).abs());
                density_max_err =
                    density_max_err.max((sel.prefix_value - step.prefix_value).abs());
            }
        }
    }

    let x_id = ElementId((params.k2 + 1) as u32);
    let y_id = ElementId((params.k2 + 2) as u32);
    let mut xy_rejected = None;
    if !params.structure_only && trace_match {
        if trace.selected.len() != adv.predicted.len() {
            diverge(
                &mut trace_match,
                &mut first_divergence,
                format!(
                    "run selected {} elements, expected exactly {}",
                    trace.selected.len(),
                    adv.predicted.len()
                ),
            );
        }
        let rejected = |id: ElementId| {
            trace
                .considered
                .iter()
                .any(|c| c.element == id && !c.selected)
        };
        let both = rejected(x_id) && rejected(y_id);
        xy_rejected = Some(both);
        if !both {
            diverge(
                &mut trace_match,
                &mut first_divergence,
                "X or Y was not rejected for capacity".to_string(),
            );
        }
    }

    // closed-form schedule: ladder densities, then X/Y/Z marginals at
    // checkpoint prefixes (all of them at desk scale, sampled when large)
    let ratio = params.f_x / params.w_x;
    let eps = params.epsilon;
    let k1 = params.k1;
    let k2 = params.k2;
    let mut formula_max_err = 0.0f64;
    for (i, step) in adv.predicted.iter().enumerate() {
        let formula = if i < k2 {
            let j = i + 1;
            if j <= k1 {
                (params.f_z - (j - 1) as f64 * eps) / params.w_z
            } else {
                ratio - (j - 1 - k1) as f64 * eps
            }
        } else {
            ratio - (k2 - k1) as f64 * eps // Z at the end: ρ
        };
        formula_max_err = formula_max_err.max((step.density - formula).abs());
    }
    let checkpoints: Vec<usize> = if k2 <= 1024 {
        (0..=k2).collect()
    } else {
        let stride = k2 / 512;
        let mut js: Vec<usize> = (0..=k2).step_by(stride.max(1)).collect();
        js.extend([k1.saturating_sub(1), k1, k1 + 1, k2]);
        js.sort_unstable();
        js.dedup();
        js
    };
    let x_set = ElementSet::singleton(x_id);
    let y_set = ElementSet::singleton(y_id);
    let z_set = ElementSet::singleton(ElementId(k2 as u32));
    let mut prefix = ElementSet::new();
    let mut next = 0usize;
    for &j in &checkpoints {
        while next < j {
            prefix.insert(ElementId(next as u32));
            next += 1;
        }
        let f_prefix = p.oracle.evaluate(&prefix)?;
        let d_x = (p.oracle.evaluate_ext(&prefix, x_set.ids())? - f_prefix) / params.w_x;
        let d_y = (p.oracle.evaluate_ext(&prefix, y_set.ids())? - f_prefix) / params.w_y;
        let d_z = (p.oracle.evaluate_ext(&prefix, z_set.ids())? - f_prefix) / params.w_z;
        let xy_formula = ratio - eps * j.saturating_sub(k1) as f64;
        let z_formula = if j < k1 {
            (params.f_z - eps * j as f64) / params.w_z
        } else {
            ratio - eps * (j - k1) as f64
        };
        formula_max_err = formula_max_err
            .max((d_x - xy_formula).abs())
            .max((d_y - xy_formula).abs())
            .max((d_z - z_formula).abs());
    }

    let gps = greedy_plus_singleton_from_trace(&p, &trace)?;
    let opt_set = ElementSet::from_ids([ElementId(k2 as u32), x_id, y_id]);
    let opt_value = p.oracle.evaluate(&opt_set)?;
    let mut max_singleton = f64::NEG_INFINITY;
    for e in p.element_ids() {
        max_singleton = max_singleton.max(p.oracle.evaluate(&ElementSet::singleton(e))?);
    }

    Ok(AdversarialReport {
        trace_match,
        gps_value: gps.value,
        opt_value,
        ratio: gps.value / opt_value,
        structure_only: params.structure_only,
        selected: trace.selected.len(),
        considered: trace.considered.len(),
        density_max_err,
        formula_max_err,
        xy_rejected,
        max_singleton,
        gps_from_singleton: matches!(gps.best_seed, BestSeed::Singleton { .. }),
        first_divergence,
    })
}
