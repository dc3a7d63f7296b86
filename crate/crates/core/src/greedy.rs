//! The density-greedy heuristic, its lazy (priority-queue) equivalent, and
//! the piecewise-linear value function of a run.
//!
//! Each iteration considers the remaining element maximizing the marginal
//! density `f_A(e)/w(e)` (ties broken toward the smallest id), removes it,
//! and selects it only if it fits the remaining capacity. The lazy variant
//! produces a field-for-field identical trace for monotone submodular
//! oracles: stale heap keys upper-bound fresh densities, so an entry that is
//! still on top after re-evaluation is the true argmax, and the heap's
//! (density desc, id asc) order preserves the tie-break exactly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::element::{ElementId, ElementSet};
use crate::error::{Error, Result};
use crate::instance::Problem;
use crate::oracle::ValueOracle;

/// Tolerance used by density/concavity checks.
pub const DENSITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GreedyVariant {
    Plain,
    Lazy,
}

/// One examined element: its marginal and density at consideration time and
/// whether it fit the remaining capacity.
#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct ConsideredEntry {
    pub element: ElementId,
    pub marginal: f64,
    pub density: f64,
    pub selected: bool,
}

/// One selection: the element plus cumulative weight and value after adding
/// it.
#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct SelectionEntry {
    pub element: ElementId,
    pub prefix_weight: f64,
    pub prefix_value: f64,
}

/// Full record of a greedy run. Every ground-set element appears exactly once
/// in `considered`.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct GreedyTrace {
    pub empty_value: f64,
    pub considered: Vec<ConsideredEntry>,
    pub selected: Vec<SelectionEntry>,
    pub final_set: ElementSet,
}

impl GreedyTrace {
    pub fn final_value(&self) -> f64 {
        self.selected
            .last()
            .map_or(self.empty_value, |s| s.prefix_value)
    }

    pub fn final_weight(&self) -> f64 {
        self.selected.last().map_or(0.0, |s| s.prefix_weight)
    }

    /// Densities of the selected elements in selection order.
    pub fn selected_densities(&self) -> Vec<f64> {
        self.considered
            .iter()
            .filter(|c| c.selected)
            .map(|c| c.density)
            .collect()
    }
}

pub fn run_greedy<O: ValueOracle + ?Sized>(
    p: &Problem<'_, O>,
    variant: GreedyVariant,
) -> Result<GreedyTrace> {
    match variant {
        GreedyVariant::Plain => greedy(p),
        GreedyVariant::Lazy => greedy_lazy(p),
    }
}

/// Plain greedy: rescans every remaining element each iteration with a fresh
/// 2-call marginal, so the oracle-call count is exactly predictable
/// (`n(n+1)` for the scans plus one evaluation per selection and one for the
/// empty set).
pub fn greedy<O: ValueOracle + ?Sized>(p: &Problem<'_, O>) -> Result<GreedyTrace> {
    let n = p.n();
    let empty_value = p.oracle.evaluate(&ElementSet::new())?;
    let mut remaining: Vec<ElementId> = p.element_ids().collect();
    let mut a = ElementSet::new();
    let mut prefix_weight = 0.0;
    let mut considered = Vec::with_capacity(n);
    let mut selected = Vec::new();

    while !remaining.is_empty() {
        let mut best: Option<(usize, f64, f64)> = None;
        for (idx, &e) in remaining.iter().enumerate() {
            let m = p.oracle.marginal(&a, &ElementSet::singleton(e))?;
            let d = m / p.weight(e);
            // strict > keeps the smallest id among tied maxima
            if best.is_none_or(|(_, _, bd)| d > bd) {
                best = Some((idx, m, d));
            }
        }
        let (idx, marginal, density) = best.expect("remaining is nonempty");
        let e = remaining.remove(idx);
        let fits = p.fits(prefix_weight + p.weight(e));
        considered.push(ConsideredEntry {
            element: e,
            marginal,
            density,
            selected: fits,
        });
        if fits {
            a.insert(e);
            prefix_weight += p.weight(e);
            selected.push(SelectionEntry {
                element: e,
                prefix_weight,
                prefix_value: p.oracle.evaluate(&a)?,
            });
        }
    }

    Ok(GreedyTrace {
        empty_value,
        considered,
        selected,
        final_set: a,
    })
}

#[derive(Clone, Copy, Debug)]
struct HeapEntry {
    density: f64,
    marginal: f64,
    element: ElementId,
    /// Number of selections when this density was computed; stale once the
    /// prefix has grown.
    epoch: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.density == other.density && self.element == other.element
    }
}
impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap: higher density first, then smaller id
        self.density
            .total_cmp(&other.density)
            .then_with(|| other.element.cmp(&self.element))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lazy greedy over a max-priority queue keyed by (stale density desc, id
/// asc), re-evaluating stale heads. Trace-equivalent to [`greedy`] whenever
/// the oracle is monotone submodular; that equivalence is the caller's
/// responsibility.
pub fn greedy_lazy<O: ValueOracle + ?Sized>(p: &Problem<'_, O>) -> Result<GreedyTrace> {
    let n = p.n();
    let empty = ElementSet::new();
    let empty_value = p.oracle.evaluate(&empty)?;
    let mut heap = BinaryHeap::with_capacity(n);
    for e in p.element_ids() {
        let m = p.oracle.evaluate_ext(&empty, &[e])? - empty_value;
        heap.push(HeapEntry {
            density: m / p.weight(e),
            marginal: m,
            element: e,
            epoch: 0,
        });
    }

    let mut a = ElementSet::new();
    let mut prefix_weight = 0.0;
    let mut prefix_value = empty_value;
    let mut considered = Vec::with_capacity(n);
    let mut selected = Vec::new();

    while let Some(entry) = heap.pop() {
        if entry.epoch as usize != a.len() {
            let m = p.oracle.evaluate_ext(&a, &[entry.element])? - prefix_value;
            heap.push(HeapEntry {
                density: m / p.weight(entry.element),
                marginal: m,
                element: entry.element,
                epoch: a.len() as u32,
            });
            continue;
        }
        // fresh top: the true argmax under the smallest-id tie-break
        let fits = p.fits(prefix_weight + p.weight(entry.element));
        considered.push(ConsideredEntry {
            element: entry.element,
            marginal: entry.marginal,
            density: entry.density,
            selected: fits,
        });
        if fits {
            a.insert(entry.element);
            prefix_weight += p.weight(entry.element);
            prefix_value = p.oracle.evaluate(&a)?;
            selected.push(SelectionEntry {
                element: entry.element,
                prefix_weight,
                prefix_value,
            });
        }
    }

    Ok(GreedyTrace {
        empty_value,
        considered,
        selected,
        final_set: a,
    })
}

/// The continuous piecewise-linear map from cumulative selected weight to
/// achieved value along a greedy run. Breakpoints are `(0, f(∅))` followed by
/// `(w(A_i), f(A_i))` per selection; slopes are the selection densities and
/// are non-increasing for submodular oracles.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct PiecewiseValueFunction {
    points: Vec<(f64, f64)>,
}

pub fn value_function(trace: &GreedyTrace, f_empty: f64) -> PiecewiseValueFunction {
    let mut points = Vec::with_capacity(trace.selected.len() + 1);
    points.push((0.0, f_empty));
    for s in &trace.selected {
        points.push((s.prefix_weight, s.prefix_value));
    }
    PiecewiseValueFunction { points }
}

impl PiecewiseValueFunction {
    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn domain_end(&self) -> f64 {
        self.points.last().unwrap().0
    }

    /// Linear interpolation on the containing segment, exact at breakpoints.
    pub fn eval(&self, u: f64) -> Result<f64> {
        let end = self.domain_end();
        if !(0.0..=end).contains(&u) {
            return Err(Error::Domain {
                value: u,
                lo: 0.0,
                hi: end,
            });
        }
        let i = self.points.partition_point(|&(x, _)| x < u);
        let (x1, y1) = self.points[i];
        if x1 == u {
            return Ok(y1);
        }
        let (x0, y0) = self.points[i - 1];
        Ok(y0 + (u - x0) * (y1 - y0) / (x1 - x0))
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }
}

/// Checks the greedy density bound for selection index `i` (1-based) and a
/// candidate set `Y`: the density of the i-th selected element must be at
/// least `(f(Y) − f(A_{i−1})) / w(Y)` whenever `Y ⊆ A_{i−1} ∪ E'(i)`, where
/// `E'(i)` is the not-yet-considered pool at that iteration. Holds for every
/// monotone submodular oracle; used as a property check.
pub fn check_density_bound<O: ValueOracle + ?Sized>(
    p: &Problem<'_, O>,
    trace: &GreedyTrace,
    y: &ElementSet,
    i: usize,
) -> Result<bool> {
    if i == 0 || i > trace.selected.len() {
        return Err(Error::InvalidArgument(format!(
            "selection index {i} out of range 1..={}",
            trace.selected.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::InvalidArgument("Y must be nonempty".into()));
    }
    let a_i = trace.selected[i - 1].element;
    let pos = trace
        .considered
        .iter()
        .position(|c| c.element == a_i)
        .expect("selected element appears in considered");
    let prev: ElementSet = trace.selected[..i - 1].iter().map(|s| s.element).collect();
    for e in y.iter() {
        if e.index() >= p.n() {
            return Err(Error::UnknownElement(e));
        }
        let examined_before = trace.considered[..pos].iter().any(|c| c.element == e);
        if examined_before && !prev.contains(e) {
            return Err(Error::InvalidArgument(format!(
                "element {e} was already considered and discarded before iteration {i}"
            )));
        }
    }
    let lhs = trace.considered[pos].density;
    let f_y = p.oracle.evaluate(y)?;
    let f_prev = p.oracle.evaluate(&prev)?;
    let rhs = (f_y - f_prev) / p.set_weight(y);
    Ok(lhs >= rhs - DENSITY_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;
    use crate::oracle::SetFunctionOracle;

    /// Three-element modular instance: values (8, 8, 2), weights (8, 8, 1),
    /// capacity 16. Greedy considers 2, 0, 1 and must reject 1.
    fn bad_instance() -> Instance {
        Instance::new(
            vec![8.0, 8.0, 1.0],
            16.0,
            SetFunctionOracle::modular(vec![8.0, 8.0, 2.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn greedy_on_the_three_element_instance() {
        let inst = bad_instance();
        let trace = greedy(&inst.problem()).unwrap();
        let order: Vec<u32> = trace.considered.iter().map(|c| c.element.0).collect();
        assert_eq!(order, vec![2, 0, 1]);
        assert_eq!(trace.final_set, ElementSet::of(&[0, 2]));
        assert!(!trace.considered[2].selected, "element 1 exceeds capacity");
        assert_eq!(trace.final_value(), 10.0);
        assert_eq!(trace.final_weight(), 9.0);
    }

    #[test]
    fn everything_fits_when_capacity_is_loose() {
        let inst = Instance::new(
            vec![1.0, 2.0, 3.0],
            100.0,
            SetFunctionOracle::modular(vec![5.0, 1.0, 4.0]).unwrap(),
        )
        .unwrap();
        let trace = greedy(&inst.problem()).unwrap();
        assert_eq!(trace.final_set, ElementSet::of(&[0, 1, 2]));
        assert_eq!(trace.final_value(), 10.0);
    }

    #[test]
    fn equal_densities_consider_in_id_order() {
        let inst = Instance::new(
            vec![2.0, 4.0, 1.0],
            100.0,
            SetFunctionOracle::modular(vec![2.0, 4.0, 1.0]).unwrap(),
        )
        .unwrap();
        let trace = greedy(&inst.problem()).unwrap();
        let order: Vec<u32> = trace.considered.iter().map(|c| c.element.0).collect();
        assert_eq!(order, vec![0, 1, 2]);
    }

    #[test]
    fn empty_ground_set_gives_empty_trace() {
        let inst = Instance::new(vec![], 1.0, SetFunctionOracle::modular(vec![]).unwrap()).unwrap();
        let trace = greedy(&inst.problem()).unwrap();
        assert!(trace.considered.is_empty());
        assert!(trace.selected.is_empty());
        assert_eq!(trace.final_value(), 0.0);
    }

    #[test]
    fn lazy_matches_plain_on_modular() {
        let inst = bad_instance();
        let plain = greedy(&inst.problem()).unwrap();
        let lazy = greedy_lazy(&inst.problem()).unwrap();
        assert_eq!(plain, lazy);
    }

    #[test]
    fn plain_greedy_call_count_is_predictable() {
        let inst = bad_instance();
        let before = inst.oracle().calls();
        let trace = greedy(&inst.problem()).unwrap();
        let calls = inst.oracle().calls() - before;
        let n = inst.n() as u64;
        // one empty eval + 2 calls per scan + 1 eval per selection
        assert_eq!(calls, 1 + n * (n + 1) + trace.selected.len() as u64);
    }

    #[test]
    fn value_function_breakpoints_and_interpolation() {
        let inst = bad_instance();
        let trace = greedy(&inst.problem()).unwrap();
        let v = value_function(&trace, trace.empty_value);
        assert_eq!(v.breakpoints(), &[(0.0, 0.0), (1.0, 2.0), (9.0, 10.0)]);
        assert_eq!(v.eval(0.0).unwrap(), 0.0);
        assert_eq!(v.eval(9.0).unwrap(), 10.0);
        assert_eq!(v.eval(5.0).unwrap(), 6.0);
        assert!(matches!(v.eval(9.5), Err(Error::Domain { .. })));
        assert!(matches!(v.eval(-0.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn value_function_of_one_selection_is_one_segment() {
        let inst = Instance::new(
            vec![2.0, 5.0],
            3.0,
            SetFunctionOracle::modular(vec![3.0, 1.0]).unwrap(),
        )
        .unwrap();
        let trace = greedy(&inst.problem()).unwrap();
        assert_eq!(trace.selected.len(), 1);
        let v = value_function(&trace, trace.empty_value);
        assert_eq!(v.breakpoints(), &[(0.0, 0.0), (2.0, 3.0)]);
        assert_eq!(v.eval(1.0).unwrap(), 1.5);
    }

    #[test]
    fn value_function_of_empty_selection_is_a_point() {
        let inst = Instance::new(
            vec![5.0],
            1.0,
            SetFunctionOracle::modular(vec![3.0]).unwrap(),
        )
        .unwrap();
        let trace = greedy(&inst.problem()).unwrap();
        assert!(trace.selected.is_empty());
        let v = value_function(&trace, trace.empty_value);
        assert_eq!(v.breakpoints(), &[(0.0, 0.0)]);
        assert_eq!(v.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn density_bound_on_selected_element_is_tight() {
        let inst = bad_instance();
        let p = inst.problem();
        let trace = greedy(&p).unwrap();
        for i in 1..=trace.selected.len() {
            let y = ElementSet::singleton(trace.selected[i - 1].element);
            assert!(check_density_bound(&p, &trace, &y, i).unwrap());
        }
    }

    #[test]
    fn density_bound_rejects_discarded_elements() {
        let inst = Instance::new(
            vec![4.0, 1.0, 1.0],
            4.5,
            SetFunctionOracle::modular(vec![8.0, 1.0, 1.0]).unwrap(),
        )
        .unwrap();
        let p = inst.problem();
        let trace = greedy(&p).unwrap();
        // element 0 is selected first; 1 and 2 follow; with capacity 4.5 the
        // second of them is rejected at consideration time
        assert_eq!(trace.considered[0].element, ElementId(0));
        let rejected = trace
            .considered
            .iter()
            .find(|c| !c.selected)
            .expect("some element is rejected");
        // Y containing the rejected element is invalid for later iterations
        let last = trace.selected.len();
        let y = ElementSet::singleton(rejected.element);
        let pos_rejected = trace
            .considered
            .iter()
            .position(|c| c.element == rejected.element)
            .unwrap();
        let pos_last = trace
            .considered
            .iter()
            .position(|c| c.element == trace.selected[last - 1].element)
            .unwrap();
        if pos_rejected < pos_last {
            assert!(matches!(
                check_density_bound(&p, &trace, &y, last),
                Err(Error::InvalidArgument(_))
            ));
        }
    }
}
