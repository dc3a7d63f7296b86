//! The refined lower envelope of a greedy run: a density-sorted partition of
//! a candidate set induces breakpoints `D_j` and piecewise-exponential
//! segments
//!
//! `h(u) = f(S_j) − r_j · w(S_j) · exp(−(u − D_{j−1}) / w(S_j))`
//!
//! on `[D_{j−1}, D_j)`, where `S_j` is the union of the first `j` blocks,
//! `r_j` the block's marginal density, and
//! `D_j = Σ_{i≤j} w(X_i) · ln(r_i / r_{j+1})` (infinite once the next rate
//! hits zero). The value function of a greedy run dominates `h` up to
//! `W_max = min{W − max_{e∈X} w(e), w(A)}`; `verify_dominance` checks that
//! empirically on a structured grid.

use serde::Serialize;

use crate::element::{ElementId, ElementSet};
use crate::error::{Error, Result};
use crate::greedy::{value_function, GreedyTrace};
use crate::instance::Problem;
use crate::oracle::ValueOracle;

/// Tolerance for rate ordering, breakpoint monotonicity, continuity, and
/// dominance slack.
pub const BOUND_TOL: f64 = 1e-9;

/// An ordered partition of some candidate set into disjoint nonempty blocks.
#[derive(Clone, PartialEq, Debug)]
pub struct Partition {
    blocks: Vec<ElementSet>,
}

impl Partition {
    pub fn new(blocks: Vec<ElementSet>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidPartition("no blocks".into()));
        }
        let mut total = 0usize;
        let mut union = ElementSet::new();
        for (i, b) in blocks.iter().enumerate() {
            if b.is_empty() {
                return Err(Error::InvalidPartition(format!("block {i} is empty")));
            }
            total += b.len();
            union = union.union(b);
        }
        if union.len() != total {
            return Err(Error::InvalidPartition("blocks are not disjoint".into()));
        }
        Ok(Partition { blocks })
    }

    pub fn blocks(&self) -> &[ElementSet] {
        &self.blocks
    }

    pub fn union(&self) -> ElementSet {
        self.blocks
            .iter()
            .fold(ElementSet::new(), |acc, b| acc.union(b))
    }
}

/// Singleton-block partition of `x` ordered by iteratively extracting the
/// element of maximal marginal density against the prefix (ties toward the
/// smallest id). For submodular oracles the resulting rates are
/// non-increasing.
pub fn build_partition_auto<O: ValueOracle + ?Sized>(
    p: &Problem<'_, O>,
    x: &ElementSet,
) -> Result<Partition> {
    if x.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot partition the empty set".into(),
        ));
    }
    let mut remaining: Vec<ElementId> = x.iter().collect();
    let mut prefix = ElementSet::new();
    let mut prefix_value = p.oracle.evaluate(&prefix)?;
    let mut blocks = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let mut best: Option<(usize, f64)> = None;
        for (idx, &e) in remaining.iter().enumerate() {
            let gain = p.oracle.evaluate_ext(&prefix, &[e])? - prefix_value;
            let d = gain / p.weight(e);
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((idx, d));
            }
        }
        let (idx, _) = best.unwrap();
        let e = remaining.remove(idx);
        blocks.push(ElementSet::singleton(e));
        prefix.insert(e);
        prefix_value = p.oracle.evaluate(&prefix)?;
    }
    Partition::new(blocks)
}

/// Two-block partition used by the enumeration analysis: `e*` is the heaviest
/// element of `Y \ G` and `R` the rest; the blocks are ordered so the first
/// has the larger plain density under the supplied (already contracted)
/// problem. Submodularity then guarantees non-increasing rates.
pub fn build_partition_two_block<O: ValueOracle + ?Sized>(
    p: &Problem<'_, O>,
    g: &ElementSet,
    y: &ElementSet,
) -> Result<Partition> {
    let diff = y.difference(g);
    if diff.is_empty() {
        return Err(Error::InvalidArgument("Y \\ G is empty".into()));
    }
    let mut heaviest = diff.ids()[0];
    for e in diff.iter().skip(1) {
        if p.weight(e) > p.weight(heaviest) {
            heaviest = e;
        }
    }
    let star = ElementSet::singleton(heaviest);
    let rest = diff.difference(&star);
    if rest.is_empty() {
        return Partition::new(vec![star]);
    }
    let d_star = p.oracle.evaluate(&star)? / p.weight(heaviest);
    let d_rest = p.oracle.evaluate(&rest)? / p.set_weight(&rest);
    if d_star >= d_rest {
        Partition::new(vec![star, rest])
    } else {
        Partition::new(vec![rest, star])
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct BoundingSegment {
    /// D_{j−1}
    pub lower: f64,
    /// D_j; `f64::INFINITY` past the last finite breakpoint
    pub upper: f64,
    /// f(S_j)
    pub prefix_value: f64,
    /// r_j
    pub rate: f64,
    /// w(S_j)
    pub prefix_weight: f64,
}

impl BoundingSegment {
    fn eval_at(&self, u: f64) -> f64 {
        self.prefix_value
            - self.rate * self.prefix_weight * (-(u - self.lower) / self.prefix_weight).exp()
    }
}

/// The piecewise-exponential lower envelope of a partition.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct BoundingFunction {
    segments: Vec<BoundingSegment>,
}

/// Computes rates, breakpoints, and segment constants for `partition` against
/// `p`, verifying rate ordering, breakpoint monotonicity, and continuity at
/// every finite breakpoint rather than trusting them.
pub fn build_bounding<O: ValueOracle + ?Sized>(
    p: &Problem<'_, O>,
    partition: &Partition,
) -> Result<BoundingFunction> {
    let union = partition.union();
    let total_weight = p.set_weight(&union);
    if !p.fits(total_weight) {
        return Err(Error::InvalidPartition(format!(
            "partition weight {total_weight} exceeds capacity {}",
            p.capacity
        )));
    }
    let k = partition.blocks().len();
    let mut prefix = ElementSet::new();
    let mut prefix_values = Vec::with_capacity(k + 1);
    prefix_values.push(p.oracle.evaluate(&prefix)?);
    let mut block_weights = Vec::with_capacity(k);
    let mut prefix_weights = Vec::with_capacity(k + 1);
    prefix_weights.push(0.0);
    for block in partition.blocks() {
        prefix = prefix.union(block);
        prefix_values.push(p.oracle.evaluate(&prefix)?);
        let bw = p.set_weight(block);
        block_weights.push(bw);
        prefix_weights.push(prefix_weights.last().unwrap() + bw);
    }

    let mut rates = Vec::with_capacity(k);
    for j in 0..k {
        let r = (prefix_values[j + 1] - prefix_values[j]) / block_weights[j];
        if r < -BOUND_TOL {
            return Err(Error::InvalidPartition(format!(
                "block {j} has negative rate {r}"
            )));
        }
        if j > 0 && r > rates[j - 1] + BOUND_TOL {
            return Err(Error::InvalidPartition(format!(
                "rates not non-increasing: r_{} = {} < r_{} = {}",
                j,
                rates[j - 1],
                j + 1,
                r
            )));
        }
        // negatives within tolerance are float noise on a zero marginal
        rates.push(r.max(0.0));
    }

    // D_0 = 0, D_j = Σ_{i≤j} w(X_i) ln(r_i / r_{j+1}), D_k = ∞;
    // a zero next-rate makes the breakpoint infinite
    let mut breakpoints = Vec::with_capacity(k + 1);
    breakpoints.push(0.0);
    for j in 1..k {
        let r_next = rates[j];
        let d = if r_next == 0.0 {
            f64::INFINITY
        } else {
            let mut sum = 0.0;
            for i in 0..j {
                if rates[i] > r_next {
                    sum += block_weights[i] * (rates[i] / r_next).ln();
                }
            }
            sum
        };
        let prev = *breakpoints.last().unwrap();
        if d < prev - BOUND_TOL {
            return Err(Error::InvalidPartition(format!(
                "breakpoints not monotone: D_{j} = {d} < D_{} = {prev}",
                j - 1
            )));
        }
        breakpoints.push(d.max(prev));
    }
    breakpoints.push(f64::INFINITY);

    let segments: Vec<BoundingSegment> = (0..k)
        .map(|j| BoundingSegment {
            lower: breakpoints[j],
            upper: breakpoints[j + 1],
            prefix_value: prefix_values[j + 1],
            rate: rates[j],
            prefix_weight: prefix_weights[j + 1],
        })
        .collect();
    let h = BoundingFunction { segments };

    // continuity at every finite interior breakpoint
    for (j, &d) in breakpoints.iter().enumerate().take(k).skip(1) {
        if !d.is_finite() {
            break;
        }
        let left = h.segments[j - 1].eval_at(d);
        let right = h.segments[j].eval_at(d);
        if (left - right).abs() > BOUND_TOL {
            return Err(Error::InvalidPartition(format!(
                "bounding function discontinuous at D_{j} = {d}: {left} vs {right}"
            )));
        }
    }
    Ok(h)
}

impl BoundingFunction {
    pub fn segments(&self) -> &[BoundingSegment] {
        &self.segments
    }

    /// Breakpoints `D_0, …, D_k` (the last is infinite).
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self.segments.iter().map(|s| s.lower).collect();
        d.push(self.segments.last().unwrap().upper);
        d
    }

    /// Evaluates on the segment with `D_{j−1} ≤ u < D_j`; zero-length
    /// segments are skipped by the half-open rule and everything past the
    /// last finite breakpoint uses the final segment.
    pub fn eval(&self, u: f64) -> f64 {
        debug_assert!(u >= 0.0, "bounding function domain is u >= 0");
        for seg in &self.segments {
            if u < seg.upper {
                return seg.eval_at(u);
            }
        }
        self.segments.last().unwrap().eval_at(u)
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct DominanceReport {
    pub ok: bool,
    pub min_slack: f64,
    pub argmin_u: f64,
    #[serde(rename = "W_max")]
    pub w_max: f64,
    pub grid_points: usize,
    /// True when `W_max < 0`, in which case the claim is vacuous.
    pub degenerate: bool,
}

/// Samples `V − h` at all structural breakpoints inside `[0, W_max]`, all
/// midpoints between consecutive sample points, and a uniform grid, reporting
/// the minimum slack. `W_max = min{W − max_{e∈X} w(e), w(A)}`.
pub fn verify_dominance<O: ValueOracle + ?Sized>(
    p: &Problem<'_, O>,
    trace: &GreedyTrace,
    partition: &Partition,
    grid_points: usize,
) -> Result<DominanceReport> {
    let x = partition.union();
    let heaviest = x
        .iter()
        .map(|e| p.weight(e))
        .fold(f64::NEG_INFINITY, f64::max);
    let w_max = (p.capacity - heaviest).min(trace.final_weight());
    if w_max < 0.0 {
        return Ok(DominanceReport {
            ok: true,
            min_slack: f64::INFINITY,
            argmin_u: 0.0,
            w_max,
            grid_points,
            degenerate: true,
        });
    }
    let h = build_bounding(p, partition)?;
    let v = value_function(trace, trace.empty_value);

    let mut points = vec![0.0, w_max];
    points.extend(
        v.breakpoints()
            .iter()
            .map(|&(u, _)| u)
            .filter(|&u| u > 0.0 && u < w_max),
    );
    points.extend(
        h.breakpoints()
            .iter()
            .copied()
            .filter(|&d| d.is_finite() && d > 0.0 && d < w_max),
    );
    points.sort_unstable_by(f64::total_cmp);
    points.dedup();
    let mids: Vec<f64> = points.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    points.extend(mids);
    if grid_points >= 2 {
        let step = w_max / (grid_points - 1) as f64;
        points.extend((0..grid_points).map(|i| (i as f64 * step).min(w_max)));
    }
    points.sort_unstable_by(f64::total_cmp);
    points.dedup();

    let mut min_slack = f64::INFINITY;
    let mut argmin_u = 0.0;
    for &u in &points {
        let u = u.clamp(0.0, w_max);
        let slack = v.eval(u)? - h.eval(u);
        if slack < min_slack {
            min_slack = slack;
            argmin_u = u;
        }
    }
    Ok(DominanceReport {
        ok: min_slack >= -BOUND_TOL,
        min_slack,
        argmin_u,
        w_max,
        grid_points,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::greedy;
    use crate::instance::Instance;
    use crate::oracle::SetFunctionOracle;

    fn single_block_problem(value: f64, weight: f64) -> Instance {
        Instance::new(
            vec![weight],
            weight,
            SetFunctionOracle::modular(vec![value]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_block_closed_form() {
        // k = 1 with f(∅) = 0: h(u) = f(X) (1 − exp(−u / w(X)))
        let inst = single_block_problem(1.0, 1.0);
        let p = inst.problem();
        let part = Partition::new(vec![ElementSet::of(&[0])]).unwrap();
        let h = build_bounding(&p, &part).unwrap();
        assert_eq!(h.eval(0.0), 0.0);
        let expect = 1.0 - (-1.0f64).exp();
        assert!((h.eval(1.0) - expect).abs() <= 1e-12);
        for i in 0..100 {
            let u = i as f64 * 0.05;
            let expect = 1.0 * (1.0 - (-u / 1.0).exp());
            assert!((h.eval(u) - expect).abs() <= 1e-12, "u = {u}");
        }
    }

    #[test]
    fn single_block_approaches_but_stays_below_value() {
        let inst = single_block_problem(3.0, 2.0);
        let p = inst.problem();
        let part = Partition::new(vec![ElementSet::of(&[0])]).unwrap();
        let h = build_bounding(&p, &part).unwrap();
        let mut prev = -1.0;
        for i in 0..60 {
            let u = i as f64;
            let val = h.eval(u);
            assert!(val < 3.0, "h must stay below f(S_k)");
            assert!(val >= prev, "h must be non-decreasing");
            prev = val;
        }
        assert!(3.0 - h.eval(50.0) < 1e-9);
    }

    #[test]
    fn equal_rate_blocks_collapse_the_breakpoint() {
        // two blocks of equal density: D_1 = 0, one effective segment
        let inst = Instance::new(
            vec![1.0, 2.0],
            3.0,
            SetFunctionOracle::modular(vec![2.0, 4.0]).unwrap(),
        )
        .unwrap();
        let p = inst.problem();
        let part =
            Partition::new(vec![ElementSet::of(&[0]), ElementSet::of(&[1])]).unwrap();
        let h = build_bounding(&p, &part).unwrap();
        let d = h.breakpoints();
        assert_eq!(d[0], 0.0);
        assert_eq!(d[1], 0.0);
        assert!(d[2].is_infinite());
        // evaluation at 0 lands on the second (full) segment
        assert_eq!(h.eval(0.0), 6.0 - 2.0 * 3.0);
        // continuity means the single segment is h(u) = 6 (1 − e^{−u/3})
        for i in 0..50 {
            let u = i as f64 * 0.1;
            let expect = 6.0 * (1.0 - (-u / 3.0).exp());
            assert!((h.eval(u) - expect).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_rate_tail_gives_infinite_breakpoint() {
        // second block adds nothing: r_2 = 0, D_1 = ∞
        let inst = Instance::new(
            vec![1.0, 1.0],
            2.0,
            SetFunctionOracle::modular(vec![2.0, 0.0]).unwrap(),
        )
        .unwrap();
        let p = inst.problem();
        let part =
            Partition::new(vec![ElementSet::of(&[0]), ElementSet::of(&[1])]).unwrap();
        let h = build_bounding(&p, &part).unwrap();
        let d = h.breakpoints();
        assert!(d[1].is_infinite());
        // the first segment rules the whole half-line
        assert!((h.eval(100.0) - 2.0 * (1.0 - (-100.0f64).exp())).abs() <= 1e-12);
    }

    #[test]
    fn increasing_rates_are_rejected() {
        let inst = Instance::new(
            vec![1.0, 1.0],
            2.0,
            SetFunctionOracle::modular(vec![1.0, 5.0]).unwrap(),
        )
        .unwrap();
        let p = inst.problem();
        let part =
            Partition::new(vec![ElementSet::of(&[0]), ElementSet::of(&[1])]).unwrap();
        assert!(matches!(
            build_bounding(&p, &part),
            Err(Error::InvalidPartition(_))
        ));
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![]).is_err());
        assert!(Partition::new(vec![ElementSet::new()]).is_err());
        assert!(
            Partition::new(vec![ElementSet::of(&[0, 1]), ElementSet::of(&[1])]).is_err(),
            "overlapping blocks"
        );
    }

    #[test]
    fn auto_partition_sorts_modular_densities() {
        let inst = Instance::new(
            vec![1.0, 1.0, 1.0],
            3.0,
            SetFunctionOracle::modular(vec![1.0, 3.0, 2.0]).unwrap(),
        )
        .unwrap();
        let p = inst.problem();
        let part = build_partition_auto(&p, &ElementSet::of(&[0, 1, 2])).unwrap();
        let order: Vec<u32> = part.blocks().iter().map(|b| b.ids()[0].0).collect();
        assert_eq!(order, vec![1, 2, 0]);
        assert!(matches!(
            build_partition_auto(&p, &ElementSet::new()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn auto_partition_of_a_single_element() {
        let inst = Instance::new(
            vec![2.0],
            2.0,
            SetFunctionOracle::modular(vec![3.0]).unwrap(),
        )
        .unwrap();
        let p = inst.problem();
        let part = build_partition_auto(&p, &ElementSet::of(&[0])).unwrap();
        assert_eq!(part.blocks(), &[ElementSet::of(&[0])]);
        let h = build_bounding(&p, &part).unwrap();
        assert_eq!(h.segments()[0].rate, 1.5);
    }

    #[test]
    fn two_block_partition_orders_by_density() {
        let inst = Instance::new(
            vec![3.0, 1.0, 1.0],
            5.0,
            SetFunctionOracle::modular(vec![9.0, 1.0, 1.0]).unwrap(),
        )
        .unwrap();
        let p = inst.problem();
        let y = ElementSet::of(&[0, 1, 2]);
        let part = build_partition_two_block(&p, &ElementSet::new(), &y).unwrap();
        // e* = 0 (heaviest), density 3 > density 1 of {1, 2}
        assert_eq!(part.blocks()[0], ElementSet::of(&[0]));
        assert_eq!(part.blocks()[1], ElementSet::of(&[1, 2]));

        let single = build_partition_two_block(&p, &ElementSet::of(&[1, 2]), &y).unwrap();
        assert_eq!(single.blocks().len(), 1);

        assert!(matches!(
            build_partition_two_block(&p, &y, &y),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn two_block_rates_are_ordered_on_random_coverage() {
        use crate::families::Family;
        for trial in 0..50 {
            let inst = Family::Coverage { n: 8 }.generate(808, trial).unwrap();
            let p = inst.problem();
            // any feasible nonempty Y works; take the cheapest two elements
            let mut ids: Vec<ElementId> = p.element_ids().collect();
            ids.sort_by(|&a, &b| p.weight(a).total_cmp(&p.weight(b)));
            let y = ElementSet::from_ids(ids.into_iter().take(2));
            if !p.fits(p.set_weight(&y)) {
                continue;
            }
            let part = build_partition_two_block(&p, &ElementSet::new(), &y).unwrap();
            // building the bound re-validates r_1 >= r_2
            build_bounding(&p, &part).unwrap();
        }
    }

    #[test]
    fn dominance_against_own_selection() {
        let inst = Instance::new(
            vec![8.0, 8.0, 1.0],
            16.0,
            SetFunctionOracle::modular(vec![8.0, 8.0, 2.0]).unwrap(),
        )
        .unwrap();
        let p = inst.problem();
        let trace = greedy(&p).unwrap();
        // partition = greedy's own selections in selection order
        let blocks: Vec<ElementSet> = trace
            .selected
            .iter()
            .map(|s| ElementSet::singleton(s.element))
            .collect();
        let part = Partition::new(blocks).unwrap();
        let report = verify_dominance(&p, &trace, &part, 257).unwrap();
        assert!(report.ok, "min slack {}", report.min_slack);
        assert!(!report.degenerate);
    }
}
