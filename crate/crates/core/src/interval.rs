//! Half-open real intervals and Lebesgue measure of unions.
//!
//! All measures are computed from one canonical form: spans sorted by left
//! endpoint with touching or overlapping spans coalesced, summed left to
//! right. Any two routes to the same point set therefore produce bit-equal
//! measures, which the oracle layer relies on for its incremental cache.

use crate::error::{Error, Result};

/// A finite union of disjoint half-open intervals `[a, b)`, sorted by left
/// endpoint. `a < b` holds for every span.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntervalSet {
    spans: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a set from arbitrary spans, canonicalizing overlap and order.
    /// A span with `b <= a` or a non-finite endpoint is rejected.
    pub fn new(spans: impl Into<Vec<(f64, f64)>>) -> Result<Self> {
        let mut spans = spans.into();
        for &(a, b) in &spans {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "interval endpoints must be finite, got [{a}, {b})"
                )));
            }
            if b <= a {
                return Err(Error::InvalidArgument(format!(
                    "interval [{a}, {b}) is empty or reversed"
                )));
            }
        }
        canonical_merge(&mut spans);
        Ok(IntervalSet { spans })
    }

    #[inline]
    pub fn spans(&self) -> &[(f64, f64)] {
        &self.spans
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    /// Total length, summed left to right over the canonical spans.
    pub fn measure(&self) -> f64 {
        sum_spans(&self.spans)
    }
}

#[inline]
pub(crate) fn sum_spans(spans: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for &(a, b) in spans {
        total += b - a;
    }
    total
}

/// Sorts spans and coalesces every pair that overlaps or touches
/// (`next.a <= cur.b`). The result depends only on the covered point set.
pub(crate) fn canonical_merge(spans: &mut Vec<(f64, f64)>) {
    if spans.len() <= 1 {
        return;
    }
    spans.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut out = 0;
    for i in 1..spans.len() {
        let (a, b) = spans[i];
        if a <= spans[out].1 {
            if b > spans[out].1 {
                spans[out].1 = b;
            }
        } else {
            out += 1;
            spans[out] = (a, b);
        }
    }
    spans.truncate(out + 1);
}

/// Measure of two canonical span lists merged together, without allocating.
pub(crate) fn merged_measure(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    let (mut i, mut j) = (0, 0);
    let mut cur: Option<(f64, f64)> = None;
    loop {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => {
                if x.0 <= y.0 {
                    i += 1;
                    x
                } else {
                    j += 1;
                    y
                }
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => break,
        };
        match cur {
            Some((ca, cb)) if next.0 <= cb => {
                cur = Some((ca, cb.max(next.1)));
            }
            Some((ca, cb)) => {
                total += cb - ca;
                cur = Some(next);
            }
            None => cur = Some(next),
        }
    }
    if let Some((ca, cb)) = cur {
        total += cb - ca;
    }
    total
}

/// Lebesgue measure of the union of the given interval sets, by endpoint
/// sweep. Associative and order-independent: the result depends only on the
/// union as a point set.
pub fn measure_union(sets: &[IntervalSet]) -> f64 {
    let mut spans: Vec<(f64, f64)> = sets.iter().flat_map(|s| s.spans.iter().copied()).collect();
    canonical_merge(&mut spans);
    sum_spans(&spans)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(spans: &[(f64, f64)]) -> IntervalSet {
        IntervalSet::new(spans.to_vec()).unwrap()
    }

    #[test]
    fn rejects_reversed_or_empty_spans() {
        assert!(IntervalSet::new(vec![(1.0, 1.0)]).is_err());
        assert!(IntervalSet::new(vec![(2.0, 1.0)]).is_err());
        assert!(IntervalSet::new(vec![(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn overlapping_union() {
        let m = measure_union(&[set(&[(0.0, 1.0)]), set(&[(0.5, 1.5)])]);
        assert_eq!(m, 1.5);
    }

    #[test]
    fn empty_union_is_zero() {
        assert_eq!(measure_union(&[]), 0.0);
        assert_eq!(measure_union(&[IntervalSet::empty()]), 0.0);
    }

    #[test]
    fn disjoint_blocks_sum_to_one() {
        // X = [0, 0.42943), Y = [1, 1.42943), Z = [2, 2.14114)
        let m = measure_union(&[
            set(&[(0.0, 0.42943)]),
            set(&[(1.0, 1.42943)]),
            set(&[(2.0, 2.14114)]),
        ]);
        assert!((m - 1.0).abs() <= 1e-12, "m = {m}");
    }

    #[test]
    fn touching_spans_coalesce() {
        let s = set(&[(0.0, 0.25), (0.25, 0.5)]);
        assert_eq!(s.spans(), &[(0.0, 0.5)]);
    }

    #[test]
    fn merged_measure_matches_full_merge() {
        let a = set(&[(0.0, 1.0), (2.0, 3.0)]);
        let b = set(&[(0.5, 2.5), (4.0, 4.25)]);
        let expect = measure_union(&[a.clone(), b.clone()]);
        assert_eq!(merged_measure(a.spans(), b.spans()), expect);
    }
}
