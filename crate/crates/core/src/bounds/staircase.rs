//! Piecewise-constant functions of `C` built from guarantee intervals.

use serde::{Deserialize, Serialize};

use super::GuaranteeInterval;

/// Whether the counts are guaranteed errors (`value = count / n′`) or
/// guaranteed correct predictions (`value = 1 − count / n′`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Lower,
    Upper,
}

/// Step function over `C > 0`.
///
/// With sorted unique breakpoints `b_0 < … < b_{m−1}`, segment `j` is the
/// open interval `(b_{j−1}, b_j)` (with `b_{−1} = −∞`, `b_m = +∞`) and carries
/// `segment_counts[j]`; the breakpoint `b_j` itself carries `point_counts[j]`.
/// Storing both keeps open and closed interval ends exact.
#[derive(Debug, Clone, PartialEq)]
pub struct StaircaseBound {
    breakpoints: Vec<f64>,
    segment_counts: Vec<usize>,
    point_counts: Vec<usize>,
    n_prime: usize,
    direction: Direction,
}

impl StaircaseBound {
    pub fn constant(count: usize, n_prime: usize, direction: Direction) -> Self {
        StaircaseBound {
            breakpoints: Vec::new(),
            segment_counts: vec![count],
            point_counts: Vec::new(),
            n_prime,
            direction,
        }
    }

    /// Counts, at every `C`, how many of `intervals` contain `C`.
    pub fn from_intervals<'a>(
        intervals: impl IntoIterator<Item = &'a GuaranteeInterval>,
        n_prime: usize,
        direction: Direction,
    ) -> Self {
        let intervals: Vec<&GuaranteeInterval> = intervals.into_iter().collect();
        let mut breakpoints: Vec<f64> = intervals
            .iter()
            .flat_map(|iv| [iv.lo, iv.hi])
            .filter(|v| v.is_finite())
            .collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        let m = breakpoints.len();
        // difference arrays
        let mut seg = vec![0i64; m + 2];
        let mut pts = vec![0i64; m + 1];
        let position = |v: f64| breakpoints.partition_point(|&b| b < v);
        for iv in intervals {
            // breakpoint indices of the ends; infinite ends sit outside 0..m
            let a = if iv.lo.is_finite() { Some(position(iv.lo)) } else { None };
            let h = if iv.hi.is_finite() { position(iv.hi) } else { m };
            let seg_from = a.map_or(0, |a| a + 1);
            let seg_to = h; // inclusive
            if seg_from <= seg_to {
                seg[seg_from] += 1;
                seg[seg_to + 1] -= 1;
            }
            // points strictly inside
            let pt_from = a.map_or(0, |a| a + 1);
            let pt_to_excl = h;
            if pt_from < pt_to_excl {
                pts[pt_from] += 1;
                pts[pt_to_excl] -= 1;
            }
            if let (Some(a), true) = (a, iv.lo_closed) {
                pts[a] += 1;
                pts[a + 1] -= 1;
            }
            if iv.hi.is_finite() && iv.hi_closed && Some(h) != a.filter(|_| iv.lo_closed) {
                pts[h] += 1;
                pts[h + 1] -= 1;
            }
        }
        let mut segment_counts = Vec::with_capacity(m + 1);
        let mut acc = 0i64;
        for d in &seg[..=m] {
            acc += d;
            segment_counts.push(acc as usize);
        }
        let mut point_counts = Vec::with_capacity(m);
        acc = 0;
        for d in &pts[..m] {
            acc += d;
            point_counts.push(acc as usize);
        }
        StaircaseBound {
            breakpoints,
            segment_counts,
            point_counts,
            n_prime,
            direction,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segment_counts(&self) -> &[usize] {
        &self.segment_counts
    }

    pub fn point_counts(&self) -> &[usize] {
        &self.point_counts
    }

    pub fn n_prime(&self) -> usize {
        self.n_prime
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn count_at(&self, c: f64) -> usize {
        let idx = self.breakpoints.partition_point(|&b| b < c);
        if self.breakpoints.get(idx) == Some(&c) {
            self.point_counts[idx]
        } else {
            self.segment_counts[idx]
        }
    }

    pub fn count_to_value(&self, count: usize) -> f64 {
        match self.direction {
            Direction::Lower => count as f64 / self.n_prime as f64,
            Direction::Upper => (self.n_prime - count) as f64 / self.n_prime as f64,
        }
    }

    pub fn value_at(&self, c: f64) -> f64 {
        self.count_to_value(self.count_at(c))
    }

    /// Count on the open segment immediately to the right of `c`.
    pub fn count_right_of(&self, c: f64) -> usize {
        self.segment_counts[self.breakpoints.partition_point(|&b| b <= c)]
    }

    /// Count on the open segment immediately to the left of `c`.
    pub fn count_left_of(&self, c: f64) -> usize {
        self.segment_counts[self.breakpoints.partition_point(|&b| b < c)]
    }

    pub fn segment_values(&self) -> Vec<f64> {
        self.segment_counts
            .iter()
            .map(|&k| self.count_to_value(k))
            .collect()
    }

    fn combine(&self, other: &Self, n_prime: usize, f: impl Fn(usize, usize) -> usize) -> Self {
        assert_eq!(self.direction, other.direction, "staircase directions differ");
        let mut breakpoints: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(&other.breakpoints)
            .copied()
            .collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        let mut segment_counts = Vec::with_capacity(breakpoints.len() + 1);
        segment_counts.push(f(self.segment_counts[0], other.segment_counts[0]));
        let mut point_counts = Vec::with_capacity(breakpoints.len());
        for &b in &breakpoints {
            point_counts.push(f(self.count_at(b), other.count_at(b)));
            segment_counts.push(f(self.count_right_of(b), other.count_right_of(b)));
        }
        StaircaseBound {
            breakpoints,
            segment_counts,
            point_counts,
            n_prime,
            direction: self.direction,
        }
        .compact()
    }

    /// Pointwise maximum of counts (tightest of several bounds on one
    /// validation set).
    pub fn combine_max(&self, other: &Self) -> Self {
        assert_eq!(self.n_prime, other.n_prime, "validation sizes differ");
        self.combine(other, self.n_prime, usize::max)
    }

    /// Pointwise sum of counts over disjoint validation sets (CV folds).
    pub fn combine_sum(&self, other: &Self) -> Self {
        self.combine(other, self.n_prime + other.n_prime, |a, b| a + b)
    }

    /// Drops breakpoints across which nothing changes.
    pub fn compact(mut self) -> Self {
        let mut breakpoints = Vec::with_capacity(self.breakpoints.len());
        let mut segment_counts = vec![self.segment_counts[0]];
        let mut point_counts = Vec::with_capacity(self.point_counts.len());
        for (j, &b) in self.breakpoints.iter().enumerate() {
            let left = *segment_counts.last().unwrap();
            let right = self.segment_counts[j + 1];
            let at = self.point_counts[j];
            if left == at && at == right {
                continue;
            }
            breakpoints.push(b);
            point_counts.push(at);
            segment_counts.push(right);
        }
        self.breakpoints = breakpoints;
        self.segment_counts = segment_counts;
        self.point_counts = point_counts;
        self
    }

    /// Every distinct piece of the function on `[lo, hi]`, left to right, as
    /// `(count, representative C)`. Segment representatives are geometric
    /// midpoints of the part of the segment inside the range.
    pub fn pieces_over(&self, lo: f64, hi: f64) -> Vec<(usize, f64)> {
        assert!(lo <= hi, "empty range");
        if lo == hi {
            return vec![(self.count_at(lo), lo)];
        }
        let mut out = Vec::new();
        let first = self.breakpoints.partition_point(|&b| b <= lo);
        let last = self.breakpoints.partition_point(|&b| b < hi);
        if self.breakpoints.get(first.wrapping_sub(1)) == Some(&lo) {
            out.push((self.point_counts[first - 1], lo));
        }
        let mut left = lo;
        for j in first..last {
            let b = self.breakpoints[j];
            out.push((self.segment_counts[j], log_midpoint(left, b)));
            out.push((self.point_counts[j], b));
            left = b;
        }
        out.push((self.segment_counts[last], log_midpoint(left, hi)));
        if self.breakpoints.get(last) == Some(&hi) {
            out.push((self.point_counts[last], hi));
        } else if !(out.last().is_some_and(|&(_, c)| c == hi)) {
            out.push((self.count_at(hi), hi));
        }
        out
    }

    /// Smallest count on `[lo, hi]` and the leftmost `C` attaining it
    /// (segment midpoints preferred over breakpoints at equal position).
    pub fn min_count_over(&self, lo: f64, hi: f64) -> (usize, f64) {
        let mut best = (usize::MAX, lo);
        for (k, c) in self.pieces_over(lo, hi) {
            if k < best.0 {
                best = (k, c);
            }
        }
        best
    }

    pub fn max_count_over(&self, lo: f64, hi: f64) -> (usize, f64) {
        let mut best = (0, lo);
        let mut seen = false;
        for (k, c) in self.pieces_over(lo, hi) {
            if !seen || k > best.0 {
                best = (k, c);
                seen = true;
            }
        }
        best
    }

    /// Minimum of the bound value over `[lo, hi]` with a witness `C`.
    pub fn min_value_over(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (k, c) = match self.direction {
            Direction::Lower => self.min_count_over(lo, hi),
            Direction::Upper => self.max_count_over(lo, hi),
        };
        (self.count_to_value(k), c)
    }

    /// Maximum of the bound value over `[lo, hi]` with a witness `C`.
    pub fn max_value_over(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (k, c) = match self.direction {
            Direction::Lower => self.max_count_over(lo, hi),
            Direction::Upper => self.min_count_over(lo, hi),
        };
        (self.count_to_value(k), c)
    }
}

/// Geometric midpoint for positive finite ends, arithmetic otherwise.
pub fn log_midpoint(a: f64, b: f64) -> f64 {
    if a > 0.0 && b.is_finite() {
        (a * b).sqrt().clamp(a, b)
    } else if b.is_finite() {
        0.5 * (a + b)
    } else {
        2.0 * a.max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::GuaranteeKind;
    use proptest::prelude::*;

    fn iv(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> GuaranteeInterval {
        GuaranteeInterval {
            lo,
            hi,
            lo_closed,
            hi_closed,
            kind: GuaranteeKind::Misclassified,
            instance_index: 0,
        }
    }

    #[test]
    fn open_and_closed_ends() {
        let ivs = [iv(1.0, 2.0, false, false), iv(2.0, 3.0, true, true)];
        let s = StaircaseBound::from_intervals(&ivs, 4, Direction::Lower);
        assert_eq!(s.count_at(0.5), 0);
        assert_eq!(s.count_at(1.0), 0);
        assert_eq!(s.count_at(1.5), 1);
        assert_eq!(s.count_at(2.0), 1);
        assert_eq!(s.count_at(2.5), 1);
        assert_eq!(s.count_at(3.0), 1);
        assert_eq!(s.count_at(3.5), 0);
        assert_eq!(s.value_at(1.5), 0.25);
    }

    #[test]
    fn degenerate_and_unbounded_intervals() {
        let ivs = [iv(2.0, 2.0, true, true), iv(1.0, f64::INFINITY, true, false)];
        let s = StaircaseBound::from_intervals(&ivs, 2, Direction::Lower);
        assert_eq!(s.count_at(2.0), 2);
        assert_eq!(s.count_at(1.0), 1);
        assert_eq!(s.count_at(1e300), 1);
        assert_eq!(s.count_at(0.999), 0);
    }

    #[test]
    fn upper_direction_values() {
        let ivs = [iv(1.0, 3.0, true, true)];
        let s = StaircaseBound::from_intervals(&ivs, 4, Direction::Upper);
        assert_eq!(s.value_at(2.0), 0.75);
        assert_eq!(s.value_at(5.0), 1.0);
        assert_eq!(s.min_value_over(0.5, 5.0).0, 0.75);
        assert_eq!(s.max_value_over(0.5, 5.0).0, 1.0);
    }

    #[test]
    fn min_over_range_with_witness() {
        let ivs = [iv(0.1, 10.0, false, false), iv(0.5, 2.0, false, false)];
        let s = StaircaseBound::from_intervals(&ivs, 5, Direction::Lower);
        let (k, c) = s.min_count_over(0.2, 5.0);
        assert_eq!(k, 1);
        assert!(c > 0.2 && c < 0.5);
        assert_eq!(s.count_at(c), 1);
        let (k, c) = s.max_count_over(0.2, 5.0);
        assert_eq!(k, 2);
        assert!(c > 0.5 && c < 2.0);
        // breakpoint endpoint of the range counts
        assert_eq!(s.min_count_over(0.5, 2.0).0, 1);
        assert_eq!(s.min_count_over(1.0, 1.0), (2, 1.0));
    }

    #[test]
    fn compact_removes_no_op_breakpoints() {
        let ivs = [iv(1.0, 2.0, false, true), iv(2.0, 3.0, false, false)];
        let s = StaircaseBound::from_intervals(&ivs, 4, Direction::Lower).compact();
        assert_eq!(s.breakpoints(), &[1.0, 3.0]);
        assert_eq!(s.count_at(2.0), 1);
    }

    fn interval_strategy() -> impl Strategy<Value = GuaranteeInterval> {
        (0u32..12, 0u32..12, any::<bool>(), any::<bool>(), any::<bool>()).prop_map(
            |(a, b, lc, hc, inf)| {
                let (lo, hi) = (a.min(b) as f64 * 0.5, a.max(b) as f64 * 0.5);
                let hi = if inf { f64::INFINITY } else { hi };
                let (lc, hc) = if lo == hi { (true, true) } else { (lc, hc && hi.is_finite()) };
                iv(lo, hi, lc, hc)
            },
        )
    }

    proptest! {
        #[test]
        fn evaluation_matches_membership(
            ivs in prop::collection::vec(interval_strategy(), 0..15),
            probes in prop::collection::vec(0u32..30, 1..40)
        ) {
            let s = StaircaseBound::from_intervals(&ivs, 20, Direction::Lower);
            for p in probes {
                let c = p as f64 * 0.25;
                let brute = ivs.iter().filter(|iv| iv.contains(c)).count();
                prop_assert_eq!(s.count_at(c), brute);
            }
        }

        #[test]
        fn combine_max_and_sum_are_pointwise(
            a in prop::collection::vec(interval_strategy(), 0..10),
            b in prop::collection::vec(interval_strategy(), 0..10),
            probes in prop::collection::vec(0u32..30, 1..40)
        ) {
            let sa = StaircaseBound::from_intervals(&a, 12, Direction::Lower);
            let sb = StaircaseBound::from_intervals(&b, 12, Direction::Lower);
            let mx = sa.combine_max(&sb);
            let sm = sa.combine_sum(&sb);
            prop_assert_eq!(sm.n_prime(), 24);
            for p in probes {
                let c = p as f64 * 0.25;
                prop_assert_eq!(mx.count_at(c), sa.count_at(c).max(sb.count_at(c)));
                prop_assert_eq!(sm.count_at(c), sa.count_at(c) + sb.count_at(c));
                let c = c + 0.1;
                prop_assert_eq!(mx.count_at(c), sa.count_at(c).max(sb.count_at(c)));
            }
        }

        #[test]
        fn min_over_matches_dense_scan(
            ivs in prop::collection::vec(interval_strategy(), 0..10),
            lo in 1u32..10, span in 0u32..10
        ) {
            let s = StaircaseBound::from_intervals(&ivs, 12, Direction::Lower);
            let (lo, hi) = (lo as f64 * 0.5, (lo + span) as f64 * 0.5);
            let (k, c) = s.min_count_over(lo, hi);
            prop_assert!(c >= lo && c <= hi);
            prop_assert_eq!(s.count_at(c), k);
            let mut x = lo;
            while x <= hi {
                prop_assert!(s.count_at(x) >= k);
                x += 0.125;
            }
        }
    }
}
