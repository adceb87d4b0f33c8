//! Validation-score bounds implied by one approximate solution.
//!
//! For an approximate solution `ŵ` at `C̃` with objective subgradient `g` and a
//! validation input `x`, let
//!
//! ```text
//! α = ½(‖ŵ‖‖x‖ + ŵᵀx)    β = ½(‖ŵ‖‖x‖ − ŵᵀx)
//! γ = ½(‖g‖‖x‖ + gᵀx)    δ = ½(‖g‖‖x‖ − gᵀx)
//! ```
//!
//! With `r = C / C̃`, the exact score `w*_Cᵀx` satisfies
//!
//! ```text
//! C ≥ C̃:  α − r(β + γ)  ≤ w*_Cᵀx ≤ −β + r(α + δ)
//! C < C̃:  −β + r(α − γ) ≤ w*_Cᵀx ≤  α − r(β − δ)
//! ```
//!
//! Both branches give `[ŵᵀx − γ, ŵᵀx + δ]` at `C = C̃`. The set of `C` on which
//! the sign of the score is certain is a single interval around `C̃` (or
//! nothing), which is what [`misclassified_interval`] and
//! [`correct_interval`] return. A score of exactly 0 counts as correct.

mod staircase;

pub use staircase::{log_midpoint, Direction, StaircaseBound};

use serde::Serialize;
use thiserror::Error;

use crate::data::{Dataset, LabeledInstance, SparseVector};
use crate::solver::ApproxSolution;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("no solutions given")]
    NoSolutions,
    #[error("validation set is empty")]
    EmptyValidation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// `ŵᵀx` as computed directly.
    pub score: f64,
}

impl BoundCoefficients {
    pub fn from_parts(norm_w: f64, wx: f64, norm_g: f64, gx: f64, norm_x: f64) -> Self {
        let nw = norm_w * norm_x;
        let ng = norm_g * norm_x;
        BoundCoefficients {
            alpha: (0.5 * (nw + wx)).max(0.0),
            beta: (0.5 * (nw - wx)).max(0.0),
            gamma: (0.5 * (ng + gx)).max(0.0),
            delta: (0.5 * (ng - gx)).max(0.0),
            score: wx,
        }
    }

    pub fn compute(weights: &[f64], norm_w: f64, g: &[f64], norm_g: f64, x: &SparseVector) -> Self {
        Self::from_parts(norm_w, x.dot(weights), norm_g, x.dot(g), x.norm())
    }

    /// Score bounds at `c` for a solution computed at `c_tilde`.
    pub fn score_bounds(&self, c_tilde: f64, c: f64) -> (f64, f64) {
        if c == c_tilde {
            return (self.score - self.gamma, self.score + self.delta);
        }
        let r = c / c_tilde;
        let BoundCoefficients {
            alpha: a,
            beta: b,
            gamma: g,
            delta: d,
            ..
        } = *self;
        if c > c_tilde {
            (a - r * (b + g), -b + r * (a + d))
        } else {
            (-b + r * (a - g), a - r * (b - d))
        }
    }

    /// Certain classification of the instance at `C̃` itself.
    pub fn classify(&self, y: f64) -> PointGuarantee {
        let lb = self.score - self.gamma;
        let ub = self.score + self.delta;
        if y > 0.0 {
            if ub < 0.0 {
                PointGuarantee::Misclassified
            } else if lb >= 0.0 {
                PointGuarantee::Correct
            } else {
                PointGuarantee::Unknown
            }
        } else if lb > 0.0 {
            PointGuarantee::Misclassified
        } else if ub <= 0.0 {
            PointGuarantee::Correct
        } else {
            PointGuarantee::Unknown
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointGuarantee {
    Misclassified,
    Correct,
    Unknown,
}

pub fn coefficients(solution: &ApproxSolution, x: &SparseVector) -> BoundCoefficients {
    BoundCoefficients::compute(
        &solution.weights,
        solution.norm_w,
        &solution.subgradient,
        solution.norm_g,
        x,
    )
}

pub fn score_bounds(solution: &ApproxSolution, x: &SparseVector, c: f64) -> (f64, f64) {
    coefficients(solution, x).score_bounds(solution.c, c)
}

/// `intercept + slope · C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub intercept: f64,
    pub slope: f64,
}

impl Affine {
    pub fn at(&self, c: f64) -> f64 {
        self.intercept + self.slope * c
    }
}

/// The four affine pieces of the score bounds around `c_tilde`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreBoundLine {
    pub c_tilde: f64,
    pub lb_left: Affine,
    pub lb_right: Affine,
    pub ub_left: Affine,
    pub ub_right: Affine,
}

impl ScoreBoundLine {
    pub fn new(coef: &BoundCoefficients, c_tilde: f64) -> Self {
        let BoundCoefficients {
            alpha: a,
            beta: b,
            gamma: g,
            delta: d,
            ..
        } = *coef;
        ScoreBoundLine {
            c_tilde,
            lb_left: Affine { intercept: -b, slope: (a - g) / c_tilde },
            lb_right: Affine { intercept: a, slope: -(b + g) / c_tilde },
            ub_left: Affine { intercept: a, slope: -(b - d) / c_tilde },
            ub_right: Affine { intercept: -b, slope: (a + d) / c_tilde },
        }
    }

    pub fn lb(&self, c: f64) -> f64 {
        if c < self.c_tilde {
            self.lb_left.at(c)
        } else {
            self.lb_right.at(c)
        }
    }

    pub fn ub(&self, c: f64) -> f64 {
        if c < self.c_tilde {
            self.ub_left.at(c)
        } else {
            self.ub_right.at(c)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GuaranteeKind {
    Misclassified,
    Correct,
}

/// A range of `C` on which one validation instance's classification is certain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuaranteeInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
    pub kind: GuaranteeKind,
    pub instance_index: usize,
}

impl GuaranteeInterval {
    pub fn contains(&self, c: f64) -> bool {
        let above = if self.lo_closed { c >= self.lo } else { c > self.lo };
        let below = if self.hi_closed { c <= self.hi } else { c < self.hi };
        above && below
    }

    /// Intersection with the closed range `[lo, hi]`.
    pub fn clip(&self, lo: f64, hi: f64) -> Option<Self> {
        let mut out = *self;
        if lo > out.lo {
            out.lo = lo;
            out.lo_closed = true;
        }
        if hi < out.hi {
            out.hi = hi;
            out.hi_closed = true;
        }
        let nonempty = out.lo < out.hi || (out.lo == out.hi && out.lo_closed && out.hi_closed);
        nonempty.then_some(out)
    }
}

/// `num / den · c_tilde` with a zero denominator sent to `at_zero`.
fn ratio(num: f64, den: f64, c_tilde: f64, at_zero: f64) -> f64 {
    if den <= 0.0 {
        at_zero
    } else {
        num / den * c_tilde
    }
}

/// The certain-classification interval of one instance, unclipped.
pub fn guarantee_interval(
    coef: &BoundCoefficients,
    y: f64,
    c_tilde: f64,
    instance_index: usize,
) -> Option<GuaranteeInterval> {
    let BoundCoefficients {
        alpha: a,
        beta: b,
        gamma: g,
        delta: d,
        ..
    } = *coef;
    let kind = coef.classify(y);
    // (lo, hi) from the branch where the relevant bound line crosses zero
    let (lo, hi, kind) = match (kind, y > 0.0) {
        (PointGuarantee::Unknown, _) => return None,
        (PointGuarantee::Misclassified, true) => (
            ratio(a, b - d, c_tilde, 0.0),
            ratio(b, a + d, c_tilde, f64::INFINITY),
            GuaranteeKind::Misclassified,
        ),
        (PointGuarantee::Misclassified, false) => (
            ratio(b, a - g, c_tilde, 0.0),
            ratio(a, b + g, c_tilde, f64::INFINITY),
            GuaranteeKind::Misclassified,
        ),
        (PointGuarantee::Correct, true) => (
            ratio(b, a - g, c_tilde, 0.0),
            ratio(a, b + g, c_tilde, f64::INFINITY),
            GuaranteeKind::Correct,
        ),
        (PointGuarantee::Correct, false) => (
            ratio(a, b - d, c_tilde, 0.0),
            ratio(b, a + d, c_tilde, f64::INFINITY),
            GuaranteeKind::Correct,
        ),
    };
    // C̃ itself is certain; keep it inside despite rounding in the ratios
    let (lo, hi, closed) = match kind {
        GuaranteeKind::Misclassified => (
            if lo >= c_tilde { c_tilde.next_down() } else { lo },
            if hi <= c_tilde { c_tilde.next_up() } else { hi },
            false,
        ),
        GuaranteeKind::Correct => (lo.min(c_tilde), hi.max(c_tilde), true),
    };
    Some(GuaranteeInterval {
        lo,
        hi,
        lo_closed: closed,
        hi_closed: closed && hi.is_finite(),
        kind,
        instance_index,
    })
}

fn interval_of_kind(
    solution: &ApproxSolution,
    instance: &LabeledInstance,
    instance_index: usize,
    range: (f64, f64),
    want: GuaranteeKind,
) -> Option<GuaranteeInterval> {
    let coef = coefficients(solution, &instance.features);
    guarantee_interval(&coef, instance.y(), solution.c, instance_index)
        .filter(|iv| iv.kind == want)
        .and_then(|iv| iv.clip(range.0, range.1))
}

/// Range of `C` (clipped to `range`) on which the instance is certainly
/// misclassified. Open at both ends.
pub fn misclassified_interval(
    solution: &ApproxSolution,
    instance: &LabeledInstance,
    instance_index: usize,
    range: (f64, f64),
) -> Option<GuaranteeInterval> {
    interval_of_kind(solution, instance, instance_index, range, GuaranteeKind::Misclassified)
}

/// Range of `C` (clipped to `range`) on which the instance is certainly
/// classified correctly. Closed at finite ends.
pub fn correct_interval(
    solution: &ApproxSolution,
    instance: &LabeledInstance,
    instance_index: usize,
    range: (f64, f64),
) -> Option<GuaranteeInterval> {
    interval_of_kind(solution, instance, instance_index, range, GuaranteeKind::Correct)
}

/// Guaranteed counts at `C̃`. `lb = lb_count / n′`, `ub = ub_count / n′`
/// where `ub_count = n′ − guaranteed-correct count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PointBounds {
    pub lb_count: usize,
    pub ub_count: usize,
    pub n_prime: usize,
}

impl PointBounds {
    pub fn lb(&self) -> f64 {
        self.lb_count as f64 / self.n_prime as f64
    }

    pub fn ub(&self) -> f64 {
        self.ub_count as f64 / self.n_prime as f64
    }

    /// Instances whose classification at `C̃` is not certain.
    pub fn uncertain(&self) -> usize {
        self.ub_count - self.lb_count
    }

    pub fn add(&self, other: &PointBounds) -> PointBounds {
        PointBounds {
            lb_count: self.lb_count + other.lb_count,
            ub_count: self.ub_count + other.ub_count,
            n_prime: self.n_prime + other.n_prime,
        }
    }
}

pub(crate) fn point_bounds_raw(
    weights: &[f64],
    norm_w: f64,
    g: &[f64],
    norm_g: f64,
    validation: &Dataset,
) -> PointBounds {
    let mut lb_count = 0;
    let mut correct = 0;
    for inst in validation.iter() {
        let coef = BoundCoefficients::compute(weights, norm_w, g, norm_g, &inst.features);
        match coef.classify(inst.y()) {
            PointGuarantee::Misclassified => lb_count += 1,
            PointGuarantee::Correct => correct += 1,
            PointGuarantee::Unknown => {}
        }
    }
    PointBounds {
        lb_count,
        ub_count: validation.len() - correct,
        n_prime: validation.len(),
    }
}

pub fn point_bounds(solution: &ApproxSolution, validation: &Dataset) -> PointBounds {
    point_bounds_raw(
        &solution.weights,
        solution.norm_w,
        &solution.subgradient,
        solution.norm_g,
        validation,
    )
}

/// Everything one solution certifies about one validation set.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionBounds {
    pub c_tilde: f64,
    pub point: PointBounds,
    /// Unclipped intervals, in instance order.
    pub misclassified: Vec<GuaranteeInterval>,
    pub correct: Vec<GuaranteeInterval>,
}

impl SolutionBounds {
    pub fn compute(solution: &ApproxSolution, validation: &Dataset) -> Self {
        let mut misclassified = Vec::new();
        let mut correct = Vec::new();
        for (i, inst) in validation.iter().enumerate() {
            let coef = coefficients(solution, &inst.features);
            match guarantee_interval(&coef, inst.y(), solution.c, i) {
                Some(iv) if iv.kind == GuaranteeKind::Misclassified => misclassified.push(iv),
                Some(iv) => correct.push(iv),
                None => {}
            }
        }
        let n = validation.len();
        SolutionBounds {
            c_tilde: solution.c,
            point: PointBounds {
                lb_count: misclassified.len(),
                ub_count: n - correct.len(),
                n_prime: n,
            },
            misclassified,
            correct,
        }
    }

    /// Right ends of the misclassification intervals, ascending.
    pub fn gamma_set(&self) -> Vec<f64> {
        sorted(self.misclassified.iter().map(|iv| iv.hi))
    }

    /// Left ends of the misclassification intervals, descending.
    pub fn delta_set(&self) -> Vec<f64> {
        let mut v = sorted(self.misclassified.iter().map(|iv| iv.lo));
        v.reverse();
        v
    }

    /// Right ends of all guarantee intervals, ascending.
    pub fn lambda_set(&self) -> Vec<f64> {
        sorted(self.misclassified.iter().chain(&self.correct).map(|iv| iv.hi))
    }

    pub fn lower_staircase(&self, range: (f64, f64)) -> StaircaseBound {
        let clipped: Vec<_> = self
            .misclassified
            .iter()
            .filter_map(|iv| iv.clip(range.0, range.1))
            .collect();
        StaircaseBound::from_intervals(&clipped, self.point.n_prime, Direction::Lower)
    }

    pub fn upper_staircase(&self, range: (f64, f64)) -> StaircaseBound {
        let clipped: Vec<_> = self
            .correct
            .iter()
            .filter_map(|iv| iv.clip(range.0, range.1))
            .collect();
        StaircaseBound::from_intervals(&clipped, self.point.n_prime, Direction::Upper)
    }
}

fn sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Pointwise best (maximum) validation-error lower bound over `solutions`.
pub fn lower_bound_path(
    solutions: &[ApproxSolution],
    validation: &Dataset,
    range: (f64, f64),
) -> Result<StaircaseBound, BoundsError> {
    if validation.is_empty() {
        return Err(BoundsError::EmptyValidation);
    }
    solutions
        .iter()
        .map(|s| SolutionBounds::compute(s, validation).lower_staircase(range))
        .reduce(|a, b| a.combine_max(&b))
        .ok_or(BoundsError::NoSolutions)
}

/// Validation-error upper bound implied by one solution.
pub fn upper_bound_path(
    solution: &ApproxSolution,
    validation: &Dataset,
    range: (f64, f64),
) -> Result<StaircaseBound, BoundsError> {
    if validation.is_empty() {
        return Err(BoundsError::EmptyValidation);
    }
    Ok(SolutionBounds::compute(solution, validation).upper_staircase(range))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{SolveStatus};
    use proptest::prelude::*;

    const ALL: (f64, f64) = (0.0, f64::INFINITY);

    fn solution(c: f64, w: Vec<f64>, g: Vec<f64>) -> ApproxSolution {
        ApproxSolution::from_parts(c, w, g, 0, SolveStatus::Converged, 1e-6)
    }

    fn instance(x: &[f64], y: i64) -> LabeledInstance {
        LabeledInstance::new(SparseVector::from_dense(x), y).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        let s = solution(1.0, vec![1.0, 0.0], vec![0.0, 0.0]);
        let c = coefficients(&s, &SparseVector::from_dense(&[1.0, 0.0]));
        assert_eq!((c.alpha, c.beta, c.gamma, c.delta), (1.0, 0.0, 0.0, 0.0));
        let c = coefficients(&s, &SparseVector::from_dense(&[0.0, 1.0]));
        assert_eq!((c.alpha, c.beta, c.gamma, c.delta), (0.5, 0.5, 0.0, 0.0));
    }

    #[test]
    fn score_bound_examples() {
        let s = solution(1.0, vec![1.0, 0.0], vec![0.0, 0.0]);
        let x = SparseVector::from_dense(&[1.0, 0.0]);
        assert_eq!(score_bounds(&s, &x, 1.0), (1.0, 1.0));
        assert_eq!(score_bounds(&s, &x, 2.0), (1.0, 2.0));
        // left branch: −β + r(α−γ) = 0.5, α − r(β−δ) = 1
        assert_eq!(score_bounds(&s, &x, 0.5), (0.5, 1.0));
    }

    #[test]
    fn interval_examples() {
        let s = solution(1.0, vec![1.0, 0.0], vec![0.0, 0.0]);
        let neg = instance(&[1.0, 0.0], -1);
        let iv = misclassified_interval(&s, &neg, 0, (1e-3, 1e3)).unwrap();
        assert_eq!((iv.lo, iv.hi), (1e-3, 1e3));
        assert!(iv.hi_closed);
        // unclipped, the guarantee runs from 0 to ∞ (β = 0)
        let raw = misclassified_interval(&s, &neg, 0, ALL).unwrap();
        assert_eq!((raw.lo, raw.hi), (0.0, f64::INFINITY));
        assert!(iv.contains(1.5) && iv.contains(1e3));

        let pos = instance(&[1.0, 0.0], 1);
        assert!(misclassified_interval(&s, &pos, 0, ALL).is_none());
        let iv = correct_interval(&s, &pos, 0, (1e-3, 1e3)).unwrap();
        assert!(iv.contains(1.0) && iv.contains(500.0) && iv.contains(1e3));
    }

    #[test]
    fn zero_score_counts_as_correct() {
        let s = solution(1.0, vec![1.0, 0.0], vec![0.0, 0.0]);
        for y in [1, -1] {
            let inst = instance(&[0.0, 1.0], y);
            let iv = correct_interval(&s, &inst, 0, ALL).unwrap();
            assert!(iv.contains(1.0));
            assert!(misclassified_interval(&s, &inst, 0, ALL).is_none());
        }
    }

    #[test]
    fn exact_solution_point_bounds_equal_error() {
        let s = solution(1.0, vec![1.0, -0.5], vec![0.0, 0.0]);
        let val = Dataset::from_dense(
            &[vec![1.0, 0.0], vec![-1.0, 1.0], vec![0.3, 2.0], vec![0.2, 0.1]],
            &[1, 1, -1, -1],
        )
        .unwrap();
        let pb = point_bounds(&s, &val);
        // scores 1, −1.5, −0.7, 0.15 → errors on instances 2 and 4
        assert_eq!((pb.lb_count, pb.ub_count), (2, 2));
        let lbp = lower_bound_path(std::slice::from_ref(&s), &val, ALL).unwrap();
        assert_eq!(lbp.count_at(1.0), 2);
        let ubp = upper_bound_path(&s, &val, ALL).unwrap();
        assert_eq!(ubp.value_at(1.0), 0.5);
    }

    #[test]
    fn vacuous_bounds_for_large_subgradient() {
        let s = solution(1.0, vec![1.0, -0.5], vec![100.0, 100.0]);
        let val = Dataset::from_dense(&[vec![1.0, 0.0], vec![-1.0, 1.0]], &[1, -1]).unwrap();
        let pb = point_bounds(&s, &val);
        assert_eq!((pb.lb(), pb.ub()), (0.0, 1.0));
    }

    #[test]
    fn empty_inputs_are_errors() {
        let val = Dataset::from_dense(&[vec![1.0]], &[1]).unwrap();
        assert_eq!(lower_bound_path(&[], &val, ALL).unwrap_err(), BoundsError::NoSolutions);
    }

    fn coef_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
        (
            prop::collection::vec(-3.0f64..3.0, 3),
            prop::collection::vec(-0.5f64..0.5, 3),
            prop::collection::vec(-2.0f64..2.0, 3),
            0.01f64..100.0,
        )
    }

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    proptest! {
        #[test]
        fn coefficient_identities((w, g, x, _) in coef_strategy()) {
            let xs = SparseVector::from_dense(&x);
            let c = BoundCoefficients::compute(&w, norm(&w), &g, norm(&g), &xs);
            let (nw, ng, nx) = (norm(&w), norm(&g), xs.norm());
            prop_assert!((c.alpha + c.beta - nw * nx).abs() <= 1e-12 * (1.0 + nw * nx));
            prop_assert!((c.alpha - c.beta - xs.dot(&w)).abs() <= 1e-12 * (1.0 + nw * nx));
            prop_assert!((c.gamma + c.delta - ng * nx).abs() <= 1e-12 * (1.0 + ng * nx));
            prop_assert!(c.alpha >= 0.0 && c.beta >= 0.0 && c.gamma >= 0.0 && c.delta >= 0.0);
        }

        #[test]
        fn branches_meet_at_c_tilde((w, g, x, ct) in coef_strategy()) {
            let xs = SparseVector::from_dense(&x);
            let coef = BoundCoefficients::compute(&w, norm(&w), &g, norm(&g), &xs);
            let line = ScoreBoundLine::new(&coef, ct);
            let scale = 1.0 + coef.alpha + coef.beta + coef.gamma + coef.delta;
            prop_assert!((line.lb_left.at(ct) - line.lb_right.at(ct)).abs() <= 1e-12 * scale);
            prop_assert!((line.ub_left.at(ct) - line.ub_right.at(ct)).abs() <= 1e-12 * scale);
            prop_assert!((line.lb_right.at(ct) - (coef.score - coef.gamma)).abs() <= 1e-12 * scale);
            prop_assert!((line.ub_right.at(ct) - (coef.score + coef.delta)).abs() <= 1e-12 * scale);
        }

        #[test]
        fn lower_below_upper((w, g, x, ct) in coef_strategy(), logr in -4.0f64..4.0) {
            let xs = SparseVector::from_dense(&x);
            let coef = BoundCoefficients::compute(&w, norm(&w), &g, norm(&g), &xs);
            let c = ct * 10f64.powf(logr);
            let (lb, ub) = coef.score_bounds(ct, c);
            prop_assert!(lb <= ub + 1e-9 * (1.0 + lb.abs() + ub.abs()));
        }

        #[test]
        fn interval_matches_sign_of_bound_lines((w, g, x, ct) in coef_strategy(), y in prop_oneof![Just(1.0), Just(-1.0)], logr in -3.0f64..3.0) {
            let xs = SparseVector::from_dense(&x);
            prop_assume!(xs.nnz() > 0);
            let coef = BoundCoefficients::compute(&w, norm(&w), &g, norm(&g), &xs);
            let c = ct * 10f64.powf(logr);
            let (lb, ub) = coef.score_bounds(ct, c);
            let mis = if y > 0.0 { ub < 0.0 } else { lb > 0.0 };
            let cor = if y > 0.0 { lb >= 0.0 } else { ub <= 0.0 };
            let iv = guarantee_interval(&coef, y, ct, 0);
            let in_mis = iv.is_some_and(|iv| iv.kind == GuaranteeKind::Misclassified && iv.contains(c));
            let in_cor = iv.is_some_and(|iv| iv.kind == GuaranteeKind::Correct && iv.contains(c));
            // margin from the exact crossing, to stay clear of rounding at endpoints
            let margin = (lb.abs()).min(ub.abs()) > 1e-9;
            if margin {
                prop_assert_eq!(in_mis, mis);
                prop_assert_eq!(in_cor, cor);
            }
        }
    }
}
