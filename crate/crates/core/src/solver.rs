//! Approximate minimizers of the regularized objective with the stopping rule
//! driven by the validation-error bound gap.
//!
//! Differentiable losses use truncated Newton (conjugate gradient on the
//! generalized Hessian) with a backtracking line search. Hinge loss uses dual
//! coordinate descent without a bias term.

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{point_bounds_raw, PointBounds};
use crate::data::Dataset;
use crate::loss::{dot, norm, objective_and_subgradient, LossError, LossKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Newton iterations, or coordinate-descent epochs for hinge.
    pub max_iterations: usize,
    /// Approximate mode stops once `UB − LB ≤ gap_target_fraction · ε` at `C̃`.
    pub gap_target_fraction: f64,
    /// Iterations between two evaluations of the bound gap.
    pub gap_check_every: usize,
    /// A solution is exact when `‖g‖ ≤ exact_tolerance · (‖w‖ + 1)`.
    pub exact_tolerance: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 1000,
            gap_target_fraction: 0.1,
            gap_check_every: 1,
            exact_tolerance: 1e-6,
            armijo: 1e-4,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveMode {
    Exact,
    Approximate { epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// The iteration budget ran out before the stopping rule was met.
    MaxIterations,
    /// The line search could not decrease the objective any further. Bounds
    /// computed from the returned point are still valid, only looser.
    Stalled,
}

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error("objective became non-finite at iteration {0}")]
    NonFinite(usize),
    #[error("warm start has length {got}, expected {expected}")]
    WarmStartLength { expected: usize, got: usize },
    #[error("epsilon must be in [0, 1], got {0}")]
    BadEpsilon(f64),
}

/// A weight vector at `c` together with its objective subgradient.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxSolution {
    pub c: f64,
    pub weights: Vec<f64>,
    pub subgradient: Vec<f64>,
    pub norm_w: f64,
    pub norm_g: f64,
    pub is_exact: bool,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Guaranteed counts on the validation set passed to [`solve`].
    pub validation_point_bounds: Option<PointBounds>,
    /// Objective value after each accepted iteration.
    pub objective_history: Vec<f64>,
}

impl ApproxSolution {
    pub fn from_parts(
        c: f64,
        weights: Vec<f64>,
        subgradient: Vec<f64>,
        iterations: usize,
        status: SolveStatus,
        exact_tolerance: f64,
    ) -> Self {
        let norm_w = norm(&weights);
        let norm_g = norm(&subgradient);
        ApproxSolution {
            c,
            is_exact: norm_g <= exact_tolerance * (norm_w + 1.0),
            weights,
            subgradient,
            norm_w,
            norm_g,
            status,
            iterations,
            validation_point_bounds: None,
            objective_history: Vec::new(),
        }
    }

    pub fn objective_value(&self) -> Option<f64> {
        self.objective_history.last().copied()
    }
}

struct Stopper<'a> {
    config: &'a SolverConfig,
    mode: SolveMode,
    validation: &'a Dataset,
}

impl Stopper<'_> {
    fn exact_enough(&self, norm_w: f64, norm_g: f64) -> bool {
        norm_g <= self.config.exact_tolerance * (norm_w + 1.0)
    }

    fn gap_met(&self, iter: usize, w: &[f64], nw: f64, g: &[f64], ng: f64) -> bool {
        let SolveMode::Approximate { epsilon } = self.mode else {
            return false;
        };
        // a warm start that already meets the target would be reused as is,
        // and its guarantee barely reaches past the new C
        if iter == 0 || iter % self.config.gap_check_every.max(1) != 0 {
            return false;
        }
        let pb = point_bounds_raw(w, nw, g, ng, self.validation);
        pb.uncertain() as f64 <= self.config.gap_target_fraction * epsilon * pb.n_prime as f64
    }
}

/// Minimizes `½‖w‖² + C Σ ℓ(yᵢ, wᵀxᵢ)` until the mode's stopping rule holds.
///
/// Hitting `max_iterations` or a stalled line search is not an error: the
/// result carries the status and the caller decides.
pub fn solve(
    train: &Dataset,
    validation: &Dataset,
    kind: LossKind,
    c: f64,
    config: &SolverConfig,
    mode: SolveMode,
    warm_start: Option<&[f64]>,
) -> Result<ApproxSolution, SolverError> {
    kind.validate()?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(LossError::BadC(c).into());
    }
    if let SolveMode::Approximate { epsilon } = mode {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(SolverError::BadEpsilon(epsilon));
        }
    }
    let d = train.dimension().max(validation.dimension());
    let w0 = match warm_start {
        Some(w) if w.len() != d => {
            return Err(SolverError::WarmStartLength {
                expected: d,
                got: w.len(),
            })
        }
        Some(w) => w.to_vec(),
        None => vec![0.0; d],
    };
    let stopper = Stopper {
        config,
        mode,
        validation,
    };
    let mut sol = match kind {
        LossKind::Hinge => dual_coordinate_descent(train, c, w0, &stopper)?,
        _ => truncated_newton(train, kind, c, w0, &stopper)?,
    };
    sol.validation_point_bounds = Some(point_bounds_raw(
        &sol.weights,
        sol.norm_w,
        &sol.subgradient,
        sol.norm_g,
        validation,
    ));
    Ok(sol)
}

fn objective_from_scores(kind: LossKind, train: &Dataset, w: &[f64], z: &[f64], c: f64) -> f64 {
    let loss: f64 = train
        .iter()
        .zip(z)
        .map(|(inst, &zi)| kind.value(inst.y(), zi))
        .sum();
    0.5 * dot(w, w) + c * loss
}

fn gradient_from_scores(kind: LossKind, train: &Dataset, w: &[f64], z: &[f64], c: f64) -> Vec<f64> {
    let mut g = w.to_vec();
    for (inst, &zi) in train.iter().zip(z) {
        let xi = kind.subgradient(inst.y(), zi);
        if xi != 0.0 {
            inst.features.add_scaled_to(&mut g, c * xi);
        }
    }
    g
}

/// Solves `(I + C Xᵀ D X) s = −g` approximately by conjugate gradient.
fn conjugate_gradient(train: &Dataset, curv: &[(usize, f64)], c: f64, g: &[f64], gnorm: f64) -> Vec<f64> {
    let d = g.len();
    let hess = |p: &[f64]| {
        let mut out = p.to_vec();
        for &(i, di) in curv {
            let x = &train.instances()[i].features;
            x.add_scaled_to(&mut out, c * di * x.dot(p));
        }
        out
    };
    let tol = gnorm.sqrt().min(0.5) * gnorm;
    let mut s = vec![0.0; d];
    let mut r: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for _ in 0..(5 * d + 20) {
        if rr.sqrt() <= tol {
            break;
        }
        let hp = hess(&p);
        let php = dot(&p, &hp);
        if php <= 0.0 {
            break;
        }
        let a = rr / php;
        for j in 0..d {
            s[j] += a * p[j];
            r[j] -= a * hp[j];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for j in 0..d {
            p[j] = r[j] + beta * p[j];
        }
    }
    s
}

fn truncated_newton(
    train: &Dataset,
    kind: LossKind,
    c: f64,
    mut w: Vec<f64>,
    stop: &Stopper<'_>,
) -> Result<ApproxSolution, SolverError> {
    // validates w and c once; later iterations reuse the scores
    objective_and_subgradient(kind, train, &w, c)?;
    let mut z: Vec<f64> = train.iter().map(|inst| inst.features.dot(&w)).collect();
    let mut f = objective_from_scores(kind, train, &w, &z, c);
    let mut history = vec![f];
    let mut iter = 0;
    let finish = |w: Vec<f64>, g: Vec<f64>, iter: usize, status, history| {
        let mut sol = ApproxSolution::from_parts(c, w, g, iter, status, stop.config.exact_tolerance);
        sol.objective_history = history;
        sol
    };
    loop {
        let g = gradient_from_scores(kind, train, &w, &z, c);
        let (nw, ng) = (norm(&w), norm(&g));
        if !f.is_finite() || !ng.is_finite() {
            return Err(SolverError::NonFinite(iter));
        }
        if stop.exact_enough(nw, ng) || stop.gap_met(iter, &w, nw, &g, ng) {
            return Ok(finish(w, g, iter, SolveStatus::Converged, history));
        }
        if iter >= stop.config.max_iterations {
            return Ok(finish(w, g, iter, SolveStatus::MaxIterations, history));
        }
        let curv: Vec<(usize, f64)> = train
            .iter()
            .zip(&z)
            .enumerate()
            .map(|(i, (inst, &zi))| (i, kind.curvature(inst.y(), zi)))
            .filter(|&(_, di)| di > 0.0)
            .collect();
        let s = conjugate_gradient(train, &curv, c, &g, ng);
        let u: Vec<f64> = train.iter().map(|inst| inst.features.dot(&s)).collect();
        let gs = dot(&g, &s);
        if !(gs < 0.0) {
            return Ok(finish(w, g, iter, SolveStatus::Stalled, history));
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..stop.config.max_backtracks {
            let wt: Vec<f64> = w.iter().zip(&s).map(|(a, b)| a + t * b).collect();
            let zt: Vec<f64> = z.iter().zip(&u).map(|(a, b)| a + t * b).collect();
            let ft = objective_from_scores(kind, train, &wt, &zt, c);
            if ft <= f + stop.config.armijo * t * gs {
                accepted = Some((wt, zt, ft));
                break;
            }
            if ft <= f {
                // slope at t: by convexity φ′(t) ≤ 0 means φ decreased on [0, t]
                let slope = dot(&wt, &s)
                    + c * train
                        .iter()
                        .zip(&zt)
                        .zip(&u)
                        .map(|((inst, &zi), &ui)| kind.subgradient(inst.y(), zi) * ui)
                        .sum::<f64>();
                if slope <= 0.0 {
                    accepted = Some((wt, zt, ft));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((wt, zt, ft)) = accepted else {
            return Ok(finish(w, g, iter, SolveStatus::Stalled, history));
        };
        w = wt;
        z = zt;
        f = ft;
        history.push(f);
        iter += 1;
    }
}

fn dual_coordinate_descent(
    train: &Dataset,
    c: f64,
    warm: Vec<f64>,
    stop: &Stopper<'_>,
) -> Result<ApproxSolution, SolverError> {
    objective_and_subgradient(LossKind::Hinge, train, &warm, c)?;
    let d = warm.len();
    let n = train.len();
    let qii: Vec<f64> = train.iter().map(|i| i.features.norm_squared()).collect();
    // warm start: active constraints of the warm weights
    let mut alpha: Vec<f64> = train
        .iter()
        .map(|i| if i.y() * i.features.dot(&warm) < 1.0 { c } else { 0.0 })
        .collect();
    let mut w = vec![0.0; d];
    for (inst, &a) in train.iter().zip(&alpha) {
        if a != 0.0 {
            inst.features.add_scaled_to(&mut w, a * inst.y());
        }
    }
    let mut history = Vec::new();
    let mut epoch = 0;
    loop {
        let st = objective_and_subgradient(LossKind::Hinge, train, &w, c)?;
        if !st.objective_value.is_finite() {
            return Err(SolverError::NonFinite(epoch));
        }
        history.push(st.objective_value);
        let nw = norm(&w);
        let ng = st.subgradient_norm;
        let done = |status| {
            let mut sol = ApproxSolution::from_parts(
                c,
                w.clone(),
                st.subgradient.clone(),
                epoch,
                status,
                stop.config.exact_tolerance,
            );
            sol.objective_history = history.clone();
            sol
        };
        if stop.exact_enough(nw, ng) || stop.gap_met(epoch, &w, nw, &st.subgradient, ng) {
            return Ok(done(SolveStatus::Converged));
        }
        if epoch >= stop.config.max_iterations {
            return Ok(done(SolveStatus::MaxIterations));
        }
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            if qii[i] == 0.0 {
                continue;
            }
            let inst = &train.instances()[i];
            let y = inst.y();
            let grad = y * inst.features.dot(&w) - 1.0;
            let pg = if alpha[i] == 0.0 {
                grad.min(0.0)
            } else if alpha[i] == c {
                grad.max(0.0)
            } else {
                grad
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - grad / qii[i]).clamp(0.0, c);
                let delta = alpha[i] - old;
                if delta != 0.0 {
                    inst.features.add_scaled_to(&mut w, delta * y);
                }
            }
        }
        epoch += 1;
        if pg_max - pg_min <= 1e-10 {
            let st = objective_and_subgradient(LossKind::Hinge, train, &w, c)?;
            history.push(st.objective_value);
            let mut sol = ApproxSolution::from_parts(
                c,
                w,
                st.subgradient,
                epoch,
                SolveStatus::Converged,
                stop.config.exact_tolerance,
            );
            sol.objective_history = history;
            return Ok(sol);
        }
    }
}
