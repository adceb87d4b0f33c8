//! Searching and certifying the regularization parameter.
//!
//! Every algorithm here works on a [`Problem`]: one train/validation pair for
//! holdout validation, or one pair per fold for k-fold cross validation. At a
//! candidate `C` all pairs are solved (a [`Probe`]) and their guaranteed
//! counts are added up, so the same code handles both settings.

mod certify;
mod find;
mod path;
mod strategy;
mod tricks;

pub use certify::{certify, certify_list, certify_probes};
pub use find::{find_approx_parameter, next_c, NextC};
pub use path::{track_path, RegularizationPath};
pub use strategy::{
    bound_guided_strategy, certify_with_strategy, epsilon_curve, grid_strategy, nested_order,
    Strategy,
};
pub use tricks::{find_approx_parameter_tricked, recursive_check};

use std::time::{Duration, Instant};

use log::{debug, warn};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{BoundsError, PointBounds, SolutionBounds, StaircaseBound};
use crate::data::{kfold_split, DataError, Dataset, Fold};
use crate::loss::LossKind;
use crate::solver::{solve, ApproxSolution, SolveMode, SolveStatus, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum PathError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("solver did not converge at C = {c} within {iterations} iterations")]
    NotConverged { c: f64, iterations: usize },
    #[error("bisection between C = {c_left} and C = {c_right} exceeded depth {depth}")]
    RecursionDepth { depth: usize, c_left: f64, c_right: f64 },
    #[error("more than {0} solves requested")]
    SolveBudget(usize),
}

/// Whether candidate solutions are solved to optimality or only until their
/// bound gap is small.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionMode {
    Exact,
    Approximate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchConfig {
    pub c_min: f64,
    pub c_max: f64,
    pub epsilon: f64,
    /// Size of the initial coarse grid of the tricked search; 0 is treated as 1.
    pub grid_m: usize,
    /// Step inflation of the tricked search; 1 disables it.
    pub rho: f64,
    /// Smallest step of path tracking.
    pub min_step: f64,
    pub solution_mode: SolutionMode,
    pub loss: LossKind,
    pub solver: SolverConfig,
    pub max_depth: usize,
    pub max_solves: usize,
    /// Report `ev_best − min LB` instead of the target for find modes.
    pub recompute_certificate: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            c_min: 1e-3,
            c_max: 1e3,
            epsilon: 0.1,
            grid_m: 4,
            rho: 1.5,
            min_step: 1e-6,
            solution_mode: SolutionMode::Approximate,
            loss: LossKind::default(),
            solver: SolverConfig::default(),
            max_depth: 64,
            max_solves: 100_000,
            recompute_certificate: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), PathError> {
        let bad = |msg: String| Err(PathError::Config(msg));
        if !(self.c_min > 0.0 && self.c_min < self.c_max && self.c_max.is_finite()) {
            return bad(format!(
                "need 0 < c_min < c_max < inf, got [{}, {}]",
                self.c_min, self.c_max
            ));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad(format!("epsilon must be in [0, 1], got {}", self.epsilon));
        }
        if !(self.rho >= 1.0 && self.rho.is_finite()) {
            return bad(format!("rho must be at least 1, got {}", self.rho));
        }
        if !(self.min_step > 0.0) {
            return bad(format!("min_step must be positive, got {}", self.min_step));
        }
        self.loss
            .validate()
            .map_err(|e| PathError::Config(e.to_string()))
    }

    /// ε = 0 leaves no room for inexact solutions.
    pub fn effective_mode(&self) -> SolutionMode {
        if self.epsilon == 0.0 {
            SolutionMode::Exact
        } else {
            self.solution_mode
        }
    }

    pub fn range(&self) -> (f64, f64) {
        (self.c_min, self.c_max)
    }
}

/// One training set and the validation set it is judged on.
#[derive(Debug, Clone)]
pub struct Task {
    pub train: Dataset,
    pub validation: Dataset,
}

#[derive(Debug, Clone)]
pub struct Problem {
    tasks: Vec<Task>,
}

impl Problem {
    pub fn holdout(train: Dataset, validation: Dataset) -> Result<Self, PathError> {
        validation.ensure_nonzero_inputs()?;
        Ok(Problem {
            tasks: vec![Task { train, validation }],
        })
    }

    pub fn from_folds(folds: Vec<Fold>) -> Result<Self, PathError> {
        if folds.is_empty() {
            return Err(PathError::Config("no folds".into()));
        }
        let mut tasks = Vec::with_capacity(folds.len());
        for (i, f) in folds.into_iter().enumerate() {
            f.validation.ensure_nonzero_inputs()?;
            let (pos, neg) = f.train.class_counts();
            if pos == 0 || neg == 0 {
                warn!("fold {i}: training part has a single class");
            }
            tasks.push(Task {
                train: f.train,
                validation: f.validation,
            });
        }
        Ok(Problem { tasks })
    }

    pub fn cross_validation(dataset: &Dataset, k: usize, seed: u64) -> Result<Self, PathError> {
        Problem::from_folds(kfold_split(dataset, k, seed)?)
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    /// Total number of validation instances over all tasks.
    pub fn n_validation(&self) -> usize {
        self.tasks.iter().map(|t| t.validation.len()).sum()
    }
}

/// Solutions of every task at one `C`.
#[derive(Debug, Clone)]
pub struct Probe {
    pub c: f64,
    pub solutions: Vec<ApproxSolution>,
    pub bounds: Vec<SolutionBounds>,
    /// Counts summed over tasks.
    pub point: PointBounds,
    /// Misclassified validation instances of the solutions themselves.
    pub error_count: usize,
}

impl Probe {
    pub fn new(c: f64, solutions: Vec<ApproxSolution>, tasks: &[Task]) -> Self {
        let bounds: Vec<SolutionBounds> = solutions
            .iter()
            .zip(tasks)
            .map(|(s, t)| SolutionBounds::compute(s, &t.validation))
            .collect();
        let point = bounds
            .iter()
            .map(|b| b.point)
            .reduce(|a, b| a.add(&b))
            .expect("at least one task");
        let error_count = solutions
            .iter()
            .zip(tasks)
            .map(|(s, t)| {
                t.validation
                    .iter()
                    .filter(|i| i.y() * i.features.dot(&s.weights) < 0.0)
                    .count()
            })
            .sum();
        Probe {
            c,
            solutions,
            bounds,
            point,
            error_count,
        }
    }

    pub fn iterations(&self) -> usize {
        self.solutions.iter().map(|s| s.iterations).sum()
    }

    pub fn validation_error(&self) -> f64 {
        self.error_count as f64 / self.point.n_prime as f64
    }

    fn union(&self, f: impl Fn(&SolutionBounds) -> Vec<f64>) -> Vec<f64> {
        let mut v: Vec<f64> = self.bounds.iter().flat_map(f).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Right ends of misclassification intervals over all tasks, ascending.
    pub fn gamma_set(&self) -> Vec<f64> {
        self.union(SolutionBounds::gamma_set)
    }

    /// Left ends of misclassification intervals over all tasks, descending.
    pub fn delta_set(&self) -> Vec<f64> {
        let mut v = self.union(SolutionBounds::delta_set);
        v.reverse();
        v
    }

    /// Right ends of all guarantee intervals over all tasks, ascending.
    pub fn lambda_set(&self) -> Vec<f64> {
        self.union(SolutionBounds::lambda_set)
    }

    pub fn lower_staircase(&self, range: (f64, f64)) -> StaircaseBound {
        self.bounds
            .iter()
            .map(|b| b.lower_staircase(range))
            .reduce(|a, b| a.combine_sum(&b))
            .expect("at least one task")
    }

    pub fn upper_staircase(&self, range: (f64, f64)) -> StaircaseBound {
        self.bounds
            .iter()
            .map(|b| b.upper_staircase(range))
            .reduce(|a, b| a.combine_sum(&b))
            .expect("at least one task")
    }
}

/// Bounds over all probes. For each task the tightest bound over probes is
/// taken, then the tasks are added up.
pub fn merged_paths(probes: &[Probe], range: (f64, f64)) -> (StaircaseBound, StaircaseBound) {
    assert!(!probes.is_empty(), "no probes");
    let n_tasks = probes[0].bounds.len();
    let per_task = |lower: bool| {
        (0..n_tasks)
            .map(|k| {
                probes
                    .iter()
                    .map(|p| {
                        if lower {
                            p.bounds[k].lower_staircase(range)
                        } else {
                            p.bounds[k].upper_staircase(range)
                        }
                    })
                    .reduce(|a, b| a.combine_max(&b))
                    .unwrap()
            })
            .reduce(|a, b| a.combine_sum(&b))
            .unwrap()
    };
    (per_task(true), per_task(false))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolvedPoint {
    pub c: f64,
    pub lb: f64,
    pub ub: f64,
    pub iterations: usize,
}

/// Result of any search: the chosen `C`, its error bound, and the certified
/// gap to the best achievable validation error over the range.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub c_best: f64,
    pub ev_best: f64,
    pub certified_epsilon: f64,
    /// `ev_best − min LB` over the range.
    pub actual_epsilon: f64,
    pub epsilon_target: Option<f64>,
    pub c_range: (f64, f64),
    pub solved: Vec<SolvedPoint>,
    pub lower_bound_path: StaircaseBound,
    pub upper_bound_path: StaircaseBound,
    pub min_lower_bound: f64,
    pub min_lower_bound_at: f64,
    pub total_solver_iterations: usize,
    /// A step fell back to a fixed multiplicative increase because no
    /// guarantee could fund it.
    pub outside_regime: bool,
    pub stalled_solves: usize,
    pub wall_time: Duration,
    pub probes: Vec<Probe>,
}

/// `n · ε` rounded to an integer when it is one up to rounding noise.
pub(crate) fn eps_count(n: usize, epsilon: f64) -> f64 {
    let x = n as f64 * epsilon;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r
    } else {
        x
    }
}

/// `⌊lb − best + n ε⌋ + 1`, the rank of the first guarantee expiry that
/// breaks `LB ≥ best − ε`. Values below 1 are returned as is.
pub(crate) fn order_rank(lb_count: usize, best_count: usize, eps_count: f64) -> i64 {
    (lb_count as f64 - best_count as f64 + eps_count).floor() as i64 + 1
}

/// Mutable state shared by the searches.
pub(crate) struct Search<'a> {
    pub problem: &'a Problem,
    pub config: &'a SearchConfig,
    pub probes: Vec<Probe>,
    pub best: Option<usize>,
    pub best_count: usize,
    pub outside_regime: bool,
    pub stalled: usize,
    started: Instant,
}

impl<'a> Search<'a> {
    pub fn new(problem: &'a Problem, config: &'a SearchConfig) -> Result<Self, PathError> {
        config.validate()?;
        Ok(Search {
            problem,
            config,
            probes: Vec::new(),
            best: None,
            best_count: problem.n_validation(),
            outside_regime: false,
            stalled: 0,
            started: Instant::now(),
        })
    }

    pub fn n(&self) -> usize {
        self.problem.n_validation()
    }

    fn warm_start(&self, c: f64) -> Option<&Probe> {
        let mut best: Option<(&Probe, f64)> = None;
        for p in &self.probes {
            let dist = (p.c.ln() - c.ln()).abs();
            if best.is_none_or(|(_, d)| dist < d) {
                best = Some((p, dist));
            }
        }
        best.map(|(p, _)| p)
    }

    /// Solves every task at `c` and records the probe. Returns its index.
    pub fn solve_at(&mut self, c: f64) -> Result<usize, PathError> {
        let mode = match self.config.effective_mode() {
            SolutionMode::Exact => SolveMode::Exact,
            SolutionMode::Approximate => SolveMode::Approximate {
                epsilon: self.config.epsilon,
            },
        };
        self.solve_with(c, mode)
    }

    fn solve_with(&mut self, c: f64, mode: SolveMode) -> Result<usize, PathError> {
        if self.probes.len() >= self.config.max_solves {
            return Err(PathError::SolveBudget(self.config.max_solves));
        }
        let warm = self.warm_start(c);
        let tasks = self.problem.tasks();
        let run = |(k, t): (usize, &Task)| {
            let w = warm.map(|p| p.solutions[k].weights.as_slice());
            solve(
                &t.train,
                &t.validation,
                self.config.loss,
                c,
                &self.config.solver,
                mode,
                w,
            )
        };
        let solutions: Vec<ApproxSolution> = if tasks.len() > 1 {
            tasks.par_iter().enumerate().map(run).collect::<Result<_, _>>()?
        } else {
            tasks.iter().enumerate().map(run).collect::<Result<_, _>>()?
        };
        for s in &solutions {
            match s.status {
                SolveStatus::MaxIterations => {
                    return Err(PathError::NotConverged {
                        c,
                        iterations: s.iterations,
                    })
                }
                SolveStatus::Stalled => {
                    warn!("line search stalled at C = {c}; continuing with looser bounds");
                    self.stalled += 1;
                }
                SolveStatus::Converged => {}
            }
        }
        let probe = Probe::new(c, solutions, tasks);
        debug!(
            "C = {c:.6e}: lb {}/{n} ub {}/{n}",
            probe.point.lb_count,
            probe.point.ub_count,
            n = probe.point.n_prime
        );
        self.probes.push(probe);
        let idx = self.probes.len() - 1;
        if self.best.is_none() || self.probes[idx].point.ub_count < self.best_count {
            self.best = Some(idx);
            self.best_count = self.probes[idx].point.ub_count;
        }
        Ok(idx)
    }

    pub fn eps_count(&self, epsilon: f64) -> f64 {
        eps_count(self.n(), epsilon)
    }

    fn rank(&self, idx: usize, epsilon: f64) -> i64 {
        order_rank(self.probes[idx].point.lb_count, self.best_count, self.eps_count(epsilon))
    }

    /// How far to the right the probe keeps `LB ≥ best − ε`: the first `C`
    /// beyond it where the guarantee fails, `None` if it holds forever. A
    /// probe that fails at its own `C` reaches nowhere.
    pub fn reach_right(&self, idx: usize, epsilon: f64) -> Option<f64> {
        let k = self.rank(idx, epsilon);
        let p = &self.probes[idx];
        if k <= 0 {
            return Some(p.c);
        }
        p.gamma_set().get(k as usize - 1).copied()
    }

    /// Mirror of [`Search::reach_right`] to the left: the largest `C` below
    /// the probe where the guarantee fails, 0 if none.
    pub fn reach_left(&self, idx: usize, epsilon: f64) -> f64 {
        let k = self.rank(idx, epsilon);
        let p = &self.probes[idx];
        if k <= 0 {
            return p.c;
        }
        p.delta_set().get(k as usize - 1).copied().unwrap_or(0.0)
    }

    /// A probe whose uncertain instances already break `LB ≥ best − ε` at its
    /// own `C` is solved again to optimality. Returns the probe to continue
    /// from and whether it now vouches for its own `C`.
    pub fn settle(&mut self, idx: usize, epsilon: f64) -> Result<(usize, bool), PathError> {
        if self.rank(idx, epsilon) >= 1 {
            return Ok((idx, true));
        }
        if self.probes[idx].solutions.iter().all(|s| s.is_exact) {
            return Ok((idx, false));
        }
        let c = self.probes[idx].c;
        debug!("re-solving C = {c} exactly");
        let idx = self.solve_with(c, SolveMode::Exact)?;
        Ok((idx, self.rank(idx, epsilon) >= 1))
    }

    /// Where a walk goes after the probe: its right reach, or a fixed
    /// multiplicative step when the probe cannot vouch even for its own `C`.
    pub fn step_right(&mut self, idx: usize, epsilon: f64) -> Option<f64> {
        if self.rank(idx, epsilon) <= 0 {
            let c = self.probes[idx].c;
            self.outside_regime = true;
            warn!("no guarantee reaches right of C = {c}; stepping by a fixed factor");
            return Some(c * 1.05);
        }
        self.reach_right(idx, epsilon)
    }

    pub fn into_certificate(self, epsilon_target: Option<f64>) -> Result<Certificate, PathError> {
        let wall_time = self.started.elapsed();
        let mut cert = certify_probes(self.probes, self.config.range(), epsilon_target)?;
        cert.outside_regime = self.outside_regime;
        cert.stalled_solves = self.stalled;
        cert.wall_time = wall_time;
        if let Some(eps) = epsilon_target {
            if !self.config.recompute_certificate {
                cert.certified_epsilon = cert.actual_epsilon.max(eps);
            }
        }
        Ok(cert)
    }
}

/// Which search to run on cross-validation folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvSearch {
    Certify,
    Find,
    Tricked,
}

/// Runs a search with the summed k-fold CV error in place of the holdout
/// error. `Certify` uses `c_list`.
pub fn cv_certify(
    dataset: &Dataset,
    k: usize,
    seed: u64,
    config: &SearchConfig,
    search: CvSearch,
    c_list: &[f64],
) -> Result<Certificate, PathError> {
    let problem = Problem::cross_validation(dataset, k, seed)?;
    match search {
        CvSearch::Certify => certify_list(&problem, c_list, config),
        CvSearch::Find => find_approx_parameter(&problem, config),
        CvSearch::Tricked => find_approx_parameter_tricked(&problem, config),
    }
}
