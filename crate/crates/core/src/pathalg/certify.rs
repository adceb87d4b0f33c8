use std::time::{Duration, Instant};

use super::{merged_paths, PathError, Probe, Problem, Search, SearchConfig, SolvedPoint, Task};
use crate::bounds::BoundsError;
use crate::data::Dataset;
use crate::solver::ApproxSolution;
use super::Certificate;

/// Gap certificate for an arbitrary set of probes.
///
/// `ev_best` is the smallest validation-error upper bound at a probed `C`
/// (earliest probe on ties); the lower end is the minimum over `range` of the
/// merged lower-bound path.
pub fn certify_probes(
    probes: Vec<Probe>,
    range: (f64, f64),
    epsilon_target: Option<f64>,
) -> Result<Certificate, PathError> {
    if probes.is_empty() {
        return Err(BoundsError::NoSolutions.into());
    }
    let mut best = 0;
    for (i, p) in probes.iter().enumerate() {
        if p.point.ub_count < probes[best].point.ub_count {
            best = i;
        }
    }
    let (lower, upper) = merged_paths(&probes, range);
    let (min_lb, at) = lower.min_value_over(range.0, range.1);
    let ev_best = probes[best].point.ub();
    let actual = ev_best - min_lb;
    let solved = probes
        .iter()
        .map(|p| SolvedPoint {
            c: p.c,
            lb: p.point.lb(),
            ub: p.point.ub(),
            iterations: p.iterations(),
        })
        .collect();
    Ok(Certificate {
        c_best: probes[best].c,
        ev_best,
        certified_epsilon: actual,
        actual_epsilon: actual,
        epsilon_target,
        c_range: range,
        solved,
        lower_bound_path: lower,
        upper_bound_path: upper,
        min_lower_bound: min_lb,
        min_lower_bound_at: at,
        total_solver_iterations: probes.iter().map(Probe::iterations).sum(),
        outside_regime: false,
        stalled_solves: 0,
        wall_time: Duration::ZERO,
        probes,
    })
}

/// Certifies already computed solutions on one validation set.
pub fn certify(
    solutions: &[ApproxSolution],
    train: &Dataset,
    validation: &Dataset,
    range: (f64, f64),
) -> Result<Certificate, PathError> {
    let tasks = [Task {
        train: train.clone(),
        validation: validation.clone(),
    }];
    let started = Instant::now();
    let probes = solutions
        .iter()
        .map(|s| Probe::new(s.c, vec![s.clone()], &tasks))
        .collect();
    let mut cert = certify_probes(probes, range, None)?;
    cert.wall_time = started.elapsed();
    Ok(cert)
}

/// Solves at every `C` of `c_list` (in order) and certifies the result.
pub fn certify_list(
    problem: &Problem,
    c_list: &[f64],
    config: &SearchConfig,
) -> Result<Certificate, PathError> {
    if c_list.is_empty() {
        return Err(PathError::Config("empty C list".into()));
    }
    let mut search = Search::new(problem, config)?;
    for &c in c_list {
        if !(c >= config.c_min && c <= config.c_max) {
            return Err(PathError::Config(format!(
                "C = {c} lies outside [{}, {}]",
                config.c_min, config.c_max
            )));
        }
        search.solve_at(c)?;
    }
    search.into_certificate(None)
}
