use std::collections::VecDeque;

use super::{merged_paths, Certificate, PathError, Probe, Problem, Search, SearchConfig};
use crate::bounds::{log_midpoint, StaircaseBound};

/// How `certify_with_strategy` picks the parameters to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// `size` log-evenly spaced values, solved coarse-to-fine.
    Grid { size: usize },
    /// Up to `budget` values, each where the current lower bound is smallest.
    Guided { budget: usize },
}

/// `t` values evenly spaced in log scale over `[c_min, c_max]`, both ends
/// included (`t = 1` gives `c_min`).
pub fn grid_strategy(c_min: f64, c_max: f64, t: usize) -> Vec<f64> {
    match t {
        0 => Vec::new(),
        1 => vec![c_min],
        _ => {
            let (lo, hi) = (c_min.log10(), c_max.log10());
            let step = (hi - lo) / (t - 1) as f64;
            let mut out: Vec<f64> = (0..t).map(|i| 10f64.powf(lo + i as f64 * step)).collect();
            out[0] = c_min;
            out[t - 1] = c_max;
            out
        }
    }
}

/// Permutation of `0..t`: both ends, then repeated midpoints, breadth first.
/// Every prefix is spread over the whole index range.
pub fn nested_order(t: usize) -> Vec<usize> {
    if t <= 1 {
        return (0..t).collect();
    }
    let mut out = vec![0, t - 1];
    let mut queue = VecDeque::from([(0, t - 1)]);
    while let Some((a, b)) = queue.pop_front() {
        let mid = (a + b) / 2;
        if mid > a && mid < b {
            out.push(mid);
            queue.push_back((a, mid));
            queue.push_back((mid, b));
        }
    }
    out
}

/// Log-midpoint of the leftmost place where the merged lower bound is
/// smallest; the log-midpoint of the range when nothing is solved yet.
pub fn bound_guided_strategy(probes: &[Probe], range: (f64, f64)) -> f64 {
    if probes.is_empty() {
        return log_midpoint(range.0, range.1);
    }
    let (lower, _) = merged_paths(probes, range);
    lower.min_count_over(range.0, range.1).1
}

/// Certified gap after each prefix of `probes`, as `(T, ε_T)`.
pub fn epsilon_curve(probes: &[Probe], range: (f64, f64)) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(probes.len());
    let mut per_task: Option<Vec<StaircaseBound>> = None;
    let mut best_ub = usize::MAX;
    for (t, p) in probes.iter().enumerate() {
        best_ub = best_ub.min(p.point.ub_count);
        let lows: Vec<_> = p.bounds.iter().map(|b| b.lower_staircase(range)).collect();
        per_task = Some(match per_task {
            None => lows,
            Some(acc) => acc.iter().zip(&lows).map(|(a, b)| a.combine_max(b)).collect(),
        });
        let merged = per_task
            .as_ref()
            .unwrap()
            .iter()
            .cloned()
            .reduce(|a, b| a.combine_sum(&b))
            .unwrap();
        let (min_lb, _) = merged.min_value_over(range.0, range.1);
        let n = p.point.n_prime as f64;
        out.push((t + 1, best_ub as f64 / n - min_lb));
    }
    out
}

pub fn certify_with_strategy(
    problem: &Problem,
    config: &SearchConfig,
    strategy: Strategy,
) -> Result<Certificate, PathError> {
    let mut search = Search::new(problem, config)?;
    match strategy {
        Strategy::Grid { size } => {
            if size == 0 {
                return Err(PathError::Config("grid size must be at least 1".into()));
            }
            let grid = grid_strategy(config.c_min, config.c_max, size);
            for i in nested_order(size) {
                search.solve_at(grid[i])?;
            }
        }
        Strategy::Guided { budget } => {
            if budget == 0 {
                return Err(PathError::Config("budget must be at least 1".into()));
            }
            for _ in 0..budget {
                let c = bound_guided_strategy(&search.probes, config.range());
                if search.probes.iter().any(|p| (p.c - c).abs() <= 1e-12 * c) {
                    break;
                }
                search.solve_at(c)?;
            }
        }
    }
    search.into_certificate(None)
}
