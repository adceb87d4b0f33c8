use log::warn;

use super::{Certificate, PathError, Problem, Search, SearchConfig};

/// Coarse log grid `C̄_0 .. C̄_m` with `C̄_m = c_max`.
pub(crate) fn coarse_grid(c_min: f64, c_max: f64, m: usize) -> Vec<f64> {
    let m = m.max(1);
    let (lo, hi) = (c_min.log10(), c_max.log10());
    let s = (hi - lo) / m as f64;
    let mut grid: Vec<f64> = (0..m).map(|h| 10f64.powf(lo + h as f64 * s)).collect();
    grid[0] = c_min;
    grid.push(c_max);
    grid
}

/// The accelerated search: a coarse grid first, then inflated steps that are
/// repaired by bisection when the two neighbouring guarantees do not meet.
pub fn find_approx_parameter_tricked(
    problem: &Problem,
    config: &SearchConfig,
) -> Result<Certificate, PathError> {
    let mut search = Search::new(problem, config)?;
    let eps = config.epsilon;
    let grid = coarse_grid(config.c_min, config.c_max, config.grid_m);
    let m = grid.len() - 1;
    let coarse: Vec<usize> = grid[..m]
        .iter()
        .map(|&c| search.solve_at(c))
        .collect::<Result<_, _>>()?;
    for h in 0..m {
        let upper = grid[h + 1];
        let (mut cur, _) = search.settle(coarse[h], eps)?;
        while search.probes[cur].c <= upper {
            let mut tmp = search.step_right(cur, config.rho * eps);
            if tmp.is_none_or(|c| c > upper) {
                tmp = search.step_right(cur, eps);
                if tmp.is_none_or(|c| c > upper) {
                    break;
                }
            }
            let next = search.solve_at(tmp.unwrap())?;
            let (next, _) = search.settle(next, eps)?;
            recursive_check_at(&mut search, cur, next, 0)?;
            cur = next;
        }
    }
    search.into_certificate(Some(eps))
}

fn recursive_check_at(search: &mut Search<'_>, left: usize, right: usize, depth: usize) -> Result<(), PathError> {
    let eps = search.config.epsilon;
    let (left, left_ok) = search.settle(left, eps)?;
    let (right, right_ok) = search.settle(right, eps)?;
    let reach_r = search.reach_right(left, eps).unwrap_or(f64::INFINITY);
    let reach_l = search.reach_left(right, eps);
    if reach_l < reach_r {
        return Ok(());
    }
    let (cl, cr) = (search.probes[left].c, search.probes[right].c);
    let mid = 0.5 * (reach_l + reach_r);
    if !(left_ok && right_ok) || !(mid > cl && mid < cr) {
        // an end that cannot vouch for itself would pull the bisection into it
        search.outside_regime = true;
        warn!("cannot close the gap between C = {cl} and C = {cr}");
        return Ok(());
    }
    if depth >= search.config.max_depth {
        return Err(PathError::RecursionDepth {
            depth,
            c_left: cl,
            c_right: cr,
        });
    }
    let new = search.solve_at(mid)?;
    recursive_check_at(search, left, new, depth + 1)?;
    recursive_check_at(search, new, right, depth + 1)
}

/// Bisects between two solved parameters until the guarantees of adjacent
/// solutions overlap. Returns the certificate of all solutions involved.
pub fn recursive_check(
    problem: &Problem,
    config: &SearchConfig,
    c_left: f64,
    c_right: f64,
) -> Result<Certificate, PathError> {
    if !(c_left < c_right) {
        return Err(PathError::Config(format!("need C_L < C_R, got {c_left} and {c_right}")));
    }
    let mut search = Search::new(problem, config)?;
    let l = search.solve_at(c_left)?;
    let r = search.solve_at(c_right)?;
    recursive_check_at(&mut search, l, r, 0)?;
    search.into_certificate(Some(config.epsilon))
}
