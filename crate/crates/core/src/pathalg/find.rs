use super::{eps_count, order_rank, Certificate, PathError, Probe, Problem, Search, SearchConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NextC {
    At(f64),
    /// The probe's guarantee holds through the end of the range.
    End,
}

/// Smallest `C` right of the probe at which `LB ≥ best − ε` can fail, given
/// the best upper-bound count found so far. A probe that fails at its own
/// `C` gives that `C` back.
pub fn next_c(probe: &Probe, best_count: usize, epsilon: f64, c_max: f64) -> NextC {
    let k = order_rank(
        probe.point.lb_count,
        best_count,
        eps_count(probe.point.n_prime, epsilon),
    );
    if k <= 0 {
        return NextC::At(probe.c);
    }
    match probe.gamma_set().get(k as usize - 1) {
        Some(&c) if c <= c_max => NextC::At(c),
        _ => NextC::End,
    }
}

/// Walks from `c_min` to the right, each time jumping to the first `C` the
/// latest solution can no longer vouch for.
pub fn find_approx_parameter(problem: &Problem, config: &SearchConfig) -> Result<Certificate, PathError> {
    let mut search = Search::new(problem, config)?;
    let mut c = config.c_min;
    loop {
        let idx = search.solve_at(c)?;
        let (idx, _) = search.settle(idx, config.epsilon)?;
        match search.step_right(idx, config.epsilon) {
            Some(next) if next <= config.c_max => c = next,
            _ => break,
        }
    }
    search.into_certificate(Some(config.epsilon))
}
