use super::{certify_probes, eps_count, Certificate, PathError, Probe, Problem, Search, SearchConfig};

/// Piecewise-constant path: the solution of `probes[t]` is used on
/// `[breakpoints[t], breakpoints[t + 1])`, the last one up to `end`.
#[derive(Debug, Clone)]
pub struct RegularizationPath {
    pub breakpoints: Vec<f64>,
    /// First `C` past the last segment, `None` when its guarantee never ends.
    pub end: Option<f64>,
    pub certificate: Certificate,
}

impl RegularizationPath {
    pub fn probes(&self) -> &[Probe] {
        &self.certificate.probes
    }

    /// Index of the segment covering `c`.
    pub fn segment_of(&self, c: f64) -> Option<usize> {
        let idx = self.breakpoints.partition_point(|&b| b <= c);
        if idx == 0 || self.end.is_some_and(|e| c >= e) {
            return None;
        }
        Some(idx - 1)
    }
}

/// Solves from `c_min` upward; each solution is kept until the gap between its
/// validation-error upper and lower bounds would exceed ε.
pub fn track_path(problem: &Problem, config: &SearchConfig) -> Result<RegularizationPath, PathError> {
    let mut search = Search::new(problem, config)?;
    let n = search.n();
    let epsc = eps_count(n, config.epsilon);
    let mut breakpoints = Vec::new();
    let mut c = config.c_min;
    let end = loop {
        let idx = search.solve_at(c)?;
        breakpoints.push(c);
        let p = &search.probes[idx];
        let k = (epsc - p.point.uncertain() as f64).floor() as i64 + 1;
        let lambda = p.lambda_set();
        let Some(&next) = lambda.get(k.max(1) as usize - 1) else {
            break None;
        };
        let next = next.max(c + config.min_step);
        if next > config.c_max {
            break Some(next);
        }
        c = next;
    };
    let outside = search.outside_regime;
    let stalled = search.stalled;
    let mut certificate = certify_probes(search.probes, config.range(), Some(config.epsilon))?;
    certificate.outside_regime = outside;
    certificate.stalled_solves = stalled;
    Ok(RegularizationPath {
        breakpoints,
        end,
        certificate,
    })
}
