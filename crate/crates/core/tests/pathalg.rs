mod common;

use certreg::data::{kfold_split, Dataset};
use certreg::pathalg::{
    certify_list, certify_with_strategy, epsilon_curve, find_approx_parameter, find_approx_parameter_tricked,
    grid_strategy, next_c, recursive_check, track_path, Certificate, NextC, Problem, SearchConfig, Strategy,
};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(eps: f64) -> SearchConfig {
    SearchConfig {
        epsilon: eps,
        ..SearchConfig::default()
    }
}

fn holdout(seed: u64) -> (Dataset, Dataset, Problem) {
    let (train, valid) = noisy_problem(seed, 30, 3, 0.15);
    let p = Problem::holdout(train.clone(), valid.clone()).unwrap();
    (train, valid, p)
}

/// Exact error at `c` and the oracle-grid minimum.
fn oracle_gap(train: &Dataset, valid: &Dataset, c: f64, grid_points: usize) -> f64 {
    let grid = log_grid(C_RANGE.0, C_RANGE.1, grid_points);
    let best = oracle_errors(train, valid, &grid).into_iter().fold(f64::INFINITY, f64::min);
    validation_error(&exact_huber(train, c, None), valid) - best
}

fn random_cs(rng: &mut ChaCha8Rng, lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.gen_range(lo.ln()..hi.ln()).exp()).collect()
}

/// The merged lower bound stays above `ev_best − ε` over the whole range.
fn audit(cert: &Certificate, eps: f64, samples: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut cs = random_cs(&mut rng, C_RANGE.0, C_RANGE.1, samples);
    cs.extend(cert.solved.iter().map(|p| p.c));
    for c in cs {
        let lb = cert.lower_bound_path.value_at(c);
        assert!(lb >= cert.ev_best - eps - 1e-12, "C={c}: {lb} < {} - {eps}", cert.ev_best);
    }
}

#[test]
fn grid_certificate_dominates_true_gap() {
    let (train, valid, p) = holdout(1);
    let grid = grid_strategy(C_RANGE.0, C_RANGE.1, 10);
    let cert = certify_list(&p, &grid, &config(0.1)).unwrap();
    assert_eq!(cert.solved.len(), 10);
    let gap = oracle_gap(&train, &valid, cert.c_best, 1000);
    assert!(cert.certified_epsilon >= gap, "{} < {gap}", cert.certified_epsilon);
}

#[test]
fn find_steps_are_exactly_as_long_as_the_guarantee() {
    let eps = 0.1;
    let (_, _, p) = holdout(2);
    let cert = find_approx_parameter(&p, &config(eps)).unwrap();
    assert!(!cert.outside_regime);
    let n = p.n_validation() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut best = usize::MAX;
    for (t, probe) in cert.probes.iter().enumerate() {
        best = best.min(probe.point.ub_count);
        let next = match next_c(probe, best, eps, C_RANGE.1) {
            NextC::At(c) => c,
            NextC::End => {
                assert_eq!(t + 1, cert.probes.len());
                C_RANGE.1
            }
        };
        if t + 1 < cert.probes.len() {
            assert_eq!(next, cert.probes[t + 1].c);
        }
        let stair = probe.lower_staircase(C_RANGE);
        let floor = best as f64 - n * eps - 1e-9;
        for c in random_cs(&mut rng, probe.c, next, 100) {
            assert!(stair.count_at(c) as f64 >= floor);
            assert!(cert.ev_best - stair.value_at(c) <= eps + 1e-12);
        }
        if next < C_RANGE.1 {
            assert!((stair.count_right_of(next) as f64) < floor + 1e-9, "step at {next} too short");
        }
    }
}

#[test]
fn find_meets_epsilon_against_oracle() {
    for seed in 0..3 {
        let (train, valid, p) = holdout(10 + seed);
        let cert = find_approx_parameter(&p, &config(0.05)).unwrap();
        assert!(cert.certified_epsilon <= 0.05 + 1e-12);
        audit(&cert, 0.05, 500);
        assert!(oracle_gap(&train, &valid, cert.c_best, 1000) <= 0.05);
    }
}

#[test]
fn tricks_keep_the_guarantee_and_mostly_save_solves() {
    let mut fewer = 0;
    for seed in 0..10 {
        // label noise keeps the best error above ε, so the search has work to do
        let (train, valid) = noisy_problem(20 + seed, 60, 4, 0.2);
        let p = Problem::holdout(train.clone(), valid.clone()).unwrap();
        let plain = find_approx_parameter(&p, &config(0.1)).unwrap();
        let tricked = find_approx_parameter_tricked(&p, &config(0.1)).unwrap();
        for cert in [&plain, &tricked] {
            audit(cert, 0.1, 300);
            assert!(oracle_gap(&train, &valid, cert.c_best, 300) <= 0.1);
        }
        if tricked.solved.len() <= plain.solved.len() {
            fewer += 1;
        }
    }
    assert!(fewer >= 7, "tricks helped in {fewer}/10 runs");
}

#[test]
fn adjacent_tricked_solutions_cover_the_gap_between_them() {
    let eps = 0.1;
    for seed in 0..5 {
        let (_, _, p) = holdout(40 + seed);
        let cert = find_approx_parameter_tricked(&p, &config(eps)).unwrap();
        if cert.outside_regime {
            continue;
        }
        let mut order: Vec<usize> = (0..cert.probes.len()).collect();
        order.sort_by(|&a, &b| cert.probes[a].c.total_cmp(&cert.probes[b].c));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for pair in order.windows(2) {
            let (a, b) = (&cert.probes[pair[0]], &cert.probes[pair[1]]);
            let joint = a.lower_staircase(C_RANGE).combine_max(&b.lower_staircase(C_RANGE));
            for c in random_cs(&mut rng, a.c, b.c, 20) {
                assert!(joint.value_at(c) >= cert.ev_best - eps - 1e-12, "gap between {} and {}", a.c, b.c);
            }
        }
    }
}

#[test]
fn recursive_check_adds_nothing_when_neighbours_already_meet() {
    let (_, _, p) = holdout(50);
    let cert = recursive_check(&p, &config(0.1), 1.0, 1.0001).unwrap();
    assert_eq!(cert.solved.len(), 2);
}

#[test]
fn recursive_check_can_close_a_gap_with_one_midpoint() {
    let (_, _, p) = holdout(51);
    let cfg = config(0.1);
    let mut found = false;
    for c_right in log_grid(1.01, 1e3, 200) {
        let cert = recursive_check(&p, &cfg, 1.0, c_right).unwrap();
        if cert.solved.len() == 3 && !cert.outside_regime {
            let mid = cert.solved[2].c;
            assert!(1.0 < mid && mid < c_right);
            // coverage: the three solutions vouch for all of [1, c_right]
            let joint = cert.probes.iter().map(|pr| pr.lower_staircase(C_RANGE)).reduce(|a, b| a.combine_max(&b)).unwrap();
            for c in log_grid(1.0, c_right, 200) {
                assert!(joint.value_at(c) >= cert.ev_best - 0.1 - 1e-12);
            }
            found = true;
            break;
        }
    }
    assert!(found, "no single-midpoint case in the scan");
}

#[test]
fn path_segments_stay_within_epsilon() {
    let eps = 0.1;
    for seed in 0..3 {
        let (train, valid, p) = holdout(60 + seed);
        let path = track_path(&p, &config(eps)).unwrap();
        let probes = path.probes();
        for w in path.breakpoints.windows(2) {
            assert!(w[1] - w[0] >= 1e-6);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (t, probe) in probes.iter().enumerate() {
            let lo = path.breakpoints[t];
            let hi = path.breakpoints.get(t + 1).copied().or(path.end).unwrap_or(C_RANGE.1).min(C_RANGE.1);
            let lower = probe.lower_staircase(C_RANGE);
            let upper = probe.upper_staircase(C_RANGE);
            let mut cs = random_cs(&mut rng, lo, hi, 100);
            cs.push(lo);
            for c in cs {
                assert!(upper.value_at(c) - lower.value_at(c) <= eps + 1e-12, "segment {t} at {c}");
            }
        }
        let grid = log_grid(C_RANGE.0, path.end.unwrap_or(C_RANGE.1).min(C_RANGE.1), 300);
        let truth = oracle_errors(&train, &valid, &grid);
        for (c, e) in grid.iter().zip(truth) {
            let t = path.segment_of(*c).expect("grid point on the path");
            let used = validation_error(&probes[t].solutions[0].weights, &valid);
            assert!((used - e).abs() <= eps + 1e-12, "C={c}: {used} vs {e}");
        }
    }
}

#[test]
fn cross_validation_meets_epsilon_against_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let ds = random_dataset(&mut rng, 30, 3, &[1.5, -1.0, 0.5]);
    let p = Problem::cross_validation(&ds, 5, 7).unwrap();
    let cert = find_approx_parameter(&p, &config(0.1)).unwrap();
    audit(&cert, 0.1, 300);
    let folds = kfold_split(&ds, 5, 7).unwrap();
    let cv_error = |c: f64, warm: &mut Vec<Option<Vec<f64>>>| {
        let mut wrong = 0.0;
        for (f, w) in folds.iter().zip(warm.iter_mut()) {
            let sol = exact_huber(&f.train, c, w.as_deref());
            wrong += validation_error(&sol, &f.validation) * f.validation.len() as f64;
            *w = Some(sol);
        }
        wrong / ds.len() as f64
    };
    let mut warm = vec![None; folds.len()];
    let best = log_grid(C_RANGE.0, C_RANGE.1, 500)
        .into_iter()
        .map(|c| cv_error(c, &mut warm))
        .fold(f64::INFINITY, f64::min);
    let at_best = cv_error(cert.c_best, &mut vec![None; folds.len()]);
    assert!(at_best - best <= 0.1, "{at_best} - {best}");
}

#[test]
fn epsilon_curve_never_increases() {
    let (_, _, p) = holdout(80);
    let cert = certify_with_strategy(&p, &config(0.1), Strategy::Grid { size: 25 }).unwrap();
    let curve = epsilon_curve(&cert.probes, C_RANGE);
    assert_eq!(curve.len(), 25);
    for w in curve.windows(2) {
        assert!(w[1].1 <= w[0].1 + 1e-12, "{curve:?}");
    }
    assert!((curve[24].1 - cert.actual_epsilon).abs() < 1e-12);
}

#[test]
fn guided_strategy_certifies_no_worse_than_its_budget_allows() {
    let (train, valid, p) = holdout(81);
    let cert = certify_with_strategy(&p, &config(0.1), Strategy::Guided { budget: 15 }).unwrap();
    assert!(cert.solved.len() <= 15);
    assert!(oracle_gap(&train, &valid, cert.c_best, 300) <= cert.actual_epsilon + 1e-12);
}

#[test]
fn searches_are_deterministic() {
    let (_, _, p) = holdout(90);
    let a = find_approx_parameter_tricked(&p, &config(0.05)).unwrap();
    let b = find_approx_parameter_tricked(&p, &config(0.05)).unwrap();
    assert_eq!(a.solved, b.solved);
    assert_eq!(a.lower_bound_path, b.lower_bound_path);
}

#[test]
fn smaller_epsilon_costs_more_solves() {
    for seed in 0..5 {
        let (_, _, p) = holdout(100 + seed);
        let t: Vec<usize> = [0.1, 0.05, 0.01]
            .iter()
            .map(|&e| find_approx_parameter(&p, &config(e)).unwrap().solved.len())
            .collect();
        assert!(t[0] <= t[1] && t[1] <= t[2], "{t:?}");
    }
}

#[test]
fn probe_that_fails_at_its_own_c_does_not_skip_ahead() {
    // 17 validation instances and ε = 0.05 leave no room for an uncertain one
    let (train, valid) = random_problem(15);
    let p = Problem::holdout(train.clone(), valid.clone()).unwrap();
    let cert = find_approx_parameter(&p, &config(0.05)).unwrap();
    audit(&cert, 0.05, 1000);
    assert!(oracle_gap(&train, &valid, cert.c_best, 1000) <= 0.05);
}
