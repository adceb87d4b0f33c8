//! Test oracles, written without the library's solver or bound code.
#![allow(dead_code)]

use certreg::data::{Dataset, LabeledInstance, SparseVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const C_RANGE: (f64, f64) = (1e-3, 1e3);

/// Noisy linearly generated ±1 data with entries in [-1, 1]. Rows are never
/// all zero and both labels occur.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize, w_true: &[f64]) -> Dataset {
    loop {
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let mut x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if x.iter().all(|v| *v == 0.0) {
                x[0] = 0.5;
            }
            let s: f64 = x.iter().zip(w_true).map(|(a, b)| a * b).sum::<f64>() + rng.gen_range(-0.7..0.7);
            labels.push(if s >= 0.0 { 1 } else { -1 });
            rows.push(x);
        }
        let pos = labels.iter().filter(|&&l| l > 0).count();
        if pos > 0 && pos < n {
            return Dataset::from_dense(&rows, &labels).unwrap();
        }
    }
}

/// Train and validation sets of the same distribution, sizes n ∈ [10, 30]
/// and d ∈ [2, 5] chosen from `seed`.
pub fn random_problem(seed: u64) -> (Dataset, Dataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(10..=30);
    let d = rng.gen_range(2..=5);
    let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let train = random_dataset(&mut rng, n, d, &w);
    let valid = random_dataset(&mut rng, n, d, &w);
    (train, valid)
}

pub fn random_problem_sized(seed: u64, n: usize, d: usize) -> (Dataset, Dataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let train = random_dataset(&mut rng, n, d, &w);
    let valid = random_dataset(&mut rng, n, d, &w);
    (train, valid)
}

pub fn dense_rows(ds: &Dataset, d: usize) -> Vec<(Vec<f64>, f64)> {
    ds.iter().map(|i| (i.features.to_dense(d), i.y())).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Smooth losses the Newton oracle handles, as functions of the margin.
#[derive(Debug, Clone, Copy)]
pub enum SmoothLoss {
    Huber(f64),
    Logistic,
}

impl SmoothLoss {
    fn value(self, m: f64) -> f64 {
        match self {
            SmoothLoss::Huber(h) => {
                if m >= 1.0 {
                    0.0
                } else if m >= 1.0 - h {
                    (1.0 - m).powi(2) / (2.0 * h)
                } else {
                    1.0 - m - h / 2.0
                }
            }
            SmoothLoss::Logistic => (1.0 + (-m).exp()).ln(),
        }
    }

    fn slope(self, m: f64) -> f64 {
        match self {
            SmoothLoss::Huber(h) => ((m - 1.0) / h).clamp(-1.0, 0.0),
            SmoothLoss::Logistic => -1.0 / (1.0 + m.exp()),
        }
    }

    fn curvature(self, m: f64) -> f64 {
        match self {
            SmoothLoss::Huber(h) => {
                if m < 1.0 && m > 1.0 - h {
                    1.0 / h
                } else {
                    0.0
                }
            }
            SmoothLoss::Logistic => {
                let s = 1.0 / (1.0 + (-m).exp());
                s * (1.0 - s)
            }
        }
    }
}

pub fn objective(rows: &[(Vec<f64>, f64)], loss: SmoothLoss, c: f64, w: &[f64]) -> f64 {
    0.5 * dot(w, w) + c * rows.iter().map(|(x, y)| loss.value(y * dot(w, x))).sum::<f64>()
}

pub fn gradient(rows: &[(Vec<f64>, f64)], loss: SmoothLoss, c: f64, w: &[f64]) -> Vec<f64> {
    let mut g = w.to_vec();
    for (x, y) in rows {
        let s = c * y * loss.slope(y * dot(w, x));
        for (gj, xj) in g.iter_mut().zip(x) {
            *gj += s * xj;
        }
    }
    g
}

/// Solves `A p = b` for symmetric positive definite `A` by Cholesky.
fn cholesky_solve(mut a: Vec<Vec<f64>>, b: &[f64]) -> Vec<f64> {
    let d = b.len();
    for j in 0..d {
        let mut s = a[j][j];
        for k in 0..j {
            s -= a[j][k] * a[j][k];
        }
        let l = s.sqrt();
        a[j][j] = l;
        for i in j + 1..d {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / l;
        }
    }
    let mut z = vec![0.0; d];
    for i in 0..d {
        let s: f64 = (0..i).map(|k| a[i][k] * z[k]).sum();
        z[i] = (b[i] - s) / a[i][i];
    }
    let mut x = vec![0.0; d];
    for i in (0..d).rev() {
        let s: f64 = (i + 1..d).map(|k| a[k][i] * x[k]).sum();
        x[i] = (z[i] - s) / a[i][i];
    }
    x
}

/// Newton's method with an exact line search, to `‖∇f‖ ≤ tol`.
pub fn newton_oracle(
    rows: &[(Vec<f64>, f64)],
    d: usize,
    loss: SmoothLoss,
    c: f64,
    start: Option<&[f64]>,
    tol: f64,
) -> Vec<f64> {
    let mut w = start.map_or_else(|| vec![0.0; d], <[f64]>::to_vec);
    for _ in 0..500 {
        let g = gradient(rows, loss, c, &w);
        if dot(&g, &g).sqrt() <= tol {
            return w;
        }
        let mut h: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        for (x, y) in rows {
            let k = c * loss.curvature(y * dot(&w, x));
            if k > 0.0 {
                for i in 0..d {
                    for j in 0..d {
                        h[i][j] += k * x[i] * x[j];
                    }
                }
            }
        }
        let neg: Vec<f64> = g.iter().map(|v| -v).collect();
        let p = cholesky_solve(h, &neg);
        // φ'(t) is increasing; bracket its root, then bisect
        let slope = |t: f64| {
            let wt: Vec<f64> = w.iter().zip(&p).map(|(a, b)| a + t * b).collect();
            dot(&gradient(rows, loss, c, &wt), &p)
        };
        let mut hi = 1.0;
        while slope(hi) < 0.0 && hi < 1e6 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        w.iter_mut().zip(&p).for_each(|(a, b)| *a += t * b);
    }
    let g = gradient(rows, loss, c, &w);
    panic!("newton oracle did not converge: |g| = {}", dot(&g, &g).sqrt());
}

/// Exact Huber-hinge (width 1) solution of `train` at `c`, to `‖∇f‖ ≤ 1e-8`.
pub fn exact_huber(train: &Dataset, c: f64, start: Option<&[f64]>) -> Vec<f64> {
    let d = train.dimension();
    newton_oracle(&dense_rows(train, d), d, SmoothLoss::Huber(1.0), c, start, 1e-8)
}

/// Plain gradient descent with step `1/L`, a generic first-order reference.
pub fn gradient_descent(rows: &[(Vec<f64>, f64)], d: usize, loss: SmoothLoss, c: f64, iterations: usize) -> Vec<f64> {
    let curv_max = match loss {
        SmoothLoss::Huber(h) => 1.0 / h,
        SmoothLoss::Logistic => 0.25,
    };
    let lip = 1.0 + c * curv_max * rows.iter().map(|(x, _)| dot(x, x)).sum::<f64>();
    let mut w = vec![0.0; d];
    for _ in 0..iterations {
        let g = gradient(rows, loss, c, &w);
        w.iter_mut().zip(&g).for_each(|(a, b)| *a -= b / lip);
    }
    w
}

/// Minimizer of a unimodal function on `[lo, hi]`.
pub fn ternary_search(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..300 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if f(a) <= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

/// Fraction of instances with `y wᵀx < 0`.
pub fn validation_error(w: &[f64], validation: &Dataset) -> f64 {
    let wrong = validation
        .iter()
        .filter(|i: &&LabeledInstance| i.y() * i.features.dot(w) < 0.0)
        .count();
    wrong as f64 / validation.len() as f64
}

pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Exact validation error along `grid`, warm starting each solve.
pub fn oracle_errors(train: &Dataset, validation: &Dataset, grid: &[f64]) -> Vec<f64> {
    let mut w: Option<Vec<f64>> = None;
    grid.iter()
        .map(|&c| {
            let sol = exact_huber(train, c, w.as_deref());
            let e = validation_error(&sol, validation);
            w = Some(sol);
            e
        })
        .collect()
}

pub fn sparse(values: &[f64]) -> SparseVector {
    SparseVector::from_dense(values)
}

/// Like [`random_problem_sized`] with a share `flip` of labels inverted, so
/// no parameter gets the validation error near zero.
pub fn noisy_problem(seed: u64, n: usize, d: usize, flip: f64) -> (Dataset, Dataset) {
    let (train, valid) = random_problem_sized(seed, n, d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut noisy = |ds: Dataset| {
        let dim = ds.dimension();
        let instances = ds
            .iter()
            .map(|i| {
                let y = if rng.gen_bool(flip) { -i.label() } else { i.label() };
                LabeledInstance::new(i.features.clone(), y as i64).unwrap()
            })
            .collect();
        Dataset::new(instances, dim).unwrap()
    };
    (noisy(train), noisy(valid))
}
