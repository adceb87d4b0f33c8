//! What a single approximate solution says about every other `C`.
use std::path::Path;

use certreg::bounds::{coefficients, guarantee_interval, SolutionBounds};
use certreg::data::{holdout_split, read_libsvm_file, LabelEncoding, Standardizer};
use certreg::loss::LossKind;
use certreg::solver::{solve, SolveMode, SolverConfig};

fn main() -> anyhow::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy.libsvm");
    let ds = read_libsvm_file(&path, LabelEncoding::PlusMinusOne)?;
    let fold = holdout_split(&ds, 0.5, 0)?;
    let s = Standardizer::fit(&fold.train);
    let (train, valid) = (s.transform(&fold.train), s.transform(&fold.validation));

    let c_tilde = 1.0;
    let kind = LossKind::HuberHinge { width: 1.0 };
    let sol = solve(&train, &valid, kind, c_tilde, &SolverConfig::default(), SolveMode::Approximate { epsilon: 0.1 }, None)?;
    println!(
        "C~={c_tilde}: {} iterations, |w|={:.4}, |g|={:.2e}, exact={}",
        sol.iterations, sol.norm_w, sol.norm_g, sol.is_exact
    );

    println!("score bounds of the first three validation instances:");
    for (i, inst) in valid.iter().take(3).enumerate() {
        let coef = coefficients(&sol, &inst.features);
        print!("  #{i} (y={:+})", inst.label());
        for c in [0.1, 1.0, 10.0] {
            let (lo, hi) = coef.score_bounds(c_tilde, c);
            print!("  C={c}: [{lo:.3}, {hi:.3}]");
        }
        match guarantee_interval(&coef, inst.y(), c_tilde, i) {
            Some(iv) => println!("  certain {:?} on ({:.4}, {:.4})", iv.kind, iv.lo, iv.hi),
            None => println!("  uncertain at C~"),
        }
    }

    let b = SolutionBounds::compute(&sol, &valid);
    let lower = b.lower_staircase((1e-3, 1e3));
    let upper = b.upper_staircase((1e-3, 1e3));
    println!("validation error at C~ lies in [{:.4}, {:.4}]", b.point.lb_count as f64 / b.point.n_prime as f64, b.point.ub_count as f64 / b.point.n_prime as f64);
    for c in [0.01, 0.3, 1.0, 3.0, 100.0] {
        println!("  C={c:<5} error in [{:.4}, {:.4}]", lower.value_at(c), upper.value_at(c));
    }
    Ok(())
}
