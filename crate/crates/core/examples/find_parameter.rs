//! Searches for a `C` whose validation error is within ε of the best.
use std::path::Path;

use certreg::data::{holdout_split, read_libsvm_file, LabelEncoding, Standardizer};
use certreg::pathalg::{find_approx_parameter, Problem, SearchConfig};

fn main() -> anyhow::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/ionosphere.libsvm");
    let ds = read_libsvm_file(&path, LabelEncoding::PlusMinusOne)?;
    let fold = holdout_split(&ds, 0.5, 0)?;
    let s = Standardizer::fit(&fold.train);
    let problem = Problem::holdout(s.transform(&fold.train), s.transform(&fold.validation))?;

    for eps in [0.1, 0.05, 0.02] {
        let config = SearchConfig { epsilon: eps, ..SearchConfig::default() };
        let cert = find_approx_parameter(&problem, &config)?;
        println!(
            "ε={eps:<5} T={:<4} C_best={:<10.4} E_v={:.4} min LB={:.4} iterations={}",
            cert.solved.len(),
            cert.c_best,
            cert.ev_best,
            cert.min_lower_bound,
            cert.total_solver_iterations
        );
    }

    let cert = find_approx_parameter(&problem, &SearchConfig::default())?;
    println!("\nfirst steps at ε=0.1:");
    for p in cert.solved.iter().take(8) {
        println!("  C={:<10.5} error in [{:.4}, {:.4}] after {} iterations", p.c, p.lb, p.ub, p.iterations);
    }
    Ok(())
}
