//! Plain search against the coarse-grid variant with inflated steps.
use std::path::Path;

use certreg::data::{holdout_split, read_libsvm_file, LabelEncoding, Standardizer};
use certreg::pathalg::{find_approx_parameter, find_approx_parameter_tricked, Problem, SearchConfig};

fn main() -> anyhow::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/ionosphere.libsvm");
    let ds = read_libsvm_file(&path, LabelEncoding::PlusMinusOne)?;
    println!("seed  plain T  tricked T  plain C_best  tricked C_best");
    for seed in 0..5 {
        let fold = holdout_split(&ds, 0.5, seed)?;
        let s = Standardizer::fit(&fold.train);
        let problem = Problem::holdout(s.transform(&fold.train), s.transform(&fold.validation))?;
        let config = SearchConfig { epsilon: 0.05, grid_m: 4, rho: 1.5, ..SearchConfig::default() };
        let plain = find_approx_parameter(&problem, &config)?;
        let tricked = find_approx_parameter_tricked(&problem, &config)?;
        println!(
            "{seed:<6}{:<9}{:<11}{:<14.4}{:.4}",
            plain.solved.len(),
            tricked.solved.len(),
            plain.c_best,
            tricked.c_best
        );
    }
    Ok(())
}
