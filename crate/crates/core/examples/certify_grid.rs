//! How much a plain grid search can guarantee, as a function of grid size.
use std::path::Path;

use certreg::data::{holdout_split, read_libsvm_file, LabelEncoding, Standardizer};
use certreg::pathalg::{certify_with_strategy, epsilon_curve, Problem, SearchConfig, Strategy};

fn main() -> anyhow::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/ionosphere.libsvm");
    let ds = read_libsvm_file(&path, LabelEncoding::PlusMinusOne)?;
    let fold = holdout_split(&ds, 0.5, 0)?;
    let s = Standardizer::fit(&fold.train);
    let problem = Problem::holdout(s.transform(&fold.train), s.transform(&fold.validation))?;
    let config = SearchConfig::default();

    let cert = certify_with_strategy(&problem, &config, Strategy::Grid { size: 40 })?;
    // coarse-to-fine order, so every prefix is itself a grid
    println!("T  certified gap");
    for (t, eps) in epsilon_curve(&cert.probes, config.range()) {
        if t.is_power_of_two() || t % 10 == 0 {
            println!("{t:<3}{eps:.4}");
        }
    }
    println!("best C={:.4} with error {:.4}, certified within {:.4}", cert.c_best, cert.ev_best, cert.actual_epsilon);

    let guided = certify_with_strategy(&problem, &config, Strategy::Guided { budget: 15 })?;
    println!("15 bound-guided solves certify {:.4}", guided.actual_epsilon);
    Ok(())
}
