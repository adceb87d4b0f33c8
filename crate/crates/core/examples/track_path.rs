//! A piecewise-constant regularization path whose error is never more than
//! ε away from the exact one.
use std::path::Path;

use certreg::data::{holdout_split, read_libsvm_file, LabelEncoding, Standardizer};
use certreg::pathalg::{track_path, Problem, SearchConfig};

fn main() -> anyhow::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy.libsvm");
    let ds = read_libsvm_file(&path, LabelEncoding::PlusMinusOne)?;
    let fold = holdout_split(&ds, 0.5, 0)?;
    let s = Standardizer::fit(&fold.train);
    let problem = Problem::holdout(s.transform(&fold.train), s.transform(&fold.validation))?;

    let config = SearchConfig { epsilon: 0.1, ..SearchConfig::default() };
    let rp = track_path(&problem, &config)?;
    println!("{} segments", rp.breakpoints.len());
    let k = rp.breakpoints.len();
    for (t, probe) in rp.probes().iter().enumerate() {
        if t >= 8 && t + 3 < k {
            if t == 8 {
                println!("  ...");
            }
            continue;
        }
        let hi = rp.breakpoints.get(t + 1).copied().or(rp.end);
        let hi = hi.map_or("inf".to_string(), |h| format!("{h:.4}"));
        println!("  [{:.4}, {hi}): error of W({:.4}) = {:.4}", rp.breakpoints[t], probe.c, probe.validation_error());
    }
    Ok(())
}
