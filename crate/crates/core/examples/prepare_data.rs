//! Reads the bundled toy data, scales it and splits it both ways.
use std::path::Path;

use certreg::data::{holdout_split, kfold_split, read_libsvm_file, LabelEncoding, Standardizer};

fn main() -> anyhow::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy.libsvm");
    let ds = read_libsvm_file(&path, LabelEncoding::PlusMinusOne)?;
    let (pos, neg) = ds.class_counts();
    println!("{}: n={} d={} (+1: {pos}, -1: {neg})", path.display(), ds.len(), ds.dimension());

    let fold = holdout_split(&ds, 0.5, 0)?;
    // scale with training statistics only
    let scaler = Standardizer::fit(&fold.train);
    let train = scaler.transform(&fold.train);
    let valid = scaler.transform(&fold.validation);
    println!("holdout: {} train, {} validation", train.len(), valid.len());
    for j in 0..scaler.dimension() {
        let (lo, hi) = scaler.range(j);
        println!("  feature {}: [{lo:.3}, {hi:.3}] -> [-1, 1]", j + 1);
    }

    let folds = kfold_split(&ds, 5, 0)?;
    let sizes: Vec<usize> = folds.iter().map(|f| f.validation.len()).collect();
    println!("5-fold validation sizes: {sizes:?}");
    Ok(())
}
