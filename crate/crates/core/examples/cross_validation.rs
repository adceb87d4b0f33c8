//! The search on k-fold cross-validation error instead of a single holdout.
use std::path::Path;

use certreg::data::{read_libsvm_file, LabelEncoding};
use certreg::pathalg::{cv_certify, CvSearch, SearchConfig};

fn main() -> anyhow::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/ionosphere.libsvm");
    let ds = read_libsvm_file(&path, LabelEncoding::PlusMinusOne)?;
    let config = SearchConfig { epsilon: 0.05, ..SearchConfig::default() };
    for (name, search) in [("find", CvSearch::Find), ("tricked", CvSearch::Tricked)] {
        // folds are scaled on their own training part
        let cert = cv_certify(&ds, 10, 0, &config, search, &[])?;
        println!(
            "10-fold {name:<8} T={:<4} C_best={:<9.4} CV error={:.4} certified within {:.4}",
            cert.solved.len(),
            cert.c_best,
            cert.ev_best,
            cert.actual_epsilon
        );
    }
    Ok(())
}
