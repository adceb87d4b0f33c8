//! All searches on the ionosphere data through the command-line layer,
//! writing the JSON record and the plot CSVs to a temporary directory.
use std::path::Path;

use certreg::cli::run_cli;

fn main() -> anyhow::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/ionosphere.libsvm");
    let dir = std::env::temp_dir().join("certreg-ionosphere");
    std::fs::create_dir_all(&dir)?;
    for mode in ["certify", "find", "find-tricked", "path", "cv"] {
        let out = dir.join(format!("{mode}.json"));
        let mut args = vec!["certreg", "--mode", mode, "--data", data.to_str().unwrap(), "--eps", "0.05"];
        if mode == "certify" {
            args.extend(["--grid-size", "20"]);
        }
        args.extend(["--out", out.to_str().unwrap(), "--plot-data"]);
        let code = run_cli(args);
        anyhow::ensure!(code == 0, "{mode} exited with {code}");
        let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out)?)?;
        println!(
            "{mode:<13} T={:<4} C_best={:<9.4} E_v={:.4} certified ε={:.4}",
            json["solved"].as_array().map_or(0, Vec::len),
            json["c_best"].as_f64().unwrap_or(f64::NAN),
            json["ev_best"].as_f64().unwrap_or(f64::NAN),
            json["certified_epsilon"].as_f64().unwrap_or(f64::NAN),
        );
    }
    println!("records and plot data in {}", dir.display());
    Ok(())
}
