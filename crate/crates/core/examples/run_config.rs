//! Runs a TOML experiment config through the full pipeline and prints the
//! check table. Artifacts go to the config's output directory.
//!
//! `cargo run --release --example run_config -- configs/disk_cos.toml [out]`

use std::path::{Path, PathBuf};

use least_gradient::config::ExperimentConfig;
use least_gradient::experiment::{run_experiment, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(args.next().unwrap_or_else(|| "configs/square_linear.toml".into()));
    let (cfg, text) = ExperimentConfig::load(&path)?;
    let opts = RunOptions {
        out_dir: args.next().map(PathBuf::from),
        base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        write_artifacts: true,
        ..RunOptions::default()
    };
    let out = run_experiment(&cfg, &text, &opts)?;
    for c in &out.report.checks {
        println!("{:?}\t{}\t{:?}\t{:?}", c.status, c.name, c.value, c.tolerance);
    }
    println!("report: {}", out.out_dir.join("report.json").display());
    Ok(())
}
