//! Command-line front end for configured runs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use least_gradient::config::ExperimentConfig;
use least_gradient::experiment::{dump_cut, run_experiment, verify_field, RunOptions};
use least_gradient::report::{emit_report, CheckStatus, RunReport};

#[derive(Parser)]
#[command(name = "lgp", version, about = "Weighted least gradient solutions by nested minimal cuts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory (overrides the config).
    #[arg(long, env = "LGP_OUT_DIR")]
    out: Option<PathBuf>,
    /// Seed for randomized weights and checks (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Comma-separated check name fragments; other checks are skipped.
    #[arg(long)]
    check_filter: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Build, solve and verify the configured experiment.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the checkers on a stored field CSV.
    Verify {
        field: PathBuf,
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write the max-flow network of one level in DIMACS format.
    DumpCut {
        config: PathBuf,
        /// Level index in `0..=K`.
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn options(config: &Path, c: &Common) -> RunOptions {
    RunOptions {
        out_dir: c.out.clone(),
        seed: c.seed,
        check_filter: c.check_filter.clone(),
        base_dir: config.parent().map(Path::to_path_buf).unwrap_or_default(),
        write_artifacts: true,
    }
}

fn print_report(r: &RunReport) {
    for c in &r.checks {
        let status = match c.status {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "skip",
        };
        let value = c.value.map_or(String::new(), |v| format!("{v:.4e}"));
        let tol = c.tolerance.map_or(String::new(), |t| format!("(tol {t:.2e})"));
        println!("{status:4}  {:28} {value:>11} {tol}", c.name);
    }
    println!(
        "{} passed, {} failed, {} skipped",
        r.summary.passed, r.summary.failed, r.summary.skipped
    );
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    let common = match &cli.command {
        Command::Run { common, .. } | Command::Verify { common, .. } | Command::DumpCut { common, .. } => common,
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match &cli.command {
        Command::Run { config, common } => {
            let (cfg, text) = ExperimentConfig::load(config)?;
            let out = run_experiment(&cfg, &text, &options(config, common))?;
            print_report(&out.report);
            println!("artifacts in {}", out.out_dir.display());
            Ok(out.report.all_passed())
        }
        Command::Verify { field, config, common } => {
            let (cfg, text) = ExperimentConfig::load(config)?;
            let opts = options(config, common);
            let report = verify_field(&cfg, &text, field, &opts)?;
            let dir = opts.out_dir(&cfg);
            std::fs::create_dir_all(&dir)?;
            emit_report(&report, &dir.join("verify_report.json"))?;
            print_report(&report);
            Ok(report.all_passed())
        }
        Command::DumpCut { config, level, common } => {
            let (cfg, _) = ExperimentConfig::load(config)?;
            let opts = options(config, common);
            let text = dump_cut(&cfg, &opts, *level)?;
            let dir = opts.out_dir(&cfg);
            std::fs::create_dir_all(&dir)?;
            let path = dir.join(format!("cut_level_{level:04}.dimacs"));
            std::fs::write(&path, text)?;
            println!("{}", path.display());
            Ok(true)
        }
    }
}
