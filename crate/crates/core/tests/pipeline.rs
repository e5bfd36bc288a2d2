//! Config parsing, run reports, artifacts and the `lgp` command line.

use std::path::{Path, PathBuf};
use std::process::Command;

use least_gradient::config::{ConfigError, ExperimentConfig};
use least_gradient::experiment::{run_experiment, verify_field, ExperimentError, RunOptions};
use least_gradient::io::{emit_field, read_field_csv, read_field_pgm};
use least_gradient::report::{read_report, CheckStatus};
use least_gradient::{build_domain, ScalarField, Shape};

const SMALL: &str = r#"
schema_version = 1
name = "small"
seed = 5

[domain]
shape = "rect"
min = [0.0, 0.0]
max = [1.0, 1.0]
h = 0.125

[weight]
name = "radial"
base = 1.0
coeff = 0.5

[boundary]
name = "linear"
coeffs = [0.0, 1.0, 0.25]

[levels]
count = 4

[tv]
enabled = true
max_iter = 5000
gap_tol = 1e-4
"#;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("cfg.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn opts(out: &Path) -> RunOptions {
    RunOptions {
        out_dir: Some(out.to_path_buf()),
        write_artifacts: true,
        ..RunOptions::default()
    }
}

#[test]
fn zero_levels_is_a_config_error() {
    let text = SMALL.replace("count = 4", "count = 0");
    assert!(matches!(ExperimentConfig::from_toml(&text), Err(ConfigError::ZeroLevels)));
}

#[test]
fn unknown_names_are_echoed() {
    let e = ExperimentConfig::from_toml(&SMALL.replace("\"radial\"", "\"sideways\"")).unwrap_err();
    assert!(e.to_string().contains("sideways"));
    let e = ExperimentConfig::from_toml(&SMALL.replace("\"linear\"", "\"zigzag\"")).unwrap_err();
    assert!(matches!(e, ConfigError::UnknownBoundary(ref n) if n == "zigzag"));
    let e = ExperimentConfig::from_toml(&SMALL.replace("\"rect\"", "\"torus\"")).unwrap_err();
    assert!(matches!(e, ConfigError::UnknownShape(ref n) if n == "torus"));
}

#[test]
fn bundled_configs_parse() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["disk_cos.toml", "square_linear.toml", "disk_random.toml"] {
        let (cfg, _) = ExperimentConfig::load(&dir.join(name)).unwrap();
        assert!(cfg.levels.count >= 1, "{name}");
    }
}

#[test]
fn run_writes_artifacts_and_a_complete_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    let out = run_experiment(&cfg, SMALL, &opts(tmp.path())).unwrap();
    assert!(out.report.checks.len() >= 10);
    for f in ["report.json", "u_star.csv", "u_star.pgm", "u_star.json", "u_pd.csv", "certificate.json", "levels/levels.csv"] {
        assert!(tmp.path().join(f).exists(), "{f} missing");
    }
    for c in &out.report.checks {
        if c.status == CheckStatus::Fail {
            assert!(c.witness.is_some(), "{} fails without witness", c.name);
        }
    }
    let back = read_report(&tmp.path().join("report.json")).unwrap();
    assert_eq!(back, out.report);

    let grid = out.problem.dom.grid();
    let u = read_field_csv(grid, &tmp.path().join("u_star.csv")).unwrap();
    let orig = out.u_star.as_ref().unwrap();
    assert!(u.as_slice().iter().zip(orig.as_slice()).all(|(a, b)| a == b || (a.is_nan() && b.is_nan())));
}

#[test]
fn repeated_runs_match_except_timestamp() {
    let cfg = ExperimentConfig::from_toml(&SMALL.replace("\"radial\"", "\"random_uniform\"")).unwrap();
    let a = run_experiment(&cfg, SMALL, &RunOptions::default()).unwrap();
    let b = run_experiment(&cfg, SMALL, &RunOptions::default()).unwrap();
    assert_eq!(a.report.canonical_json(), b.report.canonical_json());
    let c = run_experiment(&cfg, SMALL, &RunOptions { seed: Some(99), ..RunOptions::default() }).unwrap();
    assert_ne!(a.problem.weight.cells(), c.problem.weight.cells());
}

#[test]
fn verify_accepts_the_constructed_field_and_rejects_a_perturbed_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    let out = run_experiment(&cfg, SMALL, &opts(tmp.path())).unwrap();
    let rep = verify_field(&cfg, SMALL, &tmp.path().join("u_star.csv"), &RunOptions::default()).unwrap();
    assert!(rep.all_passed(), "{:#?}", rep.checks);

    let dom = &out.problem.dom;
    let mut bad = out.u_star.clone().unwrap();
    let c = dom.interior_cells()[dom.interior_cells().len() / 2];
    bad.set(c, 10.0);
    let path = tmp.path().join("bad.csv");
    least_gradient::io::write_field_csv(&bad, dom.grid(), &path).unwrap();
    let rep = verify_field(&cfg, SMALL, &path, &RunOptions::default()).unwrap();
    let range = rep.check("range").unwrap();
    assert_eq!(range.status, CheckStatus::Fail);
    assert_eq!(range.witness.as_ref().unwrap()["cell"], c);
}

#[test]
fn missing_raster_is_reported() {
    let text = SMALL.replace("shape = \"rect\"", "shape = \"raster\"\nraster = \"nope.pgm\"");
    let cfg = ExperimentConfig::from_toml(&text).unwrap();
    assert!(matches!(
        run_experiment(&cfg, &text, &RunOptions::default()),
        Err(ExperimentError::Config(_))
    ));
}

#[test]
fn field_round_trip_through_pgm() {
    let tmp = tempfile::tempdir().unwrap();
    let dom = build_domain(&Shape::unit_disk(), 0.1, 3).unwrap();
    let grid = dom.grid();
    let u = ScalarField::from_fn(grid, |c| grid.center(c)[0].sin());
    let base = tmp.path().join("f");
    let scale = emit_field(&u, grid, &base).unwrap();
    let back = read_field_pgm(grid, &base).unwrap();
    let q = (scale.max - scale.min) / 65535.0;
    for c in 0..grid.len() {
        assert!((back.get(c) - u.get(c)).abs() <= q * 0.5 + 1e-15);
    }
}

fn lgp(args: &[&str], envs: &[(&str, &Path)]) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lgp"));
    cmd.args(args).env_remove("LGP_OUT_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

#[test]
fn cli_run_exit_code_tracks_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let pass = lgp(
        &["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "1", "--check-filter", "nested,range"],
        &[],
    );
    assert!(pass.status.success(), "{}", String::from_utf8_lossy(&pass.stdout));
    let report = read_report(&out.join("report.json")).unwrap();
    assert_eq!(report.summary.passed, 2);

    // An impossible tolerance forces a failure and a nonzero exit.
    let strict = SMALL.to_string() + "\n[oracle]\nexact = \"x1\"\nsup_tol = 0.0\n";
    let cfg = write_config(tmp.path(), &strict);
    let fail = lgp(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--check-filter", "exact"], &[]);
    assert_eq!(fail.status.code(), Some(1));

    let bad = write_config(tmp.path(), &SMALL.replace("count = 4", "count = 0"));
    let err = lgp(&["run", bad.to_str().unwrap()], &[]);
    assert_eq!(err.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&err.stderr).contains("level count"));
}

#[test]
fn cli_env_var_sets_output_dir_and_dump_cut_writes_dimacs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let env_out = tmp.path().join("from_env");
    let o = lgp(&["dump-cut", cfg.to_str().unwrap(), "--level", "2"], &[("LGP_OUT_DIR", &env_out)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(env_out.join("cut_level_0002.dimacs")).unwrap();
    assert!(text.lines().any(|l| l.starts_with("p max ")));

    // The flag wins over the environment.
    let flag_out = tmp.path().join("from_flag");
    let o = lgp(
        &["dump-cut", cfg.to_str().unwrap(), "--out", flag_out.to_str().unwrap()],
        &[("LGP_OUT_DIR", &env_out)],
    );
    assert!(o.status.success());
    assert!(flag_out.join("cut_level_0000.dimacs").exists());
}

#[test]
fn cli_verify_runs_checkers_on_a_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = write_config(tmp.path(), SMALL);
    let cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    run_experiment(&cfg, SMALL, &opts(tmp.path())).unwrap();
    let o = lgp(
        &["verify", tmp.path().join("u_star.csv").to_str().unwrap(), cfg_path.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(read_report(&tmp.path().join("verify_report.json")).unwrap().all_passed());
}
