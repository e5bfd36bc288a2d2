//! Configured end-to-end runs: build the grid problem, assemble `u_⋆` from
//! its level sets, verify it, and optionally cross-check against the
//! primal-dual solver.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::boundary::{extend_boundary_data, BoundaryData, BoundaryValues};
use crate::config::{ConfigError, ExperimentConfig};
use crate::domain::{build_domain, DiscreteDomain};
use crate::error::{CutError, DomainError, IoError, LevelSetError};
use crate::field::{IndicatorSet, ScalarField};
use crate::geometry::{alpha_perimeter, coarea_quadrature, submodularity_defect};
use crate::levelset::{
    assemble_solution, build_family, check_boundary_values, check_component_reaches_boundary,
    check_separation, superlevel_mismatch, LevelSetFamily,
};
use crate::metric::CutMetric;
use crate::report::{emit_report, Check, RunReport};
use crate::setmin::{local_minimality_check, CutProblem};
use crate::stencil::CutStencil;
use crate::tv::{compare_solutions, solve_dirichlet_tv, TvParams, TvSolution};
use crate::weight::{WeightField, WeightFn};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("problem setup failed: {0}")]
    Domain(#[from] DomainError),
    #[error("cut metric setup failed: {0}")]
    Cut(#[from] CutError),
    #[error("level {level} out of range (family has {count})")]
    LevelOutOfRange { level: usize, count: usize },
}

/// Overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Comma-separated substrings; only checks whose name contains one run.
    pub check_filter: Option<String>,
    /// Directory that relative paths inside the config resolve against.
    pub base_dir: PathBuf,
    pub write_artifacts: bool,
}

/// The discretized problem a config describes.
#[derive(Debug, Clone)]
pub struct Problem {
    pub dom: DiscreteDomain,
    pub weight: WeightField,
    pub metric: CutMetric,
    pub data: BoundaryData,
    pub lipschitz: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub out_dir: PathBuf,
    pub problem: Problem,
    pub family: Option<LevelSetFamily>,
    pub u_star: Option<ScalarField>,
    pub tv: Option<TvSolution>,
}

impl RunOptions {
    pub fn seed(&self, cfg: &ExperimentConfig) -> u64 {
        self.seed.unwrap_or(cfg.seed)
    }

    pub fn out_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name))
    }

    fn selected(&self, cfg: &ExperimentConfig, name: &str) -> bool {
        if cfg.checks.skip.iter().any(|s| s == name) {
            return false;
        }
        match &self.check_filter {
            None => true,
            Some(f) => f.split(',').map(str::trim).filter(|s| !s.is_empty()).any(|s| name.contains(s)),
        }
    }
}

fn opt_vec(v: &Option<Vec<f64>>, dim: usize) -> Result<[f64; 3], ConfigError> {
    match v {
        None => Ok([0.0; 3]),
        Some(v) if v.len() == dim => {
            let mut x = [0.0; 3];
            x[..dim].copy_from_slice(v);
            Ok(x)
        }
        Some(_) => Err(ConfigError::Invalid(format!("center needs {dim} components"))),
    }
}

/// Builds domain, weight, cut metric and extended boundary data.
pub fn prepare(cfg: &ExperimentConfig, base_dir: &Path, seed: u64) -> Result<Problem, ExperimentError> {
    cfg.validate()?;
    let shape = cfg.shape(base_dir)?;
    let h = cfg.domain.h;
    let dom = build_domain(&shape, h, cfg.domain.collar)?;
    let dim = dom.dim();

    let ws = &cfg.weight;
    let weight = match ws.name.as_str() {
        "constant" => WeightField::constant(&dom, ws.value.unwrap_or(1.0))?,
        "radial" => WeightField::analytic(
            &dom,
            WeightFn::Radial {
                base: ws.base.unwrap_or(1.0),
                coeff: ws.coeff.unwrap_or(1.0),
                center: opt_vec(&ws.center, dim)?,
            },
        )?,
        "inward_distance" => WeightField::analytic(
            &dom,
            WeightFn::InwardDistance {
                base: ws.base.unwrap_or(1.0),
                slope: ws.slope.unwrap_or(1.0),
                shape: shape.clone(),
            },
        )?,
        "random_uniform" => {
            let (lo, hi) = (ws.lo.unwrap_or(1.0), ws.hi.unwrap_or(3.0));
            if !(0.0 < lo && lo <= hi) {
                return Err(ConfigError::Invalid(format!("random_uniform needs 0 < lo <= hi, got [{lo}, {hi}]")).into());
            }
            WeightField::random_uniform(&dom, lo, hi, &mut ChaCha8Rng::seed_from_u64(seed))?
        }
        other => return Err(ConfigError::UnknownWeight(other.to_string()).into()),
    };

    let bs = &cfg.boundary;
    let values = match bs.name.as_str() {
        "cos_theta" => {
            let c = opt_vec(&bs.center, dim)?;
            BoundaryValues::function(move |x| {
                let d = [x[0] - c[0], x[1] - c[1], x[2] - c[2]];
                let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                if r == 0.0 {
                    0.0
                } else {
                    d[0] / r
                }
            })
        }
        "constant" => BoundaryValues::constant(bs.value.unwrap_or(0.0)),
        "linear" => {
            let co = bs.coeffs.clone().unwrap_or_else(|| vec![0.0, 1.0]);
            BoundaryValues::function(move |x| {
                co.iter()
                    .enumerate()
                    .map(|(i, &a)| if i == 0 { a } else { a * x.get(i - 1).copied().unwrap_or(0.0) })
                    .sum()
            })
        }
        "csv" => {
            let rel = bs
                .path
                .as_ref()
                .ok_or_else(|| ConfigError::Invalid("csv boundary needs boundary.path".into()))?;
            let field = crate::io::read_field_csv(dom.grid(), &base_dir.join(rel))?;
            BoundaryValues::PerCell(
                dom.boundary_cells()
                    .iter()
                    .map(|&c| (c, field.get(c)))
                    .collect(),
            )
        }
        other => return Err(ConfigError::UnknownBoundary(other.to_string()).into()),
    };
    let data = extend_boundary_data(&dom, &values)?;
    let metric = CutMetric::new(&dom, &weight, &CutStencil::new(cfg.neighborhood(), h))?;
    let lipschitz = boundary_lipschitz(&dom, &data);
    Ok(Problem {
        dom,
        weight,
        metric,
        data,
        lipschitz,
    })
}

/// Largest difference quotient of `g` between boundary cells at most two
/// cells apart.
pub fn boundary_lipschitz(dom: &DiscreteDomain, data: &BoundaryData) -> f64 {
    let grid = dom.grid();
    let reach = 2.0 * dom.spacing() * 1.0001;
    let cells = dom.boundary_cells();
    let mut lip: f64 = 0.0;
    for (i, &p) in cells.iter().enumerate() {
        for &q in &cells[i + 1..] {
            let d = grid.distance(p, q);
            if d <= reach {
                lip = lip.max((data.value(p) - data.value(q)).abs() / d);
            }
        }
    }
    lip
}

impl Problem {
    /// `Δt + factor·Lip(g)·h` for a family of `k` uniform levels.
    pub fn boundary_tolerance(&self, k: usize, factor: f64) -> f64 {
        let (lo, hi) = self.data.range();
        (hi - lo) / k as f64 + factor * self.lipschitz * self.dom.spacing()
    }
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    opts: &'a RunOptions,
    report: RunReport,
}

impl Runner<'_> {
    /// Runs `f` when the check is selected; otherwise records it as skipped.
    fn run(&mut self, name: &str, op: &str, claim: &str, f: impl FnOnce(Check) -> Check) {
        let base = Check::new(name, op, claim);
        let check = if self.opts.selected(self.cfg, name) {
            f(base)
        } else {
            base.skipped("filtered out")
        };
        self.report.push(check);
    }

    fn skip(&mut self, name: &str, op: &str, claim: &str, why: &str) {
        self.report.push(Check::new(name, op, claim).skipped(why));
    }
}

const FAMILY_CHECKS: [(&str, &str, &str); 10] = [
    ("superlevel_recovery", "assemble_solution", "{u ≥ t_k} ∩ Ω equals E_{t_k} ∩ Ω for every level"),
    ("boundary_values", "check_boundary_values", "g is within Δt + c·Lip(g)·h of t on ∂E_t ∩ ∂Ω"),
    ("separation", "check_separation", "inner boundaries of distinct non-plateau levels are disjoint"),
    ("component_reaches_boundary", "check_component_reaches_boundary", "every boundary component of E_t reaches ∂Ω"),
    ("boundary_trace", "assemble_solution", "u_⋆ matches g on ∂Ω up to the level spacing tolerance"),
    ("range", "assemble_solution", "u_⋆ takes values in [min g, max g] on Ω"),
    ("coarea", "coarea_quadrature", "variation of u_⋆ equals its integrated level perimeters"),
    ("submodularity", "submodularity_defect", "P(A) + P(B) ≥ P(A ∪ B) + P(A ∩ B) on level sets"),
    ("local_minimality", "local_minimality_check", "no patch modification of E_t lowers its perimeter"),
    ("exact_solution", "assemble_solution", "u_⋆ is uniformly close to the closed-form solution"),
];

const TV_CHECKS: [(&str, &str, &str); 3] = [
    ("tv_gap", "solve_dirichlet_tv", "relative duality gap reaches the tolerance"),
    ("tv_l1_agreement", "compare_solutions", "primal-dual solution is L¹-close to u_⋆"),
    ("superlevel_minimality", "alpha_perimeter", "superlevel sets of the TV solution are near-minimal"),
];

fn lookup(table: &[(&'static str, &'static str, &'static str)], name: &str) -> (&'static str, &'static str, &'static str) {
    *table.iter().find(|t| t.0 == name).expect("registered check")
}

fn perimeter_ratio(mine: f64, theirs: f64) -> f64 {
    if theirs > 0.0 {
        mine / theirs
    } else if mine == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Runs the configured pipeline and writes its artifacts.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    config_text: &str,
    opts: &RunOptions,
) -> Result<RunOutcome, ExperimentError> {
    let started = Instant::now();
    let seed = opts.seed(cfg);
    let problem = prepare(cfg, &opts.base_dir, seed)?;
    let out_dir = opts.out_dir(cfg);
    let mut r = Runner {
        cfg,
        opts,
        report: RunReport::new(&cfg.name, config_text, seed),
    };

    let Problem { dom, metric, data, .. } = &problem;
    let family = match build_family(dom, metric, data, cfg.levels.count) {
        Ok(fam) => {
            r.run("nestedness", "build_family", "E_{t_{k+1}} ⊆ E_{t_k} for all levels", |c| {
                let ok = fam.check_nested().is_ok();
                c.measured(fam.len() as f64, 0.0).verdict(ok, None).with_note(format!("{} levels", fam.len()))
            });
            Some(fam)
        }
        Err(e) => {
            let witness = match &e {
                LevelSetError::NestednessViolation { lower, upper, cell } => {
                    Some(json!({ "lower": lower, "upper": upper, "cell": cell }))
                }
                _ => None,
            };
            let mut c = Check::new("nestedness", "build_family", "E_{t_{k+1}} ⊆ E_{t_k} for all levels").failed(e.to_string());
            if witness.is_some() {
                c.witness = witness;
            }
            r.report.push(c);
            None
        }
    };

    let u_star = match &family {
        Some(fam) => assemble_solution(fam, dom, data).ok(),
        None => None,
    };
    match (&family, &u_star) {
        (Some(fam), Some(u)) => family_checks(&mut r, &problem, fam, u, seed),
        _ => {
            for (n, o, c) in FAMILY_CHECKS {
                r.skip(n, o, c, "level family unavailable");
            }
        }
    }

    let tv = if cfg.tv.enabled && TV_CHECKS.iter().any(|t| opts.selected(cfg, t.0)) {
        let params = TvParams {
            max_iter: cfg.tv.max_iter,
            gap_tol: cfg.tv.gap_tol,
            ..TvParams::default()
        };
        match solve_dirichlet_tv(dom, &problem.weight, data, &params) {
            Ok(sol) => {
                tv_checks(&mut r, &problem, family.as_ref(), u_star.as_ref(), &sol);
                Some(sol)
            }
            Err(e) => {
                for (n, o, c) in TV_CHECKS {
                    r.run(n, o, c, |ch| ch.failed(format!("primal-dual solve failed: {e}")));
                }
                None
            }
        }
    } else {
        let why = if cfg.tv.enabled { "filtered out" } else { "tv cross-check disabled" };
        for (n, o, c) in TV_CHECKS {
            r.skip(n, o, c, why);
        }
        None
    };

    let mut report = r.report;
    report.stamp(started);
    if opts.write_artifacts {
        write_artifacts(&out_dir, &problem, family.as_ref(), u_star.as_ref(), tv.as_ref())?;
        emit_report(&report, &out_dir.join("report.json"))?;
    }
    Ok(RunOutcome {
        report,
        out_dir,
        problem,
        family,
        u_star,
        tv,
    })
}

fn family_checks(r: &mut Runner<'_>, p: &Problem, fam: &LevelSetFamily, u: &ScalarField, seed: u64) {
    let cfg = r.cfg;
    let tol = &cfg.tolerances;
    let Problem { dom, metric, data, .. } = p;
    let omega = dom.interior_set();
    let bound = p.boundary_tolerance(cfg.levels.count, tol.boundary_lip_factor);
    let (lo, hi) = data.range();

    let (n, o, c) = lookup(&FAMILY_CHECKS, "superlevel_recovery");
    r.run(n, o, c, |ch| {
        let m = superlevel_mismatch(u, fam, dom);
        ch.measured(m.is_some() as u8 as f64, 0.0)
            .verdict(m.is_none(), m.map(|(k, cell)| json!({ "level": k, "cell": cell })))
    });

    let (n, o, c) = lookup(&FAMILY_CHECKS, "boundary_values");
    r.run(n, o, c, |ch| {
        let rep = check_boundary_values(fam, dom, data, bound);
        let w = rep.witness.map(|(k, cell)| json!({ "level": k, "cell": cell }));
        ch.measured(rep.worst, rep.tolerance).verdict(rep.pass, w)
    });

    let (n, o, c) = lookup(&FAMILY_CHECKS, "separation");
    r.run(n, o, c, |ch| {
        let plateaus = data.plateau_values(dom, tol.plateau_min_cells);
        let rep = check_separation(fam, dom, &plateaus);
        let w = rep
            .conflicts
            .first()
            .map(|&(i, j, cell)| json!({ "levels": [i, j], "cell": cell }));
        ch.measured(rep.conflicts.len() as f64, 0.0)
            .verdict(rep.pass, w)
            .with_note(format!("{} exempt pairs, {} plateau values", rep.exempt_pairs, plateaus.len()))
    });

    let (n, o, c) = lookup(&FAMILY_CHECKS, "component_reaches_boundary");
    r.run(n, o, c, |ch| {
        let mut failing = 0usize;
        let mut first = None;
        for k in 0..fam.len() {
            let rep = check_component_reaches_boundary(&fam.closure_set(k, dom), dom);
            if !rep.pass && first.is_none() {
                first = Some(json!({ "level": k, "cell": rep.failing[0] }));
            }
            failing += rep.failing.len();
        }
        ch.measured(failing as f64, 0.0).verdict(failing == 0, first)
    });

    let (n, o, c) = lookup(&FAMILY_CHECKS, "boundary_trace");
    r.run(n, o, c, |ch| {
        let (worst, cell) = dom
            .boundary_cells()
            .iter()
            .map(|&b| ((u.get(b) - data.value(b)).abs(), b))
            .fold((0.0, None), |acc, (d, b)| if d > acc.0 { (d, Some(b)) } else { acc });
        ch.measured(worst, bound)
            .verdict(worst <= bound, cell.map(|b| json!({ "cell": b })))
    });

    let (n, o, c) = lookup(&FAMILY_CHECKS, "range");
    r.run(n, o, c, |ch| {
        let (worst, cell) = dom
            .interior_cells()
            .iter()
            .map(|&x| ((lo - u.get(x)).max(u.get(x) - hi).max(0.0), x))
            .fold((0.0, None), |acc, (d, x)| if d > acc.0 { (d, Some(x)) } else { acc });
        ch.measured(worst, 0.0).verdict(worst == 0.0, cell.map(|x| json!({ "cell": x })))
    });

    let (n, o, c) = lookup(&FAMILY_CHECKS, "coarea");
    r.run(n, o, c, |ch| match coarea_quadrature(u, Some(&omega), metric) {
        Ok(co) => {
            let d = (co.tv_value - co.coarea_value).abs();
            let t = tol.coarea_abs * co.tv_value.abs().max(1.0);
            ch.measured(d, t)
                .verdict(d <= t, Some(json!({ "tv": co.tv_value, "coarea": co.coarea_value })))
                .with_note(format!("{} level gaps", co.levels_used))
        }
        Err(e) => ch.failed(e.to_string()),
    });

    let (n, o, c) = lookup(&FAMILY_CHECKS, "submodularity");
    r.run(n, o, c, |ch| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5u64);
        let grid = dom.grid();
        let mut pairs: Vec<(IndicatorSet, IndicatorSet, String)> = Vec::new();
        for k in 0..fam.len() {
            let a = fam.closure_set(k, dom);
            let dir: [f64; 3] = std::array::from_fn(|i| if i < grid.dim() { rng.gen_range(-1.0..1.0) } else { 0.0 });
            let off: f64 = rng.gen_range(-0.5..0.5);
            let half = IndicatorSet::from_fn(grid, |x| {
                let y = grid.center(x);
                dir[0] * y[0] + dir[1] * y[1] + dir[2] * y[2] >= off
            });
            pairs.push((a, half, format!("level {k} vs half-space")));
            if k + 1 < fam.len() {
                let j = rng.gen_range(0..fam.len());
                let shifted = IndicatorSet::from_fn(grid, |x| {
                    let l = grid.lattice(x);
                    let mut m = l;
                    m[0] += 1;
                    grid.from_lattice(m).is_some_and(|q| fam.set(j).contains(q))
                });
                pairs.push((fam.closure_set(k, dom), shifted, format!("level {k} vs shifted level {j}")));
            }
        }
        let mut worst = f64::INFINITY;
        let mut which = String::new();
        for (a, b, label) in &pairs {
            match submodularity_defect(a, b, Some(&omega), metric) {
                Ok(d) if d < worst => {
                    worst = d;
                    which = label.clone();
                }
                Ok(_) => {}
                Err(e) => return ch.failed(e.to_string()),
            }
        }
        ch.measured(worst, -tol.submodularity)
            .verdict(worst >= -tol.submodularity, Some(json!({ "pair": which })))
            .with_note(format!("{} pairs", pairs.len()))
    });

    let (n, o, c) = lookup(&FAMILY_CHECKS, "local_minimality");
    r.run(n, o, c, |ch| {
        let mut patches = 0;
        let mut worst = 0.0f64;
        let mut witness = None;
        for k in (0..fam.len()).step_by(cfg.checks.minimality_stride) {
            match local_minimality_check(fam.set(k), &omega, metric, tol.patch_side) {
                Ok(v) => {
                    patches += v.patches_checked;
                    if let Some((cells, dec)) = v.witness {
                        if dec > worst {
                            worst = dec;
                            witness = Some(json!({ "level": k, "cells": cells, "decrease": dec }));
                        }
                    }
                }
                Err(e) => return ch.failed(e.to_string()),
            }
        }
        ch.measured(worst, 0.0)
            .verdict(witness.is_none(), witness)
            .with_note(format!("{patches} patches of side {}", tol.patch_side))
    });

    let (n, o, c) = lookup(&FAMILY_CHECKS, "exact_solution");
    match &cfg.oracle {
        None => r.skip(n, o, c, "no closed-form solution configured"),
        Some(or) => r.run(n, o, c, |ch| {
            let grid = dom.grid();
            let (worst, cell) = dom
                .interior_cells()
                .iter()
                .map(|&x| ((u.get(x) - grid.center(x)[0]).abs(), x))
                .fold((0.0, None), |acc, (d, x)| if d > acc.0 { (d, Some(x)) } else { acc });
            ch.measured(worst, or.sup_tol)
                .verdict(worst <= or.sup_tol, cell.map(|x| json!({ "cell": x })))
        }),
    }
}

fn tv_checks(
    r: &mut Runner<'_>,
    p: &Problem,
    fam: Option<&LevelSetFamily>,
    u_star: Option<&ScalarField>,
    sol: &TvSolution,
) {
    let cfg = r.cfg;
    let Problem { dom, metric, .. } = p;
    let cert = &sol.certificate;
    let omega = dom.interior_set();

    let (n, o, c) = lookup(&TV_CHECKS, "tv_gap");
    r.run(n, o, c, |ch| {
        ch.measured(cert.gap, cfg.tv.gap_tol)
            .verdict(cert.gap <= cfg.tv.gap_tol, Some(json!({ "iterations": cert.iterations })))
    });

    let (n, o, c) = lookup(&TV_CHECKS, "tv_l1_agreement");
    match u_star {
        None => r.skip(n, o, c, "level family unavailable"),
        Some(u) => r.run(n, o, c, |ch| match compare_solutions(&sol.u, u, &omega, dom.grid().cell_volume()) {
            Ok(cmp) => {
                let v = cmp.l1 / cmp.measure;
                let t = cfg.tolerances.tv_l1_relative;
                ch.measured(v, t)
                    .verdict(v <= t, Some(json!({ "linf": cmp.linf, "argmax": cmp.argmax })))
            }
            Err(e) => ch.failed(e.to_string()),
        }),
    }

    let (n, o, c) = lookup(&TV_CHECKS, "superlevel_minimality");
    match fam {
        None => r.skip(n, o, c, "level family unavailable"),
        Some(fam) => r.run(n, o, c, |ch| {
            let mut worst = 0.0f64;
            let mut at = 0;
            for (k, &t) in fam.levels().iter().enumerate() {
                let mine = alpha_perimeter(&sol.u.superlevel(t), Some(&omega), metric);
                let theirs = alpha_perimeter(fam.set(k), Some(&omega), metric);
                match (mine, theirs) {
                    (Ok(a), Ok(b)) => {
                        let q = perimeter_ratio(a, b);
                        if q > worst {
                            worst = q;
                            at = k;
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => return ch.failed(e.to_string()),
                }
            }
            let t = cfg.tolerances.superlevel_ratio;
            ch.measured(worst, t).verdict(worst <= t, Some(json!({ "level": at })))
        }),
    }
}

fn write_artifacts(
    out: &Path,
    p: &Problem,
    fam: Option<&LevelSetFamily>,
    u_star: Option<&ScalarField>,
    tv: Option<&TvSolution>,
) -> Result<(), IoError> {
    std::fs::create_dir_all(out).map_err(|source| IoError::Io {
        path: out.display().to_string(),
        source,
    })?;
    let grid = p.dom.grid();
    crate::io::write_mask_pgm(&out.join("domain.pgm"), &p.dom.interior_set(), grid)?;
    if let Some(u) = u_star {
        crate::io::emit_field(u, grid, &out.join("u_star"))?;
    }
    if let Some(fam) = fam {
        crate::io::dump_family(fam, &p.metric, &out.join("levels"))?;
    }
    if let Some(sol) = tv {
        crate::io::emit_field(&sol.u, grid, &out.join("u_pd"))?;
        let c = &sol.certificate;
        let cert = json!({
            "primal": c.primal,
            "dual": c.dual,
            "gap": c.gap,
            "iterations": c.iterations,
            "converged": c.converged,
            "tau": c.tau,
            "sigma": c.sigma,
            "history": c.history,
        });
        let text = serde_json::to_string_pretty(&cert).expect("certificate serializes") + "\n";
        crate::io::write_text(&out.join("certificate.json"), &text)?;
    }
    Ok(())
}

/// Runs the field checkers on a stored field: range, trace, coarea and
/// local minimality of its superlevel sets at the configured levels.
pub fn verify_field(
    cfg: &ExperimentConfig,
    config_text: &str,
    field_path: &Path,
    opts: &RunOptions,
) -> Result<RunReport, ExperimentError> {
    let started = Instant::now();
    let seed = opts.seed(cfg);
    let p = prepare(cfg, &opts.base_dir, seed)?;
    let Problem { dom, metric, data, .. } = &p;
    let grid = dom.grid();
    let mut u = crate::io::read_field_csv(grid, field_path)?;
    // Cells absent from the file take the boundary extension outside Ω.
    for c in 0..grid.len() {
        if !u.get(c).is_finite() && !dom.is_interior(c) {
            u.set(c, data.value(c));
        }
    }
    let mut r = Runner {
        cfg,
        opts,
        report: RunReport::new(&cfg.name, config_text, seed),
    };
    let omega = dom.interior_set();
    let tol = &cfg.tolerances;
    let (lo, hi) = data.range();
    let bound = p.boundary_tolerance(cfg.levels.count, tol.boundary_lip_factor);

    r.run("field_complete", "read_field_csv", "the field is finite on every cell of Ω", |ch| {
        let missing = dom.interior_cells().iter().copied().find(|&c| !u.get(c).is_finite());
        ch.measured(missing.is_some() as u8 as f64, 0.0)
            .verdict(missing.is_none(), missing.map(|c| json!({ "cell": c })))
    });
    if dom.interior_cells().iter().any(|&c| !u.get(c).is_finite()) {
        let mut report = r.report;
        report.stamp(started);
        return Ok(report);
    }

    let (n, o, c) = lookup(&FAMILY_CHECKS, "range");
    r.run(n, o, c, |ch| {
        let worst = dom
            .interior_cells()
            .iter()
            .map(|&x| ((lo - u.get(x)).max(u.get(x) - hi).max(0.0), x))
            .fold((0.0, 0), |acc, d| if d.0 > acc.0 { d } else { acc });
        ch.measured(worst.0, 0.0).verdict(worst.0 == 0.0, Some(json!({ "cell": worst.1 })))
    });

    let (n, o, c) = lookup(&FAMILY_CHECKS, "boundary_trace");
    r.run(n, o, c, |ch| {
        let worst = dom
            .boundary_cells()
            .iter()
            .map(|&b| ((u.get(b) - data.value(b)).abs(), b))
            .fold((0.0, 0), |acc, d| if d.0 > acc.0 { d } else { acc });
        ch.measured(worst.0, bound).verdict(worst.0 <= bound, Some(json!({ "cell": worst.1 })))
    });

    let (n, o, c) = lookup(&FAMILY_CHECKS, "coarea");
    r.run(n, o, c, |ch| match coarea_quadrature(&u, Some(&omega), metric) {
        Ok(co) => {
            let d = (co.tv_value - co.coarea_value).abs();
            let t = tol.coarea_abs * co.tv_value.abs().max(1.0);
            ch.measured(d, t).verdict(d <= t, Some(json!({ "tv": co.tv_value, "coarea": co.coarea_value })))
        }
        Err(e) => ch.failed(e.to_string()),
    });

    let k = cfg.levels.count;
    let levels: Vec<f64> = (0..=k).map(|i| lo + (hi - lo) * i as f64 / k as f64).collect();
    let (n, o, c) = lookup(&FAMILY_CHECKS, "component_reaches_boundary");
    r.run(n, o, c, |ch| {
        let mut failing = 0;
        let mut first = None;
        for (i, &t) in levels.iter().enumerate() {
            let rep = check_component_reaches_boundary(&u.superlevel(t), dom);
            if !rep.pass && first.is_none() {
                first = Some(json!({ "level": i, "cell": rep.failing[0] }));
            }
            failing += rep.failing.len();
        }
        ch.measured(failing as f64, 0.0).verdict(failing == 0, first)
    });

    let (n, o, c) = lookup(&FAMILY_CHECKS, "local_minimality");
    r.run(n, o, c, |ch| {
        let mut witness = None;
        let mut worst = 0.0f64;
        for (i, &t) in levels.iter().enumerate().step_by(cfg.checks.minimality_stride) {
            match local_minimality_check(&u.superlevel(t), &omega, metric, tol.patch_side) {
                Ok(v) => {
                    if let Some((cells, dec)) = v.witness {
                        if dec > worst {
                            worst = dec;
                            witness = Some(json!({ "level": i, "cells": cells, "decrease": dec }));
                        }
                    }
                }
                Err(e) => return ch.failed(e.to_string()),
            }
        }
        ch.measured(worst, 0.0).verdict(witness.is_none(), witness)
    });

    if let Some(or) = &cfg.oracle {
        let (n, o, c) = lookup(&FAMILY_CHECKS, "exact_solution");
        r.run(n, o, c, |ch| {
            let worst = dom
                .interior_cells()
                .iter()
                .map(|&x| ((u.get(x) - grid.center(x)[0]).abs(), x))
                .fold((0.0, 0), |acc, d| if d.0 > acc.0 { d } else { acc });
            ch.measured(worst.0, or.sup_tol).verdict(worst.0 <= or.sup_tol, Some(json!({ "cell": worst.1 })))
        });
    }

    let mut report = r.report;
    report.stamp(started);
    Ok(report)
}

/// DIMACS max-flow instance for the per-level problem at index `level`.
pub fn dump_cut(cfg: &ExperimentConfig, opts: &RunOptions, level: usize) -> Result<String, ExperimentError> {
    let p = prepare(cfg, &opts.base_dir, opts.seed(cfg))?;
    let (lo, hi) = p.data.range();
    let k = cfg.levels.count;
    let count = if p.data.is_constant() { 1 } else { k + 1 };
    if level >= count {
        return Err(ExperimentError::LevelOutOfRange { level, count });
    }
    let t = if level == k { hi } else { lo + (hi - lo) * level as f64 / k as f64 };
    let ext = p.data.superlevel_exterior(&p.dom, t);
    let prob = CutProblem::star(&p.dom, &p.metric, &ext);
    Ok(format!("c level {level} t = {t}\n{}", prob.to_dimacs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::CheckStatus;

    fn small() -> (ExperimentConfig, String) {
        let text = r#"
schema_version = 1
name = "small_disk"
[domain]
shape = "disk"
h = 0.125
[boundary]
name = "cos_theta"
[levels]
count = 8
[tv]
enabled = true
max_iter = 4000
gap_tol = 1e-4
[oracle]
exact = "x1"
sup_tol = 0.5
"#
        .to_string();
        (ExperimentConfig::from_toml(&text).unwrap(), text)
    }

    #[test]
    fn small_run_has_all_checks() {
        let (cfg, text) = small();
        let out = run_experiment(&cfg, &text, &RunOptions::default()).unwrap();
        assert!(out.report.checks.len() >= 10);
        let failing: Vec<_> = out
            .report
            .checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .map(|c| (c.name.clone(), c.value, c.tolerance))
            .collect();
        // Coarse grid: the L¹ agreement is not expected; everything structural is.
        assert!(failing.iter().all(|f| f.0 == "tv_l1_agreement"), "{failing:?}");
    }

    #[test]
    fn filter_skips_other_checks() {
        let (cfg, text) = small();
        let opts = RunOptions {
            check_filter: Some("range,coarea".into()),
            ..RunOptions::default()
        };
        let out = run_experiment(&cfg, &text, &opts).unwrap();
        let ran: Vec<_> = out
            .report
            .checks
            .iter()
            .filter(|c| c.status != CheckStatus::Skipped)
            .map(|c| c.name.as_str())
            .collect();
        assert_eq!(ran, ["range", "coarea"]);
        assert!(out.tv.is_none());
    }

    #[test]
    fn dump_cut_header() {
        let (cfg, _) = small();
        let s = dump_cut(&cfg, &RunOptions::default(), 3).unwrap();
        let header = s.lines().find(|l| !l.starts_with('c')).unwrap();
        assert!(header.starts_with("p max "), "{header}");
        assert!(matches!(
            dump_cut(&cfg, &RunOptions::default(), 99),
            Err(ExperimentError::LevelOutOfRange { .. })
        ));
    }
}
