//! Experiment configuration in TOML.
//!
//! ```toml
//! schema_version = 1
//! name = "disk_cos"
//! seed = 7
//!
//! [domain]
//! shape = "disk"          # disk | rect | ball | cuboid | raster
//! center = [0.0, 0.0]
//! radius = 1.0
//! h = 0.015625
//!
//! [weight]
//! name = "constant"       # constant | radial | inward_distance | random_uniform
//! value = 1.0
//!
//! [boundary]
//! name = "cos_theta"      # cos_theta | constant | linear | csv
//!
//! [levels]
//! count = 64
//! ```
//!
//! Every other key has a default; see the field documentation below.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Shape;
use crate::stencil::Neighborhood;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config does not parse: {0}")]
    Parse(String),
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("unknown weight '{0}'")]
    UnknownWeight(String),
    #[error("unknown boundary data '{0}'")]
    UnknownBoundary(String),
    #[error("unknown shape '{0}'")]
    UnknownShape(String),
    #[error("level count must be at least 1")]
    ZeroLevels,
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; relative paths resolve against the working directory.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub domain: DomainSpec,
    #[serde(default)]
    pub weight: WeightSpec,
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub stencil: StencilSpec,
    #[serde(default)]
    pub levels: LevelSpec,
    #[serde(default)]
    pub tv: TvSpec,
    #[serde(default)]
    pub checks: CheckSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Closed-form solution to compare against, when known.
    #[serde(default)]
    pub oracle: Option<OracleSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub shape: String,
    pub h: f64,
    #[serde(default = "default_collar")]
    pub collar: usize,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub min: Option<Vec<f64>>,
    #[serde(default)]
    pub max: Option<Vec<f64>>,
    /// PGM mask for `shape = "raster"`; one pixel per cell.
    #[serde(default)]
    pub raster: Option<PathBuf>,
}

fn default_collar() -> usize {
    crate::domain::MIN_COLLAR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub name: String,
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub base: Option<f64>,
    #[serde(default)]
    pub coeff: Option<f64>,
    #[serde(default)]
    pub slope: Option<f64>,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
}

impl Default for WeightSpec {
    fn default() -> Self {
        Self {
            name: "constant".into(),
            value: Some(1.0),
            base: None,
            coeff: None,
            slope: None,
            center: None,
            lo: None,
            hi: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub name: String,
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    /// `c0 + c1 x + c2 y (+ c3 z)` for `name = "linear"`.
    #[serde(default)]
    pub coeffs: Option<Vec<f64>>,
    /// Boundary cell values for `name = "csv"` in the field CSV layout.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StencilSpec {
    /// 4, 8 or 16 in 2D; 6, 18 or 26 in 3D.
    pub neighborhood: usize,
}

impl Default for StencilSpec {
    fn default() -> Self {
        Self { neighborhood: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub count: usize,
}

impl Default for LevelSpec {
    fn default() -> Self {
        Self { count: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TvSpec {
    pub enabled: bool,
    pub max_iter: usize,
    pub gap_tol: f64,
}

impl Default for TvSpec {
    fn default() -> Self {
        Self {
            enabled: true,
            max_iter: 20_000,
            gap_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    /// Check names to skip.
    #[serde(default)]
    pub skip: Vec<String>,
    /// Levels probed by the patch-minimality check; every `stride`-th level.
    #[serde(default = "default_stride")]
    pub minimality_stride: usize,
}

fn default_stride() -> usize {
    8
}

impl Default for CheckSpec {
    fn default() -> Self {
        Self {
            skip: Vec::new(),
            minimality_stride: default_stride(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Multiple of `Lip(g)·h` added to `Δt` for the boundary-value checks.
    pub boundary_lip_factor: f64,
    pub coarea_abs: f64,
    pub submodularity: f64,
    pub patch_side: usize,
    pub tv_l1_relative: f64,
    pub superlevel_ratio: f64,
    pub plateau_min_cells: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            boundary_lip_factor: 5.0,
            coarea_abs: 1e-10,
            submodularity: 1e-12,
            patch_side: 3,
            tv_l1_relative: 1e-2,
            superlevel_ratio: 1.05,
            plateau_min_cells: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    /// `"x1"`: the solution is the first coordinate.
    pub exact: String,
    pub sup_tol: f64,
}

fn vec2(v: &Option<Vec<f64>>, what: &str, default: [f64; 2]) -> Result<[f64; 2], ConfigError> {
    match v {
        None => Ok(default),
        Some(v) if v.len() == 2 => Ok([v[0], v[1]]),
        Some(_) => Err(ConfigError::Invalid(format!("{what} needs 2 components"))),
    }
}

fn vec3(v: &Option<Vec<f64>>, what: &str, default: [f64; 3]) -> Result<[f64; 3], ConfigError> {
    match v {
        None => Ok(default),
        Some(v) if v.len() == 3 => Ok([v[0], v[1], v[2]]),
        Some(_) => Err(ConfigError::Invalid(format!("{what} needs 3 components"))),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Ok((Self::from_toml(&text)?, text))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Schema(self.schema_version));
        }
        if self.levels.count == 0 {
            return Err(ConfigError::ZeroLevels);
        }
        if !(self.domain.h > 0.0 && self.domain.h.is_finite()) {
            return Err(ConfigError::Invalid(format!("spacing {} must be positive", self.domain.h)));
        }
        if !matches!(
            self.weight.name.as_str(),
            "constant" | "radial" | "inward_distance" | "random_uniform"
        ) {
            return Err(ConfigError::UnknownWeight(self.weight.name.clone()));
        }
        if !matches!(self.boundary.name.as_str(), "cos_theta" | "constant" | "linear" | "csv") {
            return Err(ConfigError::UnknownBoundary(self.boundary.name.clone()));
        }
        let dim = self.shape_dim()?;
        if Neighborhood::from_size(dim, self.stencil.neighborhood).is_none() {
            return Err(ConfigError::Invalid(format!(
                "no {}-neighborhood in dimension {dim}",
                self.stencil.neighborhood
            )));
        }
        if self.tv.max_iter == 0 || !(self.tv.gap_tol > 0.0) {
            return Err(ConfigError::Invalid("tv parameters must be positive".into()));
        }
        if self.checks.minimality_stride == 0 {
            return Err(ConfigError::Invalid("minimality_stride must be positive".into()));
        }
        if let Some(o) = &self.oracle {
            if o.exact != "x1" {
                return Err(ConfigError::Invalid(format!("unknown oracle '{}'", o.exact)));
            }
        }
        Ok(())
    }

    fn shape_dim(&self) -> Result<usize, ConfigError> {
        match self.domain.shape.as_str() {
            "disk" | "rect" | "square" | "raster" => Ok(2),
            "ball" | "cuboid" | "cube" => Ok(3),
            other => Err(ConfigError::UnknownShape(other.to_string())),
        }
    }

    /// Builds the shape; rasters are read relative to `base_dir`.
    pub fn shape(&self, base_dir: &Path) -> Result<Shape, ConfigError> {
        let d = &self.domain;
        Ok(match d.shape.as_str() {
            "disk" => Shape::Disk {
                center: vec2(&d.center, "domain.center", [0.0, 0.0])?,
                radius: d.radius.unwrap_or(1.0),
            },
            "ball" => Shape::Ball {
                center: vec3(&d.center, "domain.center", [0.0; 3])?,
                radius: d.radius.unwrap_or(1.0),
            },
            "rect" | "square" => Shape::Rect {
                min: vec2(&d.min, "domain.min", [0.0, 0.0])?,
                max: vec2(&d.max, "domain.max", [1.0, 1.0])?,
            },
            "cuboid" | "cube" => Shape::Cuboid {
                min: vec3(&d.min, "domain.min", [0.0; 3])?,
                max: vec3(&d.max, "domain.max", [1.0; 3])?,
            },
            "raster" => {
                let rel = d
                    .raster
                    .as_ref()
                    .ok_or_else(|| ConfigError::Invalid("raster shape needs domain.raster".into()))?;
                let mask = crate::io::read_mask_pgm(&base_dir.join(rel))
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                Shape::Raster(mask)
            }
            other => return Err(ConfigError::UnknownShape(other.to_string())),
        })
    }

    pub fn neighborhood(&self) -> Neighborhood {
        Neighborhood::from_size(self.shape_dim().unwrap_or(2), self.stencil.neighborhood)
            .expect("validated neighborhood")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
name = "t"
[domain]
shape = "disk"
h = 0.125
[boundary]
name = "cos_theta"
"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.levels.count, 64);
        assert_eq!(c.weight.name, "constant");
        assert_eq!(c.neighborhood(), Neighborhood::N16);
        assert!(c.tv.enabled);
    }

    #[test]
    fn zero_levels_rejected() {
        let text = format!("{MINIMAL}[levels]\ncount = 0\n");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(ConfigError::ZeroLevels)));
    }

    #[test]
    fn unknown_weight_echoed() {
        let text = format!("{MINIMAL}[weight]\nname = \"wobbly\"\n");
        let err = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(matches!(&err, ConfigError::UnknownWeight(n) if n == "wobbly"));
        assert!(err.to_string().contains("wobbly"));
    }

    #[test]
    fn schema_and_typos_rejected() {
        let text = MINIMAL.replace("schema_version = 1", "schema_version = 9");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(ConfigError::Schema(9))));
        let text = format!("{MINIMAL}[levels]\ncuont = 3\n");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(ConfigError::Parse(_))));
    }
}
