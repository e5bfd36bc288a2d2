//! Positive weight fields `a(x)` sampled at cells, with an optional analytic
//! form evaluated at edge midpoints.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::domain::{DiscreteDomain, Shape};
use crate::error::DomainError;

/// Analytic weight functions known to the library.
#[derive(Clone)]
pub enum WeightFn {
    Constant(f64),
    /// `base + coeff * |x - center|^2`.
    Radial {
        base: f64,
        coeff: f64,
        center: [f64; 3],
    },
    /// `base + slope * dist(x, boundary)` for shapes with a closed-form distance.
    InwardDistance { base: f64, slope: f64, shape: Shape },
    Custom(Arc<dyn Fn([f64; 3]) -> f64 + Send + Sync>),
}

impl fmt::Debug for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFn::Constant(c) => write!(f, "Constant({c})"),
            WeightFn::Radial { base, coeff, .. } => write!(f, "Radial({base}, {coeff})"),
            WeightFn::InwardDistance { base, slope, .. } => {
                write!(f, "InwardDistance({base}, {slope})")
            }
            WeightFn::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl WeightFn {
    pub fn eval(&self, x: [f64; 3]) -> f64 {
        match self {
            WeightFn::Constant(c) => *c,
            WeightFn::Radial {
                base,
                coeff,
                center,
            } => {
                let r2: f64 = (0..3).map(|a| (x[a] - center[a]).powi(2)).sum();
                base + coeff * r2
            }
            WeightFn::InwardDistance { base, slope, shape } => {
                base + slope * shape.boundary_distance(x).unwrap_or(0.0)
            }
            WeightFn::Custom(f) => f(x),
        }
    }
}

/// Weight samples on every cell of the box, with certified lower bound `alpha`.
#[derive(Debug, Clone)]
pub struct WeightField {
    cells: Vec<f64>,
    analytic: Option<WeightFn>,
    alpha: f64,
}

impl WeightField {
    pub fn constant(dom: &DiscreteDomain, c: f64) -> Result<Self, DomainError> {
        Self::analytic(dom, WeightFn::Constant(c))
    }

    /// Samples `f` at cell centers; edge weights later use `f` at midpoints.
    pub fn analytic(dom: &DiscreteDomain, f: WeightFn) -> Result<Self, DomainError> {
        let g = dom.grid();
        let cells: Vec<f64> = (0..g.len()).map(|c| f.eval(g.center(c))).collect();
        Self::certify(cells, Some(f))
    }

    /// Cell samples only; edge weights are averages of the two endpoint samples.
    pub fn from_samples(cells: Vec<f64>) -> Result<Self, DomainError> {
        Self::certify(cells, None)
    }

    /// Independent uniform samples in `[lo, hi]` per cell.
    pub fn random_uniform<R: Rng>(
        dom: &DiscreteDomain,
        lo: f64,
        hi: f64,
        rng: &mut R,
    ) -> Result<Self, DomainError> {
        let cells = (0..dom.len()).map(|_| rng.gen_range(lo..=hi)).collect();
        Self::from_samples(cells)
    }

    fn certify(cells: Vec<f64>, analytic: Option<WeightFn>) -> Result<Self, DomainError> {
        let mut alpha = f64::INFINITY;
        for (c, &v) in cells.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(DomainError::Degenerate {
                    cell: c,
                    value: v,
                    alpha: 0.0,
                });
            }
            alpha = alpha.min(v);
        }
        Ok(Self {
            cells,
            analytic,
            alpha,
        })
    }

    /// Tightens the certified lower bound; fails if any sample lies below it.
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self, DomainError> {
        if let Some((c, &v)) = self
            .cells
            .iter()
            .enumerate()
            .find(|(_, &v)| v < alpha || alpha <= 0.0)
        {
            return Err(DomainError::Degenerate {
                cell: c,
                value: v,
                alpha,
            });
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn cell(&self, c: usize) -> f64 {
        self.cells[c]
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn analytic_fn(&self) -> Option<&WeightFn> {
        self.analytic.as_ref()
    }

    /// Weight attached to the edge between cells `p` and `q` with midpoint `mid`.
    pub fn edge(&self, p: usize, q: usize, mid: [f64; 3]) -> f64 {
        match &self.analytic {
            Some(f) => f.eval(mid),
            None => 0.5 * (self.cells[p] + self.cells[q]),
        }
    }

    /// Pointwise scaled copy, used for weight-monotonicity checks.
    pub fn scaled(&self, s: f64) -> Result<Self, DomainError> {
        Self::from_samples(self.cells.iter().map(|v| v * s).collect())
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}
