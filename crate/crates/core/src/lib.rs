//! Continuous minimizers of weighted least gradient problems on regular grids.
//!
//! The solution of `min ∫_Ω a(x)|Du|` with Dirichlet data `g` is assembled
//! from its superlevel sets: for each level `t`, the volume-maximal set of
//! minimal weighted perimeter that agrees with `{G >= t}` outside the domain
//! is found by an exact minimal cut, and `u(x)` is the largest level whose
//! set contains `x`. The crate also ships independent checks of every
//! structural property the construction relies on.

// Index loops mirror the stencil formulas; `!(x > 0.0)` also rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod config;
pub mod conformal;
pub mod domain;
pub mod error;
pub mod experiment;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod levelset;
pub mod maxflow;
pub mod metric;
pub mod mse;
pub mod report;
pub mod setmin;
pub mod stencil;
pub mod tv;
pub mod weight;

pub use boundary::{extend_boundary_data, BoundaryData, BoundaryValues};
pub use domain::{build_domain, DiscreteDomain, RasterMask, Shape};
pub use field::{DiscreteVectorField, IndicatorSet, ScalarField};
pub use grid::Grid;
pub use metric::CutMetric;
pub use setmin::{solve_star, CutProblem, MinimizerPair, Pin};
pub use stencil::{CutStencil, Neighborhood};
pub use weight::{WeightField, WeightFn};
