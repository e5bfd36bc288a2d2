use thiserror::Error;

/// Errors raised while building or querying discrete domains and fields.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("interior is empty at spacing {h}")]
    EmptyInterior { h: f64 },
    #[error("interior has {components} face-connected components")]
    DisconnectedInterior { components: usize },
    #[error("boundary layer has {components} connected components")]
    DisconnectedBoundary { components: usize },
    #[error("collar width {width} is below the minimum of {min}")]
    CollarTooThin { width: usize, min: usize },
    #[error("invalid grid spacing {0}")]
    InvalidSpacing(f64),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("weight sample {value} at cell {cell} violates the lower bound {alpha}")]
    Degenerate { cell: usize, value: f64, alpha: f64 },
    #[error("boundary value missing or non-finite at cell {0}")]
    MissingBoundaryValue(usize),
    #[error("fields live on different grids")]
    DomainMismatch,
}

/// Errors raised by the minimal-cut machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutError {
    #[error("edge capacity cannot be represented exactly (edge {edge}, value {value})")]
    CapacityOverflow { edge: usize, value: f64 },
    #[error("exhaustive search limited to {max} free cells, got {got}")]
    TooLarge { got: usize, max: usize },
    #[error("ball radius {eps} must exceed twice the spacing {h}")]
    BallTooSmall { eps: f64, h: f64 },
    #[error("ball of radius {eps} covers the whole interior")]
    BallCoversDomain { eps: f64 },
    #[error("optimal sets do not form a lattice")]
    LatticeViolation,
    #[error("cell {0} is not a boundary cell")]
    NotBoundaryCell(usize),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Errors raised by the level-set construction.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevelSetError {
    #[error("level count must be at least 1")]
    NoLevels,
    #[error("sets at levels {upper} and {lower} are not nested (cell {cell})")]
    NestednessViolation {
        lower: usize,
        upper: usize,
        cell: usize,
    },
    #[error(transparent)]
    Cut(#[from] CutError),
}

/// Errors raised by the graph-patch solver for the weighted minimal surface equation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MseError {
    #[error("Newton iteration stalled with residual {residual:e} after {iterations} steps")]
    NonConvergence { residual: f64, iterations: usize },
    #[error("Jacobian pivot {pivot:e} at row {row} is numerically zero")]
    SingularJacobian { row: usize, pivot: f64 },
    #[error("test function is nonzero on boundary node {0}")]
    TestFunctionNotCompactlySupported(usize),
    #[error("comparison hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("weight {value} at node {node} is below the bound {alpha}")]
    Degenerate { node: usize, value: f64, alpha: f64 },
    #[error("patch needs at least one interior node")]
    EmptyPatch,
}

/// Errors raised by weighted-area quadrature on surfaces.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("element {0} has zero size")]
    DegenerateElement(usize),
    #[error("exponent must be nonzero")]
    ZeroExponent,
}

/// Errors raised while reading or writing artifacts.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },
    #[error("{path}: {source}")]
    Image {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}
