use thiserror::Error;

/// Errors raised by the divergence, geometry and transport routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("1 + alpha x.y = {value} is not positive")]
    NonPositivePairing { value: f64 },

    #[error("alpha-gradient denominator 1 - alpha Dphi.xi = {value} is degenerate")]
    DegenerateDenominator { value: f64 },

    #[error("logarithm argument {argument} is not positive (points too far apart for a local divergence)")]
    LogDomain { argument: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("iterate left the chart domain")]
    IterateLeftDomain,

    #[error("no grid point is feasible")]
    EmptyFeasibleGrid,

    #[error("no feasible source point for target index {index}")]
    NoFeasiblePartner { index: usize },

    #[error("c-gradient at index {index} is not unique ({count} partners)")]
    NonUniqueCGradient { index: usize, count: usize },

    #[error("index {index} has no c-superdifferential partner")]
    MissingCGradient { index: usize },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("Hessian is singular")]
    SingularHessian,

    #[error("residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("one-form is not closed (curl {curl:e})")]
    OpenCurl { curl: f64 },

    #[error("segment is infeasible at t = {t}")]
    SegmentInfeasible { t: f64 },

    #[error("degenerate direction")]
    DegenerateDirection,

    #[error("zero-mass density")]
    ZeroMass,

    #[error("support violation at index {index}")]
    SupportViolation { index: usize },

    #[error("unknown potential '{0}'")]
    UnknownPotential(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for failures of the mathematics (domain, convergence, class
    /// violations) as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::UnknownPotential(_) | Error::InvalidParameter(_) | Error::DimensionMismatch { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
