use thiserror::Error;

/// Failure modes of the geometric and transport routines.
///
/// Check campaigns never surface these for individual samples; they are
/// recorded as skipped or inconclusive entries in the report instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tangent vector of norm {norm} reaches the cut locus (limit pi)")]
    CutLocus { norm: f64 },
    #[error("tangent vector is not based at the given point")]
    BaseMismatch,
    #[error("points are antipodal within {margin} rad; logarithm undefined")]
    Antipodal { margin: f64 },
    #[error("point is not on the manifold: {0}")]
    NotOnManifold(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("pair lies in the singular set of the cost (distance {distance}, exclusion radius {radius})")]
    SingularPair { distance: f64, radius: f64 },
    #[error("derivative order not supported: {0}")]
    UnsupportedOrder(String),
    #[error("Newton iteration failed after {iterations} iterations (residual {residual})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("target lies outside the working domain")]
    OutsideDomain,
    #[error("mixed Hessian is singular (A2 failure)")]
    SingularJacobian,
    #[error("c-segment leaves the domain at theta = {theta}")]
    SegmentLeavesDomain { theta: f64 },
    #[error("gradient of the front function vanishes")]
    VanishingGradient,
    #[error("front trajectory left the domain at t = {t}")]
    TrajectoryLeftDomain { t: f64 },
    #[error("front sample is unreachable from q_theta")]
    Unreachable,
    #[error("invalid cost specification: {0}")]
    InvalidCost(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
