use thiserror::Error;

use crate::charts::Point;

/// Errors raised by field evaluation, geometry, integrals and dynamics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("point {0:?} lies outside the chart domain")]
    OutOfDomain(Point),
    #[error("non-finite value produced at {0:?}")]
    NonFinite(Point),
    #[error("metric is singular at {point:?} (condition number {condition:.3e})")]
    SingularMetric { point: Point, condition: f64 },
    #[error("surface tangents are linearly dependent at theta={theta}, phi={phi}")]
    DegenerateTangents { theta: f64, phi: f64 },
    #[error("lapse is not positive at {point:?} (N = {value})")]
    NonPositiveLapse { point: Point, value: f64 },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("integration path for the Weyl metric function to {0:?} crosses a rod or strut tube")]
    PathThroughRod(Point),
    #[error(
        "quadrature rule ({n_theta}, {n_phi}) too coarse: doubling changed the value by {delta:.3e} (tolerance {tolerance:.3e})"
    )]
    RuleTooCoarse {
        n_theta: usize,
        n_phi: usize,
        delta: f64,
        tolerance: f64,
    },
    #[error("center of mass is undefined for vanishing total mass")]
    ZeroMass,
    #[error("chart `{0}` is not known to be harmonic for the conformal metric")]
    NonHarmonicChart(String),
    #[error("level {level} is crossed more than once along the ray in direction {direction:?}")]
    NotStarShaped { level: f64, direction: Point },
    #[error("level {level} is not attained along the ray in direction {direction:?}")]
    LevelNotFound { level: f64, direction: Point },
    #[error("constraint projection did not converge (residual {0:.3e})")]
    ConstraintBlowup(f64),
    #[error("trajectory is not time-like at tau = {0}")]
    NotTimelike(f64),
    #[error("ODE integration failed: {0}")]
    Integration(String),
}

pub type Result<T, E = GeoError> = std::result::Result<T, E>;
