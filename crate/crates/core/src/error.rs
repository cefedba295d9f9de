use alloc::string::String;

use crate::geom::Point2;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("mesh needs at least one subdivision per axis")]
    EmptyMesh,
    #[error("point ({}, {}) lies outside the domain", .0.x, .0.y)]
    OutsideDomain(Point2),
    #[error("source position ({}, {}) lies outside the source domain", .0.x, .0.y)]
    OutsideSourceDomain(Point2),
    #[error("measurement point {index} at ({}, {}) violates the measurement-domain condition: {reason}", .point.x, .point.y)]
    MeasurementDomain {
        index: usize,
        point: Point2,
        reason: String,
    },
    #[error("zero pivot in column {column}: the Helmholtz system is singular for this mesh and parameter set (resonance)")]
    Singular { column: usize },
    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("particle weights collapsed at temper step {step}: {reason}")]
    WeightCollapse { step: usize, reason: String },
    #[error("conditioning set is empty")]
    EmptyConditioning,
    #[error("rate fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("rate fit needs positive abscissae and errors (offending index {0})")]
    NonPositive(usize),
}
