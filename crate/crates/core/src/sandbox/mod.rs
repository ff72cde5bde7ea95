//! Finite-dimensional checks: diagonal models, executed pairing plans, and
//! matrix versions of the constructive steps.

mod constructions;
mod linalg;
mod model;

use num_complex::Complex64;
use thiserror::Error;

pub use constructions::{
    analytic_calculus_bound, projection_conjugator, triangular_similarity, AnalyticBound, Conjugation, Polygon,
    Similarity, STRUCTURE_TOL,
};
pub use linalg::DenseMatrix;
pub use model::{
    execute_plan, lower_bound_check, realize_spectrum, semicontinuity_probe, Execution, NormalMatrixModel, ProbeResult,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SandboxError {
    #[error("empty spectrum")]
    Empty,
    #[error("eigenvalue {0} listed twice")]
    DuplicateEigenvalue(Complex64),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("matrix is singular")]
    Singular,
    #[error("invalid plan: {}", .0.join("; "))]
    InvalidPlan(Vec<String>),
    #[error("achieved norm {achieved} differs from plan cost {cost}")]
    AchievedMismatch { achieved: f64, cost: f64 },
    #[error("matrix is not unitary (defect {0})")]
    NotUnitary(f64),
    #[error("{0} is not an orthogonal projection")]
    NotProjection(&'static str),
    #[error("{0} is not normal")]
    NotNormal(&'static str),
    #[error("gap hypothesis violated: ‖Q − VPV⁻¹‖ = {0} ≥ 1/2")]
    GapTooLarge(f64),
    #[error("distinct scalars required: {0} repeats")]
    RepeatedScalar(Complex64),
    #[error("contour passes through eigenvalue {0}")]
    ContourHitsSpectrum(Complex64),
    #[error("bad contour: {0}")]
    BadContour(String),
}
