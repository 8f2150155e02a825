//! Crate-wide error type. Degenerate geometry is a hard error everywhere:
//! no check downstream is allowed to run on NaN-poisoned data.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("point outside chart domain: |base|^2 = {norm_sq:.6} >= 4 in the hyperbolic chart")]
    OutsideChartDomain { norm_sq: f64 },
    #[error("invalid sectional curvature {0}: must be -1, 0 or 1")]
    InvalidCurvature(f64),
    #[error("base dimension {0} out of range: need 2 <= m <= 4")]
    InvalidDimension(usize),
    #[error("angle function out of range: |theta| = {0:.6} exceeds 1")]
    ThetaOutOfRange(f64),
    #[error("immersion rank deficient at {at:?}: induced metric determinant {det:.3e}")]
    RankDeficient { at: Vec<f64>, det: f64 },
    #[error("unit normal could not be normalized at {at:?}")]
    NormalizationFailure { at: Vec<f64> },
    #[error("stencil at index {index:?} needs inset {inset} but reaches outside the grid")]
    StencilOutOfRange { index: Vec<usize>, inset: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("profile parameter {s:.6} outside [{lo:.6}, {hi:.6}]")]
    ProfileOutOfDomain { s: f64, lo: f64, hi: f64 },
    #[error("cotangent-type singularity at s = {s:.6}")]
    ProfileSingularity { s: f64 },
    #[error("profile integration blew up at s = {s:.6} (|h'| = {value:.3e})")]
    OdeBlowUp { s: f64, value: f64 },
    #[error("surface is not CMC: max |grad H| = {max_grad_h:.3e} exceeds {limit:.1e}")]
    NotCmc { max_grad_h: f64, limit: f64 },
    #[error("candidate undefined: 1 + C sec^2 s = {value:.3e} at s = {s:.6}")]
    CandidateUndefined { s: f64, value: f64 },
    #[error("conversion pole: base point antipodal to the projection center")]
    ConversionPole,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite field value at index {0:?}")]
    NonFiniteField(Vec<usize>),
}

pub type Result<T> = std::result::Result<T, GeomError>;
