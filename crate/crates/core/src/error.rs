use thiserror::Error;

/// Failures raised by the numerical routines. Numeric payloads are reported as `f64`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {index} has non-positive real part {re}")]
    NotInHalfPlane { index: usize, re: f64 },
    #[error("points {first} and {second} coincide")]
    DuplicatePoint { first: usize, second: usize },
    #[error("tail bound {bound:e} for index {index} exceeds tolerance {tolerance:e}")]
    TailBoundExceeded { index: usize, bound: f64, tolerance: f64 },
    #[error("quadrature did not reach {target:e} within {panels} panels (estimate {estimate:e})")]
    QuadratureDiverged { panels: usize, estimate: f64, target: f64 },
    #[error("integral diverges: {0}")]
    DivergentIntegral(String),
    #[error("factor {index} is ill-conditioned (condition number {condition:e})")]
    IllConditionedFactor { index: usize, condition: f64 },
    #[error("tangential matrix {index} is zero")]
    ZeroTangentialMatrix { index: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("method {method} cannot be used with exponent {alpha}")]
    MethodMismatch { alpha: f64, method: &'static str },
    #[error("tangential matrix {index} violates the required structure (defect {defect:e})")]
    StructureViolation { index: usize, defect: f64 },
    #[error("Gram matrix is degenerate (condition number {condition:e})")]
    DegenerateGram { condition: f64 },
    #[error("no generators span the complementary subspace")]
    EmptySpan,
    #[error("weight failed the A2 test (constant {constant:e}, bound {bound:e})")]
    WeightNotA2 { constant: f64, bound: f64 },
    #[error("weight failed the Ap test (constant {constant:e})")]
    WeightNotAp { constant: f64 },
    #[error("weight is singular: {0}")]
    SingularWeight(String),
    #[error("limit at interpolation point {index} is unstable (step disagreement {disagreement:e})")]
    SingularityEvaluation { index: usize, disagreement: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Variant name, stable across releases and used in machine readable reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotInHalfPlane { .. } => "NotInHalfPlane",
            Error::DuplicatePoint { .. } => "DuplicatePoint",
            Error::TailBoundExceeded { .. } => "TailBoundExceeded",
            Error::QuadratureDiverged { .. } => "QuadratureDiverged",
            Error::DivergentIntegral(_) => "DivergentIntegral",
            Error::IllConditionedFactor { .. } => "IllConditionedFactor",
            Error::ZeroTangentialMatrix { .. } => "ZeroTangentialMatrix",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::MethodMismatch { .. } => "MethodMismatch",
            Error::StructureViolation { .. } => "StructureViolation",
            Error::DegenerateGram { .. } => "DegenerateGram",
            Error::EmptySpan => "EmptySpan",
            Error::WeightNotA2 { .. } => "WeightNotA2",
            Error::WeightNotAp { .. } => "WeightNotAp",
            Error::SingularWeight(_) => "SingularWeight",
            Error::SingularityEvaluation { .. } => "SingularityEvaluation",
            Error::InvalidParameter(_) => "InvalidParameter",
        }
    }
}
