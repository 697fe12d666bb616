//! Tangential interpolation in vector-valued Hardy spaces on the right half-plane.
//!
//! The crate is generic over the real scalar through [`Real`]; the `*64` aliases at the
//! crate root fix the scalar to `f64`.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carleson;
pub mod control;
pub mod error;
pub mod hardy;
pub mod interpolation;
pub mod linalg;
pub mod potapov;
pub mod quadrature;
pub mod scalar;
pub mod weights;

pub use error::{Error, Result};
pub use scalar::{CMatrix, CVector, Cx, Real};

pub type Cx64 = Cx<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type CVector64 = CVector<f64>;
pub type PointSequence64 = hardy::PointSequence<f64>;
pub type TangentialData64 = potapov::TangentialData<f64>;
pub type PotapovProduct64 = potapov::PotapovProduct<f64>;
pub type DiscreteMeasure64 = carleson::DiscreteMeasure<f64>;
pub type CarlesonReport64 = carleson::CarlesonReport<f64>;
pub type AxisQuadrature64 = quadrature::AxisQuadrature<f64>;
pub type ScalarWeight64 = weights::ScalarWeight<f64>;
pub type MatrixWeight64 = weights::MatrixWeight<f64>;
pub type InterpolationProblem64 = interpolation::InterpolationProblem<f64>;
pub type MEstimate64 = interpolation::MEstimate<f64>;
pub type RouteOptions64 = interpolation::RouteOptions<f64>;
pub type SemigroupSystem64 = control::SemigroupSystem<f64>;
pub type ControlVerdict64 = control::ControlVerdict<f64>;
pub type ControlOptions64 = control::ControlOptions<f64>;
