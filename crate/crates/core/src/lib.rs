//! shapedyn: elastic shape dynamics for planar contour sequences.

pub mod curve;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod shape;

pub use error::{Error, Result};
pub use scalar::Scalar;

// Concrete f64 aliases for the main types.
pub type Contour64 = curve::Contour<f64>;
pub type Srvf64 = curve::Srvf<f64>;
pub type PreShape64 = shape::PreShape<f64>;
pub type TangentVector64 = shape::TangentVector<f64>;
pub type ShapeSequence64 = dynamics::ShapeSequence<f64>;
pub type TsrvfSequence64 = dynamics::TsrvfSequence<f64>;
pub type PcaBasis64 = dynamics::PcaBasis<f64>;
pub type EuclideanSeries64 = dynamics::EuclideanSeries<f64>;
