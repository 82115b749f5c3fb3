//! Design and verification toolkit for broadband composite polarization
//! retarders: Jones-matrix products of rotated wave plates, exact
//! higher-order derivatives of the composite matrix, derivative-nullification
//! design solving, and fidelity/bandwidth analysis.

pub mod analysis;
pub mod designer;
pub mod jets;
pub mod jones;
pub mod scalar;
pub mod sequences;
pub mod table;

pub use scalar::Scalar;

/// Concrete `f64` aliases; the generic types live in the individual modules.
pub type Mat2 = jones::ComplexMat2<f64>;
pub type Angle64 = jones::Angle<f64>;
pub type Phase64 = jones::PhaseShift<f64>;
pub type Plate64 = sequences::PlateSpec<f64>;
pub type Sequence64 = sequences::SequenceSpec<f64>;
pub type Jet64 = jets::JetSeries<f64>;

/// `f32` aliases for reduced-precision work.
pub type Mat2F32 = jones::ComplexMat2<f32>;
pub type Angle32 = jones::Angle<f32>;
pub type Phase32 = jones::PhaseShift<f32>;
pub type Sequence32 = sequences::SequenceSpec<f32>;
