//! Vector-valued Choquet representations on finite compact sets.
//!
//! A compact set `K` is a finite list of labels and the target space `E` is a
//! finite-dimensional normed space whose unit ball is either a symmetric
//! polytope or Euclidean. Measures on `K` with values in the dual `E*` are
//! represented by positive scalar measures on `K x B_{E*}`; this crate
//! computes those representations and decides the orders between them.
//!
//! Everything is generic over the scalar type (`f32` or `f64`); the aliases
//! below fix it to `f64`, and a few `f32` ones are provided for lighter use.

pub mod error;
pub mod geometry;
pub mod linalg;
pub mod lp;
pub mod measures;
pub mod ordering;
pub mod random;
pub mod scalar;
pub mod suites;
pub mod transfer;

pub use error::{Error, Result};
pub use geometry::{BallSpec, Space as GenericSpace};
pub use scalar::Scalar;

pub type Space = geometry::Space<f64>;
pub type VectorMeasure = measures::VectorMeasure<f64>;
pub type AtomicMeasure = measures::AtomicMeasure<f64>;
pub type ProbabilityAtoms = measures::ProbabilityAtoms<f64>;
pub type DFunction = transfer::DFunction<f64>;
pub type ConvexPL = ordering::ConvexPL<f64>;
pub type DilationWitness = ordering::DilationWitness<f64>;
pub type LinearProgram = lp::LinearProgram<f64>;

pub type Space32 = geometry::Space<f32>;
pub type VectorMeasure32 = measures::VectorMeasure<f32>;
pub type AtomicMeasure32 = measures::AtomicMeasure<f32>;
pub type ProbabilityAtoms32 = measures::ProbabilityAtoms<f32>;
