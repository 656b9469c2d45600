//! The scalar abstraction shared by every module.
//!
//! All geometry, measure and ordering code is written against [`Scalar`],
//! which is implemented for `f32` and `f64`. The default geometric
//! tolerance is tied to the precision of the type.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Tolerance used for on-sphere, on-hyperplane and rank decisions.
    const DEFAULT_TOL: f64;

    /// Converts an `f64` literal. Never fails for finite input.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const DEFAULT_TOL: f64 = 1e-9;
}

impl Scalar for f32 {
    const DEFAULT_TOL: f64 = 1e-4;
}
