//! Scalar abstraction for the geometric, timing and fidelity math.

use std::fmt;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar used throughout the mapper (`f32` or `f64`).
pub trait Real:
    Float + FromPrimitive + NumAssign + fmt::Debug + fmt::Display + Default + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + NumAssign + fmt::Debug + fmt::Display + Default + 'static
{
}

/// Converts an `f64` constant (config value, tolerance, weight) into `R`.
pub fn real<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("constant not representable in scalar type")
}

/// Converts a lattice count or index into `R`.
pub fn real_of<R: Real>(x: usize) -> R {
    R::from_usize(x).expect("count not representable in scalar type")
}
