//! Hand-rolled numerical kernels shared by every module.
//!
//! Everything here is deterministic: no kernel depends on thread scheduling,
//! so results are bit-reproducible for a fixed input.

pub mod interp;
pub mod ode;
pub mod quadrature;
pub mod roots;
pub mod sequence;

use std::ops::{Add, Mul, Sub};

use crate::geometry::Vec2;

/// Values that can be integrated and interpolated: a real vector space with a
/// norm used for error control.
pub trait Linear:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Linear for f64 {
    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Linear for Vec2 {
    #[inline]
    fn zero() -> Self {
        Vec2::ZERO
    }
    #[inline]
    fn magnitude(self) -> f64 {
        self.norm()
    }
}
