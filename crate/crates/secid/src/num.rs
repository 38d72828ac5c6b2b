//! Scalar abstraction for the numeric core.
//!
//! Formulas in [`crate::prob`], [`crate::capacity`], and the lattice
//! arithmetic of [`crate::quantizer`] are generic over [`Real`] so they run
//! unchanged at `f32` or `f64`. Sampling and simulation code pins `f64`.

use num_traits::{Float, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar with the few extras the numeric core needs beyond
/// `num_traits::Float`.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Gauss error function, accurate to double precision.
    fn erf(self) -> Self;

    /// Complementary error function, stable in the far tails.
    fn erfc(self) -> Self;

    /// Converts a finite `f64` constant into this scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    /// ln 2, the conversion factor between bits and nats.
    fn ln_2() -> Self {
        Self::of(std::f64::consts::LN_2)
    }

    /// Normalization tolerance for probability vectors: 1e-12 at `f64`,
    /// scaled up with machine epsilon for coarser scalars.
    fn pmf_tolerance(support: usize) -> Self {
        let scaled = Self::epsilon() * Self::of(64.0) * Self::from_usize(support.max(1)).unwrap();
        Self::of(1e-12).max(scaled)
    }
}

impl Real for f64 {
    fn erf(self) -> f64 {
        libm::erf(self)
    }

    fn erfc(self) -> f64 {
        libm::erfc(self)
    }
}

impl Real for f32 {
    fn erf(self) -> f32 {
        libm::erf(f64::from(self)) as f32
    }

    fn erfc(self) -> f32 {
        libm::erfc(f64::from(self)) as f32
    }
}
