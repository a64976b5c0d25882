//! Scalar abstraction shared by every numerical module.
//!
//! All state and operator arithmetic is written against [`Real`], with
//! implementations for `f32` and `f64`. Complex amplitudes are
//! `num_complex::Complex<T>`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar used by the simulation kernels.
pub trait Real:
    'static
    + Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
{
    /// Converts an `f64` literal. Values outside the target range saturate
    /// to infinity the same way an `as` cast would.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(|| if x > 0.0 { Self::infinity() } else { Self::neg_infinity() })
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::lit(n as f64)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// A tolerance no tighter than a small multiple of machine epsilon.
    ///
    /// Tolerances throughout the crate are quoted for `f64`; in `f32` they
    /// widen to what the format can actually resolve.
    #[inline]
    fn tol(x: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(64.0);
        let t = Self::lit(x);
        if t > floor {
            t
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex amplitude over a [`Real`] scalar.
pub type Cplx<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T) -> Cplx<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub(crate) fn cis<T: Real>(phase: T) -> Cplx<T> {
    Complex::new(phase.cos(), phase.sin())
}
