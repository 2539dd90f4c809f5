//! Scalar abstraction for the numeric kernels.
//!
//! Everything geometric is written against [`Real`] so the same code runs in
//! `f32` or `f64`. Constants enter through [`Real::of`], which keeps the call
//! sites readable (`R::of(2.0) * R::PI()`).

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lift an `f64` constant into the scalar type.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable in scalar type")
    }

    /// Lift a `usize` into the scalar type.
    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable in scalar type")
    }

    /// Lower to `f64`; used by the exact predicates and for I/O.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Neumaier compensated accumulator.
///
/// Long Monte Carlo and shoelace sums must not lose digits to cancellation;
/// the compensation keeps the error at one ulp of the true sum independent of
/// the number of terms.
#[derive(Clone, Copy, Debug, Default)]
pub struct Accumulator<R: Real> {
    sum: R,
    comp: R,
}

impl<R: Real> Accumulator<R> {
    pub fn new() -> Self {
        Self {
            sum: R::zero(),
            comp: R::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: R) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> R {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator.
pub fn sum<R: Real, I: IntoIterator<Item = R>>(iter: I) -> R {
    let mut acc = Accumulator::new();
    for x in iter {
        acc.add(x);
    }
    acc.value()
}
