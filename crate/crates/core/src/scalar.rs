use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use faer::c64;

/// Field element of a tensor network: `f64` for real Hamiltonians, `c64` otherwise.
pub trait Scalar:
    faer::traits::ComplexField<Real = f64>
    + Copy
    + Default
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
{
    const IS_COMPLEX: bool;

    fn from_real(x: f64) -> Self;
    /// Drops the imaginary part when `Self` is real.
    fn from_c64(z: c64) -> Self;
    fn to_c64(self) -> c64;
    fn conjugate(self) -> Self;
    fn abs2(self) -> f64;
    fn re(self) -> f64;
    fn im(self) -> f64;

    fn zero() -> Self {
        Self::from_real(0.0)
    }
    fn one() -> Self {
        Self::from_real(1.0)
    }
    fn modulus(self) -> f64 {
        self.abs2().sqrt()
    }
    fn scale(self, a: f64) -> Self {
        self * Self::from_real(a)
    }
    fn finite(self) -> bool {
        self.re().is_finite() && self.im().is_finite()
    }
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    fn from_real(x: f64) -> Self {
        x
    }
    fn from_c64(z: c64) -> Self {
        z.re
    }
    fn to_c64(self) -> c64 {
        c64::new(self, 0.0)
    }
    fn conjugate(self) -> Self {
        self
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
}

impl Scalar for c64 {
    const IS_COMPLEX: bool = true;

    fn from_real(x: f64) -> Self {
        c64::new(x, 0.0)
    }
    fn from_c64(z: c64) -> Self {
        z
    }
    fn to_c64(self) -> c64 {
        self
    }
    fn conjugate(self) -> Self {
        c64::new(self.re, -self.im)
    }
    fn abs2(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
}
