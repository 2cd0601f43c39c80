//! 2×2 complex matrices over the four polarisation correlations.

use std::ops::{Add, AddAssign, Index, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::Real;

/// A 2×2 complex matrix stored row-major: `[xx, xy, yx, yy]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jones<T>(pub [Complex<T>; 4]);

impl<T: Real> Default for Jones<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Real> Jones<T> {
    pub fn zero() -> Self {
        Jones([Complex::zero(); 4])
    }

    pub fn identity() -> Self {
        let one = Complex::new(T::one(), T::zero());
        let zero = Complex::zero();
        Jones([one, zero, zero, one])
    }

    /// A scalar multiple of the identity.
    pub fn diagonal(value: Complex<T>) -> Self {
        let zero = Complex::zero();
        Jones([value, zero, zero, value])
    }

    /// Conjugate transpose.
    pub fn h(&self) -> Self {
        let [a, b, c, d] = self.0;
        Jones([a.conj(), c.conj(), b.conj(), d.conj()])
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Jones(self.0.map(|e| e * factor))
    }

    pub fn scale_real(&self, factor: T) -> Self {
        Jones(self.0.map(|e| e * factor))
    }

    pub fn cast<U: Real>(&self) -> Jones<U> {
        Jones(
            self.0
                .map(|e| Complex::new(U::from_f64(e.re.to_f64()), U::from_f64(e.im.to_f64()))),
        )
    }

    /// Largest element modulus.
    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, e| acc.max(e.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|e| e.re.is_finite() && e.im.is_finite())
    }
}

impl<T> Index<usize> for Jones<T> {
    type Output = Complex<T>;

    fn index(&self, index: usize) -> &Complex<T> {
        &self.0[index]
    }
}

impl<T: Real> Add for Jones<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Jones(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl<T: Real> AddAssign for Jones<T> {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a = *a + b;
        }
    }
}

impl<T: Real> Sub for Jones<T> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Jones(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl<T: Real> Mul for Jones<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = rhs.0;
        Jones([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }
}
