//! Per-element RIME terms: geometric phase, primary beam and the Gaussian
//! source envelope.

use num_complex::Complex;

use super::BeamConfig;
use crate::sky::{GaussianShape, SourceDirection};
use crate::{Error, Real, Result};

/// `π² / (4 ln 2)`: converts FWHM extents to the Gaussian's uv-domain width.
const GAUSS_SCALE: f64 = std::f64::consts::PI * std::f64::consts::PI / (4.0 * std::f64::consts::LN_2);

#[inline]
pub(crate) fn phase_unchecked<T: Real>(uvw: [T; 3], l: T, m: T, n_minus_1: T, lambda: T) -> Complex<T> {
    let phase = T::TAU() / lambda * (uvw[0] * l + uvw[1] * m + uvw[2] * n_minus_1);
    let (s, c) = phase.sin_cos();
    Complex::new(c, s)
}

#[inline]
pub(crate) fn beam_unchecked<T: Real>(dl: T, dm: T, lambda: T, constant: T) -> T {
    let c = (constant * lambda * dl.hypot(dm)).cos();
    c * c * c
}

#[inline]
pub(crate) fn envelope_unchecked<T: Real>(
    emaj: T,
    emin: T,
    sin_pa: T,
    cos_pa: T,
    u: T,
    v: T,
    lambda: T,
) -> T {
    let u1 = u * cos_pa - v * sin_pa;
    let v1 = u * sin_pa + v * cos_pa;
    let a = u1 * emin;
    let b = v1 * emaj;
    (-T::from_f64(GAUSS_SCALE) * (a * a + b * b) / (lambda * lambda)).exp()
}

/// Geometric phase `K = exp(i·2π/λ·(u·l + v·m + w·(n−1)))`.
pub fn phase_term(uvw: [f64; 3], direction: SourceDirection, lambda: f64) -> Result<Complex<f64>> {
    if !direction.is_valid() {
        return Err(Error::invalid(format!(
            "direction (l = {}, m = {}) lies beyond the horizon",
            direction.l, direction.m
        )));
    }
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::invalid(format!("wavelength must be positive, got {lambda}")));
    }
    Ok(phase_unchecked(uvw, direction.l, direction.m, direction.n() - 1.0, lambda))
}

/// Primary beam `E = cos³(C·λ·‖l − Δl‖)`.
pub fn beam_term(
    direction: SourceDirection,
    pointing_error: [f64; 2],
    lambda: f64,
    beam: BeamConfig,
) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::invalid(format!("wavelength must be positive, got {lambda}")));
    }
    Ok(beam_unchecked(
        direction.l - pointing_error[0],
        direction.m - pointing_error[1],
        lambda,
        beam.constant,
    ))
}

/// Visibility-domain envelope of an elliptical Gaussian source on a baseline
/// with coordinates `uvw` (metres): 1 for a point source, decaying with
/// baseline length.
pub fn gaussian_envelope(shape: GaussianShape, uvw: [f64; 3], lambda: f64) -> f64 {
    let (s, c) = shape.pa.sin_cos();
    envelope_unchecked(shape.emaj, shape.emin, s, c, uvw[0], uvw[1], lambda)
}
