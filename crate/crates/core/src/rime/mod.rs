//! RIME evaluation.
//!
//! Expensive transcendental terms are evaluated once per antenna in
//! [`ek_stage`]: `A[t,p,s,λ] = E·K`. [`bsum_stage`] then forms, for every
//! baseline `(p, q)`, the sum over sources of `A_p · B · conj(A_q)` (times
//! the envelope for Gaussian sources) and the weighted squared residual
//! against the observed data. Both stages parallelise over their output
//! cells with the source loop running sequentially inside each cell, so
//! results do not depend on the number of worker threads.
//!
//! [`naive_oracle`] evaluates the same quantities per `(t, pq, s, λ)`
//! without staging and is used as the reference in tests.

mod oracle;
mod stages;
mod terms;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::obs::VisibilitySet;

pub use oracle::{naive_oracle, naive_oracle_in};
pub use stages::{
    bsum_stage, ek_stage, evaluate, predict_visibilities, predict_visibilities_in,
};
pub use terms::{beam_term, gaussian_envelope, phase_term};

pub(crate) use stages::check_inputs;
pub(crate) use terms::{beam_unchecked, envelope_unchecked, phase_unchecked};

/// Constant `C` of the `cos³(C·λ·r)` primary beam. The product `C·λ` must be
/// in units of inverse direction cosine, so `C` has to be chosen to match the
/// wavelength unit in use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamConfig {
    pub constant: f64,
}

impl BeamConfig {
    pub const DEFAULT_CONSTANT: f64 = 65e9;

    pub fn new(constant: f64) -> Self {
        BeamConfig { constant }
    }
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig::new(Self::DEFAULT_CONSTANT)
    }
}

/// Per-antenna `E·K` products over `(ntime, na, nsrc, nchan)`, with point
/// sources first along the source axis.
#[derive(Clone, Debug, PartialEq)]
pub struct AntennaTermArray<T> {
    pub ntime: usize,
    pub na: usize,
    pub nsrc: usize,
    pub nchan: usize,
    pub values: Vec<Complex<T>>,
}

impl<T: Copy> AntennaTermArray<T> {
    #[inline]
    pub fn index(&self, t: usize, p: usize, s: usize, ch: usize) -> usize {
        ((t * self.na + p) * self.nsrc + s) * self.nchan + ch
    }

    pub fn get(&self, t: usize, p: usize, s: usize, ch: usize) -> Complex<T> {
        self.values[self.index(t, p, s, ch)]
    }

    pub fn shape(&self) -> [usize; 4] {
        [self.ntime, self.na, self.nsrc, self.nchan]
    }
}

/// Output of the per-baseline stage.
#[derive(Clone, Debug, PartialEq)]
pub struct BsumOutput {
    /// Model visibilities, present only when requested.
    pub visibilities: Option<VisibilitySet>,
    /// Weighted squared residual per `(t, bl, ch)`, summed over the four
    /// correlations and both real and imaginary parts.
    pub chi2_terms: Vec<f64>,
}
