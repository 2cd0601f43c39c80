//! χ² reduction and the Gaussian log-likelihood
//! `−2 ln L = χ² + Σ ln(2π/w)`.

use std::ops::AddAssign;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::obs::VisibilitySet;
use crate::{Error, Result};

/// How a sequence of real terms is summed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionStrategy {
    Naive,
    #[default]
    Pairwise,
    Compensated,
}

impl FromStr for ReductionStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "naive" => Ok(ReductionStrategy::Naive),
            "pairwise" => Ok(ReductionStrategy::Pairwise),
            "compensated" | "kahan" => Ok(ReductionStrategy::Compensated),
            other => Err(format!(
                "unknown reduction '{other}' (expected naive, pairwise or compensated)"
            )),
        }
    }
}

/// Kahan-Babuška (Neumaier) compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

const PAIRWISE_BLOCK: usize = 32;

fn pairwise(terms: &[f64]) -> f64 {
    if terms.len() <= PAIRWISE_BLOCK {
        terms.iter().fold(0.0, |a, &b| a + b)
    } else {
        let (lo, hi) = terms.split_at(terms.len() / 2);
        pairwise(lo) + pairwise(hi)
    }
}

/// Sum `terms` under `strategy`. Deterministic for a fixed input order.
pub fn reduce_sum(terms: &[f64], strategy: ReductionStrategy) -> Result<f64> {
    if let Some(index) = terms.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(match strategy {
        ReductionStrategy::Naive => terms.iter().fold(0.0, |a, &b| a + b),
        ReductionStrategy::Pairwise => pairwise(terms),
        ReductionStrategy::Compensated => {
            let mut acc = CompensatedSum::new();
            for &x in terms {
                acc.add(x);
            }
            acc.value()
        }
    })
}

/// `Σ w·|V − D|²` over every cell and correlation, with the squared modulus
/// split into real and imaginary parts sharing the correlation's weight.
pub fn chi_squared(model: &VisibilitySet, observed: &VisibilitySet, weights: &[[f64; 4]]) -> Result<f64> {
    if !model.same_shape(observed) || model.values.len() != observed.values.len() {
        return Err(Error::mismatch(
            "observed",
            format!("({}, {}, {})", model.ntime, model.nbl, model.nchan),
            format!("({}, {}, {})", observed.ntime, observed.nbl, observed.nchan),
        ));
    }
    if weights.len() != model.values.len() {
        return Err(Error::mismatch(
            "weights",
            format!("{} cells", model.values.len()),
            format!("{} cells", weights.len()),
        ));
    }
    let terms: Vec<f64> = model
        .values
        .iter()
        .zip(&observed.values)
        .zip(weights)
        .map(|((v, d), w)| (0..4).map(|c| w[c] * (v[c] - d[c]).norm_sqr()).sum())
        .collect();
    reduce_sum(&terms, ReductionStrategy::Compensated)
}

/// The weight-only normalisation `Σ ln(2π/w)`, computed once per weight set.
///
/// Each weight covers two scalar residuals (real and imaginary), so it
/// contributes two terms. Zero weights mark flagged data and are skipped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogNormalization {
    pub value: f64,
    /// Number of scalar residuals included.
    pub count: usize,
}

impl LogNormalization {
    pub fn from_weights<'a>(weights: impl IntoIterator<Item = &'a f64>) -> Result<Self> {
        let two_pi = std::f64::consts::TAU;
        let mut acc = CompensatedSum::new();
        let mut count = 0;
        for (i, &w) in weights.into_iter().enumerate() {
            if w < 0.0 || !w.is_finite() {
                return Err(Error::invalid(format!("weight {w} at index {i} is negative or non-finite")));
            }
            if w > 0.0 {
                acc.add(2.0 * (two_pi / w).ln());
                count += 2;
            }
        }
        Ok(LogNormalization {
            value: acc.value(),
            count,
        })
    }

    pub fn from_correlation_weights(weights: &[[f64; 4]]) -> Result<Self> {
        Self::from_weights(weights.iter().flatten())
    }

    pub fn log_likelihood(&self, chi2: f64) -> Result<f64> {
        if chi2.is_nan() || chi2 < 0.0 {
            return Err(Error::invalid(format!("chi2 must be non-negative, got {chi2}")));
        }
        Ok(-0.5 * (chi2 + self.value))
    }
}

/// `ln L = −½·(χ² + Σ ln(2π/w))` for the given per-correlation weights.
pub fn log_likelihood(chi2: f64, weights: &[[f64; 4]]) -> Result<f64> {
    let norm = LogNormalization::from_correlation_weights(weights)?;
    if norm.count == 0 {
        return Err(Error::invalid("no positive weights"));
    }
    norm.log_likelihood(chi2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Jones;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex;
    use proptest::prelude::*;

    const ALL: [ReductionStrategy; 3] = [
        ReductionStrategy::Naive,
        ReductionStrategy::Pairwise,
        ReductionStrategy::Compensated,
    ];

    #[test]
    fn empty_and_small_sums() {
        for s in ALL {
            assert_eq!(reduce_sum(&[], s).unwrap(), 0.0);
            assert_eq!(reduce_sum(&[1.0, 2.0, 3.0], s).unwrap(), 6.0);
        }
    }

    #[test]
    fn non_finite_names_first_index() {
        let err = reduce_sum(&[1.0, 2.0, f64::NAN, f64::INFINITY], ReductionStrategy::Pairwise).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 2 }));
    }

    #[test]
    fn compensated_alternating_perturbations() {
        // 1e8 ± 1, 10⁶ terms, starting with +1; the exact sum is 1e14.
        let terms: Vec<f64> = (0..1_000_000)
            .map(|i| if i % 2 == 0 { 1e8 + 1.0 } else { 1e8 - 1.0 })
            .collect();
        let exact = 1e14;
        let got = reduce_sum(&terms, ReductionStrategy::Compensated).unwrap();
        assert!((got - exact).abs() <= 1e-10 * exact);
    }

    #[test]
    fn compensated_recovers_lost_low_bits() {
        let terms = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(reduce_sum(&terms, ReductionStrategy::Compensated).unwrap(), 2.0);
        assert_ne!(reduce_sum(&terms, ReductionStrategy::Naive).unwrap(), 2.0);
    }

    fn vis(values: Vec<Jones<f64>>) -> VisibilitySet {
        VisibilitySet {
            ntime: 1,
            nbl: 1,
            nchan: values.len(),
            values,
        }
    }

    #[test]
    fn chi2_of_identical_sets_is_zero() {
        let a = vis(vec![Jones::identity(); 3]);
        assert_eq!(chi_squared(&a, &a, &[[1.0; 4]; 3]).unwrap(), 0.0);
    }

    #[test]
    fn chi2_single_residual() {
        let model = vis(vec![Jones::zero(); 2]);
        let mut observed = model.clone();
        observed.values[1].0[3] = Complex::new(1.0, 0.0);
        let weights = [[2.0; 4]; 2];
        assert_eq!(chi_squared(&model, &observed, &weights).unwrap(), 2.0);
    }

    #[test]
    fn chi2_rejects_mismatch() {
        let a = vis(vec![Jones::zero(); 2]);
        let b = vis(vec![Jones::zero(); 3]);
        assert!(matches!(chi_squared(&a, &b, &[[1.0; 4]; 2]), Err(Error::DimensionMismatch { .. })));
        assert!(chi_squared(&a, &a, &[[1.0; 4]; 3]).is_err());
    }

    #[test]
    fn log_likelihood_examples() {
        let tau = std::f64::consts::TAU;
        assert_abs_diff_eq!(log_likelihood(0.0, &[[tau; 4]; 5]).unwrap(), 0.0);
        assert_abs_diff_eq!(log_likelihood(2.0, &[[tau, 0.0, 0.0, 0.0]]).unwrap(), -1.0);
    }

    #[test]
    fn log_likelihood_counts_two_residuals_per_weight() {
        // w = 1: each scalar residual contributes ln(2π)
        let ll = log_likelihood(0.0, &[[1.0, 0.0, 0.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(ll, -(std::f64::consts::TAU).ln(), epsilon = 1e-15);
    }

    #[test]
    fn log_likelihood_rejects_bad_inputs() {
        assert!(log_likelihood(1.0, &[[-1.0; 4]]).is_err());
        assert!(log_likelihood(-1.0, &[[1.0; 4]]).is_err());
        assert!(log_likelihood(1.0, &[[0.0; 4]]).is_err());
    }

    #[test]
    fn log_likelihood_decreases_with_chi2() {
        let w = [[0.7, 1.3, 2.0, 0.1]; 4];
        let mut last = f64::INFINITY;
        for chi2 in [0.0, 0.5, 1.0, 10.0, 1e3] {
            let ll = log_likelihood(chi2, &w).unwrap();
            assert!(ll < last);
            last = ll;
        }
    }

    fn jones_strategy() -> impl Strategy<Value = Jones<f64>> {
        prop::array::uniform8(-10.0..10.0f64).prop_map(|a| {
            Jones([
                Complex::new(a[0], a[1]),
                Complex::new(a[2], a[3]),
                Complex::new(a[4], a[5]),
                Complex::new(a[6], a[7]),
            ])
        })
    }

    proptest! {
        #[test]
        fn chi2_symmetric_and_linear_in_weights(
            pairs in prop::collection::vec((jones_strategy(), jones_strategy(), prop::array::uniform4(0.0..5.0f64)), 1..20)
        ) {
            let model = vis(pairs.iter().map(|p| p.0).collect());
            let observed = vis(pairs.iter().map(|p| p.1).collect());
            let weights: Vec<[f64; 4]> = pairs.iter().map(|p| p.2).collect();
            let doubled: Vec<[f64; 4]> = weights.iter().map(|w| w.map(|x| 2.0 * x)).collect();
            let a = chi_squared(&model, &observed, &weights).unwrap();
            let b = chi_squared(&observed, &model, &weights).unwrap();
            let c = chi_squared(&model, &observed, &doubled).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
            prop_assert!((c - 2.0 * a).abs() <= 1e-12 * (1.0 + a));
        }

        #[test]
        fn compensated_is_permutation_stable(mut terms in prop::collection::vec(-1e6..1e6f64, 1..500), seed in any::<u64>()) {
            let before = reduce_sum(&terms, ReductionStrategy::Compensated).unwrap();
            let n = terms.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                terms.swap(i, (s >> 33) as usize % (i + 1));
            }
            let after = reduce_sum(&terms, ReductionStrategy::Compensated).unwrap();
            let scale = terms.iter().map(|x| x.abs()).sum::<f64>();
            prop_assert!((before - after).abs() <= 1e-10 * before.abs().max(1e-300) || (before - after).abs() <= 1e-15 * scale);
        }
    }
}
