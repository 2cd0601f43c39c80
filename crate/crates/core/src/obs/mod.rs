//! Observation configuration: the telescope arrays and observed data the
//! RIME is evaluated against, plus baseline enumeration.
//!
//! Every per-baseline array is stored with time slowest and channel
//! fastest: flat index `(t * nbl + bl) * nchan + ch`.

mod io;
mod synth;

use std::ops::Range;

use crate::rime::BeamConfig;
use crate::{Error, Jones, Result};

pub use io::{load_observation, save_observation, Manifest, ManifestArray, MANIFEST_NAME};
pub use synth::{simulate_observed, synthesize_observation, ArrayLayout};

/// Model or observed visibilities over `(ntime, nbl, nchan)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VisibilitySet {
    pub ntime: usize,
    pub nbl: usize,
    pub nchan: usize,
    pub values: Vec<Jones<f64>>,
}

impl VisibilitySet {
    pub fn zeros(ntime: usize, nbl: usize, nchan: usize) -> Self {
        VisibilitySet {
            ntime,
            nbl,
            nchan,
            values: vec![Jones::zero(); ntime * nbl * nchan],
        }
    }

    #[inline]
    pub fn index(&self, t: usize, bl: usize, ch: usize) -> usize {
        (t * self.nbl + bl) * self.nchan + ch
    }

    pub fn get(&self, t: usize, bl: usize, ch: usize) -> &Jones<f64> {
        &self.values[self.index(t, bl, ch)]
    }

    pub fn same_shape(&self, other: &VisibilitySet) -> bool {
        self.ntime == other.ntime && self.nbl == other.nbl && self.nchan == other.nchan
    }

    pub fn time_slice(&self, range: Range<usize>) -> VisibilitySet {
        let row = self.nbl * self.nchan;
        VisibilitySet {
            ntime: range.len(),
            nbl: self.nbl,
            nchan: self.nchan,
            values: self.values[range.start * row..range.end * row].to_vec(),
        }
    }
}

/// Number of cross-correlation baselines for `na` antennas.
pub fn baseline_count(na: usize) -> usize {
    na * na.saturating_sub(1) / 2
}

/// All antenna pairs `(p, q)` with `p < q`, in lexicographic order.
pub fn baseline_pairs(na: usize) -> Result<Vec<[usize; 2]>> {
    if na < 2 {
        return Err(Error::invalid(format!(
            "at least 2 antennas are needed to form a baseline, got {na}"
        )));
    }
    Ok((0..na)
        .flat_map(|p| (p + 1..na).map(move |q| [p, q]))
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservationConfig {
    pub ntime: usize,
    pub na: usize,
    pub nbl: usize,
    pub nchan: usize,
    /// Per-antenna uvw in metres, `(ntime, na)`.
    pub uvw: Vec<[f64; 3]>,
    /// `(ntime, nbl)`.
    pub antenna_pairs: Vec<[usize; 2]>,
    /// Channel wavelengths in metres.
    pub wavelengths: Vec<f64>,
    /// Per-antenna pointing offsets in direction cosines, `(ntime, na)`.
    pub pointing_errors: Vec<[f64; 2]>,
    /// One weight per correlation, `(ntime, nbl, nchan)`.
    pub weights: Vec<[f64; 4]>,
    pub observed: VisibilitySet,
    pub beam: BeamConfig,
}

impl ObservationConfig {
    /// A configuration with every cross-correlation baseline at every
    /// timestep, zero pointing errors, unit weights and zero observed data.
    pub fn from_uvw(
        ntime: usize,
        na: usize,
        uvw: Vec<[f64; 3]>,
        wavelengths: Vec<f64>,
        beam: BeamConfig,
    ) -> Result<Self> {
        let pairs = baseline_pairs(na)?;
        let nbl = pairs.len();
        let nchan = wavelengths.len();
        let config = ObservationConfig {
            ntime,
            na,
            nbl,
            nchan,
            uvw,
            antenna_pairs: pairs.repeat(ntime),
            wavelengths,
            pointing_errors: vec![[0.0; 2]; ntime * na],
            weights: vec![[1.0; 4]; ntime * nbl * nchan],
            observed: VisibilitySet::zeros(ntime, nbl, nchan),
            beam,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn nvis(&self) -> usize {
        self.ntime * self.nbl * self.nchan
    }

    #[inline]
    pub fn vis_index(&self, t: usize, bl: usize, ch: usize) -> usize {
        (t * self.nbl + bl) * self.nchan + ch
    }

    /// Baseline uvw `u_p - u_q` for baseline `bl` at time `t`.
    pub fn baseline_uvw(&self, t: usize, bl: usize) -> [f64; 3] {
        let [p, q] = self.antenna_pairs[t * self.nbl + bl];
        let up = self.uvw[t * self.na + p];
        let uq = self.uvw[t * self.na + q];
        [up[0] - uq[0], up[1] - uq[1], up[2] - uq[2]]
    }

    /// Check array lengths and value invariants, naming the offending array.
    pub fn validate(&self) -> Result<()> {
        let check_len = |name: &str, len: usize, expected: usize| {
            if len == expected {
                Ok(())
            } else {
                Err(Error::mismatch(name, format!("{expected} elements"), format!("{len} elements")))
            }
        };
        if self.ntime == 0 || self.na < 2 || self.nbl == 0 || self.nchan == 0 {
            return Err(Error::validation(
                "dims",
                format!(
                    "need ntime >= 1, na >= 2, nbl >= 1, nchan >= 1 (got {}, {}, {}, {})",
                    self.ntime, self.na, self.nbl, self.nchan
                ),
            ));
        }
        check_len("uvw", self.uvw.len(), self.ntime * self.na)?;
        check_len("antenna_pairs", self.antenna_pairs.len(), self.ntime * self.nbl)?;
        check_len("wavelength", self.wavelengths.len(), self.nchan)?;
        check_len("pointing_errors", self.pointing_errors.len(), self.ntime * self.na)?;
        check_len("weights", self.weights.len(), self.nvis())?;
        check_len("observed", self.observed.values.len(), self.nvis())?;
        if self.observed.ntime != self.ntime
            || self.observed.nbl != self.nbl
            || self.observed.nchan != self.nchan
        {
            return Err(Error::mismatch(
                "observed",
                format!("({}, {}, {})", self.ntime, self.nbl, self.nchan),
                format!(
                    "({}, {}, {})",
                    self.observed.ntime, self.observed.nbl, self.observed.nchan
                ),
            ));
        }

        if let Some(i) = self.uvw.iter().position(|u| u.iter().any(|x| !x.is_finite())) {
            return Err(Error::validation("uvw", format!("non-finite coordinate at index {i}")));
        }
        for (i, &[p, q]) in self.antenna_pairs.iter().enumerate() {
            if !(p < q && q < self.na) {
                return Err(Error::validation(
                    "antenna_pairs",
                    format!("pair ({p}, {q}) at index {i} violates 0 <= p < q < na = {}", self.na),
                ));
            }
        }
        if let Some(ch) = self.wavelengths.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::validation(
                "wavelength",
                format!("channel {ch} has non-positive wavelength {}", self.wavelengths[ch]),
            ));
        }
        if let Some(i) = self
            .pointing_errors
            .iter()
            .position(|e| e.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::validation("pointing_errors", format!("non-finite offset at index {i}")));
        }
        if let Some(i) = self
            .weights
            .iter()
            .position(|w| w.iter().any(|x| !(*x >= 0.0 && x.is_finite())))
        {
            return Err(Error::validation("weights", format!("negative or non-finite weight at cell {i}")));
        }
        if let Some(i) = self.observed.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation("observed", format!("non-finite visibility at cell {i}")));
        }
        if !(self.beam.constant > 0.0 && self.beam.constant.is_finite()) {
            return Err(Error::validation("beam_constant", "beam constant must be positive"));
        }
        Ok(())
    }

    /// Copy of the timesteps in `range`; time-invariant arrays are shared by value.
    pub fn time_slice(&self, range: Range<usize>) -> ObservationConfig {
        let (na, nbl, nchan) = (self.na, self.nbl, self.nchan);
        let span = |row: usize| range.start * row..range.end * row;
        ObservationConfig {
            ntime: range.len(),
            na,
            nbl,
            nchan,
            uvw: self.uvw[span(na)].to_vec(),
            antenna_pairs: self.antenna_pairs[span(nbl)].to_vec(),
            wavelengths: self.wavelengths.clone(),
            pointing_errors: self.pointing_errors[span(na)].to_vec(),
            weights: self.weights[span(nbl * nchan)].to_vec(),
            observed: self.observed.time_slice(range.clone()),
            beam: self.beam,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_counts_from_timing_table() {
        assert_eq!(baseline_pairs(7).unwrap().len(), 21);
        assert_eq!(baseline_pairs(64).unwrap().len(), 2016);
        assert_eq!(baseline_pairs(2).unwrap(), vec![[0, 1]]);
    }

    #[test]
    fn baseline_pairs_rejects_single_antenna() {
        assert!(matches!(baseline_pairs(1), Err(Error::InvalidArgument(_))));
        assert!(baseline_pairs(0).is_err());
    }

    #[test]
    fn baseline_pairs_are_lexicographic() {
        let pairs = baseline_pairs(4).unwrap();
        assert_eq!(pairs, vec![[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]);
    }

    #[test]
    fn count_matches_enumeration_up_to_256() {
        for na in 2..=256 {
            assert_eq!(baseline_pairs(na).unwrap().len(), na * (na - 1) / 2);
            assert_eq!(baseline_count(na), na * (na - 1) / 2);
        }
    }

    fn small_config() -> ObservationConfig {
        let uvw = (0..6).map(|i| [i as f64, 2.0 * i as f64, 0.5]).collect();
        ObservationConfig::from_uvw(2, 3, uvw, vec![0.2, 0.21], BeamConfig::new(1.0)).unwrap()
    }

    #[test]
    fn baseline_uvw_is_p_minus_q() {
        let c = small_config();
        // t = 1, bl = 2 is (1, 2): antennas 4 and 5 in flat order
        assert_eq!(c.baseline_uvw(1, 2), [-1.0, -2.0, 0.0]);
    }

    #[test]
    fn validate_names_offending_array() {
        let mut c = small_config();
        c.wavelengths[1] = 0.0;
        let err = c.validate().unwrap_err();
        assert!(matches!(err, Error::Validation { ref array, .. } if array == "wavelength"));

        let mut c = small_config();
        c.antenna_pairs[0] = [1, 1];
        assert!(matches!(c.validate(), Err(Error::Validation { array, .. }) if array == "antenna_pairs"));

        let mut c = small_config();
        c.weights[3][2] = -1.0;
        assert!(matches!(c.validate(), Err(Error::Validation { array, .. }) if array == "weights"));

        let mut c = small_config();
        c.uvw.pop();
        assert!(matches!(c.validate(), Err(Error::DimensionMismatch { array, .. }) if array == "uvw"));
    }

    #[test]
    fn time_slice_keeps_ordering() {
        let c = small_config();
        let s = c.time_slice(1..2);
        assert_eq!(s.ntime, 1);
        assert_eq!(s.uvw, c.uvw[3..6].to_vec());
        assert_eq!(s.baseline_uvw(0, 2), c.baseline_uvw(1, 2));
        s.validate().unwrap();
    }
}
