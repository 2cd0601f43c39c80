//! Synthetic observations: uvw tracks from an antenna layout plus model
//! visibilities with seeded Gaussian noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use super::ObservationConfig;
use crate::rime::{predict_visibilities, BeamConfig};
use crate::sky::SourceCatalog;
use crate::{Error, Result};

/// Antenna positions and the sampling of an east-west tracking observation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayLayout {
    /// Equatorial XYZ antenna positions in metres.
    pub positions: Vec<[f64; 3]>,
    /// Hour angle of the first and last timestep, radians.
    pub hour_angle_range: [f64; 2],
    /// Declination of the phase centre, radians.
    pub declination: f64,
    pub ntime: usize,
    pub wavelengths: Vec<f64>,
    #[serde(default)]
    pub beam: BeamConfig,
}

impl ArrayLayout {
    pub fn hour_angle(&self, t: usize) -> f64 {
        let [start, end] = self.hour_angle_range;
        if self.ntime <= 1 {
            start
        } else {
            start + (end - start) * t as f64 / (self.ntime - 1) as f64
        }
    }

    /// Per-antenna uvw over `(ntime, na)`.
    pub fn uvw(&self) -> Vec<[f64; 3]> {
        let (sd, cd) = self.declination.sin_cos();
        (0..self.ntime)
            .flat_map(|t| {
                let (sh, ch) = self.hour_angle(t).sin_cos();
                self.positions.iter().map(move |&[x, y, z]| {
                    [
                        sh * x + ch * y,
                        -sd * ch * x + sd * sh * y + cd * z,
                        cd * ch * x - cd * sh * y + sd * z,
                    ]
                })
            })
            .collect()
    }
}

/// Build an observation of `catalog` with `layout`, adding independent
/// `N(0, noise²)` noise to the real and imaginary part of every correlation.
/// Weights are `1/noise²`, or 1 when `noise` is zero.
pub fn synthesize_observation(
    catalog: &SourceCatalog,
    layout: &ArrayLayout,
    noise: f64,
    seed: u64,
) -> Result<ObservationConfig> {
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::invalid(format!("noise must be non-negative, got {noise}")));
    }
    let first = layout
        .positions
        .first()
        .ok_or_else(|| Error::invalid("layout has no antennas"))?;
    if layout.positions.iter().all(|p| p == first) {
        return Err(Error::invalid("degenerate layout: all antennas coincide"));
    }
    if layout.ntime == 0 {
        return Err(Error::invalid("layout must have at least one timestep"));
    }

    let config = ObservationConfig::from_uvw(
        layout.ntime,
        layout.positions.len(),
        layout.uvw(),
        layout.wavelengths.clone(),
        layout.beam,
    )?;
    simulate_observed(catalog, config, noise, seed)
}

/// Replace the observed data and weights of `config` with the model of
/// `catalog` plus seeded noise, as in [`synthesize_observation`].
pub fn simulate_observed(
    catalog: &SourceCatalog,
    mut config: ObservationConfig,
    noise: f64,
    seed: u64,
) -> Result<ObservationConfig> {
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::invalid(format!("noise must be non-negative, got {noise}")));
    }
    let mut observed = predict_visibilities(catalog, &config)?;
    let w = if noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise).map_err(|e| Error::invalid(e.to_string()))?;
        for v in observed.values.iter_mut() {
            for c in v.0.iter_mut() {
                c.re += rng.sample(normal);
                c.im += rng.sample(normal);
            }
        }
        1.0 / (noise * noise)
    } else {
        1.0
    };
    config.weights.iter_mut().for_each(|x| *x = [w; 4]);
    config.observed = observed;
    config.validate()?;
    Ok(config)
}
