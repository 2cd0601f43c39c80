//! Parametric sky models: point and elliptical Gaussian sources with
//! time-varying Stokes parameters and a single spectral index.

use std::fs;
use std::ops::Range;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::{Error, Jones, Real, Result};

/// Direction cosines of a source relative to the phase centre. `n` is
/// derived on demand.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceDirection {
    pub l: f64,
    pub m: f64,
}

impl SourceDirection {
    pub fn new(l: f64, m: f64) -> Self {
        SourceDirection { l, m }
    }

    pub fn is_valid(&self) -> bool {
        self.l.is_finite() && self.m.is_finite() && self.l * self.l + self.m * self.m <= 1.0
    }

    /// `n = sqrt(1 - l² - m²)`; NaN below the horizon.
    pub fn n(&self) -> f64 {
        (1.0 - self.l * self.l - self.m * self.m).sqrt()
    }
}

/// Stokes parameters at one timestep.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Stokes {
    pub i: f64,
    pub q: f64,
    pub u: f64,
    pub v: f64,
}

impl Stokes {
    pub fn new(i: f64, q: f64, u: f64, v: f64) -> Self {
        Stokes { i, q, u, v }
    }

    pub fn unpolarised(i: f64) -> Self {
        Stokes::new(i, 0.0, 0.0, 0.0)
    }
}

/// Per-timestep Stokes series plus a spectral index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StokesSpectrum {
    #[serde(rename = "I")]
    pub i: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    #[serde(rename = "U")]
    pub u: Vec<f64>,
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    #[serde(skip)]
    pub alpha: f64,
}

impl StokesSpectrum {
    /// The same Stokes values repeated over `ntime` timesteps.
    pub fn constant(stokes: Stokes, alpha: f64, ntime: usize) -> Self {
        StokesSpectrum {
            i: vec![stokes.i; ntime],
            q: vec![stokes.q; ntime],
            u: vec![stokes.u; ntime],
            v: vec![stokes.v; ntime],
            alpha,
        }
    }

    pub fn ntime(&self) -> usize {
        self.i.len()
    }

    pub fn at(&self, t: usize) -> Stokes {
        Stokes::new(self.i[t], self.q[t], self.u[t], self.v[t])
    }

    fn is_consistent(&self) -> bool {
        let n = self.i.len();
        n >= 1 && self.q.len() == n && self.u.len() == n && self.v.len() == n
    }

    fn time_slice(&self, range: Range<usize>) -> Self {
        StokesSpectrum {
            i: self.i[range.clone()].to_vec(),
            q: self.q[range.clone()].to_vec(),
            u: self.u[range.clone()].to_vec(),
            v: self.v[range].to_vec(),
            alpha: self.alpha,
        }
    }
}

/// Elliptical Gaussian extent: FWHM major and minor axes and position
/// angle, all in radians.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GaussianShape {
    pub emaj: f64,
    pub emin: f64,
    pub pa: f64,
}

impl GaussianShape {
    pub fn new(emaj: f64, emin: f64, pa: f64) -> Self {
        GaussianShape { emaj, emin, pa }
    }

    pub fn is_valid(&self) -> bool {
        self.emaj.is_finite()
            && self.emin.is_finite()
            && self.pa.is_finite()
            && self.emaj >= self.emin
            && self.emin >= 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointSource {
    pub direction: SourceDirection,
    pub spectrum: StokesSpectrum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSource {
    pub direction: SourceDirection,
    pub spectrum: StokesSpectrum,
    pub shape: GaussianShape,
}

/// Which family a source belongs to, and its index within that family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "lowercase")]
pub enum SourceRef {
    Point(usize),
    Gaussian(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceCatalog {
    pub point_sources: Vec<PointSource>,
    pub gaussian_sources: Vec<GaussianSource>,
    /// Reference wavelength of the Stokes parameters, in metres.
    pub lambda_ref: f64,
}

impl SourceCatalog {
    pub fn new(lambda_ref: f64) -> Self {
        SourceCatalog {
            point_sources: Vec::new(),
            gaussian_sources: Vec::new(),
            lambda_ref,
        }
    }

    pub fn with_point(mut self, direction: SourceDirection, spectrum: StokesSpectrum) -> Self {
        self.point_sources.push(PointSource {
            direction,
            spectrum,
        });
        self
    }

    pub fn with_gaussian(
        mut self,
        direction: SourceDirection,
        spectrum: StokesSpectrum,
        shape: GaussianShape,
    ) -> Self {
        self.gaussian_sources.push(GaussianSource {
            direction,
            spectrum,
            shape,
        });
        self
    }

    pub fn npsrc(&self) -> usize {
        self.point_sources.len()
    }

    pub fn ngsrc(&self) -> usize {
        self.gaussian_sources.len()
    }

    pub fn nsrc(&self) -> usize {
        self.npsrc() + self.ngsrc()
    }

    /// Number of timesteps, taken from the first source.
    pub fn ntime(&self) -> Option<usize> {
        self.point_sources
            .first()
            .map(|s| s.spectrum.ntime())
            .or_else(|| self.gaussian_sources.first().map(|s| s.spectrum.ntime()))
    }

    /// Sources along the evaluation axis: points first, then Gaussians.
    pub fn directions(&self) -> impl Iterator<Item = SourceDirection> + '_ {
        self.point_sources
            .iter()
            .map(|s| s.direction)
            .chain(self.gaussian_sources.iter().map(|s| s.direction))
    }

    pub fn spectra(&self) -> impl Iterator<Item = &StokesSpectrum> + '_ {
        self.point_sources
            .iter()
            .map(|s| &s.spectrum)
            .chain(self.gaussian_sources.iter().map(|s| &s.spectrum))
    }

    /// Concatenate two catalogs (points of `other` follow points of `self`,
    /// likewise for Gaussians). The reference wavelength of `self` is kept.
    pub fn union(&self, other: &SourceCatalog) -> SourceCatalog {
        let mut out = self.clone();
        out.point_sources.extend(other.point_sources.iter().cloned());
        out.gaussian_sources
            .extend(other.gaussian_sources.iter().cloned());
        out
    }

    pub fn time_slice(&self, range: Range<usize>) -> SourceCatalog {
        SourceCatalog {
            point_sources: self
                .point_sources
                .iter()
                .map(|s| PointSource {
                    direction: s.direction,
                    spectrum: s.spectrum.time_slice(range.clone()),
                })
                .collect(),
            gaussian_sources: self
                .gaussian_sources
                .iter()
                .map(|s| GaussianSource {
                    direction: s.direction,
                    spectrum: s.spectrum.time_slice(range.clone()),
                    shape: s.shape,
                })
                .collect(),
            lambda_ref: self.lambda_ref,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_catalog(self)
    }

    /// Validate and turn the first failure into an error.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        match report.failures.first() {
            None => Ok(()),
            Some(first) => Err(Error::validation("sky", first.clone())),
        }
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<SourceCatalog> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_json(&text, path)
    }

    /// Parse a sky model from JSON text.
    pub fn from_json_str(text: &str) -> Result<SourceCatalog> {
        Self::parse_json(text, Path::new("<string>"))
    }

    fn parse_json(text: &str, path: &Path) -> Result<SourceCatalog> {
        let file: SkyFile = serde_json::from_str(text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(file.into())
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&SkyFile::from(self)).map_err(|source| {
            Error::Json {
                path: path.to_path_buf(),
                source,
            }
        })?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Outcome of [`validate_catalog`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check every catalog invariant, collecting all violations.
pub fn validate_catalog(catalog: &SourceCatalog) -> ValidationReport {
    let mut failures = Vec::new();
    if catalog.nsrc() == 0 {
        failures.push("nsrc = 0".to_string());
    }
    if !(catalog.lambda_ref > 0.0 && catalog.lambda_ref.is_finite()) {
        failures.push(format!("lambda_ref = {} is not positive", catalog.lambda_ref));
    }
    let ntime = catalog.ntime();

    let check = |failures: &mut Vec<String>, kind: &str, idx: usize, dir: &SourceDirection, spectrum: &StokesSpectrum| {
        if !dir.l.is_finite() || !dir.m.is_finite() {
            failures.push(format!("non-finite direction at {kind} source {idx}"));
        } else if !dir.is_valid() {
            failures.push(format!("l²+m² > 1 at {kind} source {idx}"));
        }
        if !spectrum.is_consistent() {
            failures.push(format!("Stokes series lengths differ or are empty at {kind} source {idx}"));
        } else if Some(spectrum.ntime()) != ntime {
            failures.push(format!(
                "ntime = {} at {kind} source {idx} differs from catalog ntime = {}",
                spectrum.ntime(),
                ntime.unwrap_or(0)
            ));
        }
        if !spectrum.alpha.is_finite() {
            failures.push(format!("non-finite spectral index at {kind} source {idx}"));
        }
        let all = spectrum.i.iter().chain(&spectrum.q).chain(&spectrum.u).chain(&spectrum.v);
        if all.into_iter().any(|x| !x.is_finite()) {
            failures.push(format!("non-finite Stokes value at {kind} source {idx}"));
        }
        if let Some(t) = spectrum.i.iter().position(|&i| i < 0.0) {
            failures.push(format!("negative I at {kind} source {idx} timestep {t}"));
        }
    };

    for (idx, s) in catalog.point_sources.iter().enumerate() {
        check(&mut failures, "point", idx, &s.direction, &s.spectrum);
    }
    for (idx, s) in catalog.gaussian_sources.iter().enumerate() {
        check(&mut failures, "gaussian", idx, &s.direction, &s.spectrum);
        if !s.shape.is_valid() {
            failures.push(format!("emaj >= emin >= 0 violated at gaussian source {idx}"));
        }
    }
    ValidationReport { failures }
}

/// Spectral scaling factor `(lambda_ref / lambda)^alpha`.
#[inline]
pub(crate) fn spectral_factor<T: Real>(alpha: T, lambda: T, lambda_ref: T) -> T {
    (lambda_ref / lambda).powf(alpha)
}

#[inline]
pub(crate) fn brightness_unchecked<T: Real>(
    i: T,
    q: T,
    u: T,
    v: T,
    alpha: T,
    lambda: T,
    lambda_ref: T,
) -> Jones<T> {
    let f = spectral_factor(alpha, lambda, lambda_ref);
    Jones([
        Complex::new((i + q) * f, T::zero()),
        Complex::new(u * f, v * f),
        Complex::new(u * f, -v * f),
        Complex::new((i - q) * f, T::zero()),
    ])
}

/// Brightness matrix `(λ_ref/λ)^α · [[I+Q, U+iV], [U−iV, I−Q]]`.
pub fn brightness_matrix(stokes: Stokes, alpha: f64, lambda: f64, lambda_ref: f64) -> Result<Jones<f64>> {
    if lambda.is_nan() || lambda <= 0.0 || lambda_ref.is_nan() || lambda_ref <= 0.0 {
        return Err(Error::invalid(format!(
            "wavelengths must be positive (lambda = {lambda}, lambda_ref = {lambda_ref})"
        )));
    }
    Ok(brightness_unchecked(
        stokes.i, stokes.q, stokes.u, stokes.v, alpha, lambda, lambda_ref,
    ))
}

// On-disk sky model layout.

#[derive(Serialize, Deserialize)]
struct SkyFile {
    lambda_ref: f64,
    #[serde(default)]
    point_sources: Vec<PointEntry>,
    #[serde(default)]
    gaussian_sources: Vec<GaussianEntry>,
}

#[derive(Serialize, Deserialize)]
struct PointEntry {
    l: f64,
    m: f64,
    stokes: StokesSpectrum,
    #[serde(default)]
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct GaussianEntry {
    l: f64,
    m: f64,
    stokes: StokesSpectrum,
    #[serde(default)]
    alpha: f64,
    emaj: f64,
    emin: f64,
    pa: f64,
}

impl From<SkyFile> for SourceCatalog {
    fn from(f: SkyFile) -> Self {
        SourceCatalog {
            point_sources: f
                .point_sources
                .into_iter()
                .map(|p| PointSource {
                    direction: SourceDirection::new(p.l, p.m),
                    spectrum: StokesSpectrum {
                        alpha: p.alpha,
                        ..p.stokes
                    },
                })
                .collect(),
            gaussian_sources: f
                .gaussian_sources
                .into_iter()
                .map(|g| GaussianSource {
                    direction: SourceDirection::new(g.l, g.m),
                    spectrum: StokesSpectrum {
                        alpha: g.alpha,
                        ..g.stokes
                    },
                    shape: GaussianShape::new(g.emaj, g.emin, g.pa),
                })
                .collect(),
            lambda_ref: f.lambda_ref,
        }
    }
}

impl From<&SourceCatalog> for SkyFile {
    fn from(c: &SourceCatalog) -> Self {
        SkyFile {
            lambda_ref: c.lambda_ref,
            point_sources: c
                .point_sources
                .iter()
                .map(|p| PointEntry {
                    l: p.direction.l,
                    m: p.direction.m,
                    stokes: p.spectrum.clone(),
                    alpha: p.spectrum.alpha,
                })
                .collect(),
            gaussian_sources: c
                .gaussian_sources
                .iter()
                .map(|g| GaussianEntry {
                    l: g.direction.l,
                    m: g.direction.m,
                    stokes: g.spectrum.clone(),
                    alpha: g.spectrum.alpha,
                    emaj: g.shape.emaj,
                    emin: g.shape.emin,
                    pa: g.shape.pa,
                })
                .collect(),
        }
    }
}
