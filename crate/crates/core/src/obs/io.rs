//! Native observation format: a JSON manifest naming flat little-endian
//! binary arrays, row-major, complex values interleaved `(re, im)`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{baseline_count, ObservationConfig, VisibilitySet};
use crate::budget::{Dim, ElementType};
use crate::rime::BeamConfig;
use crate::{Error, Jones, Result};

pub const MANIFEST_NAME: &str = "observation.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestArray {
    pub file: String,
    pub dtype: ElementType,
    pub shape: Vec<Dim>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub dims: BTreeMap<String, usize>,
    #[serde(default = "default_beam_constant")]
    pub beam_constant: f64,
    pub arrays: BTreeMap<String, ManifestArray>,
}

fn default_beam_constant() -> f64 {
    BeamConfig::default().constant
}

impl Manifest {
    fn dim(&self, name: &str) -> Result<usize> {
        self.dims
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnresolvedDimension(name.to_string()))
    }
}

/// Resolve a manifest path: either the manifest itself or its directory.
fn manifest_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MANIFEST_NAME)
    } else {
        path.to_path_buf()
    }
}

struct ArrayReader<'a> {
    manifest: &'a Manifest,
    base: &'a Path,
}

impl ArrayReader<'_> {
    /// Read `name`, checking its declared shape against `expected` and the
    /// file's byte length against that shape. Returns the values widened to
    /// f64 (complex arrays interleaved).
    fn read(&self, name: &str, expected: &[Dim], allowed: &[ElementType]) -> Result<Option<Vec<f64>>> {
        let Some(entry) = self.manifest.arrays.get(name) else {
            return Ok(None);
        };
        if !allowed.contains(&entry.dtype) {
            return Err(Error::validation(
                name,
                format!("dtype {} not allowed (expected one of {allowed:?})", entry.dtype),
            ));
        }
        let resolve = |shape: &[Dim]| -> Result<Vec<usize>> {
            shape
                .iter()
                .map(|d| match d {
                    Dim::Fixed(n) => Ok(*n),
                    Dim::Named(s) => self.manifest.dim(s),
                })
                .collect()
        };
        let declared = resolve(&entry.shape)?;
        let canonical = resolve(expected)?;
        if declared != canonical {
            return Err(Error::mismatch(name, format!("shape {canonical:?}"), format!("shape {declared:?}")));
        }
        let count: usize = declared.iter().product();
        let path = self.base.join(&entry.file);
        let bytes = fs::read(&path).map_err(|source| Error::ArrayIo {
            array: name.to_string(),
            path: path.clone(),
            source,
        })?;
        let expected_len = count as u64 * entry.dtype.size();
        if bytes.len() as u64 != expected_len {
            return Err(Error::mismatch(
                name,
                format!("{expected_len} bytes"),
                format!("{} bytes", bytes.len()),
            ));
        }
        Ok(Some(decode(&bytes, entry.dtype)))
    }

    fn require(&self, name: &str, expected: &[Dim], allowed: &[ElementType]) -> Result<Vec<f64>> {
        self.read(name, expected, allowed)?
            .ok_or_else(|| Error::validation(name, "array missing from manifest"))
    }
}

fn decode(bytes: &[u8], dtype: ElementType) -> Vec<f64> {
    match dtype {
        ElementType::F64 | ElementType::C128 => bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect(),
        ElementType::F32 | ElementType::C64 => bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect(),
        ElementType::I32 => bytes
            .chunks_exact(4)
            .map(|b| i32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect(),
    }
}

fn named(names: &[&str]) -> Vec<Dim> {
    names
        .iter()
        .map(|n| match n.parse::<usize>() {
            Ok(k) => Dim::Fixed(k),
            Err(_) => Dim::Named(n.to_string()),
        })
        .collect()
}

fn jones_from_interleaved(values: &[f64]) -> Vec<Jones<f64>> {
    values
        .chunks_exact(8)
        .map(|c| {
            Jones([
                Complex::new(c[0], c[1]),
                Complex::new(c[2], c[3]),
                Complex::new(c[4], c[5]),
                Complex::new(c[6], c[7]),
            ])
        })
        .collect()
}

/// Load and validate an observation from a manifest file or its directory.
pub fn load_observation(path: impl AsRef<Path>) -> Result<ObservationConfig> {
    let manifest_path = manifest_path(path.as_ref());
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let mut manifest: Manifest = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: manifest_path.clone(),
        source,
    })?;
    let ntime = manifest.dim("ntime")?;
    let na = manifest.dim("na")?;
    let nchan = manifest.dim("nchan")?;
    let nbl = *manifest
        .dims
        .entry("nbl".to_string())
        .or_insert_with(|| baseline_count(na));

    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let reader = ArrayReader {
        manifest: &manifest,
        base,
    };
    use ElementType::*;

    let uvw = reader.require("uvw", &named(&["ntime", "na", "3"]), &[F64, F32])?;
    let pairs = reader.require("antenna_pairs", &named(&["ntime", "nbl", "2"]), &[I32])?;
    let wavelengths = reader.require("wavelength", &named(&["nchan"]), &[F64, F32])?;
    let pointing = reader.read("pointing_errors", &named(&["ntime", "na", "2"]), &[F64, F32])?;
    let weights = reader.require("weights", &named(&["ntime", "nbl", "nchan", "4"]), &[F64, F32])?;
    let observed = reader.require("observed", &named(&["ntime", "nbl", "nchan", "4"]), &[C128, C64])?;

    if let Some(i) = pairs.iter().position(|&x| x < 0.0) {
        return Err(Error::validation("antenna_pairs", format!("negative antenna index at element {i}")));
    }

    let config = ObservationConfig {
        ntime,
        na,
        nbl,
        nchan,
        uvw: uvw.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
        antenna_pairs: pairs
            .chunks_exact(2)
            .map(|c| [c[0] as usize, c[1] as usize])
            .collect(),
        wavelengths,
        pointing_errors: match pointing {
            Some(p) => p.chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
            None => vec![[0.0; 2]; ntime * na],
        },
        weights: weights
            .chunks_exact(4)
            .map(|c| [c[0], c[1], c[2], c[3]])
            .collect(),
        observed: VisibilitySet {
            ntime,
            nbl,
            nchan,
            values: jones_from_interleaved(&observed),
        },
        beam: BeamConfig::new(manifest.beam_constant),
    };
    config.validate()?;
    Ok(config)
}

fn write_array(dir: &Path, name: &str, bytes: Vec<u8>) -> Result<String> {
    let file = format!("{name}.bin");
    let path = dir.join(&file);
    fs::write(&path, bytes).map_err(|source| Error::ArrayIo {
        array: name.to_string(),
        path,
        source,
    })?;
    Ok(file)
}

fn f64_bytes(values: impl Iterator<Item = f64>) -> Vec<u8> {
    values.flat_map(f64::to_le_bytes).collect()
}

/// Write `config` into directory `dir` as a manifest plus binary arrays.
/// All real arrays are written as f64 and complex arrays as c128.
pub fn save_observation(config: &ObservationConfig, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    use ElementType::*;

    let mut arrays = BTreeMap::new();
    let mut add = |name: &str, dtype: ElementType, shape: &[&str], bytes: Vec<u8>| -> Result<()> {
        let file = write_array(dir, name, bytes)?;
        arrays.insert(
            name.to_string(),
            ManifestArray {
                file,
                dtype,
                shape: named(shape),
            },
        );
        Ok(())
    };

    add("uvw", F64, &["ntime", "na", "3"], f64_bytes(config.uvw.iter().flatten().copied()))?;
    let pair_bytes = config
        .antenna_pairs
        .iter()
        .flatten()
        .map(|&a| {
            i32::try_from(a).map_err(|_| Error::validation("antenna_pairs", "antenna index exceeds i32"))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flat_map(i32::to_le_bytes)
        .collect();
    add("antenna_pairs", I32, &["ntime", "nbl", "2"], pair_bytes)?;
    add("wavelength", F64, &["nchan"], f64_bytes(config.wavelengths.iter().copied()))?;
    add(
        "pointing_errors",
        F64,
        &["ntime", "na", "2"],
        f64_bytes(config.pointing_errors.iter().flatten().copied()),
    )?;
    add(
        "weights",
        F64,
        &["ntime", "nbl", "nchan", "4"],
        f64_bytes(config.weights.iter().flatten().copied()),
    )?;
    add(
        "observed",
        C128,
        &["ntime", "nbl", "nchan", "4"],
        f64_bytes(
            config
                .observed
                .values
                .iter()
                .flat_map(|j| j.0)
                .flat_map(|c| [c.re, c.im]),
        ),
    )?;

    let manifest = Manifest {
        dims: BTreeMap::from([
            ("ntime".to_string(), config.ntime),
            ("na".to_string(), config.na),
            ("nbl".to_string(), config.nbl),
            ("nchan".to_string(), config.nchan),
        ]),
        beam_constant: config.beam.constant,
        arrays,
    };
    let path = dir.join(MANIFEST_NAME);
    let text = serde_json::to_string_pretty(&manifest).map_err(|source| Error::Json {
        path: path.clone(),
        source,
    })?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ObservationConfig {
        let ntime = 10;
        let na = 7;
        let uvw = (0..ntime * na)
            .map(|i| [i as f64 * 1.5, -(i as f64), 0.25 * i as f64])
            .collect();
        let wavelengths = (0..8).map(|c| 0.2 + 0.001 * c as f64).collect();
        let mut c = ObservationConfig::from_uvw(ntime, na, uvw, wavelengths, BeamConfig::new(3.0)).unwrap();
        for (i, v) in c.observed.values.iter_mut().enumerate() {
            *v = Jones::identity().scale_real(i as f64 * 0.1);
        }
        c
    }

    #[test]
    fn round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let c = config();
        save_observation(&c, dir.path()).unwrap();
        let loaded = load_observation(dir.path()).unwrap();
        assert_eq!(loaded.nbl, 21);
        assert_eq!(loaded, c);
    }

    #[test]
    fn wrong_byte_length_names_array() {
        let dir = tempfile::tempdir().unwrap();
        save_observation(&config(), dir.path()).unwrap();
        let path = dir.path().join("uvw.bin");
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 8);
        fs::write(&path, bytes).unwrap();
        let err = load_observation(dir.path()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { ref array, .. } if array == "uvw"), "{err}");
    }

    #[test]
    fn zero_wavelength_names_array() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config();
        c.wavelengths[3] = 0.0;
        save_observation(&c, dir.path()).unwrap();
        let err = load_observation(dir.path()).unwrap_err();
        assert!(matches!(err, Error::Validation { ref array, .. } if array == "wavelength"), "{err}");
    }

    #[test]
    fn missing_array_file_names_array() {
        let dir = tempfile::tempdir().unwrap();
        save_observation(&config(), dir.path()).unwrap();
        fs::remove_file(dir.path().join("weights.bin")).unwrap();
        let err = load_observation(dir.path()).unwrap_err();
        assert!(matches!(err, Error::ArrayIo { ref array, .. } if array == "weights"), "{err}");
    }

    #[test]
    fn pointing_errors_default_to_zero() {
        let dir = tempfile::tempdir().unwrap();
        save_observation(&config(), dir.path()).unwrap();
        let manifest_file = dir.path().join(MANIFEST_NAME);
        let mut m: Manifest = serde_json::from_str(&fs::read_to_string(&manifest_file).unwrap()).unwrap();
        m.arrays.remove("pointing_errors");
        fs::write(&manifest_file, serde_json::to_string(&m).unwrap()).unwrap();
        let loaded = load_observation(&manifest_file).unwrap();
        assert!(loaded.pointing_errors.iter().all(|p| *p == [0.0, 0.0]));
    }

    #[test]
    fn manifest_shape_uses_named_dimensions() {
        let dir = tempfile::tempdir().unwrap();
        save_observation(&config(), dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join(MANIFEST_NAME)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["arrays"]["uvw"]["shape"], serde_json::json!(["ntime", "na", 3]));
        assert_eq!(v["arrays"]["uvw"]["dtype"], "f64");
        assert_eq!(v["arrays"]["observed"]["dtype"], "c128");
        assert_eq!(v["dims"]["nbl"], 21);
    }

    #[test]
    fn single_precision_arrays_are_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let c = config();
        save_observation(&c, dir.path()).unwrap();
        let manifest_file = dir.path().join(MANIFEST_NAME);
        let mut m: Manifest = serde_json::from_str(&fs::read_to_string(&manifest_file).unwrap()).unwrap();
        let wl: Vec<u8> = c.wavelengths.iter().flat_map(|&w| (w as f32).to_le_bytes()).collect();
        fs::write(dir.path().join("wl32.bin"), wl).unwrap();
        m.arrays.insert(
            "wavelength".into(),
            ManifestArray {
                file: "wl32.bin".into(),
                dtype: ElementType::F32,
                shape: named(&["nchan"]),
            },
        );
        fs::write(&manifest_file, serde_json::to_string(&m).unwrap()).unwrap();
        let loaded = load_observation(dir.path()).unwrap();
        assert_eq!(loaded.wavelengths[0], 0.2f32 as f64);
    }
}
