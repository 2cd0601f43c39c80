//! C ABI over `rime_core`.
//!
//! Catalogs and observations are opaque handles created by the `*_load`
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`RimeStatus`]; on failure a description is kept per thread and
//! can be copied out with [`rime_last_error_message`]. Panics never cross
//! the boundary.
//!
//! Visibility buffers hold `ntime × nbl × nchan × 4` complex values as
//! interleaved `(re, im)` doubles, channel fastest, correlations in the
//! order xx, xy, yx, yy.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rime_core::budget::{plan_chunks, ArrayRegistry, DimensionSet};
use rime_core::likelihood::{reduce_sum, LogNormalization, ReductionStrategy};
use rime_core::obs::{baseline_count, load_observation, ObservationConfig};
use rime_core::perf;
use rime_core::rime::evaluate;
use rime_core::sampler::{Binding, ParamField, ParameterVector};
use rime_core::sky::{SourceCatalog, SourceRef};
use rime_core::{Error, ErrorKind, Precision};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RimeStatus {
    Ok = 0,
    InvalidArgument = 1,
    DataError = 2,
    Infeasible = 3,
    IoError = 4,
    NullPointer = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RimePrecision {
    F32 = 0,
    F64 = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RimeSourceKind {
    Point = 0,
    Gaussian = 1,
}

/// Source field addressed by [`rime_catalog_set_param`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RimeField {
    I = 0,
    Q = 1,
    U = 2,
    V = 3,
    Alpha = 4,
    L = 5,
    M = 6,
    Emaj = 7,
    Emin = 8,
    Pa = 9,
}

/// Opaque sky model.
pub struct RimeCatalog {
    inner: SourceCatalog,
}

/// Opaque observation.
pub struct RimeObservation {
    inner: ObservationConfig,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RimeObsDims {
    pub ntime: usize,
    pub na: usize,
    pub nbl: usize,
    pub nchan: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RimeChunkPlan {
    pub chunk_timesteps: usize,
    pub num_chunks: usize,
    pub per_chunk_bytes: u64,
    pub total_bytes: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> RimeStatus {
    match e.kind() {
        ErrorKind::InvalidArgument => RimeStatus::InvalidArgument,
        ErrorKind::Data => RimeStatus::DataError,
        ErrorKind::Infeasible => RimeStatus::Infeasible,
        ErrorKind::Io => match e {
            Error::Io { .. } => RimeStatus::IoError,
            _ => RimeStatus::DataError,
        },
    }
}

enum Failure {
    Core(Error),
    Status(RimeStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(RimeStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RimeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            RimeStatus::Ok
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            RimeStatus::Panic
        }
    }
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(RimeStatus::InvalidArgument, "path is not UTF-8".into()))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn precision(p: RimePrecision) -> Precision {
    match p {
        RimePrecision::F32 => Precision::F32,
        RimePrecision::F64 => Precision::F64,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rime_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length
/// excluding the terminator; pass a null `buf` to query it.
#[no_mangle]
pub unsafe extern "C" fn rime_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Load a sky model from a JSON file.
#[no_mangle]
pub unsafe extern "C" fn rime_catalog_load(path: *const c_char, out: *mut *mut RimeCatalog) -> RimeStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let catalog = SourceCatalog::load_json(path_arg(path)?)?;
        catalog.ensure_valid()?;
        *out = Box::into_raw(Box::new(RimeCatalog { inner: catalog }));
        Ok(())
    })
}

/// Parse a sky model from a NUL-terminated JSON string.
#[no_mangle]
pub unsafe extern "C" fn rime_catalog_from_json(json: *const c_char, out: *mut *mut RimeCatalog) -> RimeStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Failure::Status(RimeStatus::InvalidArgument, "json is not UTF-8".into()))?;
        let catalog = SourceCatalog::from_json_str(text)?;
        catalog.ensure_valid()?;
        *out = Box::into_raw(Box::new(RimeCatalog { inner: catalog }));
        Ok(())
    })
}

/// Release a catalog. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rime_catalog_free(catalog: *mut RimeCatalog) {
    if !catalog.is_null() {
        drop(Box::from_raw(catalog));
    }
}

#[no_mangle]
pub unsafe extern "C" fn rime_catalog_counts(
    catalog: *const RimeCatalog,
    npsrc: *mut usize,
    ngsrc: *mut usize,
    ntime: *mut usize,
) -> RimeStatus {
    guard(|| {
        let c = &catalog.as_ref().ok_or_else(|| null("catalog"))?.inner;
        *out_arg(npsrc, "npsrc")? = c.npsrc();
        *out_arg(ngsrc, "ngsrc")? = c.ngsrc();
        *out_arg(ntime, "ntime")? = c.ntime().unwrap_or(0);
        Ok(())
    })
}

/// Set one field of one source; Stokes fields are set for every timestep.
#[no_mangle]
pub unsafe extern "C" fn rime_catalog_set_param(
    catalog: *mut RimeCatalog,
    kind: RimeSourceKind,
    index: usize,
    field: RimeField,
    value: f64,
) -> RimeStatus {
    guard(|| {
        let c = &mut catalog.as_mut().ok_or_else(|| null("catalog"))?.inner;
        let source = match kind {
            RimeSourceKind::Point => SourceRef::Point(index),
            RimeSourceKind::Gaussian => SourceRef::Gaussian(index),
        };
        let field = match field {
            RimeField::I => ParamField::I,
            RimeField::Q => ParamField::Q,
            RimeField::U => ParamField::U,
            RimeField::V => ParamField::V,
            RimeField::Alpha => ParamField::Alpha,
            RimeField::L => ParamField::L,
            RimeField::M => ParamField::M,
            RimeField::Emaj => ParamField::Emaj,
            RimeField::Emin => ParamField::Emin,
            RimeField::Pa => ParamField::Pa,
        };
        let name = format!("{kind:?}[{index}].{field}").to_lowercase();
        ParameterVector::new(vec![value], vec![Binding::new(name, source, field)])?.apply(c)?;
        Ok(())
    })
}

/// Load an observation from a manifest directory or file.
#[no_mangle]
pub unsafe extern "C" fn rime_observation_load(
    path: *const c_char,
    out: *mut *mut RimeObservation,
) -> RimeStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let config = load_observation(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(RimeObservation { inner: config }));
        Ok(())
    })
}

/// Release an observation. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rime_observation_free(obs: *mut RimeObservation) {
    if !obs.is_null() {
        drop(Box::from_raw(obs));
    }
}

#[no_mangle]
pub unsafe extern "C" fn rime_observation_dims(obs: *const RimeObservation, out: *mut RimeObsDims) -> RimeStatus {
    guard(|| {
        let o = &obs.as_ref().ok_or_else(|| null("observation"))?.inner;
        *out_arg(out, "out")? = RimeObsDims {
            ntime: o.ntime,
            na: o.na,
            nbl: o.nbl,
            nchan: o.nchan,
        };
        Ok(())
    })
}

unsafe fn pair<'a>(
    catalog: *const RimeCatalog,
    obs: *const RimeObservation,
) -> Result<(&'a SourceCatalog, &'a ObservationConfig), Failure> {
    let c = &catalog.as_ref().ok_or_else(|| null("catalog"))?.inner;
    let o = &obs.as_ref().ok_or_else(|| null("observation"))?.inner;
    Ok((c, o))
}

/// Weighted χ² of the catalog's model against the observed data.
#[no_mangle]
pub unsafe extern "C" fn rime_chi_squared(
    catalog: *const RimeCatalog,
    obs: *const RimeObservation,
    precision_: RimePrecision,
    chi2: *mut f64,
) -> RimeStatus {
    guard(|| {
        let (c, o) = pair(catalog, obs)?;
        let out = out_arg(chi2, "chi2")?;
        let terms = evaluate(c, o, precision(precision_), false)?.chi2_terms;
        *out = reduce_sum(&terms, ReductionStrategy::default())?;
        Ok(())
    })
}

/// Gaussian log-likelihood `−½(χ² + Σ ln(2π/w))`.
#[no_mangle]
pub unsafe extern "C" fn rime_log_likelihood(
    catalog: *const RimeCatalog,
    obs: *const RimeObservation,
    precision_: RimePrecision,
    log_likelihood: *mut f64,
) -> RimeStatus {
    guard(|| {
        let (c, o) = pair(catalog, obs)?;
        let out = out_arg(log_likelihood, "log_likelihood")?;
        let terms = evaluate(c, o, precision(precision_), false)?.chi2_terms;
        let chi2 = reduce_sum(&terms, ReductionStrategy::default())?;
        *out = LogNormalization::from_correlation_weights(&o.weights)?.log_likelihood(chi2)?;
        Ok(())
    })
}

/// Number of doubles [`rime_predict`] writes.
#[no_mangle]
pub unsafe extern "C" fn rime_visibility_buffer_len(obs: *const RimeObservation, len: *mut usize) -> RimeStatus {
    guard(|| {
        let o = &obs.as_ref().ok_or_else(|| null("observation"))?.inner;
        *out_arg(len, "len")? = o.nvis() * 8;
        Ok(())
    })
}

/// Model visibilities into `buf` of `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rime_predict(
    catalog: *const RimeCatalog,
    obs: *const RimeObservation,
    precision_: RimePrecision,
    buf: *mut f64,
    len: usize,
) -> RimeStatus {
    guard(|| {
        let (c, o) = pair(catalog, obs)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let need = o.nvis() * 8;
        if len < need {
            return Err(Failure::Status(
                RimeStatus::BufferTooSmall,
                format!("buffer holds {len} doubles, {need} needed"),
            ));
        }
        let vis = evaluate(c, o, precision(precision_), true)?
            .visibilities
            .expect("requested");
        let out = std::slice::from_raw_parts_mut(buf, need);
        for (dst, v) in out.chunks_exact_mut(8).zip(&vis.values) {
            for (k, z) in v.0.iter().enumerate() {
                dst[2 * k] = z.re;
                dst[2 * k + 1] = z.im;
            }
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rime_baseline_count(na: usize, nbl: *mut usize) -> RimeStatus {
    guard(|| {
        if na < 2 {
            return Err(Failure::Status(RimeStatus::InvalidArgument, format!("na = {na} < 2")));
        }
        *out_arg(nbl, "nbl")? = baseline_count(na);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rime_ek_arithmetic_intensity(npsrc: usize, ngsrc: usize, ai: *mut f64) -> RimeStatus {
    guard(|| {
        *out_arg(ai, "ai")? = perf::ek_arithmetic_intensity(npsrc as u64, ngsrc as u64)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rime_bsum_arithmetic_intensity(npsrc: usize, ngsrc: usize, ai: *mut f64) -> RimeStatus {
    guard(|| {
        *out_arg(ai, "ai")? = perf::bsum_arithmetic_intensity(npsrc as u64, ngsrc as u64)?;
        Ok(())
    })
}

/// `min(peak, ai · bandwidth)` in GFLOPS/s.
#[no_mangle]
pub unsafe extern "C" fn rime_roofline_attainable(
    ai: f64,
    peak_gflops: f64,
    bandwidth_gbps: f64,
    attainable: *mut f64,
) -> RimeStatus {
    guard(|| {
        let device = perf::RooflineDevice::new("custom", peak_gflops, bandwidth_gbps)?;
        if ai.is_nan() || ai <= 0.0 {
            return Err(Failure::Status(RimeStatus::InvalidArgument, format!("ai = {ai} is not positive")));
        }
        *out_arg(attainable, "attainable")? = perf::roofline_attainable(ai, &device);
        Ok(())
    })
}

/// Time-chunk plan for the default array set under a byte budget.
#[no_mangle]
pub unsafe extern "C" fn rime_plan_chunks(
    ntime: usize,
    na: usize,
    nchan: usize,
    npsrc: usize,
    ngsrc: usize,
    budget_bytes: u64,
    slots: usize,
    precision_: RimePrecision,
    out: *mut RimeChunkPlan,
) -> RimeStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let dims = DimensionSet::new(ntime, na, nchan, npsrc, ngsrc);
        let registry = ArrayRegistry::rime_default(precision(precision_));
        let plan = plan_chunks(&registry, &dims, budget_bytes, slots)?;
        *out = RimeChunkPlan {
            chunk_timesteps: plan.chunk_timesteps,
            num_chunks: plan.num_chunks,
            per_chunk_bytes: plan.per_chunk_bytes,
            total_bytes: plan.total_bytes,
        };
        Ok(())
    })
}
