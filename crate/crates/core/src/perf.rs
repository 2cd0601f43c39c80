//! Analytic performance model of the two RIME stages: arithmetic
//! intensities, the roofline bound and total FLOP and byte counts.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::budget::DimensionSet;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RooflineDevice {
    pub name: String,
    /// Peak compute in GFLOPS/s.
    pub peak_gflops: f64,
    /// Memory bandwidth in GB/s.
    pub bandwidth_gbps: f64,
}

impl RooflineDevice {
    pub fn new(name: impl Into<String>, peak_gflops: f64, bandwidth_gbps: f64) -> Result<Self> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if !ok(peak_gflops) || !ok(bandwidth_gbps) {
            return Err(Error::invalid(format!(
                "device peak ({peak_gflops}) and bandwidth ({bandwidth_gbps}) must be positive"
            )));
        }
        Ok(RooflineDevice {
            name: name.into(),
            peak_gflops,
            bandwidth_gbps,
        })
    }

    /// Look up a built-in device by name (case-insensitive).
    pub fn builtin(name: &str) -> Option<RooflineDevice> {
        builtin_devices()
            .into_iter()
            .find(|d| d.name.eq_ignore_ascii_case(name))
    }
}

/// K40 (boost and a realistic sustained figure), K80, a Pascal projection
/// and a dual Xeon E5-2620v2 host.
pub fn builtin_devices() -> Vec<RooflineDevice> {
    [
        ("k40", 4290.0, 288.0),
        ("k40-realistic", 3156.0, 220.0),
        ("k80", 8740.0, 562.0),
        ("pascal", 12000.0, 1024.0),
        ("e5-2620v2", 201.6, 51.2),
    ]
    .into_iter()
    .map(|(n, p, b)| RooflineDevice {
        name: n.to_string(),
        peak_gflops: p,
        bandwidth_gbps: b,
    })
    .collect()
}

fn check_sources(p: u64, g: u64) -> Result<()> {
    if p + g == 0 {
        Err(Error::invalid("arithmetic intensity needs at least one source"))
    } else {
        Ok(())
    }
}

/// FLOPs of the per-antenna stage per `(t, p, λ)` cell.
pub fn ek_cell_flops(p: u64, g: u64) -> u64 {
    6 + 127 * (p + g)
}

pub fn ek_cell_bytes(p: u64, g: u64) -> u64 {
    4 * (6 + 3 * (p + g))
}

/// FLOPs of the per-baseline stage per `(t, bl, λ)` cell.
pub fn bsum_cell_flops(p: u64, g: u64) -> u64 {
    73 + 57 * p + 77 * g
}

pub fn bsum_cell_bytes(p: u64, g: u64) -> u64 {
    4 * (17 + 8 * p + 11 * g)
}

/// FLOPs per byte of the per-antenna stage with `p` point and `g`
/// Gaussian sources.
pub fn ek_arithmetic_intensity(p: u64, g: u64) -> Result<f64> {
    check_sources(p, g)?;
    Ok(ek_cell_flops(p, g) as f64 / ek_cell_bytes(p, g) as f64)
}

pub fn bsum_arithmetic_intensity(p: u64, g: u64) -> Result<f64> {
    check_sources(p, g)?;
    Ok(bsum_cell_flops(p, g) as f64 / bsum_cell_bytes(p, g) as f64)
}

/// `min(peak, ai · bandwidth)` in GFLOPS/s.
pub fn roofline_attainable(ai: f64, device: &RooflineDevice) -> f64 {
    device.peak_gflops.min(ai * device.bandwidth_gbps)
}

/// Intensity at which a kernel stops being memory bound.
pub fn balance_point(device: &RooflineDevice) -> f64 {
    device.peak_gflops / device.bandwidth_gbps
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCost {
    pub flops: u64,
    pub bytes: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeledCost {
    pub ek: StageCost,
    pub bsum: StageCost,
}

/// Total FLOPs and bytes of both stages over a full problem.
pub fn modeled_cost(dims: &DimensionSet) -> ModeledCost {
    let (p, g) = (dims.npsrc as u64, dims.ngsrc as u64);
    let ek_cells = (dims.ntime * dims.na * dims.nchan) as u64;
    let bsum_cells = (dims.ntime * dims.nbl * dims.nchan) as u64;
    ModeledCost {
        ek: StageCost {
            flops: ek_cells * ek_cell_flops(p, g),
            bytes: ek_cells * ek_cell_bytes(p, g),
        },
        bsum: StageCost {
            flops: bsum_cells * bsum_cell_flops(p, g),
            bytes: bsum_cells * bsum_cell_bytes(p, g),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub arithmetic_intensity: f64,
    pub attainable_gflops: f64,
    pub memory_bound: bool,
    pub flops: u64,
    pub bytes: u64,
    /// Time implied by the attainable rate.
    pub modeled_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerfReport {
    pub device: RooflineDevice,
    pub dims: DimensionSet,
    pub balance_point: f64,
    pub ek: StageReport,
    pub bsum: StageReport,
}

pub fn performance_report(dims: &DimensionSet, device: &RooflineDevice) -> Result<PerfReport> {
    let (p, g) = (dims.npsrc as u64, dims.ngsrc as u64);
    let cost = modeled_cost(dims);
    let balance = balance_point(device);
    let stage = |ai: f64, c: StageCost| {
        let attainable = roofline_attainable(ai, device);
        StageReport {
            arithmetic_intensity: ai,
            attainable_gflops: attainable,
            memory_bound: ai < balance,
            flops: c.flops,
            bytes: c.bytes,
            modeled_seconds: c.flops as f64 / (attainable * 1e9),
        }
    };
    Ok(PerfReport {
        device: device.clone(),
        dims: *dims,
        balance_point: balance,
        ek: stage(ek_arithmetic_intensity(p, g)?, cost.ek),
        bsum: stage(bsum_arithmetic_intensity(p, g)?, cost.bsum),
    })
}

impl PerfReport {
    pub fn to_table(&self) -> String {
        let d = &self.dims;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "device {} (peak {} GFLOPS/s, {} GB/s, balance {:.4} FLOPS/byte)",
            self.device.name, self.device.peak_gflops, self.device.bandwidth_gbps, self.balance_point
        );
        let _ = writeln!(
            s,
            "dims ntime={} na={} nbl={} nchan={} npsrc={} ngsrc={}",
            d.ntime, d.na, d.nbl, d.nchan, d.npsrc, d.ngsrc
        );
        let _ = writeln!(
            s,
            "{:<6} {:>10} {:>12} {:>8} {:>16} {:>16} {:>12}",
            "stage", "AI", "GFLOPS/s", "bound", "FLOPs", "bytes", "seconds"
        );
        for (name, r) in [("ek", &self.ek), ("bsum", &self.bsum)] {
            let _ = writeln!(
                s,
                "{:<6} {:>10.4} {:>12.1} {:>8} {:>16} {:>16} {:>12.3e}",
                name,
                r.arithmetic_intensity,
                r.attainable_gflops,
                if r.memory_bound { "memory" } else { "compute" },
                r.flops,
                r.bytes,
                r.modeled_seconds
            );
        }
        s
    }
}
