//! Memory budgeting: a registry of arrays with symbolically named
//! dimensions, footprint estimation, time-axis chunk planning, and a
//! pipelined executor that evaluates χ² chunk by chunk.

use std::fmt;
use std::ops::Range;
use std::sync::mpsc;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::likelihood::{reduce_sum, CompensatedSum, ReductionStrategy};
use crate::obs::{baseline_count, ObservationConfig};
use crate::rime;
use crate::sky::SourceCatalog;
use crate::{Error, Precision, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementType {
    F32,
    F64,
    C64,
    C128,
    I32,
}

impl ElementType {
    pub fn size(self) -> u64 {
        match self {
            ElementType::F32 | ElementType::I32 => 4,
            ElementType::F64 | ElementType::C64 => 8,
            ElementType::C128 => 16,
        }
    }

    /// Real element type of the given precision.
    pub fn real(precision: Precision) -> Self {
        match precision {
            Precision::F32 => ElementType::F32,
            Precision::F64 => ElementType::F64,
        }
    }

    pub fn complex(precision: Precision) -> Self {
        match precision {
            Precision::F32 => ElementType::C64,
            Precision::F64 => ElementType::C128,
        }
    }
}

impl fmt::Display for ElementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ElementType::F32 => "f32",
            ElementType::F64 => "f64",
            ElementType::C64 => "c64",
            ElementType::C128 => "c128",
            ElementType::I32 => "i32",
        };
        f.write_str(s)
    }
}

/// One axis of an array shape: a named problem dimension or a literal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dim {
    Fixed(usize),
    Named(String),
}

impl From<&str> for Dim {
    fn from(s: &str) -> Self {
        Dim::Named(s.to_string())
    }
}

impl From<usize> for Dim {
    fn from(n: usize) -> Self {
        Dim::Fixed(n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub name: String,
    pub shape: Vec<Dim>,
    pub element: ElementType,
}

impl ArraySpec {
    pub fn new(name: impl Into<String>, shape: impl IntoIterator<Item = Dim>, element: ElementType) -> Self {
        ArraySpec {
            name: name.into(),
            shape: shape.into_iter().collect(),
            element,
        }
    }

    /// Whether the array grows with the number of timesteps.
    pub fn is_time_varying(&self) -> bool {
        self.shape.iter().any(|d| matches!(d, Dim::Named(n) if n == "ntime"))
    }

    pub fn bytes(&self, dims: &DimensionSet) -> Result<u64> {
        let mut elements: u64 = 1;
        for d in &self.shape {
            elements *= match d {
                Dim::Fixed(n) => *n as u64,
                Dim::Named(name) => dims.resolve(name)? as u64,
            };
        }
        Ok(elements * self.element.size())
    }
}

/// Concrete sizes of the RIME dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionSet {
    pub ntime: usize,
    pub na: usize,
    pub nbl: usize,
    pub nchan: usize,
    pub npsrc: usize,
    pub ngsrc: usize,
}

impl DimensionSet {
    /// Dimensions with `nbl` derived from `na`.
    pub fn new(ntime: usize, na: usize, nchan: usize, npsrc: usize, ngsrc: usize) -> Self {
        DimensionSet {
            ntime,
            na,
            nbl: baseline_count(na),
            nchan,
            npsrc,
            ngsrc,
        }
    }

    pub fn of(catalog: &SourceCatalog, config: &ObservationConfig) -> Self {
        DimensionSet {
            ntime: config.ntime,
            na: config.na,
            nbl: config.nbl,
            nchan: config.nchan,
            npsrc: catalog.npsrc(),
            ngsrc: catalog.ngsrc(),
        }
    }

    pub fn nsrc(&self) -> usize {
        self.npsrc + self.ngsrc
    }

    pub fn with_ntime(self, ntime: usize) -> Self {
        DimensionSet { ntime, ..self }
    }

    pub fn resolve(&self, name: &str) -> Result<usize> {
        Ok(match name {
            "ntime" => self.ntime,
            "na" => self.na,
            "nbl" => self.nbl,
            "nchan" => self.nchan,
            "npsrc" => self.npsrc,
            "ngsrc" => self.ngsrc,
            "nsrc" => self.nsrc(),
            other => return Err(Error::UnresolvedDimension(other.to_string())),
        })
    }
}

/// Arrays registered for a problem, in registration order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ArrayRegistry {
    arrays: Vec<ArraySpec>,
}

impl ArrayRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_array(&mut self, spec: ArraySpec) -> Result<&mut Self> {
        if self.arrays.iter().any(|a| a.name == spec.name) {
            return Err(Error::DuplicateArray(spec.name));
        }
        self.arrays.push(spec);
        Ok(self)
    }

    pub fn arrays(&self) -> &[ArraySpec] {
        &self.arrays
    }

    pub fn get(&self, name: &str) -> Option<&ArraySpec> {
        self.arrays.iter().find(|a| a.name == name)
    }

    pub fn len(&self) -> usize {
        self.arrays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrays.is_empty()
    }

    /// Every input array of the RIME plus the per-antenna terms, model
    /// visibilities and χ² terms it produces.
    pub fn rime_default(precision: Precision) -> Self {
        let ft = ElementType::real(precision);
        let ct = ElementType::complex(precision);
        let d = |s: &str| Dim::from(s);
        let specs = [
            ArraySpec::new("uvw", [d("ntime"), d("na"), 3.into()], ft),
            ArraySpec::new("antenna_pairs", [d("ntime"), d("nbl"), 2.into()], ElementType::I32),
            ArraySpec::new("lm", [d("nsrc"), 2.into()], ft),
            ArraySpec::new("brightness", [d("ntime"), d("nsrc"), 4.into()], ft),
            ArraySpec::new("alpha", [d("nsrc")], ft),
            ArraySpec::new("gaussian_shape", [d("ngsrc"), 3.into()], ft),
            ArraySpec::new("wavelength", [d("nchan")], ft),
            ArraySpec::new("pointing_errors", [d("ntime"), d("na"), 2.into()], ft),
            ArraySpec::new("weights", [d("ntime"), d("nbl"), d("nchan"), 4.into()], ft),
            ArraySpec::new("observed", [d("ntime"), d("nbl"), d("nchan"), 4.into()], ct),
            ArraySpec::new("antenna_terms", [d("ntime"), d("na"), d("nsrc"), d("nchan")], ct),
            ArraySpec::new("model_vis", [d("ntime"), d("nbl"), d("nchan"), 4.into()], ct),
            ArraySpec::new("chi2_terms", [d("ntime"), d("nbl"), d("nchan")], ft),
        ];
        let mut registry = ArrayRegistry::new();
        for spec in specs {
            registry.register_array(spec).expect("names are unique");
        }
        registry
    }

    /// Union of two registries; fails on a shared name.
    pub fn merged(&self, other: &ArrayRegistry) -> Result<ArrayRegistry> {
        let mut out = self.clone();
        for spec in &other.arrays {
            out.register_array(spec.clone())?;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Footprint {
    pub total_bytes: u64,
    pub per_array: Vec<(String, u64)>,
}

pub fn memory_footprint(registry: &ArrayRegistry, dims: &DimensionSet) -> Result<Footprint> {
    let per_array = registry
        .arrays
        .iter()
        .map(|a| Ok((a.name.clone(), a.bytes(dims)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Footprint {
        total_bytes: per_array.iter().map(|(_, b)| b).sum(),
        per_array,
    })
}

/// Bytes for one timestep of every time-varying array, and bytes of every
/// time-invariant array.
fn split_footprint(registry: &ArrayRegistry, dims: &DimensionSet) -> Result<(u64, u64)> {
    let one = dims.with_ntime(1);
    let mut per_timestep = 0;
    let mut invariant = 0;
    for a in &registry.arrays {
        if a.is_time_varying() {
            per_timestep += a.bytes(&one)?;
        } else {
            invariant += a.bytes(&one)?;
        }
    }
    Ok((per_timestep, invariant))
}

/// Footprint of a single `chunk_timesteps` slot.
pub fn chunk_bytes(registry: &ArrayRegistry, dims: &DimensionSet, chunk_timesteps: usize) -> Result<u64> {
    let (per_timestep, invariant) = split_footprint(registry, dims)?;
    Ok(invariant + per_timestep * chunk_timesteps as u64)
}

/// Subdivision of the time axis into equally sized chunks (the last may be
/// partial), `slots` of which may be resident at once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkPlan {
    pub ntime: usize,
    pub chunk_timesteps: usize,
    pub num_chunks: usize,
    pub slots: usize,
    pub per_chunk_bytes: u64,
    /// Footprint of the whole problem without subdivision.
    pub total_bytes: u64,
    pub budget_bytes: u64,
}

impl ChunkPlan {
    /// A plan with a single chunk spanning every timestep.
    pub fn monolithic(ntime: usize) -> Self {
        ChunkPlan {
            ntime,
            chunk_timesteps: ntime,
            num_chunks: 1,
            slots: 1,
            per_chunk_bytes: 0,
            total_bytes: 0,
            budget_bytes: 0,
        }
    }

    /// A plan with a fixed chunk size, ignoring memory accounting.
    pub fn with_chunk_size(ntime: usize, chunk_timesteps: usize, slots: usize) -> Result<Self> {
        if chunk_timesteps == 0 || slots == 0 || ntime == 0 {
            return Err(Error::invalid("ntime, chunk size and slots must be positive"));
        }
        let chunk_timesteps = chunk_timesteps.min(ntime);
        Ok(ChunkPlan {
            ntime,
            chunk_timesteps,
            num_chunks: ntime.div_ceil(chunk_timesteps),
            slots,
            per_chunk_bytes: 0,
            total_bytes: 0,
            budget_bytes: 0,
        })
    }

    pub fn chunk_range(&self, index: usize) -> Range<usize> {
        let start = index * self.chunk_timesteps;
        start..(start + self.chunk_timesteps).min(self.ntime)
    }

    pub fn chunks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.num_chunks).map(|i| self.chunk_range(i))
    }

    /// Bytes resident when every slot holds a chunk.
    pub fn resident_bytes(&self) -> u64 {
        self.slots as u64 * self.per_chunk_bytes
    }
}

/// Largest time chunk such that `slots` chunks fit in `budget` bytes.
/// Time-invariant arrays are charged once per slot.
pub fn plan_chunks(
    registry: &ArrayRegistry,
    dims: &DimensionSet,
    budget: u64,
    slots: usize,
) -> Result<ChunkPlan> {
    if slots == 0 {
        return Err(Error::invalid("slots must be at least 1"));
    }
    if dims.ntime == 0 {
        return Err(Error::invalid("ntime must be at least 1"));
    }
    let (per_timestep, invariant) = split_footprint(registry, dims)?;
    let slots_u = slots as u64;
    let minimum = slots_u * (invariant + per_timestep);
    if budget < minimum {
        return Err(Error::Infeasible { budget, minimum });
    }
    let per_slot = budget / slots_u;
    let chunk_timesteps = (per_slot - invariant)
        .checked_div(per_timestep)
        .map_or(dims.ntime, |n| (n as usize).min(dims.ntime));
    Ok(ChunkPlan {
        ntime: dims.ntime,
        chunk_timesteps,
        num_chunks: dims.ntime.div_ceil(chunk_timesteps),
        slots,
        per_chunk_bytes: invariant + per_timestep * chunk_timesteps as u64,
        total_bytes: invariant + per_timestep * dims.ntime as u64,
        budget_bytes: budget,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub chi2: f64,
    pub per_chunk_chi2: Vec<f64>,
}

struct StagedChunk {
    index: usize,
    catalog: SourceCatalog,
    config: ObservationConfig,
}

fn solve_chunk(
    chunk: &StagedChunk,
    strategy: ReductionStrategy,
    precision: Precision,
) -> Result<f64> {
    let out = rime::evaluate(&chunk.catalog, &chunk.config, precision, false)?;
    reduce_sum(&out.chi2_terms, strategy)
}

/// Evaluate χ² chunk by chunk according to `plan`.
///
/// Within a chunk the χ² terms are reduced with `strategy`; chunk results
/// are then combined in ascending chunk order with compensated summation.
/// With `slots >= 2` the inputs of the next chunk are staged on a separate
/// thread while the current chunk is evaluated; at most `slots` chunks are
/// resident at once. The result does not depend on `slots`.
pub fn execute_pipeline(
    plan: &ChunkPlan,
    catalog: &SourceCatalog,
    config: &ObservationConfig,
    strategy: ReductionStrategy,
    precision: Precision,
) -> Result<PipelineResult> {
    if plan.ntime != config.ntime {
        return Err(Error::mismatch("plan", format!("ntime = {}", config.ntime), format!("ntime = {}", plan.ntime)));
    }
    rime::check_inputs(catalog, config)?;
    let stage = |index: usize| StagedChunk {
        index,
        catalog: catalog.time_slice(plan.chunk_range(index)),
        config: config.time_slice(plan.chunk_range(index)),
    };
    let annotate = |index: usize| move |e: Error| Error::Chunk {
        index,
        source: Box::new(e),
    };

    let mut per_chunk = Vec::with_capacity(plan.num_chunks);
    if plan.slots <= 1 || plan.num_chunks == 1 {
        for index in 0..plan.num_chunks {
            let chunk = stage(index);
            per_chunk.push(solve_chunk(&chunk, strategy, precision).map_err(annotate(index))?);
        }
    } else {
        // One chunk is being solved and one is being staged by the producer;
        // the channel holds the remaining `slots - 2`.
        let (tx, rx) = mpsc::sync_channel::<StagedChunk>(plan.slots - 2);
        thread::scope(|scope| -> Result<()> {
            // owned here so an early error drops the receiver and unblocks the producer
            let rx = rx;
            scope.spawn(move || {
                for index in 0..plan.num_chunks {
                    if tx.send(stage(index)).is_err() {
                        break;
                    }
                }
            });
            for chunk in rx.iter() {
                let chi2 = solve_chunk(&chunk, strategy, precision).map_err(annotate(chunk.index))?;
                debug_assert_eq!(chunk.index, per_chunk.len());
                per_chunk.push(chi2);
            }
            Ok(())
        })?;
    }

    let mut total = CompensatedSum::new();
    for &c in &per_chunk {
        total.add(c);
    }
    Ok(PipelineResult {
        chi2: total.value(),
        per_chunk_chi2: per_chunk,
    })
}
