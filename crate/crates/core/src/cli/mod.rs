//! The `rime` command line.
//!
//! Numeric results go to stdout as a single JSON document; human-readable
//! tables go to stderr. Failures print one JSON line
//! `{"error": <tag>, "message": <text>}` on stderr and exit with 2 (usage),
//! 3 (data or file error) or 4 (infeasible memory budget).

mod budget_arg;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use budget_arg::BudgetSpec;

use crate::budget::{execute_pipeline, plan_chunks, ArrayRegistry, ChunkPlan, DimensionSet};
use crate::likelihood::{LogNormalization, ReductionStrategy};
use crate::obs::{load_observation, save_observation, simulate_observed, synthesize_observation, ArrayLayout, ObservationConfig};
use crate::perf::{performance_report, RooflineDevice};
use crate::sampler::{run_chain, Binding, BiroTarget, ChainSettings, ParamPrior, Prior};
use crate::sky::SourceCatalog;
use crate::{Error, ErrorKind, Precision, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "rime", version, about = "Radio interferometer measurement equation engine")]
pub struct Cli {
    /// Worker threads for the data-parallel stages (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Predict visibilities for a sky model and write an observation.
    Simulate(SimulateArgs),
    /// χ² and log-likelihood of a sky model against an observation.
    Chisq(ChisqArgs),
    /// Metropolis-Hastings sampling of sky-model parameters.
    Sample(SampleArgs),
    /// Arithmetic intensity, roofline and modeled cost.
    Report(ReportArgs),
    /// Time-chunk plan for a memory budget.
    Plan(PlanArgs),
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    #[arg(long, default_value = "f64")]
    pub precision: Precision,
    /// Bytes (optionally with K/M/G/KiB/MiB/GiB suffix) or `<N>x-single-timestep`.
    #[arg(long)]
    pub budget: Option<BudgetSpec>,
    #[arg(long, default_value_t = 1)]
    pub slots: usize,
    #[arg(long, default_value = "pairwise")]
    pub reduction: ReductionStrategy,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub sky: PathBuf,
    /// Observation whose geometry is reused.
    #[arg(long, conflicts_with = "layout", required_unless_present = "layout")]
    pub obs: Option<PathBuf>,
    /// Antenna layout JSON to synthesise the geometry from.
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Output observation directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Standard deviation of the noise on each real and imaginary part.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ChisqArgs {
    #[arg(long)]
    pub sky: PathBuf,
    #[arg(long)]
    pub obs: PathBuf,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub sky: PathBuf,
    #[arg(long)]
    pub obs: PathBuf,
    /// Parameter definitions: bindings, priors, proposal scales.
    #[arg(long)]
    pub params: PathBuf,
    /// Chain CSV output.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the summary JSON here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 1_000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct DimArgs {
    #[arg(long)]
    pub ntime: Option<usize>,
    #[arg(long)]
    pub na: Option<usize>,
    #[arg(long)]
    pub nchan: Option<usize>,
    #[arg(long)]
    pub npsrc: Option<usize>,
    #[arg(long)]
    pub ngsrc: Option<usize>,
    /// Take dimensions from this observation.
    #[arg(long)]
    pub obs: Option<PathBuf>,
    /// Take source counts from this sky model.
    #[arg(long)]
    pub sky: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub dims: DimArgs,
    /// Built-in device: k40, k40-realistic, k80, pascal, e5-2620v2.
    #[arg(long, default_value = "k40")]
    pub device: String,
    /// Custom device peak in GFLOPS/s (with --bandwidth).
    #[arg(long, requires = "bandwidth")]
    pub peak: Option<f64>,
    /// Custom device bandwidth in GB/s (with --peak).
    #[arg(long, requires = "peak")]
    pub bandwidth: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub dims: DimArgs,
    #[arg(long)]
    pub budget: BudgetSpec,
    #[arg(long, default_value_t = 1)]
    pub slots: usize,
    #[arg(long, default_value = "f64")]
    pub precision: Precision,
}

/// Run-level settings shared by the engine-backed subcommands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub precision: Precision,
    pub slots: usize,
    pub reduction: ReductionStrategy,
    pub seed: u64,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

impl RunConfig {
    /// Reject runs that would write over one of their own inputs or write
    /// two outputs to the same place.
    pub fn validate(&self) -> Result<()> {
        if self.slots == 0 {
            return Err(Error::invalid("--slots must be at least 1"));
        }
        let norm = |p: &Path| std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
        let inputs: Vec<PathBuf> = self.inputs.iter().map(|p| norm(p)).collect();
        let mut seen: Vec<PathBuf> = Vec::new();
        for out in &self.outputs {
            let o = norm(out);
            if inputs.iter().any(|i| *i == o || i.starts_with(&o)) {
                return Err(Error::invalid(format!("output {} overlaps an input", out.display())));
            }
            if seen.contains(&o) {
                return Err(Error::invalid(format!("output {} given twice", out.display())));
            }
            seen.push(o);
        }
        Ok(())
    }
}

/// One sampled parameter in a `--params` file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    #[serde(flatten)]
    pub binding: Binding,
    pub prior: ParamPrior,
    /// Proposal standard deviation.
    pub scale: f64,
    /// Starting value; defaults to the value in the sky model.
    #[serde(default)]
    pub init: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamFile {
    pub parameters: Vec<ParamSpec>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serialisable");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn load_sky(path: &Path) -> Result<SourceCatalog> {
    let cat = SourceCatalog::load_json(path)?;
    cat.ensure_valid()?;
    Ok(cat)
}

fn resolve_budget(
    spec: &BudgetSpec,
    registry: &ArrayRegistry,
    dims: &DimensionSet,
) -> Result<u64> {
    spec.resolve(registry, dims)
}

fn engine_plan(engine: &EngineArgs, catalog: &SourceCatalog, config: &ObservationConfig) -> Result<ChunkPlan> {
    let dims = DimensionSet::of(catalog, config);
    match &engine.budget {
        Some(b) => {
            let registry = ArrayRegistry::rime_default(engine.precision);
            let bytes = resolve_budget(b, &registry, &dims)?;
            plan_chunks(&registry, &dims, bytes, engine.slots)
        }
        None => ChunkPlan::with_chunk_size(config.ntime, config.ntime, engine.slots),
    }
}

fn simulate(args: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut inputs = vec![args.sky.clone()];
    inputs.extend(args.obs.clone());
    inputs.extend(args.layout.clone());
    RunConfig {
        precision: Precision::F64,
        slots: 1,
        reduction: ReductionStrategy::default(),
        seed: args.seed,
        inputs,
        outputs: vec![args.out.clone()],
    }
    .validate()?;
    let catalog = load_sky(&args.sky)?;
    let config = match (&args.obs, &args.layout) {
        (Some(obs), _) => simulate_observed(&catalog, load_observation(obs)?, args.noise, args.seed)?,
        (None, Some(layout)) => {
            let layout: ArrayLayout = read_json(layout)?;
            synthesize_observation(&catalog, &layout, args.noise, args.seed)?
        }
        (None, None) => return Err(Error::invalid("one of --obs or --layout is required")),
    };
    save_observation(&config, &args.out)?;
    let _ = writeln!(
        err,
        "wrote {} visibilities (ntime={} nbl={} nchan={}) to {}",
        config.nvis(),
        config.ntime,
        config.nbl,
        config.nchan,
        args.out.display()
    );
    emit(
        out,
        &json!({
            "out": args.out,
            "ntime": config.ntime,
            "na": config.na,
            "nbl": config.nbl,
            "nchan": config.nchan,
            "nvis": config.nvis(),
            "noise": args.noise,
            "seed": args.seed,
        }),
    )
}

fn chisq(args: &ChisqArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Result<()> {
    RunConfig {
        precision: args.engine.precision,
        slots: args.engine.slots,
        reduction: args.engine.reduction,
        seed: 0,
        inputs: vec![args.sky.clone(), args.obs.clone()],
        outputs: vec![],
    }
    .validate()?;
    let catalog = load_sky(&args.sky)?;
    let config = load_observation(&args.obs)?;
    let plan = engine_plan(&args.engine, &catalog, &config)?;
    let result = execute_pipeline(&plan, &catalog, &config, args.engine.reduction, args.engine.precision)?;
    let norm = LogNormalization::from_correlation_weights(&config.weights)?;
    let log_likelihood = if norm.count > 0 {
        Some(norm.log_likelihood(result.chi2)?)
    } else {
        None
    };
    emit(
        out,
        &json!({
            "chi2": result.chi2,
            "log_likelihood": log_likelihood,
            "n_data": norm.count,
            "reduced_chi2": if norm.count > 0 { Some(result.chi2 / norm.count as f64) } else { None },
            "precision": args.engine.precision,
            "num_chunks": plan.num_chunks,
            "chunk_timesteps": plan.chunk_timesteps,
        }),
    )
}

fn sample(args: &SampleArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut outputs = vec![args.out.clone()];
    outputs.extend(args.summary.clone());
    RunConfig {
        precision: args.engine.precision,
        slots: args.engine.slots,
        reduction: args.engine.reduction,
        seed: args.seed,
        inputs: vec![args.sky.clone(), args.obs.clone(), args.params.clone()],
        outputs,
    }
    .validate()?;
    let catalog = load_sky(&args.sky)?;
    let config = load_observation(&args.obs)?;
    let params: ParamFile = read_json(&args.params)?;
    if params.parameters.is_empty() {
        return Err(Error::invalid("no parameters to sample"));
    }
    let bindings: Vec<Binding> = params.parameters.iter().map(|p| p.binding.clone()).collect();
    let prior = Prior::new(params.parameters.iter().map(|p| p.prior).collect())?;
    let scales: Vec<f64> = params.parameters.iter().map(|p| p.scale).collect();
    let names: Vec<String> = bindings.iter().map(|b| b.name.clone()).collect();
    let plan = engine_plan(&args.engine, &catalog, &config)?;

    let mut target = BiroTarget::new(bindings.clone(), prior, &catalog, &config)?
        .with_precision(args.engine.precision)
        .with_strategy(args.engine.reduction);
    if plan.num_chunks > 1 {
        target = target.with_plan(plan)?;
    }
    let defaults = crate::sampler::ParameterVector::read(bindings, &catalog)?;
    let init: Vec<f64> = params
        .parameters
        .iter()
        .zip(&defaults.values)
        .map(|(p, &d)| p.init.unwrap_or(d))
        .collect();
    let settings = ChainSettings {
        steps: args.steps,
        burn_in: args.burn_in,
        thin: args.thin,
        seed: args.seed,
    };
    let chain = run_chain(&mut target, init, &scales, settings)?;
    chain.save_csv(&names, &args.out)?;
    let summary = chain.summary(&names);
    if let Some(path) = &args.summary {
        write_json(path, &summary)?;
    }
    let _ = writeln!(err, "{:<16} {:>16} {:>16}", "parameter", "mean", "sd");
    for ((n, m), s) in names.iter().zip(&summary.means).zip(&summary.sds) {
        let _ = writeln!(err, "{n:<16} {m:>16.8} {s:>16.8}");
    }
    let _ = writeln!(err, "acceptance rate {:.4}", summary.acceptance_rate);
    emit(
        out,
        &json!({
            "chain": args.out,
            "summary": summary,
            "evaluations": target.evaluations(),
        }),
    )
}

fn resolve_dims(args: &DimArgs) -> Result<DimensionSet> {
    let (mut ntime, mut na, mut nchan) = (None, None, None);
    let (mut npsrc, mut ngsrc) = (None, None);
    if let Some(obs) = &args.obs {
        let c = load_observation(obs)?;
        (ntime, na, nchan) = (Some(c.ntime), Some(c.na), Some(c.nchan));
    }
    if let Some(sky) = &args.sky {
        let s = load_sky(sky)?;
        (npsrc, ngsrc) = (Some(s.npsrc()), Some(s.ngsrc()));
    }
    let pick = |flag: Option<usize>, found: Option<usize>, name: &str| {
        flag.or(found)
            .ok_or_else(|| Error::invalid(format!("--{name} is required without --obs")))
    };
    let dims = DimensionSet::new(
        pick(args.ntime, ntime, "ntime")?,
        pick(args.na, na, "na")?,
        pick(args.nchan, nchan, "nchan")?,
        args.npsrc.or(npsrc).unwrap_or(if args.ngsrc.is_some() { 0 } else { 1 }),
        args.ngsrc.or(ngsrc).unwrap_or(0),
    );
    if dims.na < 2 || dims.ntime == 0 || dims.nchan == 0 {
        return Err(Error::invalid("need ntime >= 1, na >= 2 and nchan >= 1"));
    }
    Ok(dims)
}

fn report(args: &ReportArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let dims = resolve_dims(&args.dims)?;
    let device = match (args.peak, args.bandwidth) {
        (Some(p), Some(b)) => RooflineDevice::new("custom", p, b)?,
        _ => RooflineDevice::builtin(&args.device)
            .ok_or_else(|| Error::invalid(format!("unknown device '{}'", args.device)))?,
    };
    let rep = performance_report(&dims, &device)?;
    let _ = write!(err, "{}", rep.to_table());
    emit(out, &rep)
}

fn plan(args: &PlanArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let dims = resolve_dims(&args.dims)?;
    let registry = ArrayRegistry::rime_default(args.precision);
    let bytes = resolve_budget(&args.budget, &registry, &dims)?;
    let plan = plan_chunks(&registry, &dims, bytes, args.slots)?;
    let _ = writeln!(
        err,
        "{} chunks of {} timesteps, {} bytes per chunk, {} slots resident = {} of {} bytes",
        plan.num_chunks,
        plan.chunk_timesteps,
        plan.per_chunk_bytes,
        plan.slots,
        plan.resident_bytes(),
        plan.budget_bytes
    );
    emit(out, &plan)
}

fn emit(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string(value).expect("serialisable");
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
}

pub fn exit_code(error: &Error) -> i32 {
    match error.kind() {
        ErrorKind::InvalidArgument => EXIT_USAGE,
        ErrorKind::Data | ErrorKind::Io => EXIT_DATA,
        ErrorKind::Infeasible => EXIT_INFEASIBLE,
    }
}

fn error_line(tag: &str, message: &str) -> String {
    json!({ "error": tag, "message": message }).to_string()
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let run = |out: &mut dyn Write, err: &mut dyn Write| match &cli.command {
        Command::Simulate(a) => simulate(a, out, err),
        Command::Chisq(a) => chisq(a, out, err),
        Command::Sample(a) => sample(a, out, err),
        Command::Report(a) => report(a, out, err),
        Command::Plan(a) => plan(a, out, err),
    };
    // outputs are buffered so the run can move onto a worker pool
    let buffered = || {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let r = run(&mut o, &mut e);
        (r, o, e)
    };
    let (result, o, e) = match cli.workers {
        Some(0) => return Err(Error::invalid("--workers must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(e.to_string()))?
            .install(buffered),
        None => buffered(),
    };
    let _ = err.write_all(&e);
    out.write_all(&o).map_err(|e| Error::io("<stdout>", e))?;
    result
}

/// Parse `argv` (including the program name), run the subcommand and
/// return the process exit status.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = write!(out, "{e}");
                return if e.kind() == K::DisplayHelpOnMissingArgumentOrSubcommand { EXIT_USAGE } else { EXIT_OK };
            }
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("usage error").trim_start_matches("error: ");
            let _ = writeln!(err, "{}", error_line("usage", first));
            return EXIT_USAGE;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{}", error_line(e.tag(), &e.to_string()));
            exit_code(&e)
        }
    }
}
