//! Bayesian inference over sky-model parameters.
//!
//! Parameters are bound to catalog fields through [`Binding`]s. A
//! [`BiroTarget`] owns a private working copy of the catalog and, between
//! evaluations, re-applies only the bindings whose values changed before
//! running the RIME and the likelihood. On top of that sit a random-walk
//! Metropolis-Hastings sampler ([`mh_step`], [`run_chain`]) and
//! midpoint-rule evidence for up to three parameters ([`grid_log_evidence`]).

use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::budget::{execute_pipeline, ChunkPlan};
use crate::likelihood::{reduce_sum, LogNormalization, ReductionStrategy};
use crate::obs::ObservationConfig;
use crate::rime;
use crate::sky::{SourceCatalog, SourceRef};
use crate::{Error, Precision, Result};

/// Catalog field a parameter controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamField {
    I,
    Q,
    U,
    V,
    Alpha,
    L,
    M,
    Emaj,
    Emin,
    Pa,
}

impl ParamField {
    fn is_stokes(self) -> bool {
        matches!(self, ParamField::I | ParamField::Q | ParamField::U | ParamField::V)
    }

    fn is_shape(self) -> bool {
        matches!(self, ParamField::Emaj | ParamField::Emin | ParamField::Pa)
    }
}

impl fmt::Display for ParamField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParamField::I => "i",
            ParamField::Q => "q",
            ParamField::U => "u",
            ParamField::V => "v",
            ParamField::Alpha => "alpha",
            ParamField::L => "l",
            ParamField::M => "m",
            ParamField::Emaj => "emaj",
            ParamField::Emin => "emin",
            ParamField::Pa => "pa",
        };
        f.write_str(s)
    }
}

impl FromStr for ParamField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "i" => ParamField::I,
            "q" => ParamField::Q,
            "u" => ParamField::U,
            "v" => ParamField::V,
            "alpha" => ParamField::Alpha,
            "l" => ParamField::L,
            "m" => ParamField::M,
            "emaj" => ParamField::Emaj,
            "emin" => ParamField::Emin,
            "pa" => ParamField::Pa,
            other => return Err(Error::invalid(format!("unknown parameter field '{other}'"))),
        })
    }
}

/// Maps one parameter to a field of one source. Stokes fields may be
/// restricted to a span of timesteps; by default they cover all of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Binding {
    pub name: String,
    pub source: SourceRef,
    pub field: ParamField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timesteps: Option<Range<usize>>,
}

impl Binding {
    pub fn new(name: impl Into<String>, source: SourceRef, field: ParamField) -> Self {
        Binding {
            name: name.into(),
            source,
            field,
            timesteps: None,
        }
    }

    pub fn over(mut self, timesteps: Range<usize>) -> Self {
        self.timesteps = Some(timesteps);
        self
    }

    fn fail(&self) -> Error {
        Error::Binding(self.name.clone())
    }

    /// Check that the binding targets an existing field of `catalog`.
    pub fn check(&self, catalog: &SourceCatalog) -> Result<()> {
        let ntime = match self.source {
            SourceRef::Point(i) => catalog.point_sources.get(i).map(|s| s.spectrum.ntime()),
            SourceRef::Gaussian(i) => catalog.gaussian_sources.get(i).map(|s| s.spectrum.ntime()),
        }
        .ok_or_else(|| self.fail())?;
        if self.field.is_shape() && matches!(self.source, SourceRef::Point(_)) {
            return Err(self.fail());
        }
        match &self.timesteps {
            Some(r) if !self.field.is_stokes() || r.is_empty() || r.end > ntime => Err(self.fail()),
            _ => Ok(()),
        }
    }

    fn apply(&self, catalog: &mut SourceCatalog, value: f64) -> Result<()> {
        self.check(catalog)?;
        let (direction, spectrum, shape) = match self.source {
            SourceRef::Point(i) => {
                let s = &mut catalog.point_sources[i];
                (&mut s.direction, &mut s.spectrum, None)
            }
            SourceRef::Gaussian(i) => {
                let s = &mut catalog.gaussian_sources[i];
                (&mut s.direction, &mut s.spectrum, Some(&mut s.shape))
            }
        };
        let span = self.timesteps.clone().unwrap_or(0..spectrum.ntime());
        match self.field {
            ParamField::I => spectrum.i[span].fill(value),
            ParamField::Q => spectrum.q[span].fill(value),
            ParamField::U => spectrum.u[span].fill(value),
            ParamField::V => spectrum.v[span].fill(value),
            ParamField::Alpha => spectrum.alpha = value,
            ParamField::L => direction.l = value,
            ParamField::M => direction.m = value,
            ParamField::Emaj => shape.ok_or_else(|| self.fail())?.emaj = value,
            ParamField::Emin => shape.ok_or_else(|| self.fail())?.emin = value,
            ParamField::Pa => shape.ok_or_else(|| self.fail())?.pa = value,
        }
        Ok(())
    }

    /// Current value; for a Stokes span this is its first timestep.
    fn read(&self, catalog: &SourceCatalog) -> Result<f64> {
        self.check(catalog)?;
        let (direction, spectrum, shape) = match self.source {
            SourceRef::Point(i) => {
                let s = &catalog.point_sources[i];
                (s.direction, &s.spectrum, None)
            }
            SourceRef::Gaussian(i) => {
                let s = &catalog.gaussian_sources[i];
                (s.direction, &s.spectrum, Some(s.shape))
            }
        };
        let t = self.timesteps.as_ref().map_or(0, |r| r.start);
        Ok(match self.field {
            ParamField::I => spectrum.i[t],
            ParamField::Q => spectrum.q[t],
            ParamField::U => spectrum.u[t],
            ParamField::V => spectrum.v[t],
            ParamField::Alpha => spectrum.alpha,
            ParamField::L => direction.l,
            ParamField::M => direction.m,
            ParamField::Emaj => shape.ok_or_else(|| self.fail())?.emaj,
            ParamField::Emin => shape.ok_or_else(|| self.fail())?.emin,
            ParamField::Pa => shape.ok_or_else(|| self.fail())?.pa,
        })
    }
}

/// Parameter values together with the fields they are bound to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub values: Vec<f64>,
    pub bindings: Vec<Binding>,
}

impl ParameterVector {
    pub fn new(values: Vec<f64>, bindings: Vec<Binding>) -> Result<Self> {
        if values.len() != bindings.len() {
            return Err(Error::mismatch("parameters", bindings.len(), values.len()));
        }
        Ok(ParameterVector { values, bindings })
    }

    /// Current values of `bindings` in `catalog`.
    pub fn read(bindings: Vec<Binding>, catalog: &SourceCatalog) -> Result<Self> {
        let values = bindings.iter().map(|b| b.read(catalog)).collect::<Result<_>>()?;
        Ok(ParameterVector { values, bindings })
    }

    pub fn apply(&self, catalog: &mut SourceCatalog) -> Result<()> {
        for (b, &v) in self.bindings.iter().zip(&self.values) {
            b.apply(catalog, v)?;
        }
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.bindings.iter().map(|b| b.name.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamPrior {
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
}

impl ParamPrior {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ParamPrior::Uniform { lo, hi } if !(lo < hi && lo.is_finite() && hi.is_finite()) => {
                Err(Error::invalid(format!("uniform prior needs lo < hi, got [{lo}, {hi}]")))
            }
            ParamPrior::Normal { mean, sd } if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) => {
                Err(Error::invalid(format!("normal prior needs sd > 0, got {sd}")))
            }
            _ => Ok(()),
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        match *self {
            ParamPrior::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    -(hi - lo).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            ParamPrior::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                -0.5 * z * z - sd.ln() - 0.5 * std::f64::consts::TAU.ln()
            }
        }
    }
}

/// Independent per-parameter priors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prior(pub Vec<ParamPrior>);

impl Prior {
    pub fn new(parts: Vec<ParamPrior>) -> Result<Self> {
        for p in &parts {
            p.validate()?;
        }
        Ok(Prior(parts))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `ln π(θ)`, `−∞` outside the support.
    pub fn log_density(&self, values: &[f64]) -> f64 {
        self.0.iter().zip(values).map(|(p, &x)| p.log_density(x)).sum()
    }
}

/// One evaluation of a target density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub log_posterior: f64,
    /// χ² of the model at this point, when the target has one and the point
    /// lies inside the prior support.
    pub chi2: Option<f64>,
}

/// An unnormalised log density over a parameter vector.
pub trait Target {
    fn dim(&self) -> usize;
    fn evaluate(&mut self, values: &[f64]) -> Result<Evaluation>;
}

/// A target given by a closure returning the log density.
pub struct FnTarget<F> {
    dim: usize,
    f: F,
}

impl<F: FnMut(&[f64]) -> f64> FnTarget<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnTarget { dim, f }
    }
}

impl<F: FnMut(&[f64]) -> f64> Target for FnTarget<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&mut self, values: &[f64]) -> Result<Evaluation> {
        Ok(Evaluation {
            log_posterior: (self.f)(values),
            chi2: None,
        })
    }
}

/// Posterior of sky-model parameters given an observation.
pub struct BiroTarget<'a> {
    bindings: Vec<Binding>,
    prior: Prior,
    config: &'a ObservationConfig,
    working: SourceCatalog,
    applied: Vec<Option<f64>>,
    norm: LogNormalization,
    precision: Precision,
    strategy: ReductionStrategy,
    plan: Option<ChunkPlan>,
    evaluations: u64,
}

impl<'a> BiroTarget<'a> {
    pub fn new(
        bindings: Vec<Binding>,
        prior: Prior,
        catalog: &SourceCatalog,
        config: &'a ObservationConfig,
    ) -> Result<Self> {
        if prior.len() != bindings.len() {
            return Err(Error::mismatch("prior", bindings.len(), prior.len()));
        }
        for b in &bindings {
            b.check(catalog)?;
        }
        rime::check_inputs(catalog, config)?;
        let norm = LogNormalization::from_correlation_weights(&config.weights)?;
        if norm.count == 0 {
            return Err(Error::validation("weights", "no positive weights"));
        }
        let applied = vec![None; bindings.len()];
        Ok(BiroTarget {
            bindings,
            prior,
            config,
            working: catalog.clone(),
            applied,
            norm,
            precision: Precision::F64,
            strategy: ReductionStrategy::default(),
            plan: None,
            evaluations: 0,
        })
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn with_strategy(mut self, strategy: ReductionStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    /// Evaluate χ² chunk by chunk under `plan` instead of in one pass.
    pub fn with_plan(mut self, plan: ChunkPlan) -> Result<Self> {
        if plan.ntime != self.config.ntime {
            return Err(Error::mismatch("plan", format!("ntime = {}", self.config.ntime), format!("ntime = {}", plan.ntime)));
        }
        self.plan = Some(plan);
        Ok(self)
    }

    pub fn bindings(&self) -> &[Binding] {
        &self.bindings
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    /// Number of RIME evaluations so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Working catalog as of the last evaluation.
    pub fn catalog(&self) -> &SourceCatalog {
        &self.working
    }

    /// Count of scalar residuals entering the likelihood.
    pub fn data_count(&self) -> usize {
        self.norm.count
    }

    fn set(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.bindings.len() {
            return Err(Error::mismatch("parameters", self.bindings.len(), values.len()));
        }
        for (i, &v) in values.iter().enumerate() {
            if self.applied[i].map(f64::to_bits) != Some(v.to_bits()) {
                self.bindings[i].apply(&mut self.working, v)?;
                self.applied[i] = Some(v);
            }
        }
        Ok(())
    }

    /// χ² at `values`, or `None` when they describe an unphysical source
    /// (beyond the horizon or an invalid Gaussian shape).
    pub fn chi_squared(&mut self, values: &[f64]) -> Result<Option<f64>> {
        self.set(values)?;
        let physical = self.working.directions().all(|d| d.is_valid())
            && self.working.gaussian_sources.iter().all(|g| g.shape.is_valid());
        if !physical {
            return Ok(None);
        }
        self.evaluations += 1;
        let chi2 = match &self.plan {
            Some(plan) => execute_pipeline(plan, &self.working, self.config, self.strategy, self.precision)?.chi2,
            None => {
                let out = rime::evaluate(&self.working, self.config, self.precision, false)?;
                reduce_sum(&out.chi2_terms, self.strategy)?
            }
        };
        Ok(Some(chi2))
    }

    /// `ln L` at `values`; `−∞` for unphysical values.
    pub fn log_likelihood(&mut self, values: &[f64]) -> Result<f64> {
        match self.chi_squared(values)? {
            Some(chi2) => self.norm.log_likelihood(chi2),
            None => Ok(f64::NEG_INFINITY),
        }
    }
}

impl Target for BiroTarget<'_> {
    fn dim(&self) -> usize {
        self.bindings.len()
    }

    fn evaluate(&mut self, values: &[f64]) -> Result<Evaluation> {
        let log_prior = self.prior.log_density(values);
        if log_prior == f64::NEG_INFINITY {
            return Ok(Evaluation {
                log_posterior: f64::NEG_INFINITY,
                chi2: None,
            });
        }
        let chi2 = self.chi_squared(values)?;
        let log_posterior = match chi2 {
            Some(c) => self.norm.log_likelihood(c)? + log_prior,
            None => f64::NEG_INFINITY,
        };
        Ok(Evaluation { log_posterior, chi2 })
    }
}

/// Unnormalised `ln L + ln π` of `params`. The caller's catalog is left
/// untouched.
pub fn log_posterior(
    params: &ParameterVector,
    prior: &Prior,
    catalog: &SourceCatalog,
    config: &ObservationConfig,
) -> Result<f64> {
    let mut target = BiroTarget::new(params.bindings.clone(), prior.clone(), catalog, config)?;
    Ok(target.evaluate(&params.values)?.log_posterior)
}

#[derive(Clone, Debug)]
pub struct ChainState {
    pub values: Vec<f64>,
    pub log_posterior: f64,
    pub chi2: Option<f64>,
    pub accepted: u64,
    pub proposed: u64,
    pub rng: ChaCha8Rng,
}

impl ChainState {
    pub fn new(target: &mut impl Target, init: Vec<f64>, seed: u64) -> Result<Self> {
        if init.len() != target.dim() {
            return Err(Error::mismatch("initial parameters", target.dim(), init.len()));
        }
        let eval = target.evaluate(&init)?;
        if !eval.log_posterior.is_finite() {
            return Err(Error::invalid(format!(
                "initial log posterior is {}; start inside the prior support",
                eval.log_posterior
            )));
        }
        Ok(ChainState {
            values: init,
            log_posterior: eval.log_posterior,
            chi2: eval.chi2,
            accepted: 0,
            proposed: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Whether a move with log-posterior change `delta` is accepted given a
/// uniform draw `u`.
#[inline]
pub fn accept(delta: f64, u: f64) -> bool {
    delta >= 0.0 || u < delta.exp()
}

/// One random-walk Metropolis-Hastings step with independent Gaussian
/// proposals of standard deviation `scales[i]`. Returns whether the move
/// was accepted.
pub fn mh_step(state: &mut ChainState, scales: &[f64], target: &mut impl Target) -> Result<bool> {
    if scales.len() != state.values.len() {
        return Err(Error::mismatch("proposal scales", state.values.len(), scales.len()));
    }
    // draw the full set every step so the stream does not depend on the outcome
    let proposal: Vec<f64> = state
        .values
        .iter()
        .zip(scales)
        .map(|(&x, &s)| x + s * state.rng.sample::<f64, _>(StandardNormal))
        .collect();
    let u: f64 = state.rng.random();
    let eval = target.evaluate(&proposal)?;
    state.proposed += 1;
    let ok = accept(eval.log_posterior - state.log_posterior, u);
    if ok {
        state.values = proposal;
        state.log_posterior = eval.log_posterior;
        state.chi2 = eval.chi2;
        state.accepted += 1;
    }
    Ok(ok)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSettings {
    /// Total steps including burn-in.
    pub steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub step: usize,
    pub log_posterior: f64,
    pub chi2: Option<f64>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub samples: Vec<Sample>,
    pub acceptance_rate: f64,
    /// χ² of the current state after every step, burn-in included.
    pub chi2_trace: Vec<Option<f64>>,
}

impl Chain {
    pub fn summary(&self, names: &[String]) -> ChainSummary {
        let d = names.len();
        let n = self.samples.len() as f64;
        let mut means = vec![0.0; d];
        let mut sds = vec![0.0; d];
        if !self.samples.is_empty() {
            for k in 0..d {
                let mean = self.samples.iter().map(|s| s.values[k]).sum::<f64>() / n;
                let var = self.samples.iter().map(|s| (s.values[k] - mean).powi(2)).sum::<f64>()
                    / (n - 1.0).max(1.0);
                means[k] = mean;
                sds[k] = var.sqrt();
            }
        }
        ChainSummary {
            names: names.to_vec(),
            samples: self.samples.len(),
            acceptance_rate: self.acceptance_rate,
            means,
            sds,
        }
    }

    /// Write `step,log_posterior,chi2,<names>` rows.
    pub fn write_csv<W: Write>(&self, names: &[String], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["step".to_string(), "log_posterior".into(), "chi2".into()];
        header.extend(names.iter().cloned());
        w.write_record(&header)?;
        for s in &self.samples {
            let mut row = vec![
                s.step.to_string(),
                s.log_posterior.to_string(),
                s.chi2.map(|c| c.to_string()).unwrap_or_default(),
            ];
            row.extend(s.values.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn save_csv(&self, names: &[String], path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(names, std::io::BufWriter::new(file))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub names: Vec<String>,
    pub samples: usize,
    pub acceptance_rate: f64,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

/// Run a Metropolis-Hastings chain from `init`. Steps `burn_in..steps` are
/// kept, every `thin`-th one starting at the first post-burn-in step.
pub fn run_chain(
    target: &mut impl Target,
    init: Vec<f64>,
    scales: &[f64],
    settings: ChainSettings,
) -> Result<Chain> {
    let ChainSettings { steps, burn_in, thin, seed } = settings;
    if steps <= burn_in {
        return Err(Error::invalid(format!("steps ({steps}) must exceed burn-in ({burn_in})")));
    }
    if thin == 0 {
        return Err(Error::invalid("thin must be at least 1"));
    }
    if let Some(s) = scales.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        return Err(Error::invalid(format!("proposal scale {s} is not a non-negative number")));
    }
    let mut state = ChainState::new(target, init, seed)?;
    let mut samples = Vec::with_capacity((steps - burn_in).div_ceil(thin));
    let mut chi2_trace = Vec::with_capacity(steps);
    for step in 0..steps {
        mh_step(&mut state, scales, target)?;
        chi2_trace.push(state.chi2);
        if step >= burn_in && (step - burn_in) % thin == 0 {
            samples.push(Sample {
                step,
                log_posterior: state.log_posterior,
                chi2: state.chi2,
                values: state.values.clone(),
            });
        }
    }
    Ok(Chain {
        samples,
        acceptance_rate: state.acceptance_rate(),
        chi2_trace,
    })
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `ln Z` with `Z = ∫ L(θ) π(θ) dθ` by the midpoint rule on a regular grid
/// of `points[k]` cells per parameter. Every prior must be uniform and at
/// most three parameters are supported.
pub fn grid_log_evidence(
    mut log_likelihood: impl FnMut(&[f64]) -> Result<f64>,
    priors: &[ParamPrior],
    points: &[usize],
) -> Result<f64> {
    let d = priors.len();
    if d == 0 || d > 3 {
        return Err(Error::Unsupported(format!("grid evidence in {d} dimensions; 1 to 3 are supported")));
    }
    if points.len() != d {
        return Err(Error::mismatch("grid points", d, points.len()));
    }
    if points.contains(&0) {
        return Err(Error::invalid("grid needs at least one point per parameter"));
    }
    let mut bounds = Vec::with_capacity(d);
    for p in priors {
        p.validate()?;
        match *p {
            ParamPrior::Uniform { lo, hi } => bounds.push((lo, hi)),
            ParamPrior::Normal { .. } => {
                return Err(Error::Unsupported("grid evidence needs bounded uniform priors".into()))
            }
        }
    }
    // with uniform priors, π(θ)·Δθ is 1/N in every cell
    let total: usize = points.iter().product();
    let mut logs = Vec::with_capacity(total);
    let mut theta = vec![0.0; d];
    for flat in 0..total {
        let mut rem = flat;
        for k in (0..d).rev() {
            let idx = rem % points[k];
            rem /= points[k];
            let (lo, hi) = bounds[k];
            theta[k] = lo + (hi - lo) * (idx as f64 + 0.5) / points[k] as f64;
        }
        logs.push(log_likelihood(&theta)?);
    }
    Ok(log_sum_exp(&logs) - (total as f64).ln())
}

pub fn grid_evidence(
    likelihood: impl FnMut(&[f64]) -> Result<f64>,
    priors: &[ParamPrior],
    points: &[usize],
) -> Result<f64> {
    let mut likelihood = likelihood;
    grid_log_evidence(|t| Ok(likelihood(t)?.ln()), priors, points).map(f64::exp)
}

/// `ln Z` of a sky-model posterior.
pub fn biro_log_evidence(target: &mut BiroTarget<'_>, points: &[usize]) -> Result<f64> {
    let priors = target.prior().0.clone();
    grid_log_evidence(|t| target.log_likelihood(t), &priors, points)
}

/// `R = exp(ln Z₁ − ln Z₂ + ln(P(H₁)/P(H₂)))`.
pub fn posterior_ratio(log_z1: f64, log_prior_odds: f64, log_z2: f64) -> f64 {
    (log_z1 - log_z2 + log_prior_odds).exp()
}
