//! Acceptance criteria. Runs as a plain binary and prints one line per
//! criterion; exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{Float, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rime_core::budget::{execute_pipeline, ChunkPlan, DimensionSet};
use rime_core::likelihood::{reduce_sum, ReductionStrategy};
use rime_core::obs::{baseline_count, baseline_pairs, synthesize_observation, ArrayLayout, ObservationConfig, VisibilitySet};
use rime_core::perf::{
    balance_point, bsum_arithmetic_intensity, ek_arithmetic_intensity, modeled_cost, roofline_attainable,
    RooflineDevice,
};
use rime_core::rime::{evaluate, naive_oracle_in, phase_term, predict_visibilities, BeamConfig};
use rime_core::sampler::{
    biro_log_evidence, grid_evidence, posterior_ratio, run_chain, Binding, BiroTarget, ChainSettings, ParamField,
    ParamPrior, Prior,
};
use rime_core::sky::{GaussianShape, SourceCatalog, SourceDirection, SourceRef, Stokes, StokesSpectrum};
use rime_core::Precision;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);
type Step<'a> = &'a dyn Fn(DimensionSet, usize) -> DimensionSet;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `max|a − b| / max|b|` over all visibility components.
fn normwise_error(a: &VisibilitySet, b: &VisibilitySet) -> f64 {
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for (x, y) in a.values.iter().zip(&b.values) {
        diff = diff.max((*x - *y).max_abs());
        scale = scale.max(y.max_abs());
    }
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn random_spectrum(rng: &mut ChaCha8Rng, ntime: usize) -> StokesSpectrum {
    StokesSpectrum {
        i: (0..ntime).map(|_| rng.random_range(0.5..2.0)).collect(),
        q: (0..ntime).map(|_| rng.random_range(-0.2..0.2)).collect(),
        u: (0..ntime).map(|_| rng.random_range(-0.2..0.2)).collect(),
        v: (0..ntime).map(|_| rng.random_range(-0.1..0.1)).collect(),
        alpha: rng.random_range(-1.0..1.0),
    }
}

fn random_catalog(rng: &mut ChaCha8Rng, ntime: usize, np: usize, ng: usize) -> SourceCatalog {
    let mut cat = SourceCatalog::new(1.0);
    for _ in 0..np {
        let d = SourceDirection::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1));
        let s = random_spectrum(rng, ntime);
        cat = cat.with_point(d, s);
    }
    for _ in 0..ng {
        let d = SourceDirection::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1));
        let s = random_spectrum(rng, ntime);
        let emin = rng.random_range(0.0..0.02);
        let shape = GaussianShape::new(emin + rng.random_range(0.0..0.02), emin, rng.random_range(0.0..3.2));
        cat = cat.with_gaussian(d, s, shape);
    }
    cat
}

fn random_observation(rng: &mut ChaCha8Rng, ntime: usize, na: usize, nchan: usize) -> ObservationConfig {
    let uvw = (0..ntime * na)
        .map(|_| [rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0), rng.random_range(-2.0..2.0)])
        .collect();
    let wl = (0..nchan).map(|_| rng.random_range(0.5..2.0)).collect();
    let mut config = ObservationConfig::from_uvw(ntime, na, uvw, wl, BeamConfig::new(2.0)).unwrap();
    for pe in config.pointing_errors.iter_mut() {
        *pe = [rng.random_range(-0.01..0.01), rng.random_range(-0.01..0.01)];
    }
    for w in config.weights.iter_mut() {
        *w = [0; 4].map(|_| rng.random_range(0.5..2.0));
    }
    config
}

/// A random problem whose observed data come from an unrelated catalog, so
/// residuals are of the same order as the visibilities.
fn random_problem(seed: u64) -> (SourceCatalog, ObservationConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ntime = rng.random_range(1..=5);
    let na = rng.random_range(2..=7);
    let nchan = rng.random_range(1..=8);
    let nsrc = rng.random_range(1..=6);
    let np = rng.random_range(0..=nsrc);
    let mut config = random_observation(&mut rng, ntime, na, nchan);
    let catalog = random_catalog(&mut rng, ntime, np, nsrc - np);
    let other = random_catalog(&mut rng, ntime, 1, 1);
    config.observed = predict_visibilities(&other, &config).unwrap();
    (catalog, config)
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let instances = 120;
    let (mut worst64, mut worst32) = (0.0f64, 0.0f64);
    for seed in 0..instances {
        let (cat, config) = random_problem(seed);
        for (precision, tol) in [(Precision::F64, 1e-12), (Precision::F32, 1e-5)] {
            let staged = evaluate(&cat, &config, precision, true).map_err(|e| e.to_string())?;
            let (vis, chi2_terms) = naive_oracle_in(&cat, &config, precision).map_err(|e| e.to_string())?;
            let staged_chi2 = reduce_sum(&staged.chi2_terms, ReductionStrategy::Compensated).unwrap();
            let oracle_chi2 = reduce_sum(&chi2_terms, ReductionStrategy::Compensated).unwrap();
            let err = normwise_error(staged.visibilities.as_ref().unwrap(), &vis).max(rel(staged_chi2, oracle_chi2));
            ensure(err <= tol, || format!("seed {seed} {precision}: relative error {err:.3e} > {tol:e}"))?;
            match precision {
                Precision::F64 => worst64 = worst64.max(err),
                Precision::F32 => worst32 = worst32.max(err),
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{instances} instances, max rel err f64 {worst64:.2e} (<= 1e-12), f32 {worst32:.2e} (<= 1e-5), {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn arithmetic_intensities() -> Check {
    let ek = ek_arithmetic_intensity(50, 50).map_err(|e| e.to_string())?;
    let bs = bsum_arithmetic_intensity(50, 50).map_err(|e| e.to_string())?;
    ensure((ek - 10.3807).abs() <= 1e-4, || format!("EK AI {ek}"))?;
    ensure((bs - 1.7510).abs() <= 1e-4, || format!("B-sum AI {bs}"))?;
    Ok(format!("EK {ek:.4}, B-sum {bs:.4}"))
}

fn roofline() -> Check {
    let k40 = RooflineDevice::builtin("k40").ok_or("no k40")?;
    let xeon = RooflineDevice::builtin("e5-2620v2").ok_or("no xeon")?;
    for (ai, want) in [(1.75, 504.0), (10.0, 2880.0), (64.0, 4290.0)] {
        let got = roofline_attainable(ai, &k40);
        ensure(got == want, || format!("attainable({ai}) = {got}, want {want}"))?;
    }
    let (bk, bx) = (balance_point(&k40), balance_point(&xeon));
    ensure((bk - 14.90).abs() <= 0.01, || format!("K40 balance {bk}"))?;
    ensure((bx - 3.9375).abs() <= 0.01, || format!("Xeon balance {bx}"))?;
    Ok(format!("504 / 2880 / 4290 GFLOPS/s; balance K40 {bk:.4}, Xeon {bx:.4}"))
}

fn baselines() -> Check {
    let table = [(7, 21), (14, 91), (27, 351), (64, 2016), (128, 8128), (192, 18336)];
    for (na, nbl) in table {
        let pairs = baseline_pairs(na).map_err(|e| e.to_string())?;
        ensure(pairs.len() == nbl && baseline_count(na) == nbl, || format!("na={na}: {} pairs", pairs.len()))?;
    }
    Ok("na 7/14/27/64/128/192 -> nbl 21/91/351/2016/8128/18336".into())
}

fn chunk_invariance() -> Check {
    let start = Instant::now();
    let ntime = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut config = random_observation(&mut rng, ntime, 7, 8);
    let catalog = random_catalog(&mut rng, ntime, 2, 2);
    let other = random_catalog(&mut rng, ntime, 2, 0);
    config.observed = predict_visibilities(&other, &config).unwrap();
    let strategy = ReductionStrategy::default();

    let monolithic = {
        let terms = evaluate(&catalog, &config, Precision::F64, false).unwrap().chi2_terms;
        reduce_sum(&terms, strategy).unwrap()
    };
    let mut worst = 0.0f64;
    let mut runs = 0;
    for workers in [1, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
        for chunk in 1..=ntime {
            let mut by_slots = Vec::new();
            for slots in [1, 2] {
                let plan = ChunkPlan::with_chunk_size(ntime, chunk, slots).unwrap();
                let r = pool
                    .install(|| execute_pipeline(&plan, &catalog, &config, strategy, Precision::F64))
                    .map_err(|e| e.to_string())?;
                let err = rel(r.chi2, monolithic);
                ensure(err <= 1e-10, || format!("chunk {chunk} slots {slots} workers {workers}: rel {err:.2e}"))?;
                worst = worst.max(err);
                by_slots.push(r.chi2);
                runs += 1;
            }
            ensure(by_slots[0] == by_slots[1], || format!("chunk {chunk}: slots change the result"))?;
        }
    }
    // the pipeline itself is independent of the worker count
    let plan = ChunkPlan::with_chunk_size(ntime, 3, 2).unwrap();
    let per_worker: Vec<f64> = [1, 2, 5]
        .iter()
        .map(|&n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| execute_pipeline(&plan, &catalog, &config, strategy, Precision::F64).unwrap().chi2)
        })
        .collect();
    ensure(per_worker.iter().all(|&c| c == per_worker[0]), || format!("workers change chi2: {per_worker:?}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{runs} runs (chunks 1..=20, slots 1/2, workers 1/4), max rel err {worst:.2e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn recovery_layout(ntime: usize) -> ArrayLayout {
    ArrayLayout {
        positions: vec![
            [0.0, 0.0, 0.0],
            [35.0, 12.0, 0.5],
            [-20.0, 60.0, 0.0],
            [80.0, -30.0, 1.0],
            [120.0, 40.0, -0.5],
            [-90.0, -70.0, 0.0],
            [15.0, 150.0, 2.0],
        ],
        hour_angle_range: [-1.0, 1.0],
        declination: -0.6,
        ntime,
        wavelengths: vec![0.19, 0.21, 0.23, 0.25],
        beam: BeamConfig::new(1.0),
    }
}

fn parameter_recovery() -> Check {
    let start = Instant::now();
    let ntime = 10;
    let (i_true, l_true, m_true) = (2.5, 0.003, -0.002);
    let truth = SourceCatalog::new(0.21).with_point(
        SourceDirection::new(l_true, m_true),
        StokesSpectrum::constant(Stokes::unpolarised(i_true), 0.0, ntime),
    );
    let config = synthesize_observation(&truth, &recovery_layout(ntime), 0.5, 77).map_err(|e| e.to_string())?;
    let bindings = vec![
        Binding::new("I", SourceRef::Point(0), ParamField::I),
        Binding::new("l", SourceRef::Point(0), ParamField::L),
        Binding::new("m", SourceRef::Point(0), ParamField::M),
    ];
    let prior = Prior::new(vec![
        ParamPrior::Uniform { lo: 0.0, hi: 25.0 },
        ParamPrior::Uniform { lo: -0.05, hi: 0.05 },
        ParamPrior::Uniform { lo: -0.05, hi: 0.05 },
    ])
    .unwrap();
    let mut target = BiroTarget::new(bindings, prior, &truth, &config).map_err(|e| e.to_string())?;

    // proposal scales from the diagonal of the finite-difference χ² Hessian
    let x0 = [i_true, l_true, m_true];
    let steps = [1e-3, 1e-6, 1e-6];
    let c0 = target.chi_squared(&x0).unwrap().unwrap();
    let mut scales = [0.0; 3];
    for k in 0..3 {
        let mut hi = x0;
        let mut lo = x0;
        hi[k] += steps[k];
        lo[k] -= steps[k];
        let ch = target.chi_squared(&hi).unwrap().unwrap();
        let cl = target.chi_squared(&lo).unwrap().unwrap();
        let curvature = (ch - 2.0 * c0 + cl) / (steps[k] * steps[k]);
        ensure(curvature > 0.0, || format!("non-positive curvature for parameter {k}"))?;
        let sd = (2.0 / curvature).sqrt();
        scales[k] = 2.38 / 3f64.sqrt() * sd;
    }

    let init = vec![i_true * 0.9, l_true + 2.0 * scales[1], m_true - 2.0 * scales[2]];
    let settings = ChainSettings { steps: 20_000, burn_in: 2_000, thin: 1, seed: 4242 };
    let chain = run_chain(&mut target, init, &scales, settings).map_err(|e| e.to_string())?;
    let names = ["I".to_string(), "l".into(), "m".into()];
    let summary = chain.summary(&names);
    let (mean, sd) = (summary.means[0], summary.sds[0]);
    ensure((mean - i_true).abs() <= 3.0 * sd, || {
        format!("posterior I {mean:.5} ± {sd:.5}, truth {i_true}")
    })?;

    let chi2 = target.chi_squared(&summary.means).unwrap().ok_or("posterior mean is unphysical")?;
    let n_data = target.data_count();
    let reduced = chi2 / n_data as f64;
    ensure((0.8..=1.2).contains(&reduced), || format!("chi2/N = {reduced:.4}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "I = {mean:.4} ± {sd:.4} (truth {i_true}, {:.2} sd), chi2/N = {reduced:.4}, acceptance {:.3}, {:.1}s",
        (mean - i_true).abs() / sd,
        summary.acceptance_rate,
        elapsed.as_secs_f64()
    ))
}

fn evidence_and_occam() -> Check {
    let (mu, sigma) = (0.5, 0.1);
    let gaussian = |x: &[f64]| {
        let z = (x[0] - mu) / sigma;
        Ok((-0.5 * z * z).exp() / (sigma * std::f64::consts::TAU.sqrt()))
    };
    let z = grid_evidence(gaussian, &[ParamPrior::Uniform { lo: 0.0, hi: 1.0 }], &[2_000]).map_err(|e| e.to_string())?;
    // mass of N(0.5, 0.1²) inside [0, 1]
    let analytic = 0.999_999_426_696_856_3;
    ensure(rel(z, analytic) <= 0.01, || format!("Z = {z}, analytic {analytic}"))?;

    let ntime = 4;
    let truth = SourceCatalog::new(0.21).with_point(
        SourceDirection::new(0.002, 0.001),
        StokesSpectrum::constant(Stokes::unpolarised(1.0), 0.0, ntime),
    );
    let mut layout = recovery_layout(ntime);
    layout.positions.truncate(5);
    layout.wavelengths.truncate(2);
    let config = synthesize_observation(&truth, &layout, 1.0, 5).map_err(|e| e.to_string())?;

    let flux = ParamPrior::Uniform { lo: 0.0, hi: 2.0 };
    let one = vec![Binding::new("I1", SourceRef::Point(0), ParamField::I)];
    let mut h1 = BiroTarget::new(one, Prior::new(vec![flux]).unwrap(), &truth, &config).map_err(|e| e.to_string())?;
    let log_z1 = biro_log_evidence(&mut h1, &[200]).map_err(|e| e.to_string())?;

    let spurious = truth.clone().with_point(
        SourceDirection::new(-0.004, 0.003),
        StokesSpectrum::constant(Stokes::unpolarised(0.0), 0.0, ntime),
    );
    let two = vec![
        Binding::new("I1", SourceRef::Point(0), ParamField::I),
        Binding::new("I2", SourceRef::Point(1), ParamField::I),
    ];
    let mut h2 = BiroTarget::new(two, Prior::new(vec![flux, flux]).unwrap(), &spurious, &config)
        .map_err(|e| e.to_string())?;
    let log_z2 = biro_log_evidence(&mut h2, &[200, 200]).map_err(|e| e.to_string())?;
    let r = posterior_ratio(log_z1, 0.0, log_z2);
    ensure(r > 1.0, || format!("R = {r}"))?;
    Ok(format!(
        "1D Gaussian Z = {z:.6} (rel err {:.1e}); 1-source vs 2-source R = {r:.3} (ln Z1 - ln Z2 = {:.3})",
        rel(z, analytic),
        log_z1 - log_z2
    ))
}

/// Exact sum of `terms` rounded once to f64.
fn exact_sum(terms: &[f64]) -> f64 {
    let decoded: Vec<(u64, i16, i8)> = terms.iter().map(|t| t.integer_decode()).collect();
    let min_exp = decoded.iter().map(|d| d.1).min().unwrap_or(0);
    let mut acc = BigInt::zero();
    for &(mantissa, exp, sign) in &decoded {
        let v = BigInt::from(mantissa) << (exp - min_exp) as usize;
        if sign < 0 {
            acc -= v;
        } else {
            acc += v;
        }
    }
    // scale the integer down so its f64 conversion cannot overflow
    let bits = acc.bits() as i64;
    let shift = (bits - 60).max(0);
    let head = (&acc >> shift as usize).to_f64().unwrap();
    head * 2f64.powi((shift + min_exp as i64) as i32)
}

fn invariant_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    // unit-modulus phase
    for _ in 0..10_000 {
        let uvw = [0; 3].map(|_| rng.random_range(-5e3..5e3));
        let r: f64 = rng.random_range(0.0..1.0);
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let dir = SourceDirection::new(r * theta.cos(), r * theta.sin());
        let k = phase_term(uvw, dir, rng.random_range(0.01..5.0)).map_err(|e| e.to_string())?;
        ensure((k.norm() - 1.0).abs() <= 1e-12, || format!("|K| = {}", k.norm()))?;
    }

    for seed in 0..20 {
        let (cat, config) = random_problem(1000 + seed);
        let forward = predict_visibilities(&cat, &config).unwrap();

        // Hermitian baseline symmetry
        let mut swapped = config.clone();
        swapped.antenna_pairs.iter_mut().for_each(|p| p.swap(0, 1));
        let backward = predict_visibilities(&cat, &swapped).unwrap();
        let scale = forward.values.iter().fold(0.0f64, |a, v| a.max(v.max_abs()));
        for (f, b) in forward.values.iter().zip(&backward.values) {
            ensure((f.h() - *b).max_abs() <= 1e-12 * scale, || format!("seed {seed}: V_qp != V_pq^H"))?;
        }

        // linearity in the catalog
        let extra = random_catalog(&mut rng, config.ntime, 1, 1);
        let both = predict_visibilities(&cat.union(&extra), &config).unwrap();
        let parts = predict_visibilities(&extra, &config).unwrap();
        for ((ab, a), b) in both.values.iter().zip(&forward.values).zip(&parts.values) {
            ensure((*ab - (*a + *b)).max_abs() <= 1e-12 * (1.0 + ab.max_abs()), || format!("seed {seed}: not linear"))?;
        }

        // χ² non-negativity
        let terms = evaluate(&cat, &config, Precision::F64, false).unwrap().chi2_terms;
        ensure(terms.iter().all(|&t| t >= 0.0), || format!("seed {seed}: negative chi2 term"))?;
    }

    // Gaussian with zero extent is a point source
    let (cat, config) = random_problem(77);
    let mut as_gauss = SourceCatalog::new(cat.lambda_ref);
    for p in &cat.point_sources {
        as_gauss = as_gauss.with_gaussian(p.direction, p.spectrum.clone(), GaussianShape::new(0.0, 0.0, 1.3));
    }
    let mut only_points = SourceCatalog::new(cat.lambda_ref);
    for p in &cat.point_sources {
        only_points = only_points.with_point(p.direction, p.spectrum.clone());
    }
    if only_points.nsrc() > 0 {
        let a = predict_visibilities(&only_points, &config).unwrap();
        let b = predict_visibilities(&as_gauss, &config).unwrap();
        ensure(normwise_error(&b, &a) <= 1e-15, || "gaussian limit differs from point".into())?;
    }

    // reductions of 10⁶ mixed-magnitude terms against the exact sum
    let n = 1_000_000;
    let mut terms: Vec<f64> = (0..n)
        .map(|i| {
            let base = if i % 2 == 0 { 1e8 + 1.0 } else { 1e8 - 1.0 };
            match i % 5 {
                0 => base,
                1 => rng.random_range(1e-8..1e-6),
                2 => rng.random_range(0.0..1.0) * 10f64.powi(rng.random_range(-3..9)),
                3 => 1e8 + rng.random_range(-1.0..1.0),
                _ => rng.random_range(1e3..1e4),
            }
        })
        .collect();
    terms.push(3e-300);
    let exact = exact_sum(&terms);
    let mut detail = Vec::new();
    for strategy in [ReductionStrategy::Pairwise, ReductionStrategy::Compensated] {
        let got = reduce_sum(&terms, strategy).unwrap();
        let err = rel(got, exact);
        ensure(err <= 1e-10, || format!("{strategy:?}: rel err {err:.2e}"))?;
        detail.push(format!("{strategy:?} {err:.1e}"));
    }
    let naive = rel(reduce_sum(&terms, ReductionStrategy::Naive).unwrap(), exact);
    Ok(format!(
        "phase, Hermitian symmetry, linearity, gaussian limit, chi2 >= 0; 10^6-term sums rel err {} (naive {naive:.1e})",
        detail.join(", ")
    ))
}

fn cost_model_linearity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let flops = |d: &DimensionSet| {
        let c = modeled_cost(d);
        (c.ek.flops as i128, c.bsum.flops as i128)
    };
    for point in 0..10 {
        let d = DimensionSet::new(
            rng.random_range(1..200),
            rng.random_range(2..300),
            rng.random_range(1..256),
            rng.random_range(0..200),
            rng.random_range(0..200),
        );
        let ntime = |d: DimensionSet, k: usize| DimensionSet { ntime: d.ntime + k, ..d };
        let nchan = |d: DimensionSet, k: usize| DimensionSet { nchan: d.nchan + k, ..d };
        let npsrc = |d: DimensionSet, k: usize| DimensionSet { npsrc: d.npsrc + k, ..d };
        let ngsrc = |d: DimensionSet, k: usize| DimensionSet { ngsrc: d.ngsrc + k, ..d };
        let axes: [(&str, Step); 4] =
            [("ntime", &ntime), ("nchan", &nchan), ("npsrc", &npsrc), ("ngsrc", &ngsrc)];
        for (name, step) in axes {
            // second difference vanishes exactly for an affine function
            let f: Vec<(i128, i128)> = (0..3).map(|k| flops(&step(d, k))).collect();
            let second = (f[2].0 - 2 * f[1].0 + f[0].0, f[2].1 - 2 * f[1].1 + f[0].1);
            ensure(second == (0, 0), || format!("point {point}: not affine in {name}"))?;
        }
        // na enters B-sum through nbl = na(na-1)/2: third difference is zero, second is constant
        let b: Vec<i128> = (0..4).map(|k| flops(&DimensionSet::new(d.ntime, d.na + k, d.nchan, d.npsrc, d.ngsrc)).1).collect();
        let per_bl = (d.ntime * d.nchan) as i128 * (73 + 57 * d.npsrc as i128 + 77 * d.ngsrc as i128);
        ensure(b[2] - 2 * b[1] + b[0] == per_bl, || format!("point {point}: B-sum not quadratic in na"))?;
        ensure(b[3] - 3 * b[2] + 3 * b[1] - b[0] == 0, || format!("point {point}: cubic term in na"))?;
        let e: Vec<i128> = (0..3).map(|k| flops(&DimensionSet::new(d.ntime, d.na + k, d.nchan, d.npsrc, d.ngsrc)).0).collect();
        ensure(e[2] - 2 * e[1] + e[0] == 0, || format!("point {point}: EK not linear in na"))?;
    }
    Ok("FLOPs affine in ntime, nchan, P, G and quadratic in na at 10 random points".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("arithmetic intensities", arithmetic_intensities),
        ("roofline", roofline),
        ("baseline combinatorics", baselines),
        ("chunk invariance", chunk_invariance),
        ("parameter recovery", parameter_recovery),
        ("evidence and Occam", evidence_and_occam),
        ("invariant suite", invariant_suite),
        ("cost-model linearity", cost_model_linearity),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
