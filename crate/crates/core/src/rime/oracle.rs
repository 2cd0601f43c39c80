//! Unstaged reference evaluation.
//!
//! Every source coherency `E_p K_p B K_q^H E_q^H` is built as a full 2×2
//! matrix product per `(t, pq, s, λ)`, straight from the defining
//! expressions, with nothing shared with the staged kernels.

use num_complex::Complex;

use crate::obs::{ObservationConfig, VisibilitySet};
use crate::sky::SourceCatalog;
use crate::{Jones, Precision, Real, Result};

fn oracle<T: Real>(catalog: &SourceCatalog, config: &ObservationConfig) -> Result<(VisibilitySet, Vec<f64>)> {
    super::stages::check_inputs(catalog, config)?;
    let c = |x: f64| T::from_f64(x);
    let two_pi = c(2.0) * T::PI();
    let mut vis = VisibilitySet::zeros(config.ntime, config.nbl, config.nchan);
    let mut chi2 = vec![0.0; config.nvis()];

    // per-antenna direction-dependent Jones term, written out in full
    let antenna_jones = |t: usize, p: usize, l: f64, m: f64, lambda: T| -> Jones<T> {
        let (l, m) = (c(l), c(m));
        let n = (T::one() - l * l - m * m).sqrt();
        let u = config.uvw[t * config.na + p].map(c);
        let arg = two_pi / lambda * (u[0] * l + u[1] * m + u[2] * (n - T::one()));
        let k = Complex::new(arg.cos(), arg.sin());
        let pe = config.pointing_errors[t * config.na + p].map(c);
        let dist = ((l - pe[0]) * (l - pe[0]) + (m - pe[1]) * (m - pe[1])).sqrt();
        let e = (c(config.beam.constant) * lambda * dist).cos().powi(3);
        Jones::diagonal(k * e)
    };

    let brightness = |stokes: [f64; 4], alpha: f64, lambda: T| -> Jones<T> {
        let [i, q, u, v] = stokes.map(c);
        let scale = (c(catalog.lambda_ref) / lambda).powf(c(alpha));
        Jones([
            Complex::new(i + q, T::zero()),
            Complex::new(u, v),
            Complex::new(u, -v),
            Complex::new(i - q, T::zero()),
        ])
        .scale_real(scale)
    };

    for t in 0..config.ntime {
        for bl in 0..config.nbl {
            let [p, q] = config.antenna_pairs[t * config.nbl + bl];
            let up = config.uvw[t * config.na + p];
            let uq = config.uvw[t * config.na + q];
            let (u_pq, v_pq) = (c(up[0] - uq[0]), c(up[1] - uq[1]));
            for ch in 0..config.nchan {
                let lambda = c(config.wavelengths[ch]);
                let mut sum = Jones::<T>::zero();
                for src in &catalog.point_sources {
                    let d = src.direction;
                    let st = &src.spectrum;
                    let b = brightness([st.i[t], st.q[t], st.u[t], st.v[t]], st.alpha, lambda);
                    let jp = antenna_jones(t, p, d.l, d.m, lambda);
                    let jq = antenna_jones(t, q, d.l, d.m, lambda);
                    sum += jp * b * jq.h();
                }
                for src in &catalog.gaussian_sources {
                    let d = src.direction;
                    let st = &src.spectrum;
                    let b = brightness([st.i[t], st.q[t], st.u[t], st.v[t]], st.alpha, lambda);
                    let jp = antenna_jones(t, p, d.l, d.m, lambda);
                    let jq = antenna_jones(t, q, d.l, d.m, lambda);
                    let pa = c(src.shape.pa);
                    let ur = u_pq * pa.cos() - v_pq * pa.sin();
                    let vr = u_pq * pa.sin() + v_pq * pa.cos();
                    let fwhm = c(4.0) * c(2.0).ln();
                    let x = (ur * c(src.shape.emin)) * (ur * c(src.shape.emin))
                        + (vr * c(src.shape.emaj)) * (vr * c(src.shape.emaj));
                    let env = (-(T::PI() * T::PI()) / fwhm * x / (lambda * lambda)).exp();
                    sum += (jp * b * jq.h()).scale_real(env);
                }

                let idx = (t * config.nbl + bl) * config.nchan + ch;
                let d = config.observed.values[idx];
                let w = config.weights[idx];
                let mut term = T::zero();
                for corr in 0..4 {
                    let diff = sum[corr] - Complex::new(c(d[corr].re), c(d[corr].im));
                    term = term + c(w[corr]) * diff.norm_sqr();
                }
                chi2[idx] = term.to_f64();
                vis.values[idx] = sum.cast();
            }
        }
    }
    Ok((vis, chi2))
}

/// Reference visibilities and χ² terms in f64.
pub fn naive_oracle(catalog: &SourceCatalog, config: &ObservationConfig) -> Result<(VisibilitySet, Vec<f64>)> {
    naive_oracle_in(catalog, config, Precision::F64)
}

pub fn naive_oracle_in(
    catalog: &SourceCatalog,
    config: &ObservationConfig,
    precision: Precision,
) -> Result<(VisibilitySet, Vec<f64>)> {
    match precision {
        Precision::F32 => oracle::<f32>(catalog, config),
        Precision::F64 => oracle::<f64>(catalog, config),
    }
}
