use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use super::{beam_unchecked, envelope_unchecked, phase_unchecked, AntennaTermArray, BsumOutput};
use crate::obs::{ObservationConfig, VisibilitySet};
use crate::sky::{brightness_unchecked, SourceCatalog};
use crate::{Error, Jones, Precision, Real, Result};

pub(crate) fn check_inputs(catalog: &SourceCatalog, config: &ObservationConfig) -> Result<()> {
    if catalog.nsrc() == 0 {
        return Err(Error::invalid("nsrc = 0"));
    }
    let ntime = catalog.ntime().unwrap_or(0);
    if let Some((kind, idx, n)) = catalog
        .point_sources
        .iter()
        .enumerate()
        .map(|(i, s)| ("point", i, s.spectrum.ntime()))
        .chain(
            catalog
                .gaussian_sources
                .iter()
                .enumerate()
                .map(|(i, s)| ("gaussian", i, s.spectrum.ntime())),
        )
        .find(|&(_, _, n)| n != config.ntime)
    {
        return Err(Error::mismatch(
            format!("{kind} source {idx} brightness"),
            format!("ntime = {}", config.ntime),
            format!("ntime = {n}"),
        ));
    }
    debug_assert_eq!(ntime, config.ntime);
    if config.uvw.len() != config.ntime * config.na
        || config.antenna_pairs.len() != config.ntime * config.nbl
        || config.wavelengths.len() != config.nchan
        || config.pointing_errors.len() != config.ntime * config.na
        || config.weights.len() != config.nvis()
        || config.observed.values.len() != config.nvis()
    {
        return Err(Error::mismatch(
            "observation",
            "arrays sized to (ntime, na, nbl, nchan)",
            "inconsistent array lengths",
        ));
    }
    Ok(())
}

/// Per-antenna stage: `A[t,p,s,λ] = E[t,p,s,λ] · K[t,p,s,λ]`.
pub fn ek_stage<T: Real>(
    catalog: &SourceCatalog,
    config: &ObservationConfig,
) -> Result<AntennaTermArray<T>> {
    check_inputs(catalog, config)?;
    let (ntime, na, nchan) = (config.ntime, config.na, config.nchan);
    let nsrc = catalog.nsrc();

    // (l, m, n - 1)
    let lmn: Vec<[T; 3]> = catalog
        .directions()
        .map(|d| {
            let l = T::from_f64(d.l);
            let m = T::from_f64(d.m);
            [l, m, (T::one() - l * l - m * m).sqrt() - T::one()]
        })
        .collect();
    let lambdas: Vec<T> = config.wavelengths.iter().map(|&w| T::from_f64(w)).collect();
    let beam_c = T::from_f64(config.beam.constant);

    let mut values = vec![Complex::<T>::zero(); ntime * na * nsrc * nchan];
    values
        .par_chunks_mut(nsrc * nchan)
        .enumerate()
        .for_each(|(tp, block)| {
            let uvw = config.uvw[tp].map(T::from_f64);
            let [dl, dm] = config.pointing_errors[tp].map(T::from_f64);
            for (s, &[l, m, n1]) in lmn.iter().enumerate() {
                for (ch, &lambda) in lambdas.iter().enumerate() {
                    let k = phase_unchecked(uvw, l, m, n1, lambda);
                    let e = beam_unchecked(l - dl, m - dm, lambda, beam_c);
                    block[s * nchan + ch] = k * e;
                }
            }
        });

    Ok(AntennaTermArray {
        ntime,
        na,
        nsrc,
        nchan,
        values,
    })
}

/// Per-source Gaussian parameters in evaluation precision:
/// `(emaj, emin, sin pa, cos pa)`.
fn gaussian_params<T: Real>(catalog: &SourceCatalog) -> Vec<[T; 4]> {
    catalog
        .gaussian_sources
        .iter()
        .map(|g| {
            let (s, c) = g.shape.pa.sin_cos();
            [g.shape.emaj, g.shape.emin, s, c].map(T::from_f64)
        })
        .collect()
}

/// Brightness matrices over `(ntime, nsrc, nchan)`.
fn brightness_table<T: Real>(catalog: &SourceCatalog, config: &ObservationConfig) -> Vec<Jones<T>> {
    let lambda_ref = T::from_f64(catalog.lambda_ref);
    let lambdas: Vec<T> = config.wavelengths.iter().map(|&w| T::from_f64(w)).collect();
    let spectra: Vec<_> = catalog.spectra().collect();
    let mut out = Vec::with_capacity(config.ntime * spectra.len() * lambdas.len());
    for t in 0..config.ntime {
        for spec in &spectra {
            let st = spec.at(t);
            let [i, q, u, v, alpha] = [st.i, st.q, st.u, st.v, spec.alpha].map(T::from_f64);
            for &lambda in &lambdas {
                out.push(brightness_unchecked(i, q, u, v, alpha, lambda, lambda_ref));
            }
        }
    }
    out
}

#[inline]
fn chi2_term<T: Real>(model: &Jones<T>, observed: &Jones<f64>, weights: &[f64; 4]) -> T {
    let mut acc = T::zero();
    for c in 0..4 {
        let w = T::from_f64(weights[c]);
        let dr = model[c].re - T::from_f64(observed[c].re);
        let di = model[c].im - T::from_f64(observed[c].im);
        acc = acc + w * (dr * dr + di * di);
    }
    acc
}

/// Per-baseline stage: sum source coherencies into model visibilities and
/// reduce them against the observed data to χ² terms. Visibilities are
/// only materialised when `emit_visibilities` is set.
pub fn bsum_stage<T: Real>(
    antenna_terms: &AntennaTermArray<T>,
    catalog: &SourceCatalog,
    config: &ObservationConfig,
    emit_visibilities: bool,
) -> Result<BsumOutput> {
    check_inputs(catalog, config)?;
    let expected = [config.ntime, config.na, catalog.nsrc(), config.nchan];
    if antenna_terms.shape() != expected {
        return Err(Error::mismatch(
            "antenna_terms",
            format!("{expected:?}"),
            format!("{:?}", antenna_terms.shape()),
        ));
    }
    let (nbl, nchan) = (config.nbl, config.nchan);
    let nsrc = catalog.nsrc();
    let npsrc = catalog.npsrc();
    if let Some(i) = config
        .antenna_pairs
        .iter()
        .position(|&[p, q]| p >= config.na || q >= config.na)
    {
        return Err(Error::validation("antenna_pairs", format!("antenna index out of range at {i}")));
    }

    let brightness = brightness_table::<T>(catalog, config);
    let gaussians = gaussian_params::<T>(catalog);
    let lambdas: Vec<T> = config.wavelengths.iter().map(|&w| T::from_f64(w)).collect();

    // Visibility for one (t, bl, ch) cell; the source loop stays sequential.
    let cell = |t: usize, bl: usize, ch: usize| -> Jones<T> {
        let [p, q] = config.antenna_pairs[t * nbl + bl];
        let ap = &antenna_terms.values[antenna_terms.index(t, p, 0, 0)..];
        let aq = &antenna_terms.values[antenna_terms.index(t, q, 0, 0)..];
        let b_row = &brightness[t * nsrc * nchan..];
        let mut vis = Jones::zero();
        for s in 0..npsrc {
            let coeff = ap[s * nchan + ch] * aq[s * nchan + ch].conj();
            vis += b_row[s * nchan + ch].scale(coeff);
        }
        if npsrc < nsrc {
            let uvw = config.baseline_uvw(t, bl);
            let (u, v) = (T::from_f64(uvw[0]), T::from_f64(uvw[1]));
            for (g, &[emaj, emin, sin_pa, cos_pa]) in gaussians.iter().enumerate() {
                let s = npsrc + g;
                let env = envelope_unchecked(emaj, emin, sin_pa, cos_pa, u, v, lambdas[ch]);
                let coeff = ap[s * nchan + ch] * aq[s * nchan + ch].conj() * env;
                vis += b_row[s * nchan + ch].scale(coeff);
            }
        }
        vis
    };

    let mut chi2 = vec![T::zero(); config.nvis()];
    let visibilities = if emit_visibilities {
        let mut vis = vec![Jones::<T>::zero(); config.nvis()];
        vis.par_chunks_mut(nchan)
            .zip(chi2.par_chunks_mut(nchan))
            .enumerate()
            .for_each(|(row, (vis_row, chi2_row))| {
                let (t, bl) = (row / nbl, row % nbl);
                for ch in 0..nchan {
                    let v = cell(t, bl, ch);
                    let i = row * nchan + ch;
                    chi2_row[ch] = chi2_term(&v, &config.observed.values[i], &config.weights[i]);
                    vis_row[ch] = v;
                }
            });
        Some(VisibilitySet {
            ntime: config.ntime,
            nbl,
            nchan,
            values: vis.iter().map(Jones::cast).collect(),
        })
    } else {
        chi2.par_chunks_mut(nchan)
            .enumerate()
            .for_each(|(row, chi2_row)| {
                let (t, bl) = (row / nbl, row % nbl);
                for (ch, out) in chi2_row.iter_mut().enumerate() {
                    let v = cell(t, bl, ch);
                    let i = row * nchan + ch;
                    *out = chi2_term(&v, &config.observed.values[i], &config.weights[i]);
                }
            });
        None
    };

    Ok(BsumOutput {
        visibilities,
        chi2_terms: chi2.into_iter().map(Real::to_f64).collect(),
    })
}

fn evaluate_in<T: Real>(
    catalog: &SourceCatalog,
    config: &ObservationConfig,
    emit_visibilities: bool,
) -> Result<BsumOutput> {
    let a = ek_stage::<T>(catalog, config)?;
    bsum_stage(&a, catalog, config, emit_visibilities)
}

/// Run both stages in the requested precision.
pub fn evaluate(
    catalog: &SourceCatalog,
    config: &ObservationConfig,
    precision: Precision,
    emit_visibilities: bool,
) -> Result<BsumOutput> {
    match precision {
        Precision::F32 => evaluate_in::<f32>(catalog, config, emit_visibilities),
        Precision::F64 => evaluate_in::<f64>(catalog, config, emit_visibilities),
    }
}

/// Model visibilities for `catalog` observed with `config`, in f64.
pub fn predict_visibilities(catalog: &SourceCatalog, config: &ObservationConfig) -> Result<VisibilitySet> {
    predict_visibilities_in(catalog, config, Precision::F64)
}

pub fn predict_visibilities_in(
    catalog: &SourceCatalog,
    config: &ObservationConfig,
    precision: Precision,
) -> Result<VisibilitySet> {
    let out = evaluate(catalog, config, precision, true)?;
    Ok(out.visibilities.expect("visibilities requested"))
}
