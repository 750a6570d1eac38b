use num_complex::Complex64;
use rayon::prelude::*;

use super::{error_norm, gaussian_c, normalized, power_fit, rng_for, smooth_random_field, ExperimentConfig,
    SweepResult, SweepRow};
use crate::error::{Error, Result};
use crate::flow::{integrate, truncation_difference, FlowSpec, Scheme, Trajectory};
use crate::imethod::{EnergyHierarchy, IMultiplier};
use crate::spectral::{Band, FourierField};

fn require_reference(cfg: &ExperimentConfig) -> Result<usize> {
    cfg.validate()?;
    let max_n = *cfg
        .n_list
        .last()
        .ok_or_else(|| Error::InvalidArgument("N_list must not be empty".into()))?;
    if cfg.k_max < 4 * max_n {
        return Err(Error::InvalidArgument(format!(
            "reference cutoff K = {} is under-resolved: need K >= 4 * max(N_list) = {}",
            cfg.k_max,
            4 * max_n
        )));
    }
    Ok(max_n)
}

fn sup_distance(a: &Trajectory, b: &Trajectory, measure: impl Fn(&FourierField, &FourierField) -> Result<f64>) -> Result<f64> {
    a.samples
        .iter()
        .zip(&b.samples)
        .try_fold(0.0f64, |acc, ((_, x), (_, y))| Ok(acc.max(measure(x, y)?)))
}

fn fitted(cfg: &ExperimentConfig, columns: Vec<&'static str>, rows: Vec<SweepRow>) -> SweepResult {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.param, r.value)).collect();
    let fit = power_fit(&pts, cfg.fit_threshold);
    let mut diagnostics = vec![("samples".to_string(), cfg.samples as f64)];
    if let Some(f) = fit {
        diagnostics.push(("fit_exponent".into(), f.exponent));
        diagnostics.push(("fit_residual".into(), f.residual));
        diagnostics.push(("fit_flagged".into(), f.flagged as u8 as f64));
    }
    SweepResult { kind: cfg.kind, columns, rows, fit, diagnostics }
}

/// Envelope over samples of `sup_t ||P_{<=sqrt N}(S(t)u0 - S^N(t)u0)||_{H^{-1/2}}`,
/// with the full flow resolved at the configured cutoff.
pub fn approx_truncated_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    require_reference(cfg)?;
    let min_n = cfg.n_list[0];
    if cfg.data.band > min_n {
        return Err(Error::InvalidArgument(format!(
            "data band {} exceeds min(N_list) = {min_n}",
            cfg.data.band
        )));
    }
    let grid = cfg.grid()?;
    let ref_spec = cfg.sampled_flow(grid)?;
    let data: Vec<FourierField> = (0..cfg.samples as u64)
        .map(|i| smooth_random_field(grid, &cfg.data, cfg.seed, i))
        .collect::<Result<_>>()?;
    let split = cfg.scheme == Scheme::FilonMidpoint;
    let refs: Vec<Option<Trajectory>> = if split {
        vec![None; data.len()]
    } else {
        data.par_iter().map(|u0| integrate(u0, &ref_spec).map(Some)).collect::<Result<_>>()?
    };
    let tasks: Vec<(usize, usize)> =
        (0..cfg.n_list.len()).flat_map(|a| (0..data.len()).map(move |b| (a, b))).collect();
    let errs: Vec<f64> = tasks
        .par_iter()
        .map(|&(a, b)| {
            let n = cfg.n_list[a];
            let band = Band::AtMost((n as f64 / grid.mu()).sqrt());
            let Some(reference) = &refs[b] else {
                // difference form keeps sub-rounding differences resolvable
                let diff = truncation_difference(&data[b], &ref_spec, n)?;
                return diff.iter().try_fold(0.0f64, |m, (_, d)| Ok(m.max(error_norm(&d.project(band)?))));
            };
            let gn = grid.with_k_max(n)?;
            let spec = cfg.sampled_flow(gn)?.truncated(n)?;
            let traj = integrate(&data[b].resample(&gn)?, &spec)?;
            sup_distance(reference, &traj, |x, y| Ok(error_norm(&x.resample(&gn)?.sub(y)?.project(band)?)))
        })
        .collect::<Result<_>>()?;
    let rows = cfg
        .n_list
        .iter()
        .enumerate()
        .map(|(a, &n)| {
            let value = errs[a * data.len()..(a + 1) * data.len()].iter().fold(0.0f64, |m, e| m.max(*e));
            SweepRow { param: n as f64, value, extra: vec![] }
        })
        .collect();
    Ok(fitted(cfg, vec!["N", "error"], rows))
}

/// Random perturbation supported in `2N < n <= min(4N, K)` with the given
/// `H^{-1/2}` size.
fn tail_field(cfg: &ExperimentConfig, n: usize, sample: u64) -> Result<FourierField> {
    let grid = cfg.grid()?;
    let mut rng = rng_for(cfg.seed ^ 0x7a11, sample * 1_000_003 + n as u64);
    let hi = (4 * n).min(grid.k_max());
    let coeffs = (1..=grid.k_max())
        .map(|m| {
            let c = gaussian_c(&mut rng);
            if m > 2 * n && m <= hi {
                c
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    normalized(&FourierField::from_coeffs(grid, coeffs)?, cfg.tail_size, -0.5)
}

fn check_tail(tail: &FourierField, n: usize) -> Result<()> {
    if let Some(i) = tail.coeffs().iter().take(2 * n).position(|c| c.norm_sqr() > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tail perturbation has mode {} inside |k| <= 2N = {}",
            i + 1,
            2 * n
        )));
    }
    Ok(())
}

fn tail_error(reference: &Trajectory, u0: &FourierField, tail: &FourierField, n: usize, spec: &FlowSpec) -> Result<f64> {
    check_tail(tail, n)?;
    let perturbed = integrate(&u0.add(tail)?, spec)?;
    let band = Band::AtMost(n as f64 / spec.grid.mu());
    sup_distance(reference, &perturbed, |x, y| Ok(error_norm(&x.sub(y)?.project(band)?)))
}

/// `sup_t ||P_{<=N}(S(t)u0 - S(t)(u0 + tail))||_{H^{-1/2}}`; the tail must
/// vanish on `|k| <= 2N`.
pub fn tail_difference(u0: &FourierField, tail: &FourierField, n: usize, spec: &FlowSpec) -> Result<f64> {
    check_tail(tail, n)?;
    let reference = integrate(u0, spec)?;
    tail_error(&reference, u0, tail, n, spec)
}

/// Sensitivity of low modes to a perturbation above `2N`, swept over `N`.
pub fn high_freq_insensitivity(cfg: &ExperimentConfig) -> Result<SweepResult> {
    require_reference(cfg)?;
    let grid = cfg.grid()?;
    let spec = cfg.sampled_flow(grid)?;
    let refs: Vec<(FourierField, Trajectory)> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let u0 = smooth_random_field(grid, &cfg.data, cfg.seed, i)?;
            let traj = integrate(&u0, &spec)?;
            Ok((u0, traj))
        })
        .collect::<Result<_>>()?;
    let tasks: Vec<(usize, usize)> =
        (0..cfg.n_list.len()).flat_map(|a| (0..refs.len()).map(move |b| (a, b))).collect();
    let errs: Vec<f64> = tasks
        .par_iter()
        .map(|&(a, b)| {
            let n = cfg.n_list[a];
            let tail = tail_field(cfg, n, b as u64)?;
            tail_error(&refs[b].1, &refs[b].0, &tail, n, &spec)
        })
        .collect::<Result<_>>()?;
    let rows = cfg
        .n_list
        .iter()
        .enumerate()
        .map(|(a, &n)| {
            let value = errs[a * refs.len()..(a + 1) * refs.len()].iter().fold(0.0f64, |m, e| m.max(*e));
            SweepRow { param: n as f64, value, extra: vec![] }
        })
        .collect();
    Ok(fitted(cfg, vec!["N", "error"], rows))
}

/// `sup_t |E^4_I(t) - E^4_I(0)|` over `N`, with the `E^2_I` and `E^3_I`
/// drifts alongside. The flow does not depend on `N`, so one trajectory per
/// sample serves the whole sweep.
pub fn almost_conservation_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    if cfg.n_list.is_empty() {
        return Err(Error::InvalidArgument("N_list must not be empty".into()));
    }
    let half_j = cfg.j as f64 / 2.0;
    if !(cfg.s >= -half_j && cfg.s < 0.0) {
        return Err(Error::InvalidArgument(format!("s = {} must lie in [-j/2, 0)", cfg.s)));
    }
    let grid = cfg.grid()?;
    let spec = cfg.sampled_flow(grid)?;
    let trajs: Vec<Trajectory> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| integrate(&smooth_random_field(grid, &cfg.data, cfg.seed, i)?, &spec))
        .collect::<Result<_>>()?;
    let rows = cfg
        .n_list
        .par_iter()
        .map(|&n| {
            let h = EnergyHierarchy::full(IMultiplier::clipped(cfg.s, n as f64)?, grid)?;
            let mut drift = [0.0f64; 3];
            for traj in &trajs {
                let e: Vec<[f64; 3]> = traj.samples.iter().map(|(_, u)| h.energies(u)).collect::<Result<_>>()?;
                for (o, d) in drift.iter_mut().enumerate() {
                    *d = e.iter().fold(*d, |m, x| m.max((x[o] - e[0][o]).abs()));
                }
            }
            Ok(SweepRow { param: n as f64, value: drift[2], extra: vec![drift[0], drift[1]] })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fitted(cfg, vec!["N", "e4_drift", "e2_drift", "e3_drift"], rows))
}
