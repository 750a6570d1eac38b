use num_complex::Complex64;

use super::{sampled_flow, smooth_random_field, ExperimentConfig};
use crate::error::{Error, Result};
use crate::flow::integrate;
use crate::spectral::{Dealias, FourierField, GridSpec, SobolevWeight};

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    /// `lambda = mu_target / mu`.
    pub lambda: f64,
    pub times: Vec<f64>,
    /// `L^2` distance at each time between `u(t)` and the rescaled solution.
    pub mismatch: Vec<f64>,
    pub max_mismatch: f64,
    pub norm_ratio: f64,
    pub predicted_ratio: f64,
    pub ratio_error: f64,
}

/// Solves once on the configured torus and once on the torus stretched by
/// `lambda`, with data `lambda^{-2j} u0(x / lambda)` and time stretched by
/// `lambda^{2j+1}`, and compares `lambda^{2j} u_lambda(lambda^{2j+1} t, lambda x)`
/// with `u(t, x)`. Also checks `||u_{0,lambda}||` against
/// `lambda^{-2j-s+1/2} ||u0||` in the homogeneous `H^s` norm.
pub fn scaling_check(cfg: &ExperimentConfig) -> Result<ScalingReport> {
    cfg.validate()?;
    if !(cfg.mu_target.is_finite() && cfg.mu_target > 0.0) {
        return Err(Error::InvalidArgument(format!("mu_target = {} must be positive", cfg.mu_target)));
    }
    let base = cfg.grid()?;
    let k_target = cfg.target_k.unwrap_or(cfg.k_max);
    if k_target < cfg.k_max {
        return Err(Error::InvalidArgument(format!(
            "target grid is under-resolved: K = {k_target} below the data cutoff {}",
            cfg.k_max
        )));
    }
    let lambda = cfg.mu_target / cfg.mu;
    let j = cfg.j as i32;
    let target = GridSpec::new(cfg.j, k_target, cfg.mu_target, Dealias::Padded)?;
    let u0 = smooth_random_field(base, &cfg.data, cfg.seed, 0)?;
    let mut scaled = vec![Complex64::new(0.0, 0.0); k_target];
    for (d, c) in scaled.iter_mut().zip(u0.coeffs()) {
        *d = c * lambda.powi(-2 * j);
    }
    let u0_scaled = FourierField::from_coeffs(target, scaled)?;

    let time_factor = lambda.powi(2 * j + 1);
    let spec = sampled_flow(base, cfg.dt, cfg.horizon, cfg.scheme)?;
    let spec_scaled = sampled_flow(target, cfg.dt * time_factor, cfg.horizon * time_factor, cfg.scheme)?;
    let a = integrate(&u0, &spec)?;
    let b = integrate(&u0_scaled, &spec_scaled)?;
    if a.samples.len() != b.samples.len() {
        return Err(Error::Experiment("rescaled solve produced a different sample count".into()));
    }
    let cmp = GridSpec::new(cfg.j, k_target, cfg.mu, Dealias::Padded)?;
    let back = lambda.powi(2 * j);
    let mismatch: Vec<f64> = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|((_, x), (_, y))| {
            let diff: Vec<Complex64> = (0..k_target)
                .map(|i| y.coeffs()[i] * back - x.coeffs().get(i).copied().unwrap_or_default())
                .collect();
            Ok(FourierField::from_coeffs(cmp, diff)?.sobolev_norm(0.0))
        })
        .collect::<Result<_>>()?;
    let norm = |u: &FourierField| u.sobolev_norm_with(cfg.s, SobolevWeight::Homogeneous);
    let norm_ratio = norm(&u0_scaled) / norm(&u0);
    let predicted_ratio = lambda.powf(-2.0 * cfg.j as f64 - cfg.s + 0.5);
    Ok(ScalingReport {
        lambda,
        times: a.times().collect(),
        max_mismatch: mismatch.iter().fold(0.0, |m, v| m.max(*v)),
        mismatch,
        norm_ratio,
        predicted_ratio,
        ratio_error: (norm_ratio - predicted_ratio).abs() / predicted_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{DataSpec, ExperimentKind};

    fn cfg() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ExperimentKind::Scaling, 2, 8);
        c.horizon = 0.05;
        c.data = DataSpec { band: 4, decay: 1.0, size: 0.5, size_s: 0.0 };
        c.s = -1.5;
        c
    }

    #[test]
    fn identity_scaling_is_exact() {
        let mut c = cfg();
        c.mu_target = 1.0;
        let r = scaling_check(&c).unwrap();
        assert_eq!(r.max_mismatch, 0.0);
        assert!(r.ratio_error < 1e-15);
    }

    #[test]
    fn doubled_period_matches() {
        let r = scaling_check(&cfg()).unwrap();
        assert!(r.max_mismatch < 1e-10, "{}", r.max_mismatch);
        assert!(r.ratio_error < 1e-12);
        assert!((r.predicted_ratio - 2f64.powf(-4.0 + 1.5 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn refined_target_grid_agrees() {
        let mut c = cfg();
        c.target_k = Some(16);
        let r = scaling_check(&c).unwrap();
        assert!(r.max_mismatch < 1e-6, "{}", r.max_mismatch);
        c.target_k = Some(4);
        assert!(scaling_check(&c).is_err());
    }
}
