//! Parameter sweeps and witness searches built on the flows and energies.
//!
//! Every experiment is a pure function of an [`ExperimentConfig`]; random
//! draws use ChaCha8 with one stream per task index, so results do not depend
//! on thread count or scheduling.

mod scaling;
mod sweeps;
mod witness;

pub use scaling::{scaling_check, ScalingReport};
pub use sweeps::{almost_conservation_sweep, approx_truncated_sweep, high_freq_insensitivity, tail_difference};
pub use witness::{cylinder_coordinate, squeeze_witness, BallCoordinates, Witness};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::flow::{FlowSpec, Scheme};
use crate::spectral::{Dealias, FourierField, GridSpec, SobolevWeight};

/// Uniform time samples used for every "sup over t" (plus `t = 0`).
pub const TIME_SAMPLES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    ApproxSweep,
    TailSweep,
    AlmostConservation,
    Squeeze,
    Scaling,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::ApproxSweep => "approx-sweep",
            ExperimentKind::TailSweep => "tail-sweep",
            ExperimentKind::AlmostConservation => "almost-cons",
            ExperimentKind::Squeeze => "squeeze",
            ExperimentKind::Scaling => "scaling-check",
        }
    }
}

/// Random smooth initial data: complex Gaussians times `exp(-decay n)` on
/// `1 <= n <= band`, rescaled to `size` in the `H^{size_s}` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataSpec {
    pub band: usize,
    pub decay: f64,
    pub size: f64,
    pub size_s: f64,
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec { band: 8, decay: 1.0, size: 1.0, size_s: -0.5 }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub j: u32,
    /// Mode cutoff of the working grid (the reference resolution for sweeps).
    pub k_max: usize,
    pub mu: f64,
    /// Largest allowed step; sweeps shrink it so the sample times fall on steps.
    pub dt: f64,
    pub horizon: f64,
    pub scheme: Scheme,
    pub n_list: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    /// Sobolev index of the smoothing multiplier, or of the scaling norm.
    pub s: f64,
    pub data: DataSpec,
    /// `H^{-1/2}` size of the high-frequency perturbation in tail sweeps.
    pub tail_size: f64,
    pub center: Option<FourierField>,
    pub radius: f64,
    pub k0: i64,
    pub z: Complex64,
    pub cylinder_radius: f64,
    pub ascent_sweeps: usize,
    /// Period parameter of the rescaled problem.
    pub mu_target: f64,
    /// Cutoff of the rescaled grid; defaults to `k_max`.
    pub target_k: Option<usize>,
    /// Fits whose RMS log-residual exceeds this are flagged.
    pub fit_threshold: f64,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, j: u32, k_max: usize) -> Self {
        ExperimentConfig {
            kind,
            j,
            k_max,
            mu: 1.0,
            dt: 1e-3,
            horizon: 1.0,
            scheme: Scheme::default(),
            n_list: Vec::new(),
            samples: 1,
            seed: 0,
            s: -0.5,
            data: DataSpec::default(),
            tail_size: 1.0,
            center: None,
            radius: 1.0,
            k0: 1,
            z: Complex64::new(0.0, 0.0),
            cylinder_radius: 0.0,
            ascent_sweeps: 200,
            mu_target: 2.0,
            target_k: None,
            fit_threshold: 0.25,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("N_list {:?} must be strictly increasing", self.n_list));
        }
        if self.n_list.first() == Some(&0) {
            return bad("N_list entries must be positive".into());
        }
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return bad(format!("ball radius R = {} must be positive", self.radius));
        }
        if self.k0 == 0 {
            return bad("cylinder mode k0 must be nonzero".into());
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return bad(format!("T = {} must be nonnegative", self.horizon));
        }
        if self.data.band == 0 || !(self.data.size.is_finite() && self.data.size >= 0.0) {
            return bad("data band must be positive and data size nonnegative".into());
        }
        self.grid()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.j, self.k_max, self.mu, Dealias::Padded)
    }

    /// Flow spec on `grid` over the configured horizon with samples at
    /// `TIME_SAMPLES` uniform times.
    pub fn sampled_flow(&self, grid: GridSpec) -> Result<FlowSpec> {
        sampled_flow(grid, self.dt, self.horizon, self.scheme)
    }
}

/// Largest step `<= dt_max` that puts `TIME_SAMPLES` equally spaced samples on
/// step boundaries of `[0, horizon]`.
pub fn sampled_flow(grid: GridSpec, dt_max: f64, horizon: f64, scheme: Scheme) -> Result<FlowSpec> {
    if horizon == 0.0 {
        return FlowSpec::new(grid, dt_max, 0.0).map(|s| s.with_scheme(scheme));
    }
    let slot = horizon / TIME_SAMPLES as f64;
    let per_slot = (slot / dt_max - 1e-9).ceil().max(1.0) as usize;
    let dt = slot / per_slot as f64;
    FlowSpec::new(grid, dt, horizon)?.with_scheme(scheme).with_sample_every(per_slot)
}

/// ChaCha8 stream `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn gaussian_c(rng: &mut ChaCha8Rng) -> Complex64 {
    let a: f64 = StandardNormal.sample(rng);
    let b: f64 = StandardNormal.sample(rng);
    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

/// Smooth random field drawn from stream `stream` of `seed`.
pub fn smooth_random_field(grid: GridSpec, data: &DataSpec, seed: u64, stream: u64) -> Result<FourierField> {
    let mut rng = rng_for(seed, stream);
    let band = data.band.min(grid.k_max());
    let coeffs = (1..=grid.k_max())
        .map(|n| {
            let c = gaussian_c(&mut rng);
            if n <= band {
                c * (-data.decay * n as f64).exp()
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let u = FourierField::from_coeffs(grid, coeffs)?;
    normalized(&u, data.size, data.size_s)
}

/// `u` rescaled to `size` in `H^s`; the zero field is returned unchanged.
pub fn normalized(u: &FourierField, size: f64, s: f64) -> Result<FourierField> {
    let n = u.sobolev_norm(s);
    if n == 0.0 {
        if size == 0.0 {
            return Ok(u.clone());
        }
        return Err(Error::Experiment("cannot normalise the zero field".into()));
    }
    Ok(u.scale(size / n))
}

/// The `H^{-1/2}` norm used to measure sweep errors.
pub fn error_norm(u: &FourierField) -> f64 {
    u.sobolev_norm_with(-0.5, SobolevWeight::Inhomogeneous)
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub exponent: f64,
    pub intercept: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub flagged: bool,
}

pub fn power_fit(points: &[(f64, f64)], threshold: f64) -> Option<PowerFit> {
    if points.len() < 3 || points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0 && y.is_finite())) {
        return None;
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual =
        (lx.iter().zip(&ly).map(|(x, y)| (y - intercept - exponent * x).powi(2)).sum::<f64>() / n).sqrt();
    Some(PowerFit { exponent, intercept, residual, flagged: residual > threshold })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub value: f64,
    pub extra: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub kind: ExperimentKind,
    /// Column names: parameter, value, then one per `extra` entry.
    pub columns: Vec<&'static str>,
    pub rows: Vec<SweepRow>,
    /// Fit of `value` against `param`.
    pub fit: Option<PowerFit>,
    pub diagnostics: Vec<(String, f64)>,
}

impl SweepResult {
    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    /// First consecutive pair `(i, i+1)` whose value fails to strictly decrease.
    pub fn first_non_decreasing(&self) -> Option<(usize, usize)> {
        self.rows.windows(2).position(|w| !(w[1].value < w[0].value)).map(|i| (i, i + 1))
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{}", r.param, r.value));
            for e in &r.extra {
                out.push_str(&format!(",{e}"));
            }
            out.push('\n');
        }
        out
    }
}
