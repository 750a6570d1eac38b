use num_complex::Complex64;
use rayon::prelude::*;
use rand_distr::{Distribution, StandardNormal};

use super::{rng_for, sampled_flow, ExperimentConfig};
use crate::error::{Error, Result};
use crate::flow::{evolve, FlowSpec};
use crate::spectral::{FourierField, GridSpec};

/// Orthonormal real coordinates for the homogeneous `H^{-1/2}` metric on
/// `P_{<=N}`: `y_n = 2 sqrt(pi mu) |k_n|^{-1/2} c_n`, split into real and
/// imaginary parts.
#[derive(Debug, Clone)]
pub struct BallCoordinates {
    grid: GridSpec,
    scale: Vec<f64>,
}

impl BallCoordinates {
    pub fn new(grid: GridSpec) -> Self {
        let scale = (1..=grid.k_max() as i64)
            .map(|n| 2.0 * (std::f64::consts::PI * grid.mu()).sqrt() / grid.wavenumber(n).sqrt())
            .collect();
        BallCoordinates { grid, scale }
    }

    pub fn dim(&self) -> usize {
        2 * self.scale.len()
    }

    pub fn to_field(&self, x: &[f64]) -> Result<FourierField> {
        let coeffs = self
            .scale
            .iter()
            .enumerate()
            .map(|(i, s)| Complex64::new(x[2 * i], x[2 * i + 1]) / s)
            .collect();
        FourierField::from_coeffs(self.grid, coeffs)
    }

    pub fn from_field(&self, u: &FourierField) -> Vec<f64> {
        u.coeffs().iter().zip(&self.scale).flat_map(|(c, s)| [c.re * s, c.im * s]).collect()
    }
}

/// `|k0|^{-1/2} |F(u)(k0) - z|` with `F(u)(k) = 2 sqrt(pi mu) c_k`, the mode
/// coordinate in which the `H^{-1/2}` norm is a plain weighted sum.
pub fn cylinder_coordinate(u: &FourierField, k0: i64, z: Complex64) -> f64 {
    let g = u.grid();
    let f = u.coeff(k0) * 2.0 * (std::f64::consts::PI * g.mu()).sqrt();
    (f - z).norm() / g.wavenumber(k0).abs().sqrt()
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub u0: FourierField,
    /// Cylinder coordinate of `S(T) u0`, recomputed from a fresh solve of `u0`.
    pub value: f64,
    /// Best value over the random and axis samples, before ascent.
    pub sample_best: f64,
    /// Best value after each ascent sweep.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

struct Search<'a> {
    coords: BallCoordinates,
    center: FourierField,
    spec: FlowSpec,
    radius: f64,
    cfg: &'a ExperimentConfig,
}

impl Search<'_> {
    fn on_sphere(&self, mut x: Vec<f64>) -> Vec<f64> {
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.0 {
            x.iter_mut().for_each(|v| *v *= self.radius / n);
        }
        x
    }

    fn field(&self, x: &[f64]) -> Result<FourierField> {
        self.center.add(&self.coords.to_field(x)?)
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        let u = evolve(&self.field(x)?, &self.spec)?;
        Ok(cylinder_coordinate(&u, self.cfg.k0, self.cfg.z))
    }

    /// Index and value of the best candidate; ties go to the lowest index.
    fn best(&self, cands: &[Vec<f64>]) -> Result<(usize, f64)> {
        let vals: Vec<f64> = cands.par_iter().map(|x| self.eval(x)).collect::<Result<_>>()?;
        Ok(vals.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, v)| if *v > b.1 { (i, *v) } else { b }))
    }
}

/// Searches the sphere of radius `R` about the centre for data whose flow at
/// time `T` lies far out along the cylinder coordinate of mode `k0`.
///
/// The truncation level `N` is the configured cutoff `K`. `samples` random
/// points and the `2 * 2N` coordinate poles seed a greedy projected
/// coordinate ascent whose step halves whenever a sweep finds no improvement.
pub fn squeeze_witness(cfg: &ExperimentConfig) -> Result<Witness> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let n = grid.k_max();
    if cfg.k0.unsigned_abs() as usize > n {
        return Err(Error::InvalidArgument(format!("|k0| = {} exceeds N = {n}", cfg.k0.abs())));
    }
    let center = match &cfg.center {
        None => FourierField::zeros(grid),
        Some(c) => {
            if c.grid().j() != grid.j() || c.grid().mu() != grid.mu() {
                return Err(Error::GridMismatch("ball centre must share j and mu with the grid".into()));
            }
            if c.coeffs().iter().skip(n).any(|x| x.norm_sqr() > 0.0) {
                return Err(Error::InvalidArgument(format!("ball centre has modes above N = {n}")));
            }
            c.resample(&grid)?
        }
    };
    let spec = sampled_flow(grid, cfg.dt, cfg.horizon, cfg.scheme)?.truncated(n)?;
    let search = Search { coords: BallCoordinates::new(grid), center, spec, radius: cfg.radius, cfg };
    let dim = search.coords.dim();

    let mut cands: Vec<Vec<f64>> = (0..cfg.samples as u64)
        .map(|i| {
            let mut rng = rng_for(cfg.seed, i);
            search.on_sphere((0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        })
        .collect();
    for i in 0..dim {
        for sign in [1.0, -1.0] {
            let mut x = vec![0.0; dim];
            x[i] = sign * cfg.radius;
            cands.push(x);
        }
    }
    let (i, sample_best) = search.best(&cands)?;
    let mut evaluations = cands.len();
    let mut x = cands.swap_remove(i);
    let mut value = sample_best;
    let mut step = cfg.radius / 4.0;
    let mut history = Vec::with_capacity(cfg.ascent_sweeps);
    for _ in 0..cfg.ascent_sweeps {
        if step < 1e-9 * cfg.radius {
            break;
        }
        let trials: Vec<Vec<f64>> = (0..dim)
            .flat_map(|i| [step, -step].map(|d| (i, d)))
            .map(|(i, d)| {
                let mut y = x.clone();
                y[i] += d;
                search.on_sphere(y)
            })
            .collect();
        let (i, v) = search.best(&trials)?;
        evaluations += trials.len();
        if v > value {
            value = v;
            x = trials[i].clone();
        } else {
            step /= 2.0;
        }
        history.push(value);
    }
    let u0 = search.field(&x)?;
    let value = cylinder_coordinate(&evolve(&u0, &search.spec)?, cfg.k0, cfg.z);
    Ok(Witness { u0, value, sample_best, history, evaluations: evaluations + 1 })
}
