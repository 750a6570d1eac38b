//! Transforms between stored coefficients and collocation samples.
//!
//! Sample `x_m = 2 pi mu m / M`; the field there is
//! `u(x_m) = sum_{0<|n|<=K} c_n exp(2 pi i n m / M)` with `c_{-n} = conj(c_n)`.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{FourierField, GridSpec};
use crate::error::{Error, Result};

struct Plans {
    planner: FftPlanner<f64>,
    cache: HashMap<(usize, bool), Arc<dyn Fft<f64>>>,
}

static PLANS: LazyLock<Mutex<Plans>> =
    LazyLock::new(|| Mutex::new(Plans { planner: FftPlanner::new(), cache: HashMap::new() }));

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut plans = PLANS.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(p) = plans.cache.get(&(len, inverse)) {
        return Arc::clone(p);
    }
    let p = if inverse {
        plans.planner.plan_fft_inverse(len)
    } else {
        plans.planner.plan_fft_forward(len)
    };
    plans.cache.insert((len, inverse), Arc::clone(&p));
    p
}

/// Reusable forward/inverse pair of one size, with scratch space.
pub struct Transformer {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buffer: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Transformer {
    pub fn new(len: usize) -> Self {
        let forward = plan(len, false);
        let inverse = plan(len, true);
        let scratch_len =
            forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Transformer {
            len,
            forward,
            inverse,
            buffer: vec![Complex64::new(0.0, 0.0); len],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Synthesise samples from positive-index coefficients `coeffs[n-1] = c_n`.
    pub fn synthesize(&mut self, coeffs: &[Complex64], out: &mut [f64]) {
        debug_assert!(2 * coeffs.len() < self.len);
        debug_assert_eq!(out.len(), self.len);
        self.buffer.fill(Complex64::new(0.0, 0.0));
        for (i, c) in coeffs.iter().enumerate() {
            let n = i + 1;
            self.buffer[n] = *c;
            self.buffer[self.len - n] = c.conj();
        }
        self.inverse.process_with_scratch(&mut self.buffer, &mut self.scratch);
        for (o, b) in out.iter_mut().zip(&self.buffer) {
            *o = b.re;
        }
    }

    /// Analyse real samples into `coeffs[n-1] = c_n`, dropping the mean and
    /// every index above `coeffs.len()`.
    pub fn analyze(&mut self, samples: &[f64], coeffs: &mut [Complex64]) {
        debug_assert!(2 * coeffs.len() < self.len);
        debug_assert_eq!(samples.len(), self.len);
        for (b, s) in self.buffer.iter_mut().zip(samples) {
            *b = Complex64::new(*s, 0.0);
        }
        self.forward.process_with_scratch(&mut self.buffer, &mut self.scratch);
        let scale = 1.0 / self.len as f64;
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c = self.buffer[i + 1] * scale;
        }
    }
}

/// Physical samples of `u` on its grid's collocation points.
pub fn transform(u: &FourierField) -> Vec<f64> {
    samples_on(u, u.grid().physical_points())
}

/// Samples of `u` on `points` equispaced nodes; `points` must exceed `2K`.
pub fn samples_on(u: &FourierField, points: usize) -> Vec<f64> {
    assert!(points > 2 * u.grid().k_max(), "too few points to represent the field");
    let mut t = Transformer::new(points);
    let mut out = vec![0.0; points];
    t.synthesize(u.coeffs(), &mut out);
    out
}

/// Coefficients of real samples taken on the grid's collocation points.
pub fn inverse(samples: &[f64], grid: &GridSpec) -> Result<FourierField> {
    let m = grid.physical_points();
    if samples.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: samples.len() });
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.k_max()];
    Transformer::new(m).analyze(samples, &mut coeffs);
    FourierField::from_coeffs(*grid, coeffs)
}

/// Collocation nodes `x_m = 2 pi mu m / M`.
pub fn nodes(grid: &GridSpec, points: usize) -> Vec<f64> {
    let h = grid.length() / points as f64;
    (0..points).map(|m| m as f64 * h).collect()
}

/// Quadrature `integral_0^{2 pi mu} f dx` of samples on equispaced nodes.
pub fn periodic_quadrature(grid: &GridSpec, samples: &[f64]) -> f64 {
    grid.length() / samples.len() as f64 * samples.iter().sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Dealias;

    fn grid() -> GridSpec {
        GridSpec::new(2, 8, 1.0, Dealias::Padded).unwrap()
    }

    #[test]
    fn cosine_round_trip() {
        let g = grid();
        let u = FourierField::cosine(g, 1, 1.0).unwrap();
        let s = transform(&u);
        let back = transform(&inverse(&s, &g).unwrap());
        let scale = s.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (a, b) in s.iter().zip(&back) {
            assert!((a - b).abs() <= 1e-13 * scale);
        }
        let x = nodes(&g, g.physical_points());
        for (xi, si) in x.iter().zip(&s) {
            assert!((xi.cos() - si).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_field_gives_zero_samples() {
        let s = transform(&FourierField::zeros(grid()));
        assert!(s.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn mean_is_discarded() {
        let g = grid();
        let x = nodes(&g, g.physical_points());
        let s: Vec<f64> = x.iter().map(|x| x.cos() + 0.5).collect();
        let u = inverse(&s, &g).unwrap();
        let want = FourierField::cosine(g, 1, 1.0).unwrap();
        assert!(u.sub(&want).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn high_modes_are_discarded() {
        let g = grid();
        let x = nodes(&g, g.physical_points());
        let s: Vec<f64> = x.iter().map(|x| (2.0 * x).sin() + (11.0 * x).cos()).collect();
        let u = inverse(&s, &g).unwrap();
        let want = FourierField::sine(g, 2, 1.0).unwrap();
        assert!(u.sub(&want).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn length_mismatch() {
        let g = grid();
        assert!(matches!(inverse(&[0.0; 3], &g), Err(Error::LengthMismatch { .. })));
    }
}
