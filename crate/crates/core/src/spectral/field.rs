use num_complex::Complex64;

use super::GridSpec;
use crate::error::{Error, Result};

/// Frequency band selected by a sharp Fourier projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Band {
    /// `|k| <= N`
    AtMost(f64),
    /// `|k| >= N`
    AtLeast(f64),
    /// `N <= |k| < 2N`
    Dyadic(f64),
    /// `|k| > N`
    Above(f64),
}

impl Band {
    fn threshold(&self) -> f64 {
        match *self {
            Band::AtMost(n) | Band::AtLeast(n) | Band::Dyadic(n) | Band::Above(n) => n,
        }
    }

    pub fn contains(&self, k: f64) -> bool {
        let a = k.abs();
        match *self {
            Band::AtMost(n) => a <= n,
            Band::AtLeast(n) => a >= n,
            Band::Dyadic(n) => n <= a && a < 2.0 * n,
            Band::Above(n) => a > n,
        }
    }
}

/// Weight used for Sobolev norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SobolevWeight {
    /// `<k>^(2s)` with `<k> = (1 + k^2)^(1/2)`.
    #[default]
    Inhomogeneous,
    /// `|k|^(2s)`; well defined because fields carry no zero mode.
    Homogeneous,
}

/// Real, mean-zero field on the torus of length `2 pi mu`.
///
/// Only the Fourier-series coefficients `c_n`, `n = 1..=K`, are stored, so
/// that `u(x) = sum_{0<|n|<=K} c_n e^{i n x / mu}` with `c_{-n} = conj(c_n)`.
/// The Fourier transform `u_hat(k) = integral e^{-ikx} u dx` is
/// `2 pi mu c_n` at `k = n / mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl FourierField {
    pub fn zeros(grid: GridSpec) -> Self {
        FourierField { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.k_max()] }
    }

    /// Builds a field from `coeffs[n-1] = c_n`.
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.k_max() {
            return Err(Error::LengthMismatch { expected: grid.k_max(), got: coeffs.len() });
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(FourierField { grid, coeffs })
    }

    /// `amplitude * cos(n x / mu)`.
    pub fn cosine(grid: GridSpec, n: usize, amplitude: f64) -> Result<Self> {
        Self::single_mode(grid, n, Complex64::new(0.5 * amplitude, 0.0))
    }

    /// `amplitude * sin(n x / mu)`.
    pub fn sine(grid: GridSpec, n: usize, amplitude: f64) -> Result<Self> {
        Self::single_mode(grid, n, Complex64::new(0.0, -0.5 * amplitude))
    }

    pub fn single_mode(grid: GridSpec, n: usize, c: Complex64) -> Result<Self> {
        if n == 0 || n > grid.k_max() {
            return Err(Error::InvalidArgument(format!("mode {n} outside 1..={}", grid.k_max())));
        }
        let mut u = Self::zeros(grid);
        u.coeffs[n - 1] = c;
        Ok(u)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient `c_n` for any index, using conjugate symmetry for `n < 0`.
    pub fn coeff(&self, n: i64) -> Complex64 {
        let a = n.unsigned_abs() as usize;
        if n == 0 || a > self.coeffs.len() {
            return Complex64::new(0.0, 0.0);
        }
        let c = self.coeffs[a - 1];
        if n > 0 {
            c
        } else {
            c.conj()
        }
    }

    /// Largest index with a nonzero coefficient (0 for the zero field).
    pub fn support(&self) -> usize {
        self.coeffs.iter().rposition(|c| c.norm_sqr() > 0.0).map_or(0, |i| i + 1)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, c| a.max(c.norm()))
    }

    fn map_indexed(&self, mut f: impl FnMut(i64, Complex64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| f(i as i64 + 1, *c))
            .collect();
        FourierField { grid: self.grid, coeffs }
    }

    fn zip_with(
        &self,
        other: &FourierField,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.grid.ensure_compatible(&other.grid)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(*a, *b)).collect();
        Ok(FourierField { grid: self.grid, coeffs })
    }

    pub fn add(&self, other: &FourierField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &FourierField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map_indexed(|_, c| c * factor)
    }

    /// `self + factor * other`
    pub fn axpy(&self, factor: f64, other: &FourierField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b * factor)
    }

    /// Scales each coefficient by a real even symbol of the wavenumber.
    pub fn apply_symbol(&self, symbol: impl Fn(f64) -> f64) -> Self {
        let g = self.grid;
        self.map_indexed(|n, c| c * symbol(g.wavenumber(n)))
    }

    /// Mirror image `u(-x)`; together with `t -> -t` this is a symmetry of
    /// the equation, which gives backward-in-time solves.
    pub fn reflect(&self) -> Self {
        self.map_indexed(|_, c| c.conj())
    }

    /// Sharp Fourier projection onto `band`.
    pub fn project(&self, band: Band) -> Result<Self> {
        let n = band.threshold();
        if !(n > 0.0) {
            return Err(Error::InvalidArgument(format!("projection threshold {n} must be positive")));
        }
        let g = self.grid;
        Ok(self.map_indexed(|i, c| {
            if band.contains(g.wavenumber(i)) {
                c
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Re-expresses the field on a grid with the same `j`, `mu` and a different
    /// cutoff, truncating or zero-extending.
    pub fn resample(&self, grid: &GridSpec) -> Result<Self> {
        if grid.j() != self.grid.j() || grid.mu() != self.grid.mu() {
            return Err(Error::GridMismatch("resample needs equal j and mu".into()));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.k_max()];
        for (dst, src) in coeffs.iter_mut().zip(&self.coeffs) {
            *dst = *src;
        }
        Ok(FourierField { grid: *grid, coeffs })
    }

    /// `d^m/dx^m` for `m >= -1`; `m = -1` is the mean-zero antiderivative.
    pub fn derivative(&self, m: i32) -> Result<Self> {
        if m < -1 {
            return Err(Error::DerivativeOrder(m));
        }
        let g = self.grid;
        Ok(self.map_indexed(|n, c| c * (Complex64::i() * g.wavenumber(n)).powi(m)))
    }

    /// `||u||_{H^s}` with the `<k>` weight.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.sobolev_norm_with(s, SobolevWeight::Inhomogeneous)
    }

    /// `(2 pi mu)^{-1} sum_k w(k)^{2s} |u_hat(k)|^2`, square-rooted.
    pub fn sobolev_norm_with(&self, s: f64, weight: SobolevWeight) -> f64 {
        let g = self.grid;
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = g.wavenumber(i as i64 + 1);
                let w = match weight {
                    SobolevWeight::Inhomogeneous => (1.0 + k * k).powf(s),
                    SobolevWeight::Homogeneous => k.abs().powf(2.0 * s),
                };
                w * c.norm_sqr()
            })
            .sum();
        // both signs of n contribute equally
        (2.0 * g.length() * sum).sqrt()
    }

    /// `integral u v dx`.
    pub fn inner(&self, other: &FourierField) -> Result<f64> {
        self.grid.ensure_compatible(&other.grid)?;
        let sum: f64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a * b.conj()).re).sum();
        Ok(2.0 * self.grid.length() * sum)
    }

    /// Symplectic pairing `integral u d_x^{-1} v dx`.
    pub fn symplectic_form(&self, other: &FourierField) -> Result<f64> {
        self.grid.ensure_compatible(&other.grid)?;
        let g = self.grid;
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(i, (a, b))| (a * b.conj()).im / g.wavenumber(i as i64 + 1))
            .sum();
        Ok(-2.0 * g.length() * sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{transform, Dealias};
    use std::f64::consts::PI;

    fn g() -> GridSpec {
        GridSpec::new(2, 8, 1.0, Dealias::Padded).unwrap()
    }

    fn cos(n: usize) -> FourierField {
        FourierField::cosine(g(), n, 1.0).unwrap()
    }

    fn sin(n: usize) -> FourierField {
        FourierField::sine(g(), n, 1.0).unwrap()
    }

    fn close(a: &FourierField, b: &FourierField, tol: f64) -> bool {
        a.sub(b).unwrap().max_abs() <= tol
    }

    #[test]
    fn projection_examples() {
        let u = cos(1).add(&cos(2)).unwrap();
        assert_eq!(u.project(Band::AtMost(1.0)).unwrap(), cos(1));
        assert_eq!(cos(1).project(Band::AtMost(8.0)).unwrap(), cos(1));
        assert_eq!(cos(1).project(Band::AtLeast(3.0)).unwrap(), FourierField::zeros(g()));
        assert_eq!(u.project(Band::Dyadic(2.0)).unwrap(), cos(2));
        assert!(u.project(Band::AtMost(0.0)).is_err());
    }

    #[test]
    fn derivative_examples() {
        assert!(close(&cos(1).derivative(1).unwrap(), &sin(1).scale(-1.0), 1e-16));
        assert!(close(&sin(1).derivative(-1).unwrap(), &cos(1).scale(-1.0), 1e-16));
        let back = cos(2).derivative(-1).unwrap().derivative(1).unwrap();
        assert!(close(&back, &cos(2), 1e-14));
        assert!(matches!(cos(1).derivative(-2), Err(Error::DerivativeOrder(-2))));
    }

    #[test]
    fn sobolev_norm_examples() {
        // oracle: trapezoid quadrature of cos^2 on a fine grid
        let n = 4096;
        let quad: f64 = (0..n).map(|m| (2.0 * PI * m as f64 / n as f64).cos().powi(2)).sum::<f64>()
            * 2.0
            * PI
            / n as f64;
        assert!((cos(1).sobolev_norm(0.0) - quad.sqrt()).abs() < 1e-12);
        assert!((cos(1).sobolev_norm(0.0) - 1.772_453_850_905_516).abs() < 1e-12);
        let want = 2f64.powf(-0.25) * PI.sqrt();
        assert!((cos(1).sobolev_norm(-0.5) - want).abs() < 1e-12);
        assert!((want - 1.490_450_089).abs() < 1e-9);
        assert_eq!(FourierField::zeros(g()).sobolev_norm(1.3), 0.0);
    }

    #[test]
    fn symplectic_form_examples() {
        // quadrature oracle: d_x^{-1} sin = -cos, integral cos * (-cos) = -pi
        assert!((cos(1).symplectic_form(&sin(1)).unwrap() + PI).abs() < 1e-14);
        assert!(cos(1).symplectic_form(&cos(2)).unwrap().abs() < 1e-15);
        let u = cos(1).add(&sin(3).scale(0.3)).unwrap();
        assert_eq!(u.symplectic_form(&u).unwrap(), 0.0);
        let other = FourierField::cosine(GridSpec::periodic(2, 9).unwrap(), 1, 1.0).unwrap();
        assert!(matches!(cos(1).symplectic_form(&other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn symplectic_form_matches_quadrature() {
        let gr = g();
        let u = cos(1).add(&sin(2).scale(0.4)).unwrap().add(&cos(5).scale(-0.7)).unwrap();
        let v = sin(1).add(&cos(2).scale(1.1)).unwrap().add(&sin(5).scale(0.2)).unwrap();
        let w = v.derivative(-1).unwrap();
        let points = 64;
        let su = transform::samples_on(&u, points);
        let sw = transform::samples_on(&w, points);
        let prod: Vec<f64> = su.iter().zip(&sw).map(|(a, b)| a * b).collect();
        let quad = transform::periodic_quadrature(&gr, &prod);
        assert!((u.symplectic_form(&v).unwrap() - quad).abs() < 1e-13);
    }

    #[test]
    fn reflection_is_mirror_image() {
        let u = cos(1).add(&sin(3)).unwrap();
        let s = transform::samples_on(&u, 32);
        let r = transform::samples_on(&u.reflect(), 32);
        for m in 1..32 {
            assert!((s[m] - r[32 - m]).abs() < 1e-14);
        }
    }

    #[test]
    fn homogeneous_norm() {
        let u = cos(2);
        let want = (PI * 2f64.powi(-3)).sqrt();
        assert!((u.sobolev_norm_with(-1.5, SobolevWeight::Homogeneous) - want).abs() < 1e-14);
    }
}
