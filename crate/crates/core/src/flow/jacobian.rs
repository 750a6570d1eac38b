//! Flow-map Jacobians in real Fourier coordinates.
//!
//! Coordinate `2(n-1)` is `Re u_hat(k_n)` and `2(n-1)+1` is `Im u_hat(k_n)`,
//! with `u_hat = 2 pi mu c_n`, for `1 <= n <= N`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{evolve, FlowSpec};
use crate::error::{Error, Result};
use crate::spectral::{FourierField, GridSpec};

pub const MAX_DIMENSION: usize = 64;

fn coordinates(u: &FourierField, n: usize) -> Vec<f64> {
    let scale = u.grid().length();
    u.coeffs()[..n].iter().flat_map(|c| [c.re * scale, c.im * scale]).collect()
}

/// Central-difference Jacobian of `u0 -> S(T) u0` over the first `N` modes,
/// `N` being the truncation of `spec` (or `K` for the full flow).
pub fn flow_jacobian(u0: &FourierField, spec: &FlowSpec, h: f64) -> Result<DMatrix<f64>> {
    spec.validate()?;
    spec.grid.ensure_compatible(u0.grid())?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!("difference step {h} must be positive")));
    }
    let n = spec.cutoff();
    let dim = 2 * n;
    if dim > MAX_DIMENSION {
        return Err(Error::JacobianTooLarge(dim));
    }
    let scale = spec.grid.length();
    let perturbed = |col: usize, sign: f64| -> Result<Vec<f64>> {
        let mut c = u0.coeffs().to_vec();
        let d = sign * h / scale;
        if col % 2 == 0 {
            c[col / 2] += Complex64::new(d, 0.0);
        } else {
            c[col / 2] += Complex64::new(0.0, d);
        }
        let v = evolve(&FourierField::from_coeffs(spec.grid, c)?, spec)?;
        Ok(coordinates(&v, n))
    };
    let columns: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|col| {
            let plus = perturbed(col, 1.0)?;
            let minus = perturbed(col, -1.0)?;
            Ok(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(dim, dim, |r, c| columns[c][r]))
}

/// Matrix of the pairing `integral u d_x^{-1} v` in the real coordinates.
pub fn symplectic_matrix(grid: &GridSpec, n: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for m in 1..=n {
        let w = 1.0 / (std::f64::consts::PI * grid.mu() * grid.wavenumber(m as i64));
        let i = 2 * (m - 1);
        omega[(i, i + 1)] = w;
        omega[(i + 1, i)] = -w;
    }
    omega
}

/// `max |J^T Omega J - Omega|`.
pub fn check_symplectic(j: &DMatrix<f64>, grid: &GridSpec, n: usize) -> Result<f64> {
    if j.nrows() != j.ncols() || j.nrows() % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "Jacobian must be square of even size, got {}x{}",
            j.nrows(),
            j.ncols()
        )));
    }
    if j.nrows() != 2 * n {
        return Err(Error::InvalidArgument(format!("Jacobian size {} does not match 2N = {}", j.nrows(), 2 * n)));
    }
    let omega = symplectic_matrix(grid, n);
    let defect = j.transpose() * &omega * j - omega;
    Ok(defect.amax())
}

/// Exact Jacobian of the linear flow: rotation by `k^(2j+1) t` per mode.
pub fn rotation_jacobian(grid: &GridSpec, n: usize, t: f64) -> DMatrix<f64> {
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    for m in 1..=n {
        let (s, c) = (grid.dispersion(m as i64) * t).sin_cos();
        let i = 2 * (m - 1);
        r[(i, i)] = c;
        r[(i, i + 1)] = -s;
        r[(i + 1, i)] = s;
        r[(i + 1, i + 1)] = c;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn data(g: GridSpec) -> FourierField {
        let c = (1..=g.k_max()).map(|n| Complex64::new(0.3 / n as f64, 0.1 * n as f64 / 8.0)).collect();
        FourierField::from_coeffs(g, c).unwrap()
    }

    #[test]
    fn identity_at_time_zero() {
        let g = GridSpec::periodic(2, 8).unwrap();
        let spec = FlowSpec::new(g, 1e-3, 0.0).unwrap().truncated(4).unwrap();
        let j = flow_jacobian(&data(g), &spec, 1e-5).unwrap();
        assert!((j - DMatrix::<f64>::identity(8, 8)).amax() < 1e-10);
    }

    #[test]
    fn linear_flow_gives_rotations() {
        let g = GridSpec::periodic(2, 8).unwrap();
        let spec = FlowSpec::new(g, 1e-3, 0.05).unwrap().truncated(3).unwrap().linear_only();
        let j = flow_jacobian(&data(g), &spec, 1e-4).unwrap();
        let r = rotation_jacobian(&g, 3, 0.05);
        assert!((&j - &r).amax() < 1e-9);
        assert!(check_symplectic(&r, &g, 3).unwrap() < 1e-12);
    }

    #[test]
    fn defect_examples() {
        let g = GridSpec::periodic(2, 8).unwrap();
        assert_eq!(check_symplectic(&DMatrix::identity(8, 8), &g, 4).unwrap(), 0.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let m = DMatrix::from_fn(8, 8, |_, _| rng.random::<f64>());
        assert!(check_symplectic(&m, &g, 4).unwrap() > 1e-3);
        assert!(check_symplectic(&DMatrix::identity(7, 7), &g, 4).is_err());
        assert!(check_symplectic(&DMatrix::identity(6, 6), &g, 4).is_err());
    }

    #[test]
    fn size_guard() {
        let g = GridSpec::periodic(2, 40).unwrap();
        let spec = FlowSpec::new(g, 1e-3, 0.0).unwrap().truncated(33).unwrap();
        assert!(matches!(flow_jacobian(&data(g), &spec, 1e-5), Err(Error::JacobianTooLarge(66))));
    }

    #[test]
    fn omega_matches_pairing() {
        // omega(cos x, sin x) = -pi; cos x has u_hat(1) = (pi, 0), sin x has (0, -pi)
        let g = GridSpec::periodic(1, 2).unwrap();
        let o = symplectic_matrix(&g, 2);
        let x = nalgebra::DVector::from_vec(vec![std::f64::consts::PI, 0.0, 0.0, 0.0]);
        let y = nalgebra::DVector::from_vec(vec![0.0, -std::f64::consts::PI, 0.0, 0.0]);
        assert!(((x.transpose() * o * y)[(0, 0)] + std::f64::consts::PI).abs() < 1e-14);
    }
}
