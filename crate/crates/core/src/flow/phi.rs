//! Exponential-integrator weights.

use num_complex::Complex64;

const CONTOUR_POINTS: usize = 64;
/// Below this modulus the direct formulas cancel badly.
const CONTOUR_THRESHOLD: f64 = 0.5;

/// Per-mode weights of one Cox-Matthews step of size `h` for the symbol `z / h`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EtdWeights {
    pub half: Complex64,
    pub q: Complex64,
    pub f1: Complex64,
    pub f2: Complex64,
    pub f3: Complex64,
}

fn direct(z: Complex64) -> [Complex64; 4] {
    let ez = z.exp();
    let z3 = z * z * z;
    let one = Complex64::new(1.0, 0.0);
    [
        (z.exp() - one) / z,
        (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3,
        (2.0 + z + ez * (z - 2.0)) / z3,
        (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3,
    ]
}

/// `[phi_1(z), f_1(z), f_2(z), f_3(z)]`, by a contour mean near the origin.
pub(crate) fn phi(z: Complex64) -> [Complex64; 4] {
    if z.norm() >= CONTOUR_THRESHOLD {
        return direct(z);
    }
    let mut acc = [Complex64::new(0.0, 0.0); 4];
    for m in 0..CONTOUR_POINTS {
        let theta = 2.0 * std::f64::consts::PI * (m as f64 + 0.5) / CONTOUR_POINTS as f64;
        let v = direct(z + Complex64::cis(theta));
        for (a, b) in acc.iter_mut().zip(v) {
            *a += b;
        }
    }
    acc.map(|a| a / CONTOUR_POINTS as f64)
}

impl EtdWeights {
    /// Weights for the linear symbol `i * omega` and step `h`.
    pub fn new(omega: f64, h: f64) -> Self {
        let z = Complex64::new(0.0, omega * h);
        let [_, f1, f2, f3] = phi(z);
        let [p_half, _, _, _] = phi(z / 2.0);
        EtdWeights {
            half: (z / 2.0).exp(),
            q: p_half * (h / 2.0),
            f1: f1 * h,
            f2: f2 * h,
            f3: f3 * h,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Taylor series oracle: f1 = 1/6 + z/6 + 3z^2/40, f2 = 1/6 + z/12 + z^2/40,
    /// f3 = 1/6 + 0 z - z^2/120.
    #[test]
    fn small_argument_matches_series() {
        for z in [Complex64::new(0.0, 1e-6), Complex64::new(1e-3, 0.0), Complex64::new(0.0, 0.01)] {
            let [p1, f1, f2, f3] = phi(z);
            let z2 = z * z;
            assert!((p1 - (1.0 + z / 2.0 + z2 / 6.0)).norm() < 1e-6);
            assert!((f1 - (1.0 / 6.0 + z / 6.0 + 3.0 * z2 / 40.0)).norm() < 1e-6);
            assert!((f2 - (1.0 / 6.0 + z / 12.0 + z2 / 40.0)).norm() < 1e-6);
            assert!((f3 - (1.0 / 6.0 - z2 / 120.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn branches_agree_at_threshold() {
        let z = Complex64::new(0.0, CONTOUR_THRESHOLD * 1.0001);
        let a = direct(z);
        let b = phi(Complex64::new(0.0, CONTOUR_THRESHOLD * 0.9999));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-4);
        }
    }
}
