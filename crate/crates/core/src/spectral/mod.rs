//! Fourier representation of mean-zero periodic fields.

mod field;
mod grid;
pub mod transform;

pub use field::{Band, FourierField, SobolevWeight};
pub use grid::{smooth_size_at_least, Dealias, GridSpec};
pub use transform::{inverse, transform, Transformer};

/// Mass, L2 energy and Hamiltonian of a field at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedReport {
    pub mass: f64,
    pub l2_energy: f64,
    pub hamiltonian: f64,
    pub timestamp: f64,
}

/// `integral u^3 dx`, exact for band-limited fields (quadrature on at least
/// `4K + 1` points).
pub fn cubic_integral(u: &FourierField) -> f64 {
    let k = u.grid().k_max();
    let points = smooth_size_at_least(4 * k + 1);
    let s = transform::samples_on(u, points);
    let cubes: Vec<f64> = s.iter().map(|v| v * v * v).collect();
    transform::periodic_quadrature(u.grid(), &cubes)
}

/// `M = integral u`, `E = integral u^2`,
/// `H = integral (1/2)(d_x^j u)^2 - (1/6) u^3`.
pub fn conserved_quantities(u: &FourierField, timestamp: f64) -> ConservedReport {
    let g = u.grid();
    let j = g.j() as i32;
    let mut energy = 0.0;
    let mut gradient = 0.0;
    for (i, c) in u.coeffs().iter().enumerate() {
        let k = g.wavenumber(i as i64 + 1);
        energy += c.norm_sqr();
        gradient += k.powi(2 * j) * c.norm_sqr();
    }
    let w = 2.0 * g.length();
    ConservedReport {
        // no zero mode is ever stored
        mass: 0.0,
        l2_energy: w * energy,
        hamiltonian: 0.5 * w * gradient - cubic_integral(u) / 6.0,
        timestamp,
    }
}
