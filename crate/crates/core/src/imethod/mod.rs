//! The smoothing operator `I`, multilinear forms on frequency hyperplanes and
//! the modified energies `E^2_I`, `E^3_I`, `E^4_I`.

mod forms;
mod hierarchy;
mod multiplier;

pub use forms::{
    lambda_direct, lambda_n, lambda_real, permutations, symmetrize, FormKind, LatticeWeight,
    MultilinearForm, Symbol,
};
pub use hierarchy::{
    alpha, m3_closed, m3_symmetrized, modified_energy, resonant_m4_scan, EnergyHierarchy, ResonantScan,
    RESONANT_TOLERANCE,
};
pub use multiplier::{apply_i, eval_m, IMultiplier, Shape};

use crate::error::{Error, Result};
use crate::flow::Trajectory;

/// Centred difference stencils by order of accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stencil {
    #[default]
    Second,
    Fourth,
    Sixth,
    Eighth,
}

impl Stencil {
    /// Weights for offsets `1..=r`; the offset `-l` weight is the negative.
    pub fn weights(&self) -> &'static [f64] {
        match self {
            Stencil::Second => &[0.5],
            Stencil::Fourth => &[2.0 / 3.0, -1.0 / 12.0],
            Stencil::Sixth => &[3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
            Stencil::Eighth => &[4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0],
        }
    }

    pub fn radius(&self) -> usize {
        self.weights().len()
    }

    pub fn from_order(order: usize) -> Result<Self> {
        match order {
            2 => Ok(Stencil::Second),
            4 => Ok(Stencil::Fourth),
            6 => Ok(Stencil::Sixth),
            8 => Ok(Stencil::Eighth),
            o => Err(Error::InvalidArgument(format!("no centred stencil of order {o}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DriftReport {
    pub order: usize,
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    /// Finite-difference derivative at the interior samples.
    pub finite_difference: Vec<f64>,
    /// The predicted derivative at the same samples.
    pub predicted: Vec<f64>,
    /// `max |fd - predicted| / max |predicted|`.
    pub discrepancy: f64,
}

/// Compares a centred finite difference of `E^order_I` along `traj` with the
/// predicted rate, `Lambda_{order+1}(M_{order+1})` for the nonlinear flow or
/// the `alpha`-weighted corrections when the nonlinearity is off.
pub fn drift_oracle(traj: &Trajectory, mult: &IMultiplier, order: usize, stencil: Stencil) -> Result<DriftReport> {
    let r = stencil.radius();
    if traj.samples.len() < 3 || traj.samples.len() < 2 * r + 1 {
        return Err(Error::InvalidArgument(format!(
            "trajectory of {} samples is too short for a {}-point stencil",
            traj.samples.len(),
            2 * r + 1
        )));
    }
    let h = EnergyHierarchy::new(*mult, traj.spec.grid, traj.spec.cutoff())?;
    let dt = traj.sample_dt();
    let energies: Vec<f64> = traj.samples.iter().map(|(_, u)| h.energy(u, order)).collect::<Result<_>>()?;
    let interior: Vec<usize> = (r..traj.samples.len() - r).collect();
    let mut fd = Vec::with_capacity(interior.len());
    let mut predicted = Vec::with_capacity(interior.len());
    for &i in &interior {
        let d: f64 = stencil
            .weights()
            .iter()
            .enumerate()
            .map(|(l, w)| w * (energies[i + l + 1] - energies[i - l - 1]))
            .sum::<f64>()
            / dt;
        fd.push(d);
        let u = &traj.samples[i].1;
        predicted.push(if traj.spec.nonlinear { h.drift(u, order)? } else { h.linear_drift(u, order)? });
    }
    let err = fd.iter().zip(&predicted).fold(0.0f64, |a, (f, p)| a.max((f - p).abs()));
    let mut scale = predicted.iter().fold(0.0f64, |a, p| a.max(p.abs()));
    if scale == 0.0 {
        scale = energies.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    }
    if scale == 0.0 {
        scale = 1.0;
    }
    Ok(DriftReport {
        order,
        times: interior.iter().map(|&i| traj.samples[i].0).collect(),
        energies,
        finite_difference: fd,
        predicted,
        discrepancy: err / scale,
    })
}
