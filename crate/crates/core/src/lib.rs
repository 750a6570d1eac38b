//! Spectral laboratory for the periodic higher-order KdV-type equation
//!
//! ```text
//! u_t + (-1)^{j+1} d_x^{2j+1} u + (1/2) d_x (u^2) = 0,   x in T_mu = R / (2 pi mu Z)
//! ```
//!
//! * [`spectral`]: mean-zero Fourier fields, Sobolev norms, the symplectic
//!   pairing and the conserved quantities.
//! * [`resonance`]: exact arithmetic on the resonance sums of `(2j+1)`-th powers.
//! * [`imethod`]: the smoothing multiplier, multilinear forms on frequency
//!   hyperplanes and the modified-energy hierarchy.
//! * [`flow`]: Galerkin and sharply truncated flows, Jacobians and symplecticity.
//! * [`experiments`]: approximation sweeps, almost-conservation sweeps,
//!   nonsqueezing witnesses and the scaling identity.

pub mod error;
pub mod experiments;
pub mod flow;
pub mod imethod;
pub mod resonance;
pub mod snapshot;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{Band, ConservedReport, Dealias, FourierField, GridSpec, SobolevWeight};
