//! Correction multipliers and the modified energies.
//!
//! Every multiplier in the cascade is either real or purely imaginary on the
//! lattice, so the tables below store real numbers: `sigma_3`, `sigma_4` as
//! they are, `M_n = i g_n` through `g_n`, `alpha_n = i a_n` through `a_n`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::forms::{for_each_tuple, lambda_real, symmetrize, FormKind, MultilinearForm};
use super::multiplier::IMultiplier;
use crate::error::{Error, Result};
use crate::resonance::power_sum_exact;
use crate::spectral::{FourierField, GridSpec};
use num_traits::{ToPrimitive, Zero};

const PAIRS4: [([usize; 2], [usize; 2]); 6] = [
    ([0, 1], [2, 3]),
    ([0, 2], [1, 3]),
    ([0, 3], [1, 2]),
    ([1, 2], [0, 3]),
    ([1, 3], [0, 2]),
    ([2, 3], [0, 1]),
];

/// Tolerance for `|M_4|` on resonant tuples, relative to its largest summand.
pub const RESONANT_TOLERANCE: f64 = 1e-10;

/// `a_n` with `alpha_n = i a_n`, from the exact integer resonance sum.
pub fn alpha(grid: &GridSpec, idx: &[i64]) -> f64 {
    let p = power_sum_exact(idx, grid.j());
    p.to_f64().expect("finite") / grid.mu().powi(2 * grid.j() as i32 + 1)
}

fn resonant(grid: &GridSpec, idx: &[i64]) -> bool {
    power_sum_exact(idx, grid.j()).is_zero()
}

/// Closed form of `M_3`: `(i/3) sum m^2(xi_k) xi_k`.
pub fn m3_closed(mult: &IMultiplier, grid: &GridSpec, idx: &[i64]) -> Complex64 {
    let g: f64 = idx
        .iter()
        .map(|&n| {
            let k = grid.wavenumber(n);
            mult.eval_sq(k) * k
        })
        .sum();
    Complex64::new(0.0, g / 3.0)
}

/// `M_3` as the symmetrisation of `-i m(xi_1) m(xi_2 + xi_3) (xi_2 + xi_3)`.
pub fn m3_symmetrized(mult: &IMultiplier, grid: &GridSpec, idx: &[i64]) -> Complex64 {
    symmetrize(
        |x| {
            let s = grid.wavenumber(x[1] + x[2]);
            Complex64::new(0.0, -mult.eval(grid.wavenumber(x[0])) * mult.eval(s) * s)
        },
        idx,
    )
}

fn offset(k: i64, v: i64) -> usize {
    (v + k) as usize
}

/// `sigma_3` and `sigma_4` on the lattice box, plus the pair-sum cutoff.
#[derive(Debug)]
struct Tables {
    k: i64,
    sigma3: Vec<f64>,
    sigma4: Vec<f64>,
}

impl Tables {
    fn width(&self) -> usize {
        (2 * self.k + 1) as usize
    }

    fn s3(&self, a: i64, b: i64) -> f64 {
        self.sigma3[offset(self.k, a) * self.width() + offset(self.k, b)]
    }

    fn s4(&self, a: i64, b: i64, c: i64) -> f64 {
        let w = self.width();
        self.sigma4[(offset(self.k, a) * w + offset(self.k, b)) * w + offset(self.k, c)]
    }
}

/// The modified-energy cascade for one multiplier, grid and Galerkin cutoff.
#[derive(Debug, Clone)]
pub struct EnergyHierarchy {
    mult: IMultiplier,
    grid: GridSpec,
    cutoff: i64,
    tables: Arc<Tables>,
}

/// One pair term of `M_4` or `M_5`: `sigma(others, s) * s` with `s` the pair
/// sum, or 0 when `s = 0` or `|s|` exceeds the cutoff.
fn pair_sum(grid: &GridSpec, cutoff: i64, a: i64, b: i64) -> Option<(i64, f64)> {
    let s = a + b;
    (s != 0 && s.abs() <= cutoff).then(|| (s, grid.wavenumber(s)))
}

impl EnergyHierarchy {
    /// Builds the tables; `cutoff` is the largest index the nonlinearity
    /// feeds (`K` for the full flow, `N` for the truncated one).
    pub fn new(mult: IMultiplier, grid: GridSpec, cutoff: usize) -> Result<Self> {
        if cutoff == 0 || cutoff > grid.k_max() {
            return Err(Error::InvalidArgument(format!(
                "cutoff {cutoff} must lie in 1..=K = {}",
                grid.k_max()
            )));
        }
        let k = grid.k_max() as i64;
        let w = (2 * k + 1) as usize;
        let mut sigma3 = vec![0.0; w * w];
        for a in -k..=k {
            for b in -k..=k {
                let c = -a - b;
                if a == 0 || b == 0 || c == 0 || c.abs() > k {
                    continue;
                }
                let idx = [a, b, c];
                let al = alpha(&grid, &idx);
                if al == 0.0 {
                    return Err(Error::DegenerateSymbol(idx.to_vec()));
                }
                sigma3[offset(k, a) * w + offset(k, b)] = -m3_closed(&mult, &grid, &idx).im / al;
            }
        }
        let partial = Tables { k, sigma3, sigma4: Vec::new() };
        let mut h = EnergyHierarchy { mult, grid, cutoff: cutoff as i64, tables: Arc::new(partial) };
        let rows: Vec<Vec<f64>> = (-k..=k)
            .into_par_iter()
            .map(|a| {
                let mut row = vec![0.0; w * w];
                for b in -k..=k {
                    for c in -k..=k {
                        let d = -a - b - c;
                        if a == 0 || b == 0 || c == 0 || d == 0 || d.abs() > k {
                            continue;
                        }
                        row[offset(k, b) * w + offset(k, c)] = h.sigma4_value(&[a, b, c, d])?;
                    }
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        let tables = Arc::get_mut(&mut h.tables).expect("unshared during construction");
        tables.sigma4 = rows.concat();
        Ok(h)
    }

    /// Hierarchy for the full Galerkin flow on `grid`.
    pub fn full(mult: IMultiplier, grid: GridSpec) -> Result<Self> {
        Self::new(mult, grid, grid.k_max())
    }

    pub fn multiplier(&self) -> &IMultiplier {
        &self.mult
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff as usize
    }

    pub fn sigma3(&self, idx: &[i64]) -> f64 {
        self.tables.s3(idx[0], idx[1])
    }

    /// `(g_4, largest |summand|)` with `M_4 = i g_4`.
    pub fn m4_parts(&self, idx: &[i64]) -> (f64, f64) {
        let mut acc = 0.0;
        let mut largest = 0.0f64;
        for (pair, others) in PAIRS4 {
            if let Some((_, s)) = pair_sum(&self.grid, self.cutoff, idx[pair[0]], idx[pair[1]]) {
                let term = -0.25 * self.tables.s3(idx[others[0]], idx[others[1]]) * s;
                acc += term;
                largest = largest.max(term.abs());
            }
        }
        (acc, largest)
    }

    /// `M_4 = -i (3/2) [sigma_3(xi_1, xi_2, xi_3 + xi_4)(xi_3 + xi_4)]_sym`.
    pub fn m4(&self, idx: &[i64]) -> Complex64 {
        Complex64::new(0.0, self.m4_parts(idx).0)
    }

    /// The same multiplier through the full 24-term symmetriser.
    pub fn m4_symmetrized(&self, idx: &[i64]) -> Complex64 {
        symmetrize(
            |x| match pair_sum(&self.grid, self.cutoff, x[2], x[3]) {
                Some((_, s)) => Complex64::new(0.0, -1.5 * self.tables.s3(x[0], x[1]) * s),
                None => Complex64::new(0.0, 0.0),
            },
            idx,
        )
    }

    fn sigma4_value(&self, idx: &[i64]) -> Result<f64> {
        let (g, largest) = self.m4_parts(idx);
        if resonant(&self.grid, idx) {
            if g.abs() > RESONANT_TOLERANCE * largest {
                return Err(Error::ResonantResidual { tuple: idx.to_vec(), value: g.abs(), bound: RESONANT_TOLERANCE * largest });
            }
            return Ok(0.0);
        }
        Ok(-g / alpha(&self.grid, idx))
    }

    pub fn sigma4(&self, idx: &[i64]) -> f64 {
        self.tables.s4(idx[0], idx[1], idx[2])
    }

    /// `g_5` with `M_5 = -2i [sigma_4(xi_1..xi_3, xi_4 + xi_5)(xi_4 + xi_5)]_sym = i g_5`.
    pub fn m5_im(&self, idx: &[i64]) -> f64 {
        let mut acc = 0.0;
        for a in 0..5 {
            for b in a + 1..5 {
                if let Some((_, s)) = pair_sum(&self.grid, self.cutoff, idx[a], idx[b]) {
                    let mut o = [0i64; 3];
                    let mut n = 0;
                    for (i, &v) in idx.iter().enumerate() {
                        if i != a && i != b {
                            o[n] = v;
                            n += 1;
                        }
                    }
                    acc += self.tables.s4(o[0], o[1], o[2]) * s;
                }
            }
        }
        -0.2 * acc
    }

    pub fn m5(&self, idx: &[i64]) -> Complex64 {
        Complex64::new(0.0, self.m5_im(idx))
    }

    pub fn m5_symmetrized(&self, idx: &[i64]) -> Complex64 {
        symmetrize(
            |x| match pair_sum(&self.grid, self.cutoff, x[3], x[4]) {
                Some((_, s)) => Complex64::new(0.0, -2.0 * self.tables.s4(x[0], x[1], x[2]) * s),
                None => Complex64::new(0.0, 0.0),
            },
            idx,
        )
    }

    fn form(&self, n: usize, kind: FormKind) -> MultilinearForm {
        let h = self.clone();
        let weight: Arc<dyn Fn(&[i64]) -> Complex64 + Send + Sync> = match kind {
            FormKind::M3 => Arc::new(move |x| m3_closed(&h.mult, &h.grid, x)),
            FormKind::Sigma3 => Arc::new(move |x| h.sigma3(x).into()),
            FormKind::M4 => Arc::new(move |x| h.m4(x)),
            FormKind::Sigma4 => Arc::new(move |x| h.sigma4(x).into()),
            FormKind::M5 => Arc::new(move |x| h.m5(x)),
            _ => unreachable!("not a cascade form"),
        };
        MultilinearForm::lattice(n, self.grid, kind, weight).expect("arity in range")
    }

    pub fn big_m3(&self) -> MultilinearForm {
        self.form(3, FormKind::M3)
    }

    pub fn sigma3_form(&self) -> MultilinearForm {
        self.form(3, FormKind::Sigma3)
    }

    pub fn big_m4(&self) -> MultilinearForm {
        self.form(4, FormKind::M4)
    }

    pub fn sigma4_form(&self) -> MultilinearForm {
        self.form(4, FormKind::Sigma4)
    }

    pub fn big_m5(&self) -> MultilinearForm {
        self.form(5, FormKind::M5)
    }

    /// `||I u||^2`
    pub fn e2(&self, u: &FourierField) -> Result<f64> {
        self.grid.ensure_compatible(u.grid())?;
        let g = self.grid;
        let sum: f64 = u
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| self.mult.eval_sq(g.wavenumber(i as i64 + 1)) * c.norm_sqr())
            .sum();
        Ok(2.0 * g.length() * sum)
    }

    /// `[E^2_I, E^3_I, E^4_I]`.
    pub fn energies(&self, u: &FourierField) -> Result<[f64; 3]> {
        let e2 = self.e2(u)?;
        let e3 = e2 + lambda_real(&self.sigma3_form(), u)?;
        let e4 = e3 + lambda_real(&self.sigma4_form(), u)?;
        Ok([e2, e3, e4])
    }

    pub fn energy(&self, u: &FourierField, order: usize) -> Result<f64> {
        check_order(order)?;
        let e2 = self.e2(u)?;
        if order == 2 {
            return Ok(e2);
        }
        let e3 = e2 + lambda_real(&self.sigma3_form(), u)?;
        if order == 3 {
            return Ok(e3);
        }
        Ok(e3 + lambda_real(&self.sigma4_form(), u)?)
    }

    /// `d/dt E^order_I` predicted along the nonlinear flow:
    /// `Lambda_{order+1}(M_{order+1})`.
    pub fn drift(&self, u: &FourierField, order: usize) -> Result<f64> {
        check_order(order)?;
        let form = match order {
            2 => self.big_m3(),
            3 => self.big_m4(),
            _ => self.big_m5(),
        };
        lambda_real(&form, u)
    }

    /// `d/dt E^order_I` along the linear flow: the `alpha`-weighted
    /// correction forms, `0`, `-Lambda_3(M_3)`, `-Lambda_3(M_3) - Lambda_4(M_4)`.
    pub fn linear_drift(&self, u: &FourierField, order: usize) -> Result<f64> {
        check_order(order)?;
        let mut d = 0.0;
        if order >= 3 {
            d -= lambda_real(&self.big_m3(), u)?;
        }
        if order >= 4 {
            d -= lambda_real(&self.big_m4(), u)?;
        }
        Ok(d)
    }
}

fn check_order(order: usize) -> Result<()> {
    if (2..=4).contains(&order) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("energy order {order} not in {{2, 3, 4}}")))
    }
}

/// `E^order_I(u)` for the full Galerkin flow on `u`'s grid.
pub fn modified_energy(u: &FourierField, mult: &IMultiplier, order: usize) -> Result<f64> {
    check_order(order)?;
    EnergyHierarchy::full(*mult, *u.grid())?.energy(u, order)
}

/// Resonant-set scan of `M_4` over `Gamma_4` tuples in `[-K, K]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonantScan {
    pub resonant_tuples: u64,
    /// `max |M_4| / max|summand|` over resonant tuples with a nonzero summand.
    pub worst_ratio: f64,
    pub worst_tuple: Option<Vec<i64>>,
}

pub fn resonant_m4_scan(h: &EnergyHierarchy) -> ResonantScan {
    let k = h.grid.k_max() as i64;
    let parts: Vec<ResonantScan> = (-k..=k)
        .filter(|&a| a != 0)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|a| {
            let mut scan = ResonantScan { resonant_tuples: 0, worst_ratio: 0.0, worst_tuple: None };
            for_each_tuple(4, k, a, &mut |idx| {
                if !resonant(&h.grid, idx) {
                    return;
                }
                scan.resonant_tuples += 1;
                let (g, largest) = h.m4_parts(idx);
                let ratio = if largest > 0.0 {
                    g.abs() / largest
                } else if g == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                if ratio > scan.worst_ratio || scan.worst_tuple.is_none() {
                    scan.worst_ratio = scan.worst_ratio.max(ratio);
                    scan.worst_tuple = Some(idx.to_vec());
                }
            });
            scan
        })
        .collect();
    parts.into_iter().fold(
        ResonantScan { resonant_tuples: 0, worst_ratio: 0.0, worst_tuple: None },
        |mut acc, p| {
            acc.resonant_tuples += p.resonant_tuples;
            if p.worst_ratio > acc.worst_ratio || acc.worst_tuple.is_none() {
                acc.worst_ratio = acc.worst_ratio.max(p.worst_ratio);
                acc.worst_tuple = p.worst_tuple;
            }
            acc
        },
    )
}
