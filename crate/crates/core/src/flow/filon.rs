//! Filon-type implicit midpoint step.
//!
//! In the interaction picture every quadratic interaction `a + b = k` carries
//! the phase `exp(i Omega t)`, `Omega = w_a + w_b - w_k`. Freezing the
//! amplitudes at the midpoint and integrating the phase exactly gives a
//! second-order method that stays consistent when `Omega h` is huge, where
//! polynomial stage methods alias the oscillation. Because the phase weights
//! of the three members of a triad are conjugate, the implicit midpoint
//! version conserves `sum |c_k|^2` exactly.

use num_complex::Complex64;

use super::phi;
use crate::spectral::GridSpec;

/// Fixed-point iterations per step are capped here.
const MAX_ITERATIONS: usize = 60;

#[derive(Debug, Clone, Copy)]
struct Pair {
    a: i32,
    b: i32,
    /// `integral_0^h exp(i Omega s) ds`, doubled for `a != b`.
    weight: Complex64,
}

/// Interaction tables for one grid, cutoff and step.
pub(crate) struct FilonTables {
    /// `-(i kappa / 2)` per output mode.
    factor: Vec<Complex64>,
    /// Pairs grouped by output mode `k = 1..=cutoff`.
    pairs: Vec<Vec<Pair>>,
}

impl FilonTables {
    pub fn new(grid: &GridSpec, cutoff: usize, h: f64) -> Self {
        let k_max = grid.k_max() as i64;
        let omega = |n: i64| grid.dispersion(n);
        let weight = |o: f64, h: f64| phi::phi(Complex64::new(0.0, o * h))[0] * h;
        let mut pairs = Vec::with_capacity(cutoff);
        let mut factor = Vec::with_capacity(cutoff);
        for k in 1..=cutoff as i64 {
            factor.push(Complex64::new(0.0, -0.5 * grid.wavenumber(k)));
            let mut list = Vec::new();
            // unordered pairs {a, b} with a + b = k, a <= b, both nonzero and in band
            for a in (k - k_max).max(-k_max)..=k / 2 {
                let b = k - a;
                if a == 0 || b == 0 || b > k_max {
                    continue;
                }
                let o = omega(a) + omega(b) - omega(k);
                let mult = if a == b { 1.0 } else { 2.0 };
                list.push(Pair { a: a as i32, b: b as i32, weight: weight(o, h) * mult });
            }
            pairs.push(list);
        }
        FilonTables { factor, pairs }
    }

    fn at(c: &[Complex64], n: i32) -> Complex64 {
        if n > 0 {
            c[n as usize - 1]
        } else {
            c[(-n) as usize - 1].conj()
        }
    }

    /// `out_k = -(i kappa_k / 2) sum E(a, b) c_a c_b` on output modes, 0 above.
    fn increment(&self, amp: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        for (i, list) in self.pairs.iter().enumerate() {
            let s: Complex64 = list.iter().map(|p| p.weight * Self::at(amp, p.a) * Self::at(amp, p.b)).sum();
            out[i] = self.factor[i] * s;
        }
    }

    /// `(dv, dd)` for the truncated part `v` (level `n`) and the difference
    /// `d` to the full flow, without forming `v + d`.
    fn increment_split(&self, v: &[Complex64], d: &[Complex64], n: usize, dv: &mut [Complex64], dd: &mut [Complex64]) {
        dv.fill(Complex64::new(0.0, 0.0));
        dd.fill(Complex64::new(0.0, 0.0));
        for (i, list) in self.pairs.iter().enumerate() {
            let mut sv = Complex64::new(0.0, 0.0);
            let mut sd = Complex64::new(0.0, 0.0);
            for p in list {
                let (va, vb) = (Self::at(v, p.a), Self::at(v, p.b));
                let (da, db) = (Self::at(d, p.a), Self::at(d, p.b));
                sv += p.weight * va * vb;
                sd += p.weight * (va * db + da * vb + da * db);
            }
            if i < n {
                dv[i] = self.factor[i] * sv;
                dd[i] = self.factor[i] * sd;
            } else {
                dd[i] = self.factor[i] * (sv + sd);
            }
        }
    }

    /// Advances Schrodinger-picture coefficients `c` by one step, up to the
    /// final free rotation which the caller applies. Returns the number of
    /// interaction sums evaluated.
    pub fn step(&self, c: &[Complex64], out: &mut [Complex64]) -> usize {
        let k = c.len();
        let mut mid = c.to_vec();
        let mut inc = vec![Complex64::new(0.0, 0.0); k];
        let mut evals = 0;
        for _ in 0..MAX_ITERATIONS {
            self.increment(&mid, &mut inc);
            evals += 1;
            if !relax(&mut mid, c, &inc) {
                break;
            }
        }
        self.increment(&mid, &mut inc);
        for i in 0..k {
            out[i] = c[i] + inc[i];
        }
        evals + 1
    }

    /// One step of the truncated/difference pair; tables must be built with
    /// the full cutoff.
    pub fn step_split(&self, v: &[Complex64], d: &[Complex64], n: usize, out_v: &mut [Complex64], out_d: &mut [Complex64]) {
        let k = v.len();
        let (mut mv, mut md) = (v.to_vec(), d.to_vec());
        let mut iv = vec![Complex64::new(0.0, 0.0); k];
        let mut id = vec![Complex64::new(0.0, 0.0); k];
        for _ in 0..MAX_ITERATIONS {
            self.increment_split(&mv, &md, n, &mut iv, &mut id);
            let moved_v = relax(&mut mv, v, &iv);
            let moved_d = relax(&mut md, d, &id);
            if !(moved_v || moved_d) {
                break;
            }
        }
        self.increment_split(&mv, &md, n, &mut iv, &mut id);
        for i in 0..k {
            out_v[i] = v[i] + iv[i];
            out_d[i] = d[i] + id[i];
        }
    }
}

/// `mid = base + inc / 2`; reports whether any entry moved by more than a
/// few ulps of itself.
fn relax(mid: &mut [Complex64], base: &[Complex64], inc: &[Complex64]) -> bool {
    let mut moved = false;
    for ((m, b), i) in mid.iter_mut().zip(base).zip(inc) {
        let next = b + 0.5 * i;
        if (next - *m).norm() > 4.0 * f64::EPSILON * next.norm() {
            moved = true;
        }
        *m = next;
    }
    moved
}
