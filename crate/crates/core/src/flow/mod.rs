//! Time integration of the Galerkin flow and of the sharply truncated flow.
//!
//! In coefficients the equation reads
//! `d/dt c_k = i k^(2j+1) c_k - (i k / 2) (u^2)_k`. The stiff phase is never
//! stepped: all schemes run on `w_k = exp(-i k^(2j+1) t) c_k`.

mod filon;
mod jacobian;
mod phi;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{conserved_quantities, ConservedReport, FourierField, GridSpec, Transformer};

pub use jacobian::{check_symplectic, flow_jacobian, rotation_jacobian, symplectic_matrix};

/// Which nonlinearity is evolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// Galerkin flow on all retained modes.
    Full,
    /// Nonlinearity projected onto `|n| <= N`.
    Truncated(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Etdrk4,
    LawsonRk4,
    /// Implicit midpoint with exact interaction phases: second order,
    /// conserves the `L^2` norm, direct `O(K^2)` sums.
    FilonMidpoint,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "etdrk4" => Ok(Scheme::Etdrk4),
            "filon_midpoint" => Ok(Scheme::FilonMidpoint),
            "lawson_rk4" | "lawson-rk4" => Ok(Scheme::LawsonRk4),
            other => Err(Error::InvalidArgument(format!("unknown scheme '{other}'"))),
        }
    }
}

pub const DEFAULT_BLOWUP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSpec {
    pub grid: GridSpec,
    pub flavor: Flavor,
    pub scheme: Scheme,
    pub dt: f64,
    pub horizon: f64,
    /// Steps between stored samples.
    pub sample_every: usize,
    /// `false` drops the quadratic term (pure linear flow).
    pub nonlinear: bool,
    pub blowup: f64,
}

impl FlowSpec {
    pub fn new(grid: GridSpec, dt: f64, horizon: f64) -> Result<Self> {
        let spec = FlowSpec {
            grid,
            flavor: Flavor::Full,
            scheme: Scheme::Etdrk4,
            dt,
            horizon,
            sample_every: 1,
            nonlinear: true,
            blowup: DEFAULT_BLOWUP,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn truncated(mut self, n: usize) -> Result<Self> {
        self.flavor = Flavor::Truncated(n);
        self.validate()?;
        Ok(self)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn with_sample_every(mut self, every: usize) -> Result<Self> {
        self.sample_every = every;
        self.validate()?;
        Ok(self)
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        self.horizon = horizon;
        self.validate()?;
        Ok(self)
    }

    /// Largest index the nonlinearity feeds.
    pub fn cutoff(&self) -> usize {
        match self.flavor {
            Flavor::Full => self.grid.k_max(),
            Flavor::Truncated(n) => n,
        }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step dt = {} must be positive", self.dt)));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "horizon T = {} must be finite and nonnegative; run backward by reflecting the data",
                self.horizon
            )));
        }
        let ratio = self.horizon / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "T = {} is not an integer multiple of dt = {}",
                self.horizon, self.dt
            )));
        }
        if self.sample_every == 0 || self.steps() % self.sample_every != 0 {
            return Err(Error::InvalidArgument(format!(
                "sample interval {} does not divide the {} steps",
                self.sample_every,
                self.steps()
            )));
        }
        if let Flavor::Truncated(n) = self.flavor {
            if n == 0 || n > self.grid.k_max() {
                return Err(Error::InvalidArgument(format!(
                    "truncation N = {n} must lie in 1..=K = {}",
                    self.grid.k_max()
                )));
            }
        }
        if !(self.blowup > 0.0) {
            return Err(Error::InvalidArgument("blow-up threshold must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FlowStats {
    pub steps: usize,
    pub rhs_evaluations: usize,
    pub max_nonlinear: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<(f64, FourierField)>,
    pub spec: FlowSpec,
    pub stats: FlowStats,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|(t, _)| *t)
    }

    pub fn last(&self) -> &FourierField {
        &self.samples.last().expect("trajectories are never empty").1
    }

    /// Spacing of the stored samples.
    pub fn sample_dt(&self) -> f64 {
        self.spec.dt * self.spec.sample_every as f64
    }
}

fn phases(grid: &GridSpec, t: f64) -> Vec<Complex64> {
    (1..=grid.k_max() as i64).map(|n| Complex64::cis(grid.dispersion(n) * t)).collect()
}

/// Free evolution `c_k -> exp(i k^(2j+1) t) c_k`.
pub fn linear_propagate(u: &FourierField, t: f64) -> FourierField {
    let coeffs = u.coeffs().iter().zip(phases(u.grid(), t)).map(|(c, p)| c * p).collect();
    FourierField::from_coeffs(*u.grid(), coeffs).expect("same grid")
}

/// Evaluates `-(1/2) d_x Pi(u^2)` with alias-free padding.
pub struct Nonlinearity {
    grid: GridSpec,
    cutoff: usize,
    fft: Transformer,
    samples: Vec<f64>,
    products: Vec<Complex64>,
}

impl Nonlinearity {
    pub fn new(grid: GridSpec, cutoff: usize) -> Self {
        let m = grid.physical_points();
        Nonlinearity {
            grid,
            cutoff: cutoff.min(grid.k_max()),
            fft: Transformer::new(m),
            samples: vec![0.0; m],
            products: vec![Complex64::new(0.0, 0.0); grid.k_max()],
        }
    }

    pub fn eval_into(&mut self, coeffs: &[Complex64], out: &mut [Complex64]) {
        self.fft.synthesize(coeffs, &mut self.samples);
        for s in self.samples.iter_mut() {
            *s *= *s;
        }
        self.fft.analyze(&self.samples, &mut self.products);
        for (i, (o, p)) in out.iter_mut().zip(&self.products).enumerate() {
            *o = if i < self.cutoff {
                let k = self.grid.wavenumber(i as i64 + 1);
                Complex64::new(0.0, -0.5 * k) * p
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
    }
}

pub fn nonlinear_rhs(u: &FourierField, flavor: Flavor) -> FourierField {
    let cutoff = match flavor {
        Flavor::Full => u.grid().k_max(),
        Flavor::Truncated(n) => n,
    };
    let mut out = vec![Complex64::new(0.0, 0.0); u.grid().k_max()];
    Nonlinearity::new(*u.grid(), cutoff).eval_into(u.coeffs(), &mut out);
    FourierField::from_coeffs(*u.grid(), out).expect("finite products of finite data")
}

struct Stepper {
    spec: FlowSpec,
    omega: Vec<f64>,
    nl: Nonlinearity,
    etd: Vec<phi::EtdWeights>,
    filon: Option<filon::FilonTables>,
    evals: usize,
    max_nonlinear: f64,
}

impl Stepper {
    fn new(spec: FlowSpec) -> Self {
        let g = spec.grid;
        let omega: Vec<f64> = (1..=g.k_max() as i64).map(|n| g.dispersion(n)).collect();
        let etd = match spec.scheme {
            Scheme::Etdrk4 => omega.iter().map(|&w| phi::EtdWeights::new(w, spec.dt)).collect(),
            _ => Vec::new(),
        };
        let filon = match spec.scheme {
            Scheme::FilonMidpoint => Some(filon::FilonTables::new(&g, spec.cutoff(), spec.dt)),
            _ => None,
        };
        Stepper { nl: Nonlinearity::new(g, spec.cutoff()), spec, omega, etd, filon, evals: 0, max_nonlinear: 0.0 }
    }

    fn rhs(&mut self, c: &[Complex64], out: &mut [Complex64]) {
        self.nl.eval_into(c, out);
        self.evals += 1;
        let m = out.iter().fold(0.0f64, |a, v| a.max(v.norm()));
        self.max_nonlinear = self.max_nonlinear.max(m);
    }

    fn phase(&self, t: f64) -> Vec<Complex64> {
        self.omega.iter().map(|w| Complex64::cis(w * t)).collect()
    }

    /// One step from `t` on the interaction variable `w`.
    fn step(&mut self, w: &mut [Complex64], t: f64, t_next: f64) {
        match self.spec.scheme {
            Scheme::Etdrk4 => self.etdrk4(w, t, t_next),
            Scheme::LawsonRk4 => self.lawson(w, t, t_next),
            Scheme::FilonMidpoint => self.filon(w, t),
        }
    }

    fn filon(&mut self, w: &mut [Complex64], t: f64) {
        let tables = self.filon.as_ref().expect("tables built for this scheme");
        let p = self.phase(t);
        let c: Vec<Complex64> = w.iter().zip(&p).map(|(a, b)| a * b).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); c.len()];
        self.evals += tables.step(&c, &mut out);
        // c(t + h) = exp(iwh) out, so w(t + h) = exp(-iwt) out
        for ((x, o), q) in w.iter_mut().zip(&out).zip(&p) {
            *x = o * q.conj();
        }
    }

    fn etdrk4(&mut self, w: &mut [Complex64], t: f64, t_next: f64) {
        let k = w.len();
        let zero = Complex64::new(0.0, 0.0);
        let p = self.phase(t);
        let c: Vec<Complex64> = w.iter().zip(&p).map(|(a, b)| a * b).collect();
        let mut nc = vec![zero; k];
        let mut na = vec![zero; k];
        let mut nb = vec![zero; k];
        let mut nd = vec![zero; k];
        self.rhs(&c, &mut nc);
        let a: Vec<Complex64> =
            (0..k).map(|i| self.etd[i].half * c[i] + self.etd[i].q * nc[i]).collect();
        self.rhs(&a, &mut na);
        let b: Vec<Complex64> =
            (0..k).map(|i| self.etd[i].half * c[i] + self.etd[i].q * na[i]).collect();
        self.rhs(&b, &mut nb);
        let d: Vec<Complex64> = (0..k)
            .map(|i| self.etd[i].half * a[i] + self.etd[i].q * (2.0 * nb[i] - nc[i]))
            .collect();
        self.rhs(&d, &mut nd);
        let back = self.phase(t_next);
        for i in 0..k {
            let e = &self.etd[i];
            let delta = e.f1 * nc[i] + 2.0 * e.f2 * (na[i] + nb[i]) + e.f3 * nd[i];
            w[i] += back[i].conj() * delta;
        }
    }

    /// `G(t, w) = exp(-iLt) N(exp(iLt) w)`
    fn pulled_back(&mut self, w: &[Complex64], t: f64, out: &mut [Complex64]) {
        let p = self.phase(t);
        let c: Vec<Complex64> = w.iter().zip(&p).map(|(a, b)| a * b).collect();
        self.rhs(&c, out);
        for (o, q) in out.iter_mut().zip(&p) {
            *o *= q.conj();
        }
    }

    fn lawson(&mut self, w: &mut [Complex64], t: f64, t_next: f64) {
        let k = w.len();
        let h = t_next - t;
        let mid = t + 0.5 * h;
        let zero = Complex64::new(0.0, 0.0);
        let mut k1 = vec![zero; k];
        let mut k2 = vec![zero; k];
        let mut k3 = vec![zero; k];
        let mut k4 = vec![zero; k];
        self.pulled_back(w, t, &mut k1);
        let y: Vec<Complex64> = (0..k).map(|i| w[i] + 0.5 * h * k1[i]).collect();
        self.pulled_back(&y, mid, &mut k2);
        let y: Vec<Complex64> = (0..k).map(|i| w[i] + 0.5 * h * k2[i]).collect();
        self.pulled_back(&y, mid, &mut k3);
        let y: Vec<Complex64> = (0..k).map(|i| w[i] + h * k3[i]).collect();
        self.pulled_back(&y, t_next, &mut k4);
        for i in 0..k {
            w[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
    }
}

/// Integrates `u0` over `[0, T]`, storing every `sample_every`-th state.
///
/// Truncated flows project the data onto `|n| <= N` first.
pub fn integrate(u0: &FourierField, spec: &FlowSpec) -> Result<Trajectory> {
    spec.validate()?;
    spec.grid.ensure_compatible(u0.grid())?;
    let mut w = u0.coeffs().to_vec();
    if let Flavor::Truncated(n) = spec.flavor {
        w[n..].fill(Complex64::new(0.0, 0.0));
    }
    let start = FourierField::from_coeffs(spec.grid, w.clone())?;
    let steps = spec.steps();
    let mut samples = vec![(0.0, start)];
    let mut stepper = Stepper::new(*spec);
    for n in 0..steps {
        let t = n as f64 * spec.dt;
        let t_next = (n + 1) as f64 * spec.dt;
        if spec.nonlinear {
            stepper.step(&mut w, t, t_next);
            let magnitude = w.iter().fold(0.0f64, |a, v| a.max(v.norm()));
            if !(magnitude <= spec.blowup) {
                return Err(Error::BlowUp { t: t_next, magnitude });
            }
        }
        if (n + 1) % spec.sample_every == 0 {
            let c = w.iter().zip(stepper.phase(t_next)).map(|(a, p)| a * p).collect();
            samples.push((t_next, FourierField::from_coeffs(spec.grid, c)?));
        }
    }
    Ok(Trajectory {
        samples,
        spec: *spec,
        stats: FlowStats { steps, rhs_evaluations: stepper.evals, max_nonlinear: stepper.max_nonlinear },
    })
}

/// Samples of `S(t)u0 - S^N(t)u0`, the full flow of `spec` minus its
/// truncation at level `n`.
///
/// The pair is advanced with the Filon scheme in difference form, so the
/// difference keeps its own relative precision even far below the rounding
/// level of the solutions themselves.
pub fn truncation_difference(u0: &FourierField, spec: &FlowSpec, n: usize) -> Result<Vec<(f64, FourierField)>> {
    spec.validate()?;
    spec.grid.ensure_compatible(u0.grid())?;
    if spec.flavor != Flavor::Full {
        return Err(Error::InvalidArgument("truncation_difference needs the full flow".into()));
    }
    let k = spec.grid.k_max();
    if n == 0 || n > k {
        return Err(Error::InvalidArgument(format!("truncation level {n} outside 1..={k}")));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut v = u0.coeffs().to_vec();
    let mut d = vec![zero; k];
    d[n..].copy_from_slice(&v[n..]);
    v[n..].fill(zero);
    let tables = filon::FilonTables::new(&spec.grid, k, spec.dt);
    let mut samples = vec![(0.0, FourierField::from_coeffs(spec.grid, d.clone())?)];
    let (mut nv, mut nd) = (vec![zero; k], vec![zero; k]);
    for step in 0..spec.steps() {
        let t = step as f64 * spec.dt;
        let t_next = (step + 1) as f64 * spec.dt;
        if spec.nonlinear {
            let p = phases(&spec.grid, t);
            let cv: Vec<Complex64> = v.iter().zip(&p).map(|(a, b)| a * b).collect();
            let cd: Vec<Complex64> = d.iter().zip(&p).map(|(a, b)| a * b).collect();
            tables.step_split(&cv, &cd, n, &mut nv, &mut nd);
            for i in 0..k {
                v[i] = nv[i] * p[i].conj();
                d[i] = nd[i] * p[i].conj();
            }
        }
        if (step + 1) % spec.sample_every == 0 {
            let c = d.iter().zip(phases(&spec.grid, t_next)).map(|(a, p)| a * p).collect();
            samples.push((t_next, FourierField::from_coeffs(spec.grid, c)?));
        }
    }
    Ok(samples)
}

/// Final state only.
pub fn evolve(u0: &FourierField, spec: &FlowSpec) -> Result<FourierField> {
    let spec = FlowSpec { sample_every: spec.steps().max(1), ..*spec };
    let traj = integrate(u0, &spec)?;
    Ok(traj.last().clone())
}

#[derive(Debug, Clone)]
pub struct ConservationReport {
    pub reports: Vec<ConservedReport>,
    pub max_abs_mass: f64,
    /// `max_t |E(t) - E(0)| / |E(0)|` (absolute when `E(0) = 0`).
    pub energy_drift: f64,
    pub hamiltonian_drift: f64,
}

fn relative_drift(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = values.clone();
    let Some(first) = it.next() else { return 0.0 };
    let scale = if first == 0.0 { 1.0 } else { first.abs() };
    values.fold(0.0f64, |a, v| a.max((v - first).abs())) / scale
}

pub fn conservation_report(traj: &Trajectory) -> ConservationReport {
    let reports: Vec<ConservedReport> =
        traj.samples.iter().map(|(t, u)| conserved_quantities(u, *t)).collect();
    ConservationReport {
        max_abs_mass: reports.iter().fold(0.0, |a, r| a.max(r.mass.abs())),
        energy_drift: relative_drift(reports.iter().map(|r| r.l2_energy)),
        hamiltonian_drift: relative_drift(reports.iter().map(|r| r.hamiltonian)),
        reports,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{transform, Band, Dealias};
    use std::f64::consts::PI;

    fn close(a: &FourierField, b: &FourierField) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    #[test]
    fn linear_single_modes() {
        let g = GridSpec::periodic(1, 4).unwrap();
        let u = FourierField::cosine(g, 1, 1.0).unwrap();
        let t = 0.75;
        let v = linear_propagate(&u, t);
        let s = transform::transform(&v);
        for (x, y) in transform::nodes(&g, s.len()).iter().zip(&s) {
            assert!(((x + t).cos() - y).abs() < 1e-14);
        }
        let g2 = GridSpec::periodic(2, 4).unwrap();
        let v = linear_propagate(&FourierField::cosine(g2, 2, 1.0).unwrap(), 0.5);
        let s = transform::transform(&v);
        for (x, y) in transform::nodes(&g2, s.len()).iter().zip(&s) {
            assert!(((2.0 * x + 16.0).cos() - y).abs() < 1e-13);
        }
        assert_eq!(linear_propagate(&u, 0.0), u);
    }

    #[test]
    fn rhs_examples() {
        let g = GridSpec::periodic(1, 4).unwrap();
        let u = FourierField::cosine(g, 1, 1.0).unwrap();
        let r = nonlinear_rhs(&u, Flavor::Full);
        let want = FourierField::sine(g, 2, 0.5).unwrap();
        assert!(close(&r, &want) < 1e-15, "{:?}", r.coeffs());
        assert!(nonlinear_rhs(&u, Flavor::Truncated(1)).max_abs() < 1e-16);
        assert_eq!(nonlinear_rhs(&FourierField::zeros(g), Flavor::Full).max_abs(), 0.0);
    }

    #[test]
    fn rhs_matches_quadrature() {
        // -(1/2)(u^2)' = -u u'; project the physical product on a fine grid
        let g = GridSpec::periodic(2, 6).unwrap();
        let u = FourierField::cosine(g, 2, 0.7).unwrap().add(&FourierField::sine(g, 5, 0.3).unwrap()).unwrap();
        let r = nonlinear_rhs(&u, Flavor::Full);
        let m = 512;
        let xs: Vec<f64> = (0..m).map(|i| 2.0 * PI * i as f64 / m as f64).collect();
        let f = |x: f64| 0.7 * (2.0 * x).cos() + 0.3 * (5.0 * x).sin();
        let df = |x: f64| -1.4 * (2.0 * x).sin() + 1.5 * (5.0 * x).cos();
        for n in 1..=6 {
            let c: Complex64 = xs
                .iter()
                .map(|&x| Complex64::cis(-(n as f64) * x) * (-f(x) * df(x)))
                .sum::<Complex64>()
                / m as f64;
            assert!((c - r.coeff(n)).norm() < 1e-14, "mode {n}");
        }
    }

    #[test]
    fn spec_validation() {
        let g = GridSpec::periodic(2, 8).unwrap();
        assert!(FlowSpec::new(g, 0.0, 1.0).is_err());
        assert!(FlowSpec::new(g, -1e-3, 1.0).is_err());
        assert!(FlowSpec::new(g, 0.3, 1.0).is_err());
        assert!(FlowSpec::new(g, 1e-3, 1.0).unwrap().truncated(9).is_err());
        assert!(FlowSpec::new(g, 1e-3, 1.0).unwrap().with_sample_every(3).is_err());
        assert_eq!(FlowSpec::new(g, 1e-3, 1.0).unwrap().steps(), 1000);
    }

    #[test]
    fn linear_integration_is_bit_exact() {
        let g = GridSpec::periodic(3, 8).unwrap();
        let u = FourierField::cosine(g, 3, 1.0).unwrap().add(&FourierField::sine(g, 7, 0.2).unwrap()).unwrap();
        for scheme in [Scheme::Etdrk4, Scheme::LawsonRk4] {
            let spec = FlowSpec::new(g, 1.0 / 64.0, 0.5).unwrap().with_scheme(scheme).linear_only();
            let traj = integrate(&u, &spec).unwrap();
            for (t, v) in &traj.samples {
                assert_eq!(v, &linear_propagate(&u, *t));
            }
        }
    }

    #[test]
    fn truncated_single_mode_is_linear() {
        let g = GridSpec::periodic(2, 8).unwrap();
        let u = FourierField::cosine(g, 1, 0.3).unwrap();
        let spec = FlowSpec::new(g, 1e-2, 1.0).unwrap().truncated(1).unwrap();
        let traj = integrate(&u, &spec).unwrap();
        for (t, v) in &traj.samples {
            assert!((v.coeff(1).norm() - 0.15).abs() < 1e-15);
            assert!(close(v, &linear_propagate(&u, *t)) < 1e-15);
        }
    }

    #[test]
    fn truncated_projects_and_stays_projected() {
        let g = GridSpec::periodic(2, 8).unwrap();
        let u = FourierField::cosine(g, 2, 0.3).unwrap().add(&FourierField::cosine(g, 6, 0.3).unwrap()).unwrap();
        let spec = FlowSpec::new(g, 1e-3, 0.1).unwrap().truncated(4).unwrap();
        let traj = integrate(&u, &spec).unwrap();
        for (_, v) in &traj.samples {
            assert!(v.coeffs()[4..].iter().all(|c| c.norm() == 0.0));
        }
        assert_eq!(traj.samples[0].1, u.project(Band::AtMost(4.0)).unwrap());
    }

    #[test]
    fn schemes_agree() {
        let g = GridSpec::periodic(1, 16).unwrap();
        let u = FourierField::cosine(g, 1, 0.5).unwrap().add(&FourierField::sine(g, 2, 0.3).unwrap()).unwrap();
        let spec = FlowSpec::new(g, 1e-3, 0.2).unwrap();
        let a = evolve(&u, &spec).unwrap();
        let b = evolve(&u, &spec.with_scheme(Scheme::LawsonRk4)).unwrap();
        assert!(close(&a, &b) < 1e-10);
    }

    #[test]
    fn filon_is_second_order() {
        let g = GridSpec::periodic(1, 16).unwrap();
        let u = FourierField::cosine(g, 1, 0.5).unwrap().add(&FourierField::sine(g, 2, 0.3).unwrap()).unwrap();
        let exact = evolve(&u, &FlowSpec::new(g, 1e-4, 0.2).unwrap()).unwrap();
        let errs: Vec<f64> = [4e-3, 2e-3, 1e-3]
            .iter()
            .map(|&dt| close(&evolve(&u, &FlowSpec::new(g, dt, 0.2).unwrap().with_scheme(Scheme::FilonMidpoint)).unwrap(), &exact))
            .collect();
        for e in errs.windows(2) {
            let slope = (e[0] / e[1]).log2();
            assert!((1.8..2.3).contains(&slope), "{errs:?}");
        }
    }

    #[test]
    fn filon_conserves_l2() {
        let g = GridSpec::periodic(3, 16).unwrap();
        let mut u = FourierField::zeros(g);
        for n in 1..=16 {
            u = u.add(&FourierField::cosine(g, n, 0.3 / n as f64).unwrap()).unwrap();
            u = u.add(&FourierField::sine(g, n, 0.1).unwrap()).unwrap();
        }
        let spec = FlowSpec::new(g, 1e-3, 0.5).unwrap().with_scheme(Scheme::FilonMidpoint).with_sample_every(50).unwrap();
        let r = conservation_report(&integrate(&u, &spec).unwrap());
        assert!(r.energy_drift < 1e-13, "{}", r.energy_drift);
    }

    #[test]
    fn filon_resolves_fast_phases() {
        // low-mode response to two fast modes, against a step that resolves them
        let g = GridSpec::periodic(2, 12).unwrap();
        let u = FourierField::cosine(g, 9, 0.3).unwrap().add(&FourierField::sine(g, 10, 0.3).unwrap()).unwrap();
        let fine = evolve(&u, &FlowSpec::new(g, 2e-7, 0.02).unwrap()).unwrap();
        let coarse = FlowSpec::new(g, 1e-3, 0.02).unwrap();
        let f = evolve(&u, &coarse.with_scheme(Scheme::FilonMidpoint)).unwrap();
        let e = evolve(&u, &coarse).unwrap();
        let rel = |x: &FourierField| (x.coeff(1) - fine.coeff(1)).norm() / fine.coeff(1).norm();
        assert!(rel(&f) < 1e-2, "filon {}", rel(&f));
        assert!(rel(&e) > 10.0 * rel(&f), "etdrk4 {} filon {}", rel(&e), rel(&f));
    }

    #[test]
    fn truncation_difference_matches_subtraction() {
        let g = GridSpec::periodic(2, 12).unwrap();
        let u = FourierField::cosine(g, 2, 0.8).unwrap().add(&FourierField::sine(g, 3, 0.6).unwrap()).unwrap();
        let spec = FlowSpec::new(g, 1e-3, 0.1).unwrap().with_scheme(Scheme::FilonMidpoint).with_sample_every(20).unwrap();
        let d = truncation_difference(&u, &spec, 4).unwrap();
        let full = integrate(&u, &spec).unwrap();
        let trunc = integrate(&u, &spec.truncated(4).unwrap()).unwrap();
        assert_eq!(d.len(), full.samples.len());
        let mut biggest = 0.0f64;
        for ((_, x), ((_, a), (_, b))) in d.iter().zip(full.samples.iter().zip(&trunc.samples)) {
            let direct = a.sub(b).unwrap();
            assert!(x.sub(&direct).unwrap().max_abs() < 1e-14);
            biggest = biggest.max(x.max_abs());
        }
        assert!(biggest > 1e-6, "{biggest}");
        let lin = truncation_difference(&u, &spec.linear_only(), 4).unwrap();
        assert!(lin.iter().all(|(_, x)| x.max_abs() == 0.0));
        assert!(truncation_difference(&u, &spec, 13).is_err());
    }

    #[test]
    fn blowup_guard_trips() {
        let g = GridSpec::periodic(1, 8).unwrap();
        let u = FourierField::cosine(g, 1, 10.0).unwrap();
        let mut spec = FlowSpec::new(g, 1e-2, 1.0).unwrap();
        spec.blowup = 1.0;
        assert!(matches!(integrate(&u, &spec), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn mass_is_zero_and_energy_conserved() {
        let g = GridSpec::new(1, 16, 1.0, Dealias::Padded).unwrap();
        let u = FourierField::cosine(g, 1, 0.5).unwrap().add(&FourierField::sine(g, 3, 0.2).unwrap()).unwrap();
        let spec = FlowSpec::new(g, 1e-3, 0.5).unwrap().with_sample_every(50).unwrap();
        let r = conservation_report(&integrate(&u, &spec).unwrap());
        assert_eq!(r.max_abs_mass, 0.0);
        assert!(r.energy_drift < 1e-9, "{}", r.energy_drift);
        assert!(r.hamiltonian_drift < 1e-8, "{}", r.hamiltonian_drift);
        assert_eq!(r.reports.len(), 11);
    }

    #[test]
    fn reversal_returns_data() {
        let g = GridSpec::periodic(2, 12).unwrap();
        let u = FourierField::cosine(g, 1, 0.4).unwrap().add(&FourierField::sine(g, 2, 0.2).unwrap()).unwrap();
        let spec = FlowSpec::new(g, 1e-3, 0.2).unwrap();
        let forward = evolve(&u, &spec).unwrap();
        let back = evolve(&forward.reflect(), &spec).unwrap().reflect();
        assert!(close(&back, &u) < 1e-10);
    }
}
