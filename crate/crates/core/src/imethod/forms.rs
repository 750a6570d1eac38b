use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{smooth_size_at_least, transform, FourierField, GridSpec};

pub type LatticeWeight = Arc<dyn Fn(&[i64]) -> Complex64 + Send + Sync>;
pub type Symbol = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Provenance of a form's weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    Constant,
    Factorized,
    M3,
    Sigma3,
    M4,
    Sigma4,
    M5,
    Custom,
}

#[derive(Clone)]
enum Weight {
    Constant(Complex64),
    /// `prod_i symbol_i(k_i)`
    Factorized(Vec<Symbol>),
    Lattice(LatticeWeight),
}

/// Weight on the lattice hyperplane `n_1 + ... + n_n = 0`, evaluated on mode
/// indices. Wavenumbers are `n_i / mu`.
#[derive(Clone)]
pub struct MultilinearForm {
    arity: usize,
    grid: GridSpec,
    kind: FormKind,
    weight: Weight,
}

impl std::fmt::Debug for MultilinearForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MultilinearForm")
            .field("arity", &self.arity)
            .field("kind", &self.kind)
            .field("k_max", &self.grid.k_max())
            .finish()
    }
}

fn check_arity(n: usize) -> Result<()> {
    if (2..=6).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("arity {n} outside 2..=6")))
    }
}

impl MultilinearForm {
    pub fn constant(n: usize, grid: GridSpec, value: f64) -> Result<Self> {
        check_arity(n)?;
        Ok(MultilinearForm { arity: n, grid, kind: FormKind::Constant, weight: Weight::Constant(value.into()) })
    }

    pub fn factorized(grid: GridSpec, symbols: Vec<Symbol>) -> Result<Self> {
        check_arity(symbols.len())?;
        Ok(MultilinearForm {
            arity: symbols.len(),
            grid,
            kind: FormKind::Factorized,
            weight: Weight::Factorized(symbols),
        })
    }

    pub fn lattice(n: usize, grid: GridSpec, kind: FormKind, weight: LatticeWeight) -> Result<Self> {
        check_arity(n)?;
        Ok(MultilinearForm { arity: n, grid, kind, weight: Weight::Lattice(weight) })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn weight(&self, idx: &[i64]) -> Complex64 {
        match &self.weight {
            Weight::Constant(c) => *c,
            Weight::Factorized(s) => {
                let g = self.grid;
                s.iter().zip(idx).map(|(f, &n)| f(g.wavenumber(n))).product::<f64>().into()
            }
            Weight::Lattice(w) => w(idx),
        }
    }

    fn check_fields(&self, fields: &[&FourierField]) -> Result<()> {
        if fields.len() != self.arity {
            return Err(Error::InvalidArgument(format!(
                "form of arity {} applied to {} fields",
                self.arity,
                fields.len()
            )));
        }
        for f in fields {
            self.grid.ensure_compatible(f.grid())?;
        }
        Ok(())
    }
}

/// Calls `visit(idx)` for every tuple with nonzero entries in `[-k, k]`
/// summing to zero whose first entry is `first`.
pub(crate) fn for_each_tuple(n: usize, k: i64, first: i64, visit: &mut dyn FnMut(&[i64])) {
    let mut idx = [0i64; 6];
    idx[0] = first;
    fn walk(depth: usize, n: usize, k: i64, sum: i64, idx: &mut [i64; 6], visit: &mut dyn FnMut(&[i64])) {
        let remaining = (n - depth) as i64;
        if depth == n - 1 {
            let last = -sum;
            if last != 0 && last.abs() <= k {
                idx[depth] = last;
                visit(&idx[..n]);
            }
            return;
        }
        for v in -k..=k {
            if v == 0 {
                continue;
            }
            let s = sum + v;
            if s.abs() > (remaining - 1) * k {
                continue;
            }
            idx[depth] = v;
            walk(depth + 1, n, k, s, idx, visit);
        }
    }
    walk(1, n, k, first, &mut idx, visit);
}

/// `(value, sum of |terms|)` of `2 pi mu sum w(n) prod c_{n_i}` over the box.
pub fn lambda_direct(form: &MultilinearForm, fields: &[&FourierField]) -> Result<(Complex64, f64)> {
    form.check_fields(fields)?;
    let g = form.grid;
    let k = g.k_max() as i64;
    // table[f][n + k] = c_n of field f
    let tables: Vec<Vec<Complex64>> =
        fields.iter().map(|u| (-k..=k).map(|n| u.coeff(n)).collect()).collect();
    let n = form.arity;
    let firsts: Vec<i64> = (-k..=k).filter(|&v| v != 0).collect();
    let parts: Vec<(Complex64, f64)> = firsts
        .par_iter()
        .map(|&first| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut mag = 0.0;
            for_each_tuple(n, k, first, &mut |idx| {
                let mut prod = Complex64::new(1.0, 0.0);
                for (t, &i) in tables.iter().zip(idx) {
                    prod *= t[(i + k) as usize];
                }
                if prod.norm_sqr() == 0.0 {
                    return;
                }
                let term = form.weight(idx) * prod;
                acc += term;
                mag += term.norm();
            });
            (acc, mag)
        })
        .collect();
    let scale = g.length();
    let (v, m) = parts.into_iter().fold((Complex64::new(0.0, 0.0), 0.0), |(a, b), (c, d)| (a + c, b + d));
    Ok((v * scale, m * scale))
}

/// Physical-space evaluation `integral prod_i (m_i(D) u_i) dx` for constant or
/// factorised weights.
fn lambda_physical(form: &MultilinearForm, fields: &[&FourierField]) -> Option<f64> {
    let g = form.grid;
    let symbols: Vec<Option<&Symbol>> = match &form.weight {
        Weight::Constant(c) if c.im == 0.0 => vec![None; form.arity],
        Weight::Factorized(s) => s.iter().map(Some).collect(),
        _ => return None,
    };
    let points = smooth_size_at_least(form.arity * g.k_max() + 1);
    let mut prod = vec![1.0; points];
    for (u, s) in fields.iter().zip(&symbols) {
        let v = match s {
            Some(f) => u.apply_symbol(|k| f(k)),
            None => (*u).clone(),
        };
        for (p, x) in prod.iter_mut().zip(transform::samples_on(&v, points)) {
            *p *= x;
        }
    }
    let scale = match &form.weight {
        Weight::Constant(c) => c.re,
        _ => 1.0,
    };
    Some(scale * transform::periodic_quadrature(&g, &prod))
}

/// `Lambda_n(w; u_1, ..., u_n)`.
pub fn lambda_n(form: &MultilinearForm, fields: &[&FourierField]) -> Result<Complex64> {
    form.check_fields(fields)?;
    if form.arity <= 3 {
        if let Some(v) = lambda_physical(form, fields) {
            return Ok(v.into());
        }
    }
    Ok(lambda_direct(form, fields)?.0)
}

pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

/// `Lambda_n(w; u, ..., u)` for a form that is real on real fields; fails if
/// the imaginary residue exceeds `1e-10` of the summed term magnitudes.
pub fn lambda_real(form: &MultilinearForm, u: &FourierField) -> Result<f64> {
    let fields = vec![u; form.arity];
    if form.arity <= 3 {
        if let Some(v) = lambda_physical(form, &fields) {
            return Ok(v);
        }
    }
    let (v, mag) = lambda_direct(form, &fields)?;
    if v.im.abs() > IMAGINARY_TOLERANCE * mag {
        return Err(Error::ImaginaryResidue { what: "multilinear form", residue: v.im.abs() / mag });
    }
    Ok(v.re)
}

/// All permutations of `0..n`, in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else { break };
        let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("successor exists");
        p.swap(i, j);
        p[i + 1..].reverse();
    }
    out
}

/// `[f]_sym`: average of `f` over every ordering of its arguments.
pub fn symmetrize(f: impl Fn(&[i64]) -> Complex64, idx: &[i64]) -> Complex64 {
    let perms = permutations(idx.len());
    let mut buf = idx.to_vec();
    let mut acc = Complex64::new(0.0, 0.0);
    for p in &perms {
        for (b, &i) in buf.iter_mut().zip(p) {
            *b = idx[i];
        }
        acc += f(&buf);
    }
    acc / perms.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::cubic_integral;
    use std::f64::consts::PI;

    fn g() -> GridSpec {
        GridSpec::periodic(2, 6).unwrap()
    }

    fn cos(n: usize) -> FourierField {
        FourierField::cosine(g(), n, 1.0).unwrap()
    }

    #[test]
    fn cubic_examples() {
        let one = MultilinearForm::constant(3, g(), 1.0).unwrap();
        let u = cos(1);
        assert!(lambda_n(&one, &[&u, &u, &u]).unwrap().norm() < 1e-14);
        let v = cos(1).add(&cos(2)).unwrap();
        let direct = lambda_direct(&one, &[&v, &v, &v]).unwrap().0;
        assert!((direct.re - 1.5 * PI).abs() < 1e-13 && direct.im.abs() < 1e-15);
        assert!((lambda_real(&one, &v).unwrap() - cubic_integral(&v)).abs() < 1e-13);
    }

    #[test]
    fn quadratic_is_parseval() {
        let m: Symbol = Arc::new(|k: f64| if k.abs() <= 4.0 { 1.0 } else { 0.5 });
        let form = MultilinearForm::factorized(g(), vec![m.clone(), m]).unwrap();
        let u = cos(1).add(&FourierField::sine(g(), 3, 0.4).unwrap()).unwrap();
        let e = u.inner(&u).unwrap();
        assert!((lambda_real(&form, &u).unwrap() - e).abs() < 1e-13);
        assert!((lambda_direct(&form, &[&u, &u]).unwrap().0.re - e).abs() < 1e-13);
    }

    #[test]
    fn physical_and_direct_paths_agree() {
        let s: Symbol = Arc::new(|k: f64| 1.0 / (1.0 + k * k));
        let t: Symbol = Arc::new(|k: f64| k.abs().sqrt());
        let form = MultilinearForm::factorized(g(), vec![s.clone(), t, s]).unwrap();
        let u = cos(1).add(&FourierField::sine(g(), 2, 0.3).unwrap()).unwrap();
        let v = FourierField::cosine(g(), 3, 0.7).unwrap().add(&cos(5)).unwrap();
        let a = lambda_n(&form, &[&u, &v, &u]).unwrap();
        let b = lambda_direct(&form, &[&u, &v, &u]).unwrap().0;
        assert!((a - b).norm() < 1e-13);
    }

    #[test]
    fn arity_and_grid_errors() {
        let one = MultilinearForm::constant(3, g(), 1.0).unwrap();
        let u = cos(1);
        assert!(lambda_n(&one, &[&u, &u]).is_err());
        let other = FourierField::cosine(GridSpec::periodic(2, 7).unwrap(), 1, 1.0).unwrap();
        assert!(matches!(lambda_n(&one, &[&u, &u, &other]), Err(Error::GridMismatch(_))));
        assert!(MultilinearForm::constant(1, g(), 1.0).is_err());
    }

    #[test]
    fn enumeration_counts() {
        // oracle: brute force over the full box
        for (n, k) in [(3usize, 5i64), (4, 4), (5, 3)] {
            let mut count = 0;
            for first in (-k..=k).filter(|&v| v != 0) {
                for_each_tuple(n, k, first, &mut |idx| {
                    assert_eq!(idx.iter().sum::<i64>(), 0);
                    count += 1;
                });
            }
            let mut brute = 0;
            let vals: Vec<i64> = (-k..=k).filter(|&v| v != 0).collect();
            let total = vals.len().pow(n as u32 - 1);
            for code in 0..total {
                let mut c = code;
                let mut s = 0;
                for _ in 0..n - 1 {
                    s += vals[c % vals.len()];
                    c /= vals.len();
                }
                if s != 0 && s.abs() <= k {
                    brute += 1;
                }
            }
            assert_eq!(count, brute);
        }
    }

    #[test]
    fn permutation_list() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(5).len(), 120);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
    }
}
