//! Exact arithmetic on the resonance sums `P_n = xi_1^(2j+1) + ... + xi_n^(2j+1)`
//! over the hyperplane `xi_1 + ... + xi_n = 0`.
//!
//! Everything here is integer or rational; floating point appears only when
//! a report is printed.

pub mod poly;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Frequencies on the hyperplane `Gamma_n`, `n in {3, 4, 5}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreqTuple {
    entries: Vec<BigRational>,
    j: u32,
    degenerate: bool,
}

impl FreqTuple {
    pub fn new(entries: Vec<BigRational>, j: u32) -> Result<Self> {
        Self::build(entries, j, false)
    }

    /// Like [`FreqTuple::new`] but allows zero entries.
    pub fn degenerate_probe(entries: Vec<BigRational>, j: u32) -> Result<Self> {
        Self::build(entries, j, true)
    }

    pub fn integers(entries: &[i64], j: u32) -> Result<Self> {
        Self::new(entries.iter().map(|&e| BigRational::from_integer(e.into())).collect(), j)
    }

    fn build(entries: Vec<BigRational>, j: u32, degenerate: bool) -> Result<Self> {
        if !(3..=5).contains(&entries.len()) {
            return Err(Error::InvalidArgument(format!("arity {} not in 3..=5", entries.len())));
        }
        if j == 0 {
            return Err(Error::InvalidArgument("j must be positive".into()));
        }
        if !entries.iter().fold(BigRational::zero(), |a, e| a + e).is_zero() {
            return Err(Error::InvalidArgument("entries do not sum to zero".into()));
        }
        if !degenerate && entries.iter().any(Zero::is_zero) {
            return Err(Error::InvalidArgument("zero entry in a non-degenerate tuple".into()));
        }
        Ok(FreqTuple { entries, j, degenerate })
    }

    pub fn arity(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn is_degenerate_probe(&self) -> bool {
        self.degenerate
    }

    fn labels(&self) -> Vec<String> {
        self.entries.iter().map(ToString::to_string).collect()
    }
}

/// A purely imaginary number `i * im`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Imaginary(pub BigRational);

impl Imaginary {
    pub fn re(&self) -> BigRational {
        BigRational::zero()
    }

    pub fn im(&self) -> &BigRational {
        &self.0
    }
}

impl fmt::Display for Imaginary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}i", self.0)
    }
}

/// Sum of `(2j+1)`-th powers of the entries.
pub fn p_n(t: &FreqTuple) -> BigRational {
    let p = (2 * t.j + 1) as i32;
    t.entries.iter().map(|e| num_traits::pow::Pow::pow(e, p)).sum()
}

/// The factored prefactor: `xyz` for `n = 3`, `(x+y)(x+z)(x+w)` for `n = 4`.
pub fn prefactor(t: &FreqTuple) -> Result<BigRational> {
    let e = &t.entries;
    match e.len() {
        3 => Ok(&e[0] * &e[1] * &e[2]),
        4 => Ok((&e[0] + &e[1]) * (&e[0] + &e[2]) * (&e[0] + &e[3])),
        n => Err(Error::InvalidArgument(format!("no factorisation for arity {n}"))),
    }
}

/// Exact cofactor `Q_n = P_n / prefactor`.
pub fn q_n(t: &FreqTuple) -> Result<BigRational> {
    let pre = prefactor(t)?;
    if pre.is_zero() {
        return Err(Error::Resonant(t.labels()));
    }
    Ok(p_n(t) / pre)
}

/// `alpha_n = i P_n`.
pub fn alpha_n(t: &FreqTuple) -> Imaginary {
    Imaginary(p_n(t))
}

/// `sum n_i^(2j+1)` over integer indices with checked `i128` arithmetic;
/// `None` on overflow. Exact whenever it returns.
pub fn power_sum_i128(entries: &[i64], j: u32) -> Option<i128> {
    let p = 2 * j + 1;
    entries.iter().try_fold(0i128, |acc, &e| {
        let mut v: i128 = 1;
        for _ in 0..p {
            v = v.checked_mul(e as i128)?;
        }
        acc.checked_add(v)
    })
}

/// Exact resonance sum of integer indices; falls back to big integers.
pub fn power_sum_exact(entries: &[i64], j: u32) -> BigInt {
    match power_sum_i128(entries, j) {
        Some(v) => BigInt::from(v),
        None => entries.iter().map(|&e| BigInt::from(e).pow(2 * j + 1)).sum(),
    }
}

/// A tuple on which the two routes to `Q_n` disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub tuple: Vec<i64>,
    pub reason: String,
}

/// Findings of an exhaustive lattice enumeration for one arity.
#[derive(Debug, Clone)]
pub struct ArityReport {
    pub n: usize,
    pub j: u32,
    pub bound: i64,
    /// Non-resonant tuples checked.
    pub count: u64,
    /// Tuples with vanishing prefactor (checked for `P_n = 0`).
    pub resonant: u64,
    pub min_ratio: Option<BigRational>,
    pub max_ratio: Option<BigRational>,
    /// `Some(q)` when every checked tuple had `Q_n = q`.
    pub constant_q: Option<BigRational>,
    pub failures: Vec<Failure>,
}

impl ArityReport {
    fn empty(n: usize, j: u32, bound: i64) -> Self {
        ArityReport {
            n,
            j,
            bound,
            count: 0,
            resonant: 0,
            min_ratio: None,
            max_ratio: None,
            constant_q: None,
            failures: Vec::new(),
        }
    }

    fn observe(&mut self, q: &BigRational, ratio: BigRational) {
        if self.count == 0 {
            self.constant_q = Some(q.clone());
        } else if self.constant_q.as_ref().is_some_and(|c| c != q) {
            self.constant_q = None;
        }
        self.count += 1;
        if self.min_ratio.as_ref().is_none_or(|m| ratio < *m) {
            self.min_ratio = Some(ratio.clone());
        }
        if self.max_ratio.as_ref().is_none_or(|m| ratio > *m) {
            self.max_ratio = Some(ratio);
        }
    }

    fn merge(mut self, other: ArityReport) -> Self {
        if other.count > 0 {
            let consistent = self.count == 0 || self.constant_q == other.constant_q;
            self.constant_q = if consistent { other.constant_q.clone() } else { None };
            for r in [other.min_ratio.clone(), other.max_ratio.clone()].into_iter().flatten() {
                if self.min_ratio.as_ref().is_none_or(|m| r < *m) {
                    self.min_ratio = Some(r.clone());
                }
                if self.max_ratio.as_ref().is_none_or(|m| r > *m) {
                    self.max_ratio = Some(r);
                }
            }
        }
        self.count += other.count;
        self.resonant += other.resonant;
        self.failures.extend(other.failures);
        self
    }

    pub fn min_ratio_f64(&self) -> Option<f64> {
        self.min_ratio.as_ref().and_then(ToPrimitive::to_f64)
    }

    pub fn max_ratio_f64(&self) -> Option<f64> {
        self.max_ratio.as_ref().and_then(ToPrimitive::to_f64)
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
            && self.count > 0
            && self.min_ratio.as_ref().is_some_and(|m| m.is_positive())
    }
}

/// Per-tuple record streamed to CSV writers.
#[derive(Debug, Clone)]
pub struct TupleRecord {
    pub tuple: Vec<i64>,
    pub p: BigInt,
    pub q: BigRational,
    pub ratio: BigRational,
}

#[derive(Debug, Clone)]
pub struct FactorizationReport {
    pub gamma3: ArityReport,
    pub gamma4: ArityReport,
}

impl FactorizationReport {
    pub fn passed(&self) -> bool {
        self.gamma3.passed() && self.gamma4.passed()
    }
}

/// Enumerates `Gamma_3` and `Gamma_4` with entries bounded by `k`.
pub fn verify_factorization(j: u32, k: i64) -> Result<FactorizationReport> {
    verify_factorization_bounds(j, k, k)
}

pub fn verify_factorization_bounds(j: u32, k3: i64, k4: i64) -> Result<FactorizationReport> {
    Ok(FactorizationReport {
        gamma3: verify_arity(j, 3, k3, None)?,
        gamma4: verify_arity(j, 4, k4, None)?,
    })
}

/// Exhaustive check of `P_n = prefactor * Q_n` on all nonzero-entry integer
/// tuples of `Gamma_n` with `|entries| <= k`.
///
/// `Q_n` comes from the symbolic cofactor, independently of the pointwise
/// quotient [`q_n`]; both are compared. When `sink` is given, every
/// non-resonant tuple is passed to it in lexicographic order.
pub fn verify_arity(
    j: u32,
    n: usize,
    k: i64,
    sink: Option<&mut dyn FnMut(TupleRecord)>,
) -> Result<ArityReport> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("bound K = {k} must be at least 2")));
    }
    if j == 0 {
        return Err(Error::InvalidArgument("j must be positive".into()));
    }
    let firsts: Vec<i64> = (-k..=k).filter(|&x| x != 0).collect();
    let scale_power = 2 * j - 2;
    let collect = sink.is_some();
    let parts: Vec<(ArityReport, Vec<TupleRecord>)> = match n {
        3 => {
            let cof = poly::cofactor3(j)?;
            firsts
                .par_iter()
                .map(|&x| {
                    let mut rep = ArityReport::empty(3, j, k);
                    let mut rows = Vec::new();
                    for y in (-k..=k).filter(|&y| y != 0) {
                        let z = -x - y;
                        if z == 0 || z.abs() > k {
                            continue;
                        }
                        check_tuple(&[x, y, z], j, scale_power, &mut rep, collect.then_some(&mut rows), |t| {
                            BigRational::from_integer(cof.eval(&BigInt::from(t[0]), &BigInt::from(t[1])))
                        });
                    }
                    (rep, rows)
                })
                .collect()
        }
        4 => {
            let cof = poly::cofactor4(j)?;
            firsts
                .par_iter()
                .map(|&x| {
                    let mut rep = ArityReport::empty(4, j, k);
                    let mut rows = Vec::new();
                    for y in (-k..=k).filter(|&y| y != 0) {
                        for z in (-k..=k).filter(|&z| z != 0) {
                            let w = -x - y - z;
                            if w == 0 || w.abs() > k {
                                continue;
                            }
                            check_tuple(&[x, y, z, w], j, scale_power, &mut rep, collect.then_some(&mut rows), |t| {
                                let a = BigInt::from(t[0] + t[1]);
                                let b = BigInt::from(t[0] + t[2]);
                                let c = BigInt::from(t[0] + t[3]);
                                cof.eval([&a, &b, &c])
                            });
                        }
                    }
                    (rep, rows)
                })
                .collect()
        }
        _ => return Err(Error::InvalidArgument(format!("no factorisation for arity {n}"))),
    };
    let mut report = ArityReport::empty(n, j, k);
    let mut sink = sink;
    for (part, rows) in parts {
        report = report.merge(part);
        if let Some(s) = sink.as_mut() {
            rows.into_iter().for_each(|r| s(r));
        }
    }
    Ok(report)
}

fn check_tuple(
    t: &[i64],
    j: u32,
    scale_power: u32,
    rep: &mut ArityReport,
    rows: Option<&mut Vec<TupleRecord>>,
    cofactor: impl Fn(&[i64]) -> BigRational,
) {
    let p = power_sum_exact(t, j);
    let tuple = match FreqTuple::integers(t, j) {
        Ok(tuple) => tuple,
        Err(e) => {
            rep.failures.push(Failure { tuple: t.to_vec(), reason: e.to_string() });
            return;
        }
    };
    let pre = prefactor(&tuple).expect("arity 3 or 4");
    if pre.is_zero() {
        rep.resonant += 1;
        if !p.is_zero() {
            rep.failures.push(Failure {
                tuple: t.to_vec(),
                reason: format!("vanishing prefactor but P = {p}"),
            });
        }
        return;
    }
    let q_sym = cofactor(t);
    let p_rat = BigRational::from_integer(p.clone());
    if &pre * &q_sym != p_rat {
        rep.failures.push(Failure {
            tuple: t.to_vec(),
            reason: format!("P = {p} but prefactor * Q = {}", &pre * &q_sym),
        });
        return;
    }
    match q_n(&tuple) {
        Ok(q) if q == q_sym => {}
        other => {
            rep.failures.push(Failure {
                tuple: t.to_vec(),
                reason: format!("pointwise quotient {other:?} differs from cofactor {q_sym}"),
            });
            return;
        }
    }
    let max = t.iter().map(|v| v.abs()).max().unwrap_or(1);
    let scale = BigRational::from_integer(BigInt::from(max).pow(scale_power));
    let ratio = q_sym.abs() / scale;
    if let Some(rows) = rows {
        rows.push(TupleRecord { tuple: t.to_vec(), p, q: q_sym.clone(), ratio: ratio.clone() });
    }
    rep.observe(&q_sym, ratio);
}

/// Rational helper for probes: `num / den`.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// `lambda^(2j+1)` as a rational.
pub fn scaled_power(lambda: &BigRational, j: u32) -> BigRational {
    num_traits::pow::Pow::pow(lambda, (2 * j + 1) as i32)
}
