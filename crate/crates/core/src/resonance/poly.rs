//! Symbolic cofactors of the resonance sums.
//!
//! The cofactors are obtained by exact polynomial division, once per `j`, and
//! then evaluated pointwise. That gives a second route to `Q_n` that never
//! divides the two numbers being compared.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Homogeneous bivariate polynomial: `coeffs[i]` multiplies `x^i y^(d-i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Binary {
    coeffs: Vec<BigInt>,
}

impl Binary {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn eval(&self, x: &BigInt, y: &BigInt) -> BigInt {
        let d = self.degree() as u32;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * x.pow(i as u32) * y.pow(d - i as u32))
            .sum()
    }

    fn divide_by_x(&self) -> Option<Binary> {
        if !self.coeffs[0].is_zero() {
            return None;
        }
        Some(Binary { coeffs: self.coeffs[1..].to_vec() })
    }

    fn divide_by_y(&self) -> Option<Binary> {
        if !self.coeffs[self.degree()].is_zero() {
            return None;
        }
        Some(Binary { coeffs: self.coeffs[..self.degree()].to_vec() })
    }

    /// Synthetic division by `x + y`: `b_0 = a_0`, `b_i = a_i - b_{i-1}`,
    /// remainder-free iff `b_{d-1} = a_d`.
    fn divide_by_sum(&self) -> Option<Binary> {
        let d = self.degree();
        let mut q: Vec<BigInt> = Vec::with_capacity(d);
        for i in 0..d {
            let prev = if i == 0 { BigInt::zero() } else { q[i - 1].clone() };
            q.push(&self.coeffs[i] - prev);
        }
        if q[d - 1] != self.coeffs[d] {
            return None;
        }
        Some(Binary { coeffs: q })
    }
}

/// `Q_3` as a polynomial in `(x, y)` with `z = -x - y`, so that
/// `x^p + y^p + z^p = x y z Q_3(x, y)`, `p = 2j + 1`.
pub fn cofactor3(j: u32) -> Result<Binary> {
    let p = 2 * j + 1;
    // x^p + y^p - (x+y)^p
    let coeffs = (0..=p)
        .map(|i| if i == 0 || i == p { BigInt::zero() } else { -binomial(p, i) })
        .collect();
    let fail = || Error::InvalidArgument(format!("P_3 not divisible by xyz for j = {j}"));
    let q = Binary { coeffs }
        .divide_by_x()
        .and_then(|b| b.divide_by_y())
        .and_then(|b| b.divide_by_sum())
        .ok_or_else(fail)?;
    // xyz = -x y (x + y)
    Ok(Binary { coeffs: q.coeffs.into_iter().map(|c| -c).collect() })
}

type Monomial = [u32; 3];

/// Sparse trivariate polynomial with rational coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ternary {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Ternary {
    fn linear(coeffs: [BigRational; 3]) -> Self {
        let mut terms = BTreeMap::new();
        for (v, c) in coeffs.into_iter().enumerate() {
            if !c.is_zero() {
                let mut e = [0; 3];
                e[v] = 1;
                terms.insert(e, c);
            }
        }
        Ternary { terms }
    }

    fn one() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert([0; 3], BigRational::one());
        Ternary { terms }
    }

    fn add(&self, other: &Ternary) -> Ternary {
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(*e).or_insert_with(BigRational::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        Ternary { terms }
    }

    fn mul(&self, other: &Ternary) -> Ternary {
        let mut out = Ternary::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                let entry = out.terms.entry(e).or_insert_with(BigRational::zero);
                *entry += ca * cb;
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    fn pow(&self, p: u32) -> Ternary {
        (0..p).fold(Ternary::one(), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, v: [&BigInt; 3]) -> BigRational {
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: BigInt = (0..3).map(|i| v[i].pow(e[i])).product();
                c * BigRational::from_integer(m)
            })
            .sum()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }
}

/// `Q_4` in the coordinates `a = x + y`, `b = x + z`, `c = x + w` of the
/// hyperplane `x + y + z + w = 0`, where the prefactor is the monomial `abc`.
///
/// Inverse change of variables: `x = (a+b+c)/2`, `y = (a-b-c)/2`,
/// `z = (b-a-c)/2`, `w = (c-a-b)/2`.
pub fn cofactor4(j: u32) -> Result<Ternary> {
    let p = 2 * j + 1;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mh = -half.clone();
    let forms = [
        [half.clone(), half.clone(), half.clone()],
        [half.clone(), mh.clone(), mh.clone()],
        [mh.clone(), half.clone(), mh.clone()],
        [mh.clone(), mh.clone(), half.clone()],
    ];
    let p4 = forms
        .into_iter()
        .map(|f| Ternary::linear(f).pow(p))
        .fold(Ternary::default(), |acc, t| acc.add(&t));
    let mut terms = BTreeMap::new();
    for (e, c) in p4.terms {
        if e.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(format!(
                "P_4 not divisible by (x+y)(x+z)(x+w) for j = {j}: monomial {e:?}"
            )));
        }
        terms.insert([e[0] - 1, e[1] - 1, e[2] - 1], c);
    }
    Ok(Ternary { terms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kdv_cofactors_are_three() {
        let q3 = cofactor3(1).unwrap();
        assert_eq!(q3.coefficients(), &[BigInt::from(3)]);
        let q4 = cofactor4(1).unwrap();
        assert_eq!(q4.num_terms(), 1);
        let v = BigInt::from(7);
        assert_eq!(q4.eval([&v, &v, &v]), BigRational::from_integer(BigInt::from(3)));
    }

    #[test]
    fn cofactor_degrees() {
        for j in 1..=4 {
            assert_eq!(cofactor3(j).unwrap().degree(), 2 * j as usize - 2);
            let q4 = cofactor4(j).unwrap();
            for e in q4.terms.keys() {
                assert_eq!(e.iter().sum::<u32>(), 2 * j - 2);
            }
        }
    }

    #[test]
    fn kawahara_q3_example() {
        // (1, 1, -2), j = 2: P = -30, xyz = -2, Q = 15
        let q = cofactor3(2).unwrap();
        assert_eq!(q.eval(&BigInt::from(1), &BigInt::from(1)), BigInt::from(15));
    }
}
