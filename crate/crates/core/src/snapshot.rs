//! Field snapshot files.
//!
//! A snapshot is flat TOML:
//!
//! ```toml
//! schema_version = 1
//! j = 2
//! mu = 1.0
//! K = 32
//! coeffs = [[1, 0.5, 0.0], [3, -0.01, 0.02]]
//! ```
//!
//! Each `coeffs` entry is `[n, re, im]` for the series coefficient `c_n` of
//! `u(x) = sum c_n e^{i n x / mu}`, `1 <= n <= K`. Negative indices are implied
//! by conjugate symmetry and are rejected, as is `n = 0` (the mean).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Dealias, FourierField, GridSpec};

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    fn as_f64(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Float(f) => f,
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSnapshot {
    schema_version: i64,
    j: i64,
    mu: Number,
    #[serde(rename = "K")]
    k_max: i64,
    coeffs: Vec<(i64, Number, Number)>,
}

/// Parses snapshot text into a field on a default-padded grid.
pub fn parse(text: &str) -> Result<FourierField> {
    let raw: RawSnapshot = toml::from_str(text).map_err(|e| Error::Snapshot(e.message().to_string()))?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(Error::Snapshot(format!("unsupported schema_version {}", raw.schema_version)));
    }
    let j = u32::try_from(raw.j)
        .ok()
        .filter(|j| *j >= 1 && *j <= 16)
        .ok_or_else(|| Error::Snapshot(format!("j = {} out of range", raw.j)))?;
    let k_max = usize::try_from(raw.k_max)
        .ok()
        .filter(|k| *k >= 1 && *k <= 1 << 20)
        .ok_or_else(|| Error::Snapshot(format!("K = {} out of range", raw.k_max)))?;
    let grid = GridSpec::new(j, k_max, raw.mu.as_f64(), Dealias::Padded)
        .map_err(|e| Error::Snapshot(e.to_string()))?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); k_max];
    let mut seen = vec![false; k_max];
    for (n, re, im) in raw.coeffs {
        if n == 0 {
            return Err(Error::Snapshot("k_index 0 (the mean) is not representable".into()));
        }
        if n < 0 {
            return Err(Error::Snapshot(format!(
                "k_index {n}: only positive indices are stored, negatives follow by conjugate symmetry"
            )));
        }
        if n as u64 > k_max as u64 {
            return Err(Error::Snapshot(format!("k_index {n} exceeds K = {k_max}")));
        }
        let i = n as usize - 1;
        if seen[i] {
            return Err(Error::Snapshot(format!("k_index {n} listed twice")));
        }
        seen[i] = true;
        let c = Complex64::new(re.as_f64(), im.as_f64());
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Snapshot(format!("k_index {n}: non-finite coefficient")));
        }
        coeffs[i] = c;
    }
    FourierField::from_coeffs(grid, coeffs)
}

/// Serialises a field; zero coefficients are omitted.
pub fn render(u: &FourierField) -> String {
    let g = u.grid();
    let coeffs = u
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
        .map(|(i, c)| (i as i64 + 1, Number::Float(c.re), Number::Float(c.im)))
        .collect();
    let raw = RawSnapshot {
        schema_version: SCHEMA_VERSION,
        j: g.j() as i64,
        mu: Number::Float(g.mu()),
        k_max: g.k_max() as i64,
        coeffs,
    };
    toml::to_string(&raw).expect("snapshot serialisation cannot fail")
}

pub fn read(path: &std::path::Path) -> Result<FourierField> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Snapshot(format!("{}: {e}", path.display())))?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "schema_version = 1\nj = 2\nmu = 1.0\nK = 4\ncoeffs = [[1, 0.5, 0.0], [3, -0.25, 1]]\n";

    #[test]
    fn tiny_coefficients_survive_round_trip() {
        let text = "schema_version = 1\nj = 1\nmu = 1.0\nK = 2\ncoeffs = [[2, 1e-200, -5e-324]]\n";
        let u = parse(text).unwrap();
        assert_eq!(parse(&render(&u)).unwrap(), u);
    }

    #[test]
    fn parses_example() {
        let u = parse(GOOD).unwrap();
        assert_eq!(u.grid().k_max(), 4);
        assert_eq!(u.coeff(1), Complex64::new(0.5, 0.0));
        assert_eq!(u.coeff(-3), Complex64::new(-0.25, -1.0));
        assert_eq!(u.coeff(2), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn round_trip_is_exact() {
        let g = GridSpec::new(3, 6, 2.5, Dealias::Padded).unwrap();
        let coeffs = (1..=6).map(|n| Complex64::new(0.1 * n as f64, 1.0 / n as f64)).collect();
        let u = FourierField::from_coeffs(g, coeffs).unwrap();
        assert_eq!(parse(&render(&u)).unwrap(), u);
    }

    #[test]
    fn rejects_malformed() {
        let cases = [
            "schema_version = 1\nj = 2\nmu = 1.0\nK = 4\ncoeffs = [[0, 1.0, 0.0]]",
            "schema_version = 1\nj = 2\nmu = 1.0\nK = 4\ncoeffs = [[-1, 1.0, 0.0]]",
            "schema_version = 1\nj = 2\nmu = 1.0\nK = 4\ncoeffs = [[5, 1.0, 0.0]]",
            "schema_version = 1\nj = 2\nmu = 1.0\nK = 4\ncoeffs = [[1, 1.0, 0.0], [1, 0.0, 0.0]]",
            "schema_version = 2\nj = 2\nmu = 1.0\nK = 4\ncoeffs = []",
            "schema_version = 1\nj = 0\nmu = 1.0\nK = 4\ncoeffs = []",
            "schema_version = 1\nj = 2\nmu = -1.0\nK = 4\ncoeffs = []",
            "schema_version = 1\nj = 2\nmu = 1.0\nK = 4\ncoeffs = [[1, nan, 0.0]]",
            "schema_version = 1\nj = 2\nmu = 1.0\nK = 4\nextra = 1\ncoeffs = []",
            "schema_version = 1\nj = 2\nmu = 1.0\ncoeffs = []",
        ];
        for c in cases {
            assert!(parse(c).is_err(), "accepted: {c}");
        }
    }
}
