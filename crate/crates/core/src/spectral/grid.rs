use crate::error::{Error, Result};

/// How many collocation points a grid uses for products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dealias {
    /// Smallest 2^a 3^b 5^c size that is at least `3K + 1`.
    #[default]
    Padded,
    /// Explicit point count; must still satisfy the padding bound.
    Points(usize),
}

/// Model and discretisation parameters.
///
/// The torus has circumference `2 pi mu`; the retained frequencies are
/// `n / mu` for `0 < |n| <= k_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    j: u32,
    k_max: usize,
    mu: f64,
    points: usize,
    dealias: Dealias,
}

impl GridSpec {
    pub fn new(j: u32, k_max: usize, mu: f64, dealias: Dealias) -> Result<Self> {
        if j == 0 {
            return Err(Error::InvalidGrid("dispersion order j must be positive".into()));
        }
        if k_max == 0 {
            return Err(Error::InvalidGrid("mode cutoff K must be positive".into()));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidGrid(format!("period parameter mu = {mu} must be positive")));
        }
        let min_points = 3 * k_max + 1;
        let points = match dealias {
            Dealias::Padded => smooth_size_at_least(min_points),
            Dealias::Points(p) if p >= min_points => p,
            Dealias::Points(p) => {
                return Err(Error::InvalidGrid(format!(
                    "{p} collocation points cannot hold quadratic products of {k_max} modes (need {min_points})"
                )))
            }
        };
        Ok(GridSpec { j, k_max, mu, points, dealias })
    }

    /// Unit-period grid with the default padding.
    pub fn periodic(j: u32, k_max: usize) -> Result<Self> {
        Self::new(j, k_max, 1.0, Dealias::Padded)
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn physical_points(&self) -> usize {
        self.points
    }

    pub fn dealias(&self) -> Dealias {
        self.dealias
    }

    /// Lattice frequency `n / mu` of mode index `n`.
    pub fn wavenumber(&self, n: i64) -> f64 {
        n as f64 / self.mu
    }

    /// Dispersion symbol `k^(2j+1)` of mode index `n`.
    pub fn dispersion(&self, n: i64) -> f64 {
        self.wavenumber(n).powi(2 * self.j as i32 + 1)
    }

    /// Torus length `2 pi mu`.
    pub fn length(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.mu
    }

    /// Same physics with a different mode cutoff.
    pub fn with_k_max(&self, k_max: usize) -> Result<Self> {
        let dealias = match self.dealias {
            Dealias::Points(_) => Dealias::Padded,
            d => d,
        };
        GridSpec::new(self.j, k_max, self.mu, dealias)
    }

    /// Whether two grids describe the same coefficient space.
    pub fn compatible(&self, other: &GridSpec) -> bool {
        self.j == other.j && self.k_max == other.k_max && self.mu == other.mu
    }

    pub(crate) fn ensure_compatible(&self, other: &GridSpec) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(j={}, K={}, mu={}) vs (j={}, K={}, mu={})",
                self.j, self.k_max, self.mu, other.j, other.k_max, other.mu
            )))
        }
    }
}

/// Smallest integer `>= n` whose only prime factors are 2, 3 and 5.
pub fn smooth_size_at_least(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}
