use crate::error::{Error, Result};
use crate::spectral::FourierField;

/// How the multiplier interpolates between `|xi| = N` and `|xi| = 2N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shape {
    /// `min(1, (|xi|/N)^s)` everywhere.
    #[default]
    ClippedPower,
    /// Monotone cubic in `log |xi|` on `[N, 2N]`.
    SmoothLog,
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clipped_power" => Ok(Shape::ClippedPower),
            "smooth_log" => Ok(Shape::SmoothLog),
            other => Err(Error::InvalidArgument(format!("unknown multiplier shape '{other}'"))),
        }
    }
}

/// Even smoothing multiplier: 1 below `N`, `N^{-s}|xi|^s` above `2N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IMultiplier {
    s: f64,
    threshold: f64,
    shape: Shape,
}

impl IMultiplier {
    pub fn new(s: f64, threshold: f64, shape: Shape) -> Result<Self> {
        if !(s.is_finite() && s <= 0.0) {
            return Err(Error::InvalidArgument(format!("multiplier exponent s = {s} must be <= 0")));
        }
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(Error::InvalidArgument(format!("threshold N = {threshold} must be positive")));
        }
        Ok(IMultiplier { s, threshold, shape })
    }

    pub fn clipped(s: f64, threshold: f64) -> Result<Self> {
        Self::new(s, threshold, Shape::ClippedPower)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn eval(&self, k: f64) -> f64 {
        let r = k.abs() / self.threshold;
        if r <= 1.0 {
            return 1.0;
        }
        match self.shape {
            Shape::ClippedPower => r.powf(self.s),
            Shape::SmoothLog if r >= 2.0 => r.powf(self.s),
            Shape::SmoothLog => {
                let t = r.log2();
                // h(0) = 0, h(1) = 1, h'(1) = 1 matches the power law's slope in log2
                let h = 2.0 * t * t - t * t * t;
                (self.s * std::f64::consts::LN_2 * h).exp()
            }
        }
    }

    /// `m(k)^2`
    pub fn eval_sq(&self, k: f64) -> f64 {
        let m = self.eval(k);
        m * m
    }

    /// `I u`
    pub fn apply(&self, u: &FourierField) -> FourierField {
        u.apply_symbol(|k| self.eval(k))
    }

    /// Whether `m = 1` on every retained frequency of a grid with cutoff `k`.
    pub fn is_identity_below(&self, k: f64) -> bool {
        self.s == 0.0 || k <= self.threshold
    }
}

pub fn eval_m(mult: &IMultiplier, k: f64) -> f64 {
    mult.eval(k)
}

pub fn apply_i(u: &FourierField, mult: &IMultiplier) -> FourierField {
    mult.apply(u)
}
