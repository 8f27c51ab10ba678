//! Increasing, concave, differentiable utilities with `U(0) = 0`.
//!
//! Two parametric families are supported, both with closed-form inverses
//! of the value and of the derivative:
//!
//! * `Power { p }`: `U(x) = x^p` for `p` in `(0, 1)`.
//! * `Log { c }`: `U(x) = c * ln(1 + x)` for `c > 0`.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UtilityFunction {
    Power { p: f64 },
    Log { c: f64 },
}

impl UtilityFunction {
    pub fn power(p: f64) -> Result<Self> {
        let u = UtilityFunction::Power { p };
        u.validate()?;
        Ok(u)
    }

    pub fn log(c: f64) -> Result<Self> {
        let u = UtilityFunction::Log { c };
        u.validate()?;
        Ok(u)
    }

    /// `x^0.5`, the running example throughout the test-suite.
    pub fn sqrt() -> Self {
        UtilityFunction::Power { p: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            UtilityFunction::Power { p } if p.is_finite() && p > 0.0 && p < 1.0 => Ok(()),
            UtilityFunction::Power { p } => Err(invalid(format!("power exponent {p} not in (0, 1)"))),
            UtilityFunction::Log { c } if c.is_finite() && c > 0.0 => Ok(()),
            UtilityFunction::Log { c } => Err(invalid(format!("log scale {c} must be positive"))),
        }
    }

    /// Family name as used in instance files (`"power"` or `"log"`).
    pub fn kind(&self) -> &'static str {
        match self {
            UtilityFunction::Power { .. } => "power",
            UtilityFunction::Log { .. } => "log",
        }
    }

    pub fn param(&self) -> f64 {
        match *self {
            UtilityFunction::Power { p } => p,
            UtilityFunction::Log { c } => c,
        }
    }

    pub fn from_kind(kind: &str, param: f64) -> Result<Self> {
        match kind {
            "power" => Self::power(param),
            "log" => Self::log(param),
            other => Err(invalid(format!("unknown utility kind {other:?}"))),
        }
    }

    /// Utility of a water level. Negative levels (rounding residue) are
    /// treated as zero.
    pub fn value(&self, level: f64) -> f64 {
        let x = level.max(0.0);
        match *self {
            UtilityFunction::Power { p } => x.powf(p),
            UtilityFunction::Log { c } => c * x.ln_1p(),
        }
    }

    /// `U'(x)`. Infinite at zero for the power family.
    pub fn derivative(&self, level: f64) -> f64 {
        let x = level.max(0.0);
        match *self {
            UtilityFunction::Power { p } => p * x.powf(p - 1.0),
            UtilityFunction::Log { c } => c / (1.0 + x),
        }
    }

    /// Inverse of `value`: the level `x >= 0` with `U(x) = y`.
    pub fn inverse_value(&self, y: f64) -> Result<f64> {
        if !(y.is_finite() && y >= 0.0) {
            return Err(invalid(format!("utility value {y} outside the range [0, inf)")));
        }
        Ok(match *self {
            UtilityFunction::Power { p } => y.powf(1.0 / p),
            UtilityFunction::Log { c } => (y / c).exp_m1(),
        })
    }

    /// Inverse of the derivative: the level `x >= 0` with `U'(x) = slope`,
    /// clipped to zero when `slope` exceeds `U'(0)`.
    pub fn derivative_inverse(&self, slope: f64) -> Result<f64> {
        if !(slope.is_finite() && slope > 0.0) {
            return Err(invalid(format!("slope {slope} must be positive")));
        }
        Ok(match *self {
            UtilityFunction::Power { p } => (slope / p).powf(1.0 / (p - 1.0)),
            UtilityFunction::Log { c } => (c / slope - 1.0).max(0.0),
        })
    }
}

impl fmt::Display for UtilityFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind(), self.param())
    }
}

/// Parses the `kind:param` spelling, e.g. `power:0.5` or `log:2`.
impl FromStr for UtilityFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, param) = s
            .split_once(':')
            .ok_or_else(|| invalid(format!("utility {s:?} is not of the form kind:param")))?;
        let param: f64 = param
            .trim()
            .parse()
            .map_err(|_| invalid(format!("utility parameter {param:?} is not a number")))?;
        Self::from_kind(kind.trim(), param)
    }
}
