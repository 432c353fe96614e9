use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Family of a yield curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Cone,
    Exponential,
    Cauchy,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Cone, Variant::Exponential, Variant::Cauchy];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Cone => "cone",
            Self::Exponential => "exponential",
            Self::Cauchy => "cauchy",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cone" => Ok(Self::Cone),
            "exponential" => Ok(Self::Exponential),
            "cauchy" => Ok(Self::Cauchy),
            other => Err(Error::InvalidArgument(format!("unknown variant {other:?}; expected cone, exponential or cauchy"))),
        }
    }
}

/// Normalised methane yield as a function of retention time `t` (days).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum YieldParams {
    /// `y = 1 / (1 + (k t)^-n)`, rate `k` per day, shape `n`.
    Cone { k: f64, n: f64 },
    /// `y = 1 - exp(-t / tau)`.
    Exponential { tau: f64 },
    /// `y = (2 / pi) atan(t / tau)`.
    Cauchy { tau: f64 },
}

impl YieldParams {
    pub fn variant(&self) -> Variant {
        match self {
            Self::Cone { .. } => Variant::Cone,
            Self::Exponential { .. } => Variant::Exponential,
            Self::Cauchy { .. } => Variant::Cauchy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Cone { k, n } => k > 0.0 && n > 0.0 && k.is_finite() && n.is_finite(),
            Self::Exponential { tau } | Self::Cauchy { tau } => tau > 0.0 && tau.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("yield parameters must be positive and finite: {self:?}")))
        }
    }
}

/// `(y, dy/dt, d2y/dt2)` at retention time `t > 0`.
pub fn yield_curve(p: &YieldParams, t: f64) -> Result<(f64, f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("retention time must be positive, got {t}")));
    }
    Ok(match *p {
        YieldParams::Cone { k, n } => {
            // y = sigmoid(n ln(kt)); y and 1 - y computed separately to avoid cancellation
            let s = n * (k * t).ln();
            let (y, ybar) = sigmoid_pair(s);
            let core = y * ybar;
            (y, n / t * core, n / (t * t) * core * (n * (ybar - y) - 1.0))
        }
        YieldParams::Exponential { tau } => {
            let e = (-t / tau).exp();
            (-(-t / tau).exp_m1(), e / tau, -e / (tau * tau))
        }
        YieldParams::Cauchy { tau } => {
            let u = t / tau;
            let d = 1.0 + u * u;
            (
                std::f64::consts::FRAC_2_PI * u.atan(),
                std::f64::consts::FRAC_2_PI / (tau * d),
                -2.0 * std::f64::consts::FRAC_2_PI * u / (tau * tau * d * d),
            )
        }
    })
}

fn sigmoid_pair(s: f64) -> (f64, f64) {
    if s >= 0.0 {
        let e = (-s).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = s.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    }
}

/// Yield per unit volume of feed and its derivatives with respect to the
/// total feed rate `X`, for a unit reactor volume (retention time `1/X`).
pub fn big_yield(g0: f64, p: &YieldParams, total_feed: f64) -> Result<(f64, f64, f64)> {
    if !(total_feed > 0.0) {
        return Err(Error::Domain(format!("retention time undefined for total feed {total_feed}")));
    }
    let x = total_feed;
    let (y, y1, y2) = yield_curve(p, 1.0 / x)?;
    let inv2 = 1.0 / (x * x);
    Ok((g0 * y, -g0 * inv2 * y1, g0 * inv2 * (2.0 / x * y1 + inv2 * y2)))
}
