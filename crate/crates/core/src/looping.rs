//! Temporal looping: resets the physical time when the next position update
//! would be dominated by the growing time-dependent coefficients.

use std::fmt;
use std::str::FromStr;

use crate::bregman::{BregmanConfig, Family};
use crate::error::{Error, Result};

/// Default floor for the physical time.
pub const DEFAULT_EPSILON: f64 = 0.001;

/// Default multiplicative factor, the middle of the `[0.6, 0.95]` band that
/// works well in practice.
pub const DEFAULT_BETA: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LoopMode {
    #[default]
    Off,
    /// `𝔮 ← max(ε, β𝔮)` with `β ∈ (0, 1)`.
    Multiplicative(f64),
    /// `𝔮 ← max(ε, 𝔮 − νh)` with `ν > 1`.
    Subtractive(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopingStrategy {
    pub mode: LoopMode,
    pub epsilon: f64,
}

impl Default for LoopingStrategy {
    fn default() -> Self {
        Self::OFF
    }
}

impl LoopingStrategy {
    pub const OFF: LoopingStrategy = LoopingStrategy {
        mode: LoopMode::Off,
        epsilon: DEFAULT_EPSILON,
    };

    pub fn multiplicative(beta: f64) -> Result<Self> {
        Self::OFF.with_mode(LoopMode::Multiplicative(beta))
    }

    pub fn subtractive(nu: f64) -> Result<Self> {
        Self::OFF.with_mode(LoopMode::Subtractive(nu))
    }

    pub fn with_mode(mut self, mode: LoopMode) -> Result<Self> {
        match mode {
            LoopMode::Multiplicative(b) if !(b > 0.0 && b < 1.0) => {
                return Err(Error::InvalidParameter {
                    name: "beta",
                    value: b,
                    reason: "must lie in (0, 1)",
                })
            }
            LoopMode::Subtractive(n) if !(n > 1.0 && n.is_finite()) => {
                return Err(Error::InvalidParameter {
                    name: "nu",
                    value: n,
                    reason: "must be greater than 1",
                })
            }
            _ => {}
        }
        self.mode = mode;
        Ok(self)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: epsilon,
                reason: "must be positive",
            });
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn is_on(&self) -> bool {
        self.mode != LoopMode::Off
    }
}

impl fmt::Display for LoopingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            LoopMode::Off => f.write_str("off"),
            LoopMode::Multiplicative(b) => write!(f, "mult:{b}"),
            LoopMode::Subtractive(n) => write!(f, "sub:{n}"),
        }
    }
}

impl FromStr for LoopingStrategy {
    type Err = Error;

    /// `off`, `mult[:BETA]` or `sub:NU`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let value = |a: Option<&str>| -> Result<Option<f64>> {
            a.map(|a| a.parse::<f64>().map_err(|_| Error::Parse(format!("looping parameter `{a}`"))))
                .transpose()
        };
        match kind.to_ascii_lowercase().as_str() {
            "off" | "none" if arg.is_none() => Ok(Self::OFF),
            "mult" => Self::multiplicative(value(arg)?.unwrap_or(DEFAULT_BETA)),
            "sub" => match value(arg)? {
                Some(nu) => Self::subtractive(nu),
                None => Err(Error::Parse("`sub` needs a value, e.g. sub:2".into())),
            },
            _ => Err(Error::Parse(format!("unknown looping strategy `{s}`"))),
        }
    }
}

/// Instability test evaluated after the position update, before the time advance.
///
/// Expo: `C h² η² e^{η𝔮} ‖G‖ > e^{−ηh} ‖Δq‖`.
/// Poly: `C h² p² (𝔮 + h)^{p+1} ‖G‖ > 𝔮 ‖Δq‖`.
/// Both are strict. Only the non-adaptive Poly and Expo families are supported.
pub fn instability_detected(cfg: &BregmanConfig, time: f64, h: f64, grad: &[f64], delta_q: &[f64]) -> Result<bool> {
    if cfg.is_adaptive() {
        return Err(Error::UnsupportedFamily {
            operation: "temporal looping",
            family: if cfg.family() == Family::Poly || cfg.family() == Family::Expo {
                "time-adaptive"
            } else {
                cfg.family().as_str()
            },
        });
    }
    let g_norm = norm(grad);
    let dq_norm = norm(delta_q);
    let c = cfg.c();
    Ok(match cfg.family() {
        Family::Expo => {
            let eta = cfg.eta();
            // Compare in log space where the exponential could overflow.
            let lhs = c * h * h * eta * eta * g_norm;
            if lhs == 0.0 {
                false
            } else if dq_norm == 0.0 {
                true
            } else {
                lhs.ln() + eta * time > -eta * h + dq_norm.ln()
            }
        }
        Family::Poly => {
            let p = cfg.p();
            c * h * h * p * p * (time + h).powf(p + 1.0) * g_norm > time * dq_norm
        }
        _ => unreachable!("cross-family configs are adaptive"),
    })
}

/// New time after an instability; the identity when looping is off.
pub fn reset_time(strategy: &LoopingStrategy, time: f64, h: f64) -> f64 {
    match strategy.mode {
        LoopMode::Off => time,
        LoopMode::Multiplicative(beta) => strategy.epsilon.max(beta * time),
        LoopMode::Subtractive(nu) => strategy.epsilon.max(time - nu * h),
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criterion_edges() {
        let expo = BregmanConfig::expo(1.0, 1.0).unwrap();
        let poly = BregmanConfig::poly(6.0, 0.1).unwrap();
        for cfg in [expo, poly] {
            assert!(!instability_detected(&cfg, 2.0, 0.1, &[0.0, 0.0], &[1.0, 0.0]).unwrap());
            assert!(instability_detected(&cfg, 2.0, 0.1, &[1e-30, 0.0], &[0.0, 0.0]).unwrap());
        }
        // Equality boundary: LHS = 1, RHS = e^{-1}·e = 1.
        let e = std::f64::consts::E;
        assert!(!instability_detected(&expo, 0.0, 1.0, &[1.0], &[e]).unwrap());
        assert!(instability_detected(&expo, 0.0, 1.0, &[1.0], &[e * (1.0 - 1e-12)]).unwrap());

        let adaptive = BregmanConfig::poly_adaptive(6.0, 2.0, 1.0).unwrap();
        assert!(instability_detected(&adaptive, 1.0, 0.1, &[1.0], &[1.0]).is_err());
        let cross = BregmanConfig::expo_to_poly(1.0, 2.0, 1.0).unwrap();
        assert!(instability_detected(&cross, 1.0, 0.1, &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn reset_values() {
        let m = LoopingStrategy::multiplicative(0.8).unwrap();
        assert_eq!(reset_time(&m, 10.0, 0.1), 8.0);
        assert_eq!(reset_time(&m, 0.0005, 0.1), 0.001);
        let s = LoopingStrategy::subtractive(2.0).unwrap();
        assert_eq!(reset_time(&s, 3.0, 0.5), 2.0);
        assert_eq!(reset_time(&LoopingStrategy::OFF, 3.0, 0.5), 3.0);
    }

    #[test]
    fn validation_and_parsing() {
        assert!(LoopingStrategy::multiplicative(1.0).is_err());
        assert!(LoopingStrategy::subtractive(1.0).is_err());
        assert!(LoopingStrategy::OFF.with_epsilon(0.0).is_err());
        assert_eq!("off".parse::<LoopingStrategy>().unwrap(), LoopingStrategy::OFF);
        assert_eq!(
            "mult".parse::<LoopingStrategy>().unwrap().mode,
            LoopMode::Multiplicative(DEFAULT_BETA)
        );
        assert_eq!("sub:2.5".parse::<LoopingStrategy>().unwrap().mode, LoopMode::Subtractive(2.5));
        assert!("sub".parse::<LoopingStrategy>().is_err());
        assert!("mult:x".parse::<LoopingStrategy>().is_err());
    }
}
