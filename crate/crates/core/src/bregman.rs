//! Bregman families with the Euclidean divergence `h(q) = ½⟨q, q⟩`.
//!
//! Every family's Poincaré Hamiltonian has the shape
//!
//! ```text
//! H̄(q, 𝔮, r, 𝔯) = ½ A(𝔮) ⟨r, r⟩ + B(𝔮) f(q) + g(𝔮) 𝔯
//! ```
//!
//! so the integrators only need the three scalar coefficients `A`, `B` and
//! the monitor function `g`, plus the exact flow of `𝔮' = g(𝔮)`.
//! [`coefficients`] evaluates them in log space and reports saturation
//! instead of silently overflowing.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result, StepError};

/// Largest `x` with `exp(x)` finite.
pub const LOG_MAX: f64 = 709.782_712_893_384;

/// `exp(x)`, or a saturation error if it would overflow.
#[inline]
pub fn exp_checked(x: f64) -> Result<f64, StepError> {
    if x > LOG_MAX || x.is_nan() {
        Err(StepError::Saturated { log_magnitude: x })
    } else {
        Ok(x.exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Polynomial-`p` dynamics, optionally rescaled to polynomial-`p̊`.
    Poly,
    /// Exponential-`η` dynamics, optionally rescaled to exponential-`η̊`.
    Expo,
    /// Exponential-`η` dynamics integrated at the polynomial-`p` rate.
    ExpoToPoly,
    /// Polynomial-`p` dynamics integrated at the exponential-`η` rate.
    PolyToExpo,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Poly => "poly",
            Family::Expo => "expo",
            Family::ExpoToPoly => "expo2poly",
            Family::PolyToExpo => "poly2expo",
        }
    }

    /// True when the underlying (unrescaled) dynamics are polynomial.
    pub fn base_is_poly(self) -> bool {
        matches!(self, Family::Poly | Family::PolyToExpo)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "poly" => Ok(Family::Poly),
            "expo" => Ok(Family::Expo),
            "expo2poly" | "expotopoly" => Ok(Family::ExpoToPoly),
            "poly2expo" | "polytoexpo" => Ok(Family::PolyToExpo),
            other => Err(Error::Parse(format!("unknown family `{other}`"))),
        }
    }
}

/// Family tag and its parameters.
///
/// Only the parameters relevant to the family are meaningful; the others are
/// stored as `NaN`. `p̊`/`η̊` left unset track `p`/`η`, which is the
/// non-adaptive case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BregmanConfig {
    family: Family,
    p: f64,
    p_ring: Option<f64>,
    eta: f64,
    eta_ring: Option<f64>,
    c: f64,
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

impl BregmanConfig {
    /// Non-adaptive polynomial family.
    pub fn poly(p: f64, c: f64) -> Result<Self> {
        Ok(Self {
            family: Family::Poly,
            p: positive("p", p)?,
            p_ring: None,
            eta: f64::NAN,
            eta_ring: None,
            c: positive("C", c)?,
        })
    }

    /// Polynomial-`p` dynamics rescaled to polynomial-`p̊`.
    pub fn poly_adaptive(p: f64, p_ring: f64, c: f64) -> Result<Self> {
        let mut cfg = Self::poly(p, c)?;
        cfg.p_ring = Some(positive("p_ring", p_ring)?);
        Ok(cfg)
    }

    /// Non-adaptive exponential family.
    pub fn expo(eta: f64, c: f64) -> Result<Self> {
        Ok(Self {
            family: Family::Expo,
            p: f64::NAN,
            p_ring: None,
            eta: positive("eta", eta)?,
            eta_ring: None,
            c: positive("C", c)?,
        })
    }

    /// Exponential-`η` dynamics rescaled to exponential-`η̊`.
    pub fn expo_adaptive(eta: f64, eta_ring: f64, c: f64) -> Result<Self> {
        let mut cfg = Self::expo(eta, c)?;
        cfg.eta_ring = Some(positive("eta_ring", eta_ring)?);
        Ok(cfg)
    }

    pub fn expo_to_poly(eta: f64, p: f64, c: f64) -> Result<Self> {
        Ok(Self {
            family: Family::ExpoToPoly,
            p: positive("p", p)?,
            p_ring: None,
            eta: positive("eta", eta)?,
            eta_ring: None,
            c: positive("C", c)?,
        })
    }

    pub fn poly_to_expo(p: f64, eta: f64, c: f64) -> Result<Self> {
        Ok(Self {
            family: Family::PolyToExpo,
            p: positive("p", p)?,
            p_ring: None,
            eta: positive("eta", eta)?,
            eta_ring: None,
            c: positive("C", c)?,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_ring(&self) -> f64 {
        self.p_ring.unwrap_or(self.p)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eta_ring(&self) -> f64 {
        self.eta_ring.unwrap_or(self.eta)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `p̊ = p` for Poly, `η̊ = η` for Expo. Cross-family configs are always adaptive.
    pub fn is_adaptive(&self) -> bool {
        match self.family {
            Family::Poly => self.p_ring() != self.p,
            Family::Expo => self.eta_ring() != self.eta,
            Family::ExpoToPoly | Family::PolyToExpo => true,
        }
    }

    /// Returns a copy with one named parameter replaced and revalidated.
    ///
    /// Names: `C`, `p`, `pring`, `eta`, `etaring` (the Greek and ring-accent
    /// spellings `η`, `p̊`, `η̊` are accepted too). Setting a parameter the
    /// family does not read is an error.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut next = *self;
        let uses_p = self.family != Family::Expo;
        let uses_eta = self.family != Family::Poly;
        match canonical_param(name) {
            Some("C") => next.c = positive("C", value)?,
            Some("p") if uses_p => next.p = positive("p", value)?,
            Some("eta") if uses_eta => next.eta = positive("eta", value)?,
            Some("pring") if self.family == Family::Poly => next.p_ring = Some(positive("p_ring", value)?),
            Some("etaring") if self.family == Family::Expo => {
                next.eta_ring = Some(positive("eta_ring", value)?)
            }
            Some(other) => {
                return Err(Error::Config(format!(
                    "parameter `{other}` is not used by the {} family",
                    self.family
                )))
            }
            None => return Err(Error::Config(format!("unknown parameter `{name}`"))),
        }
        Ok(next)
    }

    /// Label used in tables, e.g. `Poly(p=6, C=0.1)`.
    pub fn label(&self) -> String {
        match self.family {
            Family::Poly if self.is_adaptive() => {
                format!("Poly(p={}, p̊={}, C={})", self.p, self.p_ring(), self.c)
            }
            Family::Poly => format!("Poly(p={}, C={})", self.p, self.c),
            Family::Expo if self.is_adaptive() => {
                format!("Expo(η={}, η̊={}, C={})", self.eta, self.eta_ring(), self.c)
            }
            Family::Expo => format!("Expo(η={}, C={})", self.eta, self.c),
            Family::ExpoToPoly => format!("ExpoToPoly(η={}, p={}, C={})", self.eta, self.p, self.c),
            Family::PolyToExpo => format!("PolyToExpo(p={}, η={}, C={})", self.p, self.eta, self.c),
        }
    }
}

/// Maps accepted spellings to `C`, `p`, `pring`, `eta`, `etaring`, `h`.
pub fn canonical_param(name: &str) -> Option<&'static str> {
    match name.trim() {
        "C" | "c" => Some("C"),
        "p" => Some("p"),
        "pring" | "p_ring" | "p̊" => Some("pring"),
        "eta" | "η" => Some("eta"),
        "etaring" | "eta_ring" | "η̊" => Some("etaring"),
        "h" => Some("h"),
        _ => None,
    }
}

/// Physical time together with the extended coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedState {
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    /// Physical time `𝔮 > 0`.
    pub time: f64,
    /// Conjugate momentum `𝔯` of the time coordinate, tracked only for energy diagnostics.
    pub time_momentum: Option<f64>,
}

impl ExtendedState {
    pub fn new(q: Vec<f64>, r: Vec<f64>, time: f64) -> Self {
        Self {
            q,
            r,
            time,
            time_momentum: None,
        }
    }
}

fn check_time(t: f64) -> Result<f64> {
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(Error::NonPositiveTime(t))
    }
}

/// `(α_t, β_t, γ_t)` of the unrescaled family.
///
/// Poly: `(ln p − ln t, p ln t + ln C, p ln t)`; Expo: `(ln η, ηt + ln C, ηt)`.
/// Cross-family configs use their base dynamics (ExpoToPoly is exponential,
/// PolyToExpo is polynomial).
pub fn parameter_functions(cfg: &BregmanConfig, t: f64) -> Result<(f64, f64, f64)> {
    let t = check_time(t)?;
    Ok(if cfg.family.base_is_poly() {
        let p = cfg.p;
        (p.ln() - t.ln(), p * t.ln() + cfg.c.ln(), p * t.ln())
    } else {
        let eta = cfg.eta;
        (eta.ln(), eta * t + cfg.c.ln(), eta * t)
    })
}

/// Monitor function `g = dt/dτ`.
pub fn monitor(cfg: &BregmanConfig, t: f64) -> Result<f64> {
    let t = check_time(t)?;
    Ok(monitor_unchecked(cfg, t))
}

pub(crate) fn monitor_unchecked(cfg: &BregmanConfig, t: f64) -> f64 {
    match cfg.family {
        Family::Poly => {
            let ratio = cfg.p_ring() / cfg.p;
            if ratio == 1.0 {
                1.0
            } else {
                t.powf(1.0 - ratio) / ratio
            }
        }
        Family::Expo => cfg.eta / cfg.eta_ring(),
        Family::ExpoToPoly => cfg.eta / cfg.p * t,
        Family::PolyToExpo => cfg.p / cfg.eta * (-cfg.eta * t / cfg.p).exp(),
    }
}

/// `dg/dt`.
pub fn monitor_derivative(cfg: &BregmanConfig, t: f64) -> Result<f64> {
    let t = check_time(t)?;
    Ok(match cfg.family {
        Family::Poly => {
            let ratio = cfg.p_ring() / cfg.p;
            (1.0 - ratio) / ratio * t.powf(-ratio)
        }
        Family::Expo => 0.0,
        Family::ExpoToPoly => cfg.eta / cfg.p,
        Family::PolyToExpo => -(-cfg.eta * t / cfg.p).exp(),
    })
}

/// Scalar coefficients of the Poincaré Hamiltonian at physical time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    /// Kinetic coefficient: `H̄ ∋ ½ A ⟨r, r⟩`.
    pub a: f64,
    /// Potential coefficient: `H̄ ∋ B f(q)`.
    pub b: f64,
    /// Monitor function value.
    pub g: f64,
}

/// `A(t)`, `B(t)`, `g(t)` for the configured family.
///
/// For the non-adaptive Poly/Expo families these reduce to
/// `A = p t^{−p−1}, B = C p t^{2p−1}` and `A = η e^{−ηt}, B = C η e^{2ηt}`.
pub fn coefficients(cfg: &BregmanConfig, t: f64) -> Result<Coefficients, StepError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(StepError::TimeOutOfDomain(t));
    }
    let ln_c = cfg.c.ln();
    let (ln_a, ln_b, g) = match cfg.family {
        Family::Poly => {
            let p = cfg.p;
            let ln_t = t.ln();
            if !cfg.is_adaptive() {
                let ln_p = p.ln();
                (ln_p - (p + 1.0) * ln_t, ln_c + ln_p + (2.0 * p - 1.0) * ln_t, 1.0)
            } else {
                let pr = cfg.p_ring();
                let ratio = pr / p;
                let ln_pre = 2.0 * p.ln() - pr.ln();
                (
                    ln_pre - (p + ratio) * ln_t,
                    ln_c + ln_pre + (2.0 * p - ratio) * ln_t,
                    monitor_unchecked(cfg, t),
                )
            }
        }
        Family::Expo => {
            let eta = cfg.eta;
            let er = cfg.eta_ring();
            let ln_pre = if cfg.is_adaptive() {
                2.0 * eta.ln() - er.ln()
            } else {
                eta.ln()
            };
            (ln_pre - eta * t, ln_c + ln_pre + 2.0 * eta * t, eta / er)
        }
        Family::ExpoToPoly => {
            let (eta, p) = (cfg.eta, cfg.p);
            let ln_pre = t.ln() + 2.0 * eta.ln() - p.ln();
            (ln_pre - eta * t, ln_c + ln_pre + 2.0 * eta * t, eta * t / p)
        }
        Family::PolyToExpo => {
            let (eta, p) = (cfg.eta, cfg.p);
            let ln_t = t.ln();
            let ln_pre = -eta * t / p + 2.0 * p.ln() - eta.ln();
            (
                ln_pre - (p + 1.0) * ln_t,
                ln_c + ln_pre + (2.0 * p - 1.0) * ln_t,
                monitor_unchecked(cfg, t),
            )
        }
    };
    Ok(Coefficients {
        a: exp_checked(ln_a)?,
        b: exp_checked(ln_b)?,
        g,
    })
}

/// Exact solution of `𝔮' = g(𝔮)` after fictive time `tau` (which may be negative).
pub fn time_flow(cfg: &BregmanConfig, t: f64, tau: f64) -> Result<f64, StepError> {
    let next = match cfg.family {
        Family::Poly => {
            let ratio = cfg.p_ring() / cfg.p;
            if ratio == 1.0 {
                t + tau
            } else {
                let base = t.powf(ratio) + tau;
                if base <= 0.0 {
                    return Err(StepError::TimeOutOfDomain(base));
                }
                base.powf(1.0 / ratio)
            }
        }
        Family::Expo => t + tau * cfg.eta / cfg.eta_ring(),
        Family::ExpoToPoly => t * exp_checked(cfg.eta * tau / cfg.p)?,
        Family::PolyToExpo => {
            let k = cfg.eta / cfg.p;
            // ln(e^{k t} + τ) computed without forming e^{k t} when it is large.
            let kt = k * t;
            let inner = if kt > 30.0 {
                kt + (tau * (-kt).exp()).ln_1p()
            } else {
                let s = kt.exp() + tau;
                if s <= 0.0 {
                    return Err(StepError::TimeOutOfDomain(s));
                }
                s.ln()
            };
            inner / k
        }
    };
    if next > 0.0 && next.is_finite() {
        Ok(next)
    } else {
        Err(StepError::TimeOutOfDomain(next))
    }
}

/// Unrescaled Hamiltonian `H(q, t, r)` of the base dynamics, given `f(q)`.
///
/// Poly: `p/(2t^{p+1})|r|² + C p t^{2p−1} f`; Expo: `η/(2e^{ηt})|r|² + C η e^{2ηt} f`.
pub fn base_hamiltonian(cfg: &BregmanConfig, t: f64, r: &[f64], f_value: f64) -> Result<f64> {
    let (a, b) = base_coefficients(cfg, check_time(t)?)?;
    Ok(0.5 * a * dot(r, r) + b * f_value)
}

/// `∂H/∂t` of the base dynamics.
pub fn base_hamiltonian_dt(cfg: &BregmanConfig, t: f64, r: &[f64], f_value: f64) -> Result<f64> {
    let t = check_time(t)?;
    let (a, b) = base_coefficients(cfg, t)?;
    let (da, db) = if cfg.family.base_is_poly() {
        let p = cfg.p;
        (-(p + 1.0) / t * a, (2.0 * p - 1.0) / t * b)
    } else {
        let eta = cfg.eta;
        (-eta * a, 2.0 * eta * b)
    };
    Ok(0.5 * da * dot(r, r) + db * f_value)
}

fn base_coefficients(cfg: &BregmanConfig, t: f64) -> Result<(f64, f64)> {
    let ln_c = cfg.c.ln();
    let (ln_a, ln_b) = if cfg.family.base_is_poly() {
        let p = cfg.p;
        (p.ln() - (p + 1.0) * t.ln(), ln_c + p.ln() + (2.0 * p - 1.0) * t.ln())
    } else {
        let eta = cfg.eta;
        (eta.ln() - eta * t, ln_c + eta.ln() + 2.0 * eta * t)
    };
    Ok((exp_checked(ln_a)?, exp_checked(ln_b)?))
}

/// Time-conjugate momentum that zeroes the Poincaré Hamiltonian: `𝔯 = −H(q, 𝔮, r)`.
pub fn initial_time_momentum(cfg: &BregmanConfig, t: f64, r: &[f64], f_value: f64) -> Result<f64> {
    Ok(-base_hamiltonian(cfg, t, r, f_value)?)
}

/// Poincaré Hamiltonian `H̄ = g(𝔮)(H(q, 𝔮, r) + 𝔯)` evaluated through the
/// family's closed form.
pub fn poincare_hamiltonian(cfg: &BregmanConfig, s: &ExtendedState, f_value: f64) -> Result<f64> {
    let time_momentum = s.time_momentum.ok_or(Error::MissingTimeMomentum)?;
    let t = check_time(s.time)?;
    let rr = dot(&s.r, &s.r);
    let c = cfg.c;
    let value = match cfg.family {
        Family::Poly => {
            let (p, pr) = (cfg.p, cfg.p_ring());
            p * p / (2.0 * pr * t.powf(p + pr / p)) * rr
                + c * p * p / pr * t.powf(2.0 * p - pr / p) * f_value
                + p / pr * time_momentum * t.powf(1.0 - pr / p)
        }
        Family::Expo => {
            let (eta, er) = (cfg.eta, cfg.eta_ring());
            eta * eta / (2.0 * er * (eta * t).exp()) * rr
                + c * eta * eta / er * (2.0 * eta * t).exp() * f_value
                + eta / er * time_momentum
        }
        Family::ExpoToPoly => {
            let (eta, p) = (cfg.eta, cfg.p);
            t * eta * eta / (2.0 * p * (eta * t).exp()) * rr
                + c * t * eta * eta / p * (2.0 * eta * t).exp() * f_value
                + eta / p * t * time_momentum
        }
        Family::PolyToExpo => {
            let (p, eta) = (cfg.p, cfg.eta);
            (-eta / p * t).exp()
                * (p * p / (2.0 * eta * t.powf(p + 1.0)) * rr
                    + c * p * p / eta * t.powf(2.0 * p - 1.0) * f_value
                    + p / eta * time_momentum)
        }
    };
    Ok(value)
}

/// Second derivative `q̈` from the Euler–Lagrange equations of the Poly or Expo family.
///
/// Poly: `q̈ = −((p+1)/t) q̇ − C p² t^{p−2} ∇f`; Expo: `q̈ = −η q̇ − C η² e^{ηt} ∇f`.
/// `t` must be positive for Poly; Expo accepts any finite `t`.
pub fn el_acceleration(cfg: &BregmanConfig, t: f64, v: &[f64], grad: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; v.len()];
    el_acceleration_into(cfg, t, v, grad, &mut out)?;
    Ok(out)
}

pub fn el_acceleration_into(
    cfg: &BregmanConfig,
    t: f64,
    v: &[f64],
    grad: &[f64],
    out: &mut [f64],
) -> Result<()> {
    let (damping, force) = match cfg.family {
        Family::Poly => {
            let t = check_time(t)?;
            let p = cfg.p;
            ((p + 1.0) / t, cfg.c * p * p * t.powf(p - 2.0))
        }
        Family::Expo => {
            if !t.is_finite() {
                return Err(Error::NonPositiveTime(t));
            }
            let eta = cfg.eta;
            (eta, cfg.c * eta * eta * (eta * t).exp())
        }
        other => {
            return Err(Error::UnsupportedFamily {
                operation: "Euler–Lagrange acceleration",
                family: other.as_str(),
            })
        }
    };
    for ((o, vi), gi) in out.iter_mut().zip(v).zip(grad) {
        *o = -damping * vi - force * gi;
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
