//! Momentum restarting.
//!
//! The tests run right after the position update and the gradient
//! evaluation, on quantities the step has already computed, so enabling a
//! scheme costs no extra gradient evaluations.

use std::fmt;
use std::str::FromStr;

use crate::bregman::{dot, ExtendedState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Scheme {
    None,
    /// Restart when `f(q_k) > f(q_{k−1})`.
    Function,
    /// Restart when `⟨∇f(q_k), Δq_k⟩ > 0`.
    #[default]
    Gradient,
    /// Restart when `‖Δq_k‖ < ‖Δq_{k−1}‖`.
    Velocity,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::None, Scheme::Function, Scheme::Gradient, Scheme::Velocity];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::None => "none",
            Scheme::Function => "function",
            Scheme::Gradient => "gradient",
            Scheme::Velocity => "velocity",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown restart scheme `{s}`")))
    }
}

/// A scheme plus the minimum number of iterations between two restarts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RestartScheme {
    pub scheme: Scheme,
    pub min_gap: usize,
}

impl RestartScheme {
    pub const NONE: RestartScheme = RestartScheme::new(Scheme::None);

    pub const fn new(scheme: Scheme) -> Self {
        Self { scheme, min_gap: 0 }
    }

    pub const fn with_min_gap(mut self, min_gap: usize) -> Self {
        self.min_gap = min_gap;
        self
    }
}

impl From<Scheme> for RestartScheme {
    fn from(scheme: Scheme) -> Self {
        Self::new(scheme)
    }
}

/// Quantities available to the restart test at iteration `k`.
#[derive(Debug, Clone, Copy)]
pub struct RestartInputs<'a> {
    pub f_k: f64,
    pub f_prev: f64,
    pub grad_k: &'a [f64],
    pub delta_q: &'a [f64],
    /// `Δq_{k−1}`; `None` on the first step.
    pub delta_q_prev: Option<&'a [f64]>,
    /// Iterations since the last restart (or since the start of the run).
    pub iters_since_last: usize,
}

pub fn should_restart(scheme: &RestartScheme, inputs: &RestartInputs<'_>) -> bool {
    if inputs.iters_since_last < scheme.min_gap {
        return false;
    }
    match scheme.scheme {
        Scheme::None => false,
        Scheme::Function => inputs.f_k > inputs.f_prev,
        Scheme::Gradient => dot(inputs.grad_k, inputs.delta_q) > 0.0,
        Scheme::Velocity => match inputs.delta_q_prev {
            Some(prev) => dot(inputs.delta_q, inputs.delta_q) < dot(prev, prev),
            None => false,
        },
    }
}

/// Zeroes the momentum; `q` and the time are untouched.
pub fn apply_restart(state: &mut ExtendedState) {
    state.r.fill(0.0);
}
