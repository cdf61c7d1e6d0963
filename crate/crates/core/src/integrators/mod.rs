//! Symplectic integrators for the Bregman Poincaré Hamiltonians.
//!
//! Four discretizations are available for every family:
//!
//! * `HTVI`: Hamiltonian Taylor variational integrator (symplectic Euler in `(q, r)`).
//! * `LTVI`: Lagrangian Taylor variational integrator.
//! * `SLC`: symmetric leapfrog composition of the component flows.
//! * `SV`: Störmer–Verlet.
//!
//! All of them are written in terms of the coefficients `A`, `B`, `g` of
//! [`crate::bregman::coefficients`]. The non-adaptive Poly/Expo rules are the
//! special case `g ≡ 1`.
//!
//! A step is split in two phases so that the run loop can interleave the
//! restart and time-looping decisions exactly where the reference algorithms
//! place them:
//!
//! 1. [`Integrator::begin`] moves `q`, evaluates `f` and `∇f` at the new point
//!    (the only gradient evaluation of the step) and proposes the next time.
//! 2. [`Integrator::finish`] commits the time and updates the momentum,
//!    zeroing it first when a restart was requested.
//!
//! SLC and SV store the momentum *after* the leading half kick, so the
//! trailing half kick of one step and the leading half kick of the next are a
//! single update. [`Integrator::physical_momentum`] recovers the
//! unfused momentum. The unfused forms (with optional tracking of `𝔯`) are in
//! [`unfused`].

use std::fmt;
use std::str::FromStr;

use crate::bregman::{coefficients, time_flow, BregmanConfig, ExtendedState, Family};
use crate::error::{Error, Result, StepError};
use crate::problems::ObjectiveProblem;

pub mod unfused;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntegratorKind {
    Htvi,
    Ltvi,
    Slc,
    Sv,
}

impl IntegratorKind {
    pub const ALL: [IntegratorKind; 4] = [
        IntegratorKind::Htvi,
        IntegratorKind::Ltvi,
        IntegratorKind::Slc,
        IntegratorKind::Sv,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IntegratorKind::Htvi => "htvi",
            IntegratorKind::Ltvi => "ltvi",
            IntegratorKind::Slc => "slc",
            IntegratorKind::Sv => "sv",
        }
    }

    /// SLC and SV carry a pre-kicked momentum.
    pub fn is_fused(self) -> bool {
        matches!(self, IntegratorKind::Slc | IntegratorKind::Sv)
    }
}

impl fmt::Display for IntegratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_str().to_ascii_uppercase())
    }
}

impl FromStr for IntegratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IntegratorKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown integrator `{s}`")))
    }
}

/// Parses `{poly|expo|expo2poly|poly2expo}-{htvi|ltvi|slc|sv}`.
pub fn parse_method(s: &str) -> Result<(Family, IntegratorKind)> {
    let (family, kind) = s
        .trim()
        .rsplit_once('-')
        .ok_or_else(|| Error::Parse(format!("method `{s}`: expected FAMILY-INTEGRATOR")))?;
    Ok((family.parse()?, kind.parse()?))
}

/// Initial momentum for HTVI and LTVI. SLC and SV always start from rest and
/// store the leading half kick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentumInit {
    /// `r₀ = 0`.
    #[default]
    Rest,
    /// `r₀ = −(h/2) B(1) ∇f(q₀)`, the SLC initialization.
    HalfKick,
}

/// Result of one full step, for callers that do not need the two-phase API.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub state: ExtendedState,
    pub delta_q: Vec<f64>,
    pub grad_evals: usize,
    pub f_value: f64,
    pub grad: Vec<f64>,
}

/// State between [`Integrator::begin`] and [`Integrator::finish`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pending {
    /// `f(q_{k+1})`.
    pub value: f64,
    /// Proposed `𝔮_{k+1}`; time looping may overwrite it before `finish`.
    pub next_time: f64,
    a_k: f64,
}

/// A configured integrator: family, discretization and fictive step `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    cfg: BregmanConfig,
    kind: IntegratorKind,
    h: f64,
}

/// Initial physical time of every run.
pub const INITIAL_TIME: f64 = 1.0;

const IMPLICIT_MAX_ITERS: usize = 100;
const IMPLICIT_TOL: f64 = 1e-13;

impl Integrator {
    pub fn new(cfg: BregmanConfig, kind: IntegratorKind, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "h",
                value: h,
                reason: "step size must be positive and finite",
            });
        }
        Ok(Self { cfg, kind, h })
    }

    pub fn config(&self) -> &BregmanConfig {
        &self.cfg
    }

    pub fn kind(&self) -> IntegratorKind {
        self.kind
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Builds the state at `𝔮₀ = 1`.
    pub fn init_state(&self, q0: &[f64], grad0: &[f64], init: MomentumInit) -> Result<ExtendedState> {
        if q0.len() != grad0.len() {
            return Err(Error::InvalidDimension(format!(
                "q0 has {} entries but the gradient has {}",
                q0.len(),
                grad0.len()
            )));
        }
        let kick = self.kind.is_fused() || init == MomentumInit::HalfKick;
        let r = if kick {
            let b = coefficients(&self.cfg, INITIAL_TIME)?.b;
            grad0.iter().map(|g| -0.5 * self.h * b * g).collect()
        } else {
            vec![0.0; q0.len()]
        };
        Ok(ExtendedState::new(q0.to_vec(), r, INITIAL_TIME))
    }

    /// Physical time after one full step from `t`, ignoring restarts.
    pub fn advance_time(&self, t: f64) -> Result<f64, StepError> {
        let h = self.h;
        let next = match self.kind {
            IntegratorKind::Htvi | IntegratorKind::Ltvi => match self.cfg.family() {
                Family::Poly | Family::Expo if !self.cfg.is_adaptive() => t + h,
                Family::ExpoToPoly => (1.0 + self.cfg.eta() * h / self.cfg.p()) * t,
                _ => t + h * coefficients(&self.cfg, t)?.g,
            },
            IntegratorKind::Slc => time_flow(&self.cfg, t, h)?,
            IntegratorKind::Sv => solve_implicit_time(&self.cfg, t, h)?,
        };
        if next > 0.0 && next.is_finite() {
            Ok(next)
        } else {
            Err(StepError::TimeOutOfDomain(next))
        }
    }

    /// Phase one: moves `q` by `Δq`, writes `Δq` into `delta_q` and replaces
    /// `grad` (which must hold `∇f(q_k)`) by `∇f(q_{k+1})`.
    pub fn begin(
        &self,
        state: &mut ExtendedState,
        grad: &mut [f64],
        delta_q: &mut [f64],
        problem: &ObjectiveProblem,
    ) -> Result<Pending, StepError> {
        let h = self.h;
        let t = state.time;
        let mut a_k = f64::NAN;
        match self.kind {
            IntegratorKind::Htvi => {
                let co = coefficients(&self.cfg, t)?;
                for ((r, g), d) in state.r.iter_mut().zip(grad.iter()).zip(delta_q.iter_mut()) {
                    *r -= h * co.b * g;
                    *d = h * co.a * *r;
                }
            }
            IntegratorKind::Ltvi => {
                let co = coefficients(&self.cfg, t)?;
                a_k = co.a;
                let vel = h * co.a * co.g;
                let force = h * h * co.a * co.b;
                for ((r, g), d) in state.r.iter().zip(grad.iter()).zip(delta_q.iter_mut()) {
                    *d = vel * r - force * g;
                }
            }
            IntegratorKind::Slc => {
                let mid = time_flow(&self.cfg, t, 0.5 * h)?;
                let a = coefficients(&self.cfg, mid)?.a;
                for (r, d) in state.r.iter().zip(delta_q.iter_mut()) {
                    *d = h * a * r;
                }
            }
            IntegratorKind::Sv => {
                let next = solve_implicit_time(&self.cfg, t, h)?;
                let a = 0.5 * (coefficients(&self.cfg, t)?.a + coefficients(&self.cfg, next)?.a);
                for (r, d) in state.r.iter().zip(delta_q.iter_mut()) {
                    *d = h * a * r;
                }
            }
        }
        for (q, d) in state.q.iter_mut().zip(delta_q.iter()) {
            *q += d;
        }
        let value = problem.objective().value_and_gradient(&state.q, grad);
        let next_time = self.advance_time(t)?;
        Ok(Pending { value, next_time, a_k })
    }

    /// Phase two: commits `pending.next_time` and updates the momentum from
    /// `grad = ∇f(q_{k+1})`. With `restart` the momentum is zeroed first.
    pub fn finish(
        &self,
        state: &mut ExtendedState,
        pending: &Pending,
        grad: &[f64],
        delta_q: &[f64],
        restart: bool,
    ) -> Result<(), StepError> {
        let h = self.h;
        let t = pending.next_time;
        if !(t > 0.0 && t.is_finite()) {
            return Err(StepError::TimeOutOfDomain(t));
        }
        state.time = t;
        if restart {
            state.r.fill(0.0);
        }
        match self.kind {
            IntegratorKind::Htvi => {}
            IntegratorKind::Ltvi => {
                if !restart {
                    let g_next = coefficients(&self.cfg, t)?.g;
                    let scale = 1.0 / (h * pending.a_k * g_next);
                    for (r, d) in state.r.iter_mut().zip(delta_q) {
                        *r = scale * d;
                    }
                }
            }
            IntegratorKind::Slc | IntegratorKind::Sv => {
                let b = coefficients(&self.cfg, t)?.b;
                for (r, g) in state.r.iter_mut().zip(grad) {
                    *r -= h * b * g;
                }
            }
        }
        Ok(())
    }

    /// One full step without restart or looping.
    pub fn step(&self, state: &ExtendedState, grad: &[f64], problem: &ObjectiveProblem) -> Result<StepRecord, StepError> {
        let mut next = state.clone();
        let mut g = grad.to_vec();
        let mut delta_q = vec![0.0; grad.len()];
        let pending = self.begin(&mut next, &mut g, &mut delta_q, problem)?;
        self.finish(&mut next, &pending, &g, &delta_q, false)?;
        Ok(StepRecord {
            state: next,
            delta_q,
            grad_evals: 1,
            f_value: pending.value,
            grad: g,
        })
    }

    /// Momentum of the unfused scheme at the current iterate.
    ///
    /// For SLC and SV this undoes the stored leading half kick using
    /// `grad = ∇f(q_k)`; for HTVI and LTVI the stored momentum is returned.
    pub fn physical_momentum(&self, state: &ExtendedState, grad: &[f64]) -> Result<Vec<f64>, StepError> {
        if !self.kind.is_fused() {
            return Ok(state.r.clone());
        }
        let b = coefficients(&self.cfg, state.time)?.b;
        Ok(state
            .r
            .iter()
            .zip(grad)
            .map(|(r, g)| r + 0.5 * self.h * b * g)
            .collect())
    }
}

/// Solves the trapezoidal time update `x = 𝔮 + (h/2)(g(𝔮) + g(x))`.
///
/// Closed forms are used where they exist (constant `g`, and the linear `g`
/// of ExpoToPoly); otherwise fixed-point iteration seeded at `𝔮 + h g(𝔮)`,
/// stopping when successive iterates differ by at most `1e-13·max(1, |x|)`.
/// `h` may be negative.
pub fn solve_implicit_time(cfg: &BregmanConfig, t: f64, h: f64) -> Result<f64, StepError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(StepError::TimeOutOfDomain(t));
    }
    let g = |x: f64| crate::bregman::monitor_unchecked(cfg, x);
    match cfg.family() {
        Family::Expo => return Ok(t + h * g(t)),
        Family::Poly if !cfg.is_adaptive() => return Ok(t + h),
        Family::ExpoToPoly => {
            let k = cfg.eta() * h / (2.0 * cfg.p());
            if k >= 1.0 {
                return Err(StepError::TimeOutOfDomain(f64::INFINITY));
            }
            return Ok((1.0 + k) / (1.0 - k) * t);
        }
        Family::Poly | Family::PolyToExpo => {}
    }
    let base = t + 0.5 * h * g(t);
    let mut x = t + h * g(t);
    let mut residual = f64::INFINITY;
    for _ in 0..IMPLICIT_MAX_ITERS {
        if !(x > 0.0 && x.is_finite()) {
            return Err(StepError::TimeOutOfDomain(x));
        }
        let next = base + 0.5 * h * g(x);
        residual = (next - x).abs();
        x = next;
        if residual <= IMPLICIT_TOL * x.abs().max(1.0) {
            return if x > 0.0 { Ok(x) } else { Err(StepError::TimeOutOfDomain(x)) };
        }
    }
    Err(StepError::NoConvergence {
        iterations: IMPLICIT_MAX_ITERS,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_ill_conditioned, make_log_barrier, ObjectiveProblem, Objective};
    use approx::assert_relative_eq;

    #[derive(Debug)]
    struct HalfSquare;

    impl Objective for HalfSquare {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> f64 {
            0.5 * x[0] * x[0]
        }
        fn gradient(&self, x: &[f64], out: &mut [f64]) {
            out[0] = x[0];
        }
    }

    #[derive(Debug)]
    struct Constant(usize);

    impl Objective for Constant {
        fn dim(&self) -> usize {
            self.0
        }
        fn value(&self, _: &[f64]) -> f64 {
            3.0
        }
        fn gradient(&self, _: &[f64], out: &mut [f64]) {
            out.fill(0.0);
        }
    }

    fn configs() -> Vec<BregmanConfig> {
        vec![
            BregmanConfig::poly(3.0, 0.5).unwrap(),
            BregmanConfig::poly_adaptive(6.0, 2.0, 0.5).unwrap(),
            BregmanConfig::expo(1.0, 0.5).unwrap(),
            BregmanConfig::expo_adaptive(1.0, 2.0, 0.5).unwrap(),
            BregmanConfig::expo_to_poly(0.5, 3.0, 0.5).unwrap(),
            BregmanConfig::poly_to_expo(3.0, 0.5, 0.5).unwrap(),
        ]
    }

    #[test]
    fn init_values() {
        let cfg = BregmanConfig::poly(2.0, 1.0).unwrap();
        let slc = Integrator::new(cfg, IntegratorKind::Slc, 0.1).unwrap();
        let s = slc.init_state(&[0.0], &[1.0], MomentumInit::Rest).unwrap();
        assert_relative_eq!(s.r[0], -0.1, max_relative = 1e-15);
        assert_eq!(s.time, 1.0);
        for cfg in configs() {
            for kind in IntegratorKind::ALL {
                let it = Integrator::new(cfg, kind, 0.2).unwrap();
                let s = it.init_state(&[1.0, 2.0], &[0.0, 0.0], MomentumInit::HalfKick).unwrap();
                assert_eq!(s.r, vec![0.0, 0.0]);
                assert_eq!(s.time, 1.0);
            }
        }
        let htvi = Integrator::new(cfg, IntegratorKind::Htvi, 0.1).unwrap();
        assert_eq!(htvi.init_state(&[0.0], &[1.0], MomentumInit::Rest).unwrap().r, vec![0.0]);
        assert!(Integrator::new(cfg, IntegratorKind::Htvi, 0.0).is_err());
    }

    #[test]
    fn expo_htvi_hand_step() {
        let problem = ObjectiveProblem::new("half-square", HalfSquare);
        let cfg = BregmanConfig::expo(1.0, 1.0).unwrap();
        let it = Integrator::new(cfg, IntegratorKind::Htvi, 0.1).unwrap();
        let s = ExtendedState::new(vec![1.0], vec![0.0], 1.0);
        let rec = it.step(&s, &[1.0], &problem).unwrap();
        let e = std::f64::consts::E;
        assert_relative_eq!(rec.state.r[0], -0.1 * e * e, max_relative = 1e-14);
        assert_relative_eq!(rec.state.q[0], 1.0 - 0.01 * e, max_relative = 1e-14);
        assert_relative_eq!(rec.state.time, 1.1, max_relative = 1e-15);
    }

    #[test]
    fn critical_point_is_fixed() {
        let problem = ObjectiveProblem::new("constant", Constant(2));
        for cfg in configs() {
            for kind in IntegratorKind::ALL {
                let it = Integrator::new(cfg, kind, 0.05).unwrap();
                let mut s = it.init_state(&[0.5, -0.5], &[0.0, 0.0], MomentumInit::Rest).unwrap();
                let mut grad = vec![0.0, 0.0];
                let mut t = s.time;
                for _ in 0..5 {
                    let rec = it.step(&s, &grad, &problem).unwrap();
                    assert_eq!(rec.state.q, vec![0.5, -0.5]);
                    assert_eq!(rec.state.r, vec![0.0, 0.0]);
                    assert!(rec.state.time > t);
                    t = rec.state.time;
                    grad = rec.grad;
                    s = rec.state;
                }
            }
        }
    }

    #[test]
    fn htvi_equals_ltvi_without_adaptivity() {
        let problem = make_ill_conditioned();
        let cfg = BregmanConfig::poly(6.0, 0.1).unwrap();
        let h_it = Integrator::new(cfg, IntegratorKind::Htvi, 0.01).unwrap();
        let l_it = Integrator::new(cfg, IntegratorKind::Ltvi, 0.01).unwrap();
        let q0 = [1.0, 1.0, 1.0];
        let g0 = problem.grad(&q0);
        let mut a = h_it.init_state(&q0, &g0, MomentumInit::Rest).unwrap();
        let mut b = l_it.init_state(&q0, &g0, MomentumInit::Rest).unwrap();
        let (mut ga, mut gb) = (g0.clone(), g0);
        for _ in 0..10 {
            let ra = h_it.step(&a, &ga, &problem).unwrap();
            let rb = l_it.step(&b, &gb, &problem).unwrap();
            for (x, y) in ra.state.q.iter().zip(&rb.state.q) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
            }
            (a, ga, b, gb) = (ra.state, ra.grad, rb.state, rb.grad);
        }
    }

    #[test]
    fn implicit_time_solve() {
        let cfg = BregmanConfig::poly(3.0, 1.0).unwrap();
        assert_eq!(solve_implicit_time(&cfg, 2.0, 0.5).unwrap(), 2.5);

        let cfg = BregmanConfig::poly_adaptive(6.0, 2.0, 1.0).unwrap();
        let x = solve_implicit_time(&cfg, 1.0, 0.1).unwrap();
        // Independent bisection on x − 1 − 0.15(1 + x^{2/3}).
        let f = |x: f64| x - 1.0 - 0.15 * (1.0 + x.powf(2.0 / 3.0));
        let (mut lo, mut hi) = (1.0, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert_relative_eq!(x, 0.5 * (lo + hi), max_relative = 1e-13);
        assert!(f(x).abs() <= 1e-12);

        let cfg = BregmanConfig::poly_to_expo(3.0, 0.5, 1.0).unwrap();
        let x = solve_implicit_time(&cfg, 2.0, 0.3).unwrap();
        let g = |t: f64| 6.0 * (-t / 6.0).exp();
        assert!((x - 2.0 - 0.15 * (g(2.0) + g(x))).abs() <= 1e-12);

        let cfg = BregmanConfig::expo_to_poly(1.0, 1.0, 1.0).unwrap();
        assert!(solve_implicit_time(&cfg, 1.0, 2.0).is_err());
    }

    #[test]
    fn fused_and_two_phase_agree() {
        let problem = make_log_barrier();
        for cfg in configs() {
            for kind in IntegratorKind::ALL {
                let it = Integrator::new(cfg, kind, 0.01).unwrap();
                let q0 = [2.0, 2.0];
                let g0 = problem.grad(&q0);
                let s0 = it.init_state(&q0, &g0, MomentumInit::Rest).unwrap();
                let rec = it.step(&s0, &g0, &problem).unwrap();
                let mut s = s0.clone();
                let mut g = g0.clone();
                let mut dq = vec![0.0; 2];
                let pending = it.begin(&mut s, &mut g, &mut dq, &problem).unwrap();
                it.finish(&mut s, &pending, &g, &dq, false).unwrap();
                assert_eq!(s, rec.state);
                assert_eq!(dq, rec.delta_q);
            }
        }
    }

    #[test]
    fn method_names() {
        assert_eq!(parse_method("poly-slc").unwrap(), (Family::Poly, IntegratorKind::Slc));
        assert_eq!(parse_method("expo2poly-ltvi").unwrap(), (Family::ExpoToPoly, IntegratorKind::Ltvi));
        assert!(parse_method("poly").is_err());
        assert!(parse_method("cubic-slc").is_err());
    }
}
