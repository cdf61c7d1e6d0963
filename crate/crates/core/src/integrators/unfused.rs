//! Unfused SLC and SV steps.
//!
//! These carry the physical momentum `r_k` between steps and perform both
//! half kicks explicitly. They accept negative step sizes (used for the
//! adjoint check) and, for SLC, evolve the time-conjugate momentum `𝔯` with
//! the exact flow of its component vector field so that the Poincaré
//! Hamiltonian can be monitored.

use crate::bregman::{
    base_hamiltonian, base_hamiltonian_dt, coefficients, initial_time_momentum, monitor, monitor_derivative,
    poincare_hamiltonian, time_flow, BregmanConfig, ExtendedState,
};
use crate::error::{Error, Result};
use crate::problems::ObjectiveProblem;

use super::{solve_implicit_time, Integrator, IntegratorKind, INITIAL_TIME};

/// Iterate of an unfused SLC/SV run together with `f` and `∇f` at `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfusedState {
    pub state: ExtendedState,
    pub value: f64,
    pub grad: Vec<f64>,
}

impl UnfusedState {
    /// Starts at rest at `𝔮 = 1`. With `track_energy` the time momentum is set
    /// to `−H(q₀, 1, 0)` so that `H̄ = 0` initially.
    pub fn new(it: &Integrator, q0: &[f64], problem: &ObjectiveProblem, track_energy: bool) -> Result<Self> {
        check_kind(it, track_energy)?;
        let (value, grad) = problem.eval_grad(q0);
        let mut state = ExtendedState::new(q0.to_vec(), vec![0.0; q0.len()], INITIAL_TIME);
        if track_energy {
            state.time_momentum = Some(initial_time_momentum(it.config(), INITIAL_TIME, &state.r, value)?);
        }
        Ok(Self { state, value, grad })
    }

    /// Poincaré Hamiltonian at the current iterate.
    pub fn energy(&self, cfg: &BregmanConfig) -> Result<f64> {
        poincare_hamiltonian(cfg, &self.state, self.value)
    }

    /// One step of size `h` (any sign). Evaluates the gradient once.
    pub fn step(&mut self, it: &Integrator, h: f64, problem: &ObjectiveProblem) -> Result<()> {
        check_kind(it, self.state.time_momentum.is_some())?;
        let cfg = it.config();
        match it.kind() {
            IntegratorKind::Slc => {
                self.time_momentum_flow(cfg, 0.5 * h)?;
                let b = coefficients(cfg, self.state.time)?.b;
                kick(&mut self.state.r, &self.grad, 0.5 * h * b);
                self.state.time = time_flow(cfg, self.state.time, 0.5 * h)?;
                let a = coefficients(cfg, self.state.time)?.a;
                for (q, r) in self.state.q.iter_mut().zip(&self.state.r) {
                    *q += h * a * r;
                }
                self.value = problem.objective().value_and_gradient(&self.state.q, &mut self.grad);
                self.state.time = time_flow(cfg, self.state.time, 0.5 * h)?;
                let b = coefficients(cfg, self.state.time)?.b;
                kick(&mut self.state.r, &self.grad, 0.5 * h * b);
                self.time_momentum_flow(cfg, 0.5 * h)?;
            }
            IntegratorKind::Sv => {
                let co_k = coefficients(cfg, self.state.time)?;
                kick(&mut self.state.r, &self.grad, 0.5 * h * co_k.b);
                let next = solve_implicit_time(cfg, self.state.time, h)?;
                let co_next = coefficients(cfg, next)?;
                let a = 0.5 * h * (co_k.a + co_next.a);
                for (q, r) in self.state.q.iter_mut().zip(&self.state.r) {
                    *q += a * r;
                }
                self.state.time = next;
                self.value = problem.objective().value_and_gradient(&self.state.q, &mut self.grad);
                kick(&mut self.state.r, &self.grad, 0.5 * h * co_next.b);
            }
            IntegratorKind::Htvi | IntegratorKind::Ltvi => unreachable!("rejected by check_kind"),
        }
        Ok(())
    }

    /// Exact flow of `𝔯' = −∂H̄/∂𝔮 = −g'(H + 𝔯) − g ∂H/∂t` with the other
    /// coordinates frozen; linear in `𝔯`.
    fn time_momentum_flow(&mut self, cfg: &BregmanConfig, tau: f64) -> Result<()> {
        let Some(tm) = self.state.time_momentum else {
            return Ok(());
        };
        let t = self.state.time;
        let ham = base_hamiltonian(cfg, t, &self.state.r, self.value)?;
        let ham_dt = base_hamiltonian_dt(cfg, t, &self.state.r, self.value)?;
        let a = monitor_derivative(cfg, t)?;
        let b = a * ham + monitor(cfg, t)? * ham_dt;
        let next = if a == 0.0 {
            tm - b * tau
        } else {
            tm * (-a * tau).exp() + b / a * (-a * tau).exp_m1()
        };
        self.state.time_momentum = Some(next);
        Ok(())
    }
}

fn kick(r: &mut [f64], grad: &[f64], scale: f64) {
    for (ri, gi) in r.iter_mut().zip(grad) {
        *ri -= scale * gi;
    }
}

fn check_kind(it: &Integrator, track_energy: bool) -> Result<()> {
    match it.kind() {
        IntegratorKind::Slc => Ok(()),
        IntegratorKind::Sv if !track_energy => Ok(()),
        IntegratorKind::Sv => Err(Error::Config("energy tracking is implemented for SLC only".into())),
        other => Err(Error::Config(format!("{other} has no unfused form"))),
    }
}
