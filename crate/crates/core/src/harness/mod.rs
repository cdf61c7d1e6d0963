//! Run loop, parameter sweeps, CSV persistence and heatmaps.

mod heatmap;
mod io;
mod sweep;

pub use heatmap::render_heatmap;
pub use io::{read_grid_csv, write_grid_csv, write_trace_csv, CellRecord};
pub use sweep::{best_cell, sweep, sweep_with, Axis, BestCell, Execution, Spacing, SweepGrid};

use std::fmt;
use std::str::FromStr;

use crate::bregman::{BregmanConfig, Family};
use crate::error::{Error, Result};
use crate::integrators::unfused::UnfusedState;
use crate::integrators::{Integrator, IntegratorKind, MomentumInit};
use crate::looping::{instability_detected, reset_time, LoopingStrategy};
use crate::problems::ObjectiveProblem;
use crate::restart::{should_restart, RestartInputs, RestartScheme, Scheme};

/// Default iteration cap for single runs and 2-D sweeps.
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;
/// Iteration cap used for 3-D sweeps.
pub const SWEEP_3D_MAX_ITERS: usize = 10_000;
pub const DEFAULT_DELTA: f64 = 1e-8;

/// Poly preset: `p = 6`, `C = 0.1`, `h = 0.01`.
pub fn poly_preset() -> (BregmanConfig, f64) {
    (BregmanConfig::poly(6.0, 0.1).expect("valid preset"), 0.01)
}

/// Expo preset: `η = 0.01`, `C = 1`, `h = 4`.
pub fn expo_preset() -> (BregmanConfig, f64) {
    (BregmanConfig::expo(0.01, 1.0).expect("valid preset"), 4.0)
}

/// Everything needed for one optimization run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ObjectiveProblem,
    pub q0: Vec<f64>,
    pub cfg: BregmanConfig,
    pub kind: IntegratorKind,
    pub h: f64,
    pub restart: RestartScheme,
    pub looping: LoopingStrategy,
    pub delta: f64,
    pub max_iters: usize,
    pub momentum_init: MomentumInit,
    /// Uses the unfused SLC step and records the Poincaré Hamiltonian.
    pub track_energy: bool,
    pub record_trace: bool,
    /// When false the run continues to `max_iters` after the criterion first holds.
    pub stop_on_convergence: bool,
}

impl RunConfig {
    /// Gradient restart, no looping, `δ = 1e-8`, `10⁶` iterations.
    pub fn new(problem: ObjectiveProblem, q0: Vec<f64>, cfg: BregmanConfig, kind: IntegratorKind, h: f64) -> Self {
        Self {
            problem,
            q0,
            cfg,
            kind,
            h,
            restart: RestartScheme::new(Scheme::Gradient),
            looping: LoopingStrategy::OFF,
            delta: DEFAULT_DELTA,
            max_iters: DEFAULT_MAX_ITERS,
            momentum_init: MomentumInit::Rest,
            track_energy: false,
            record_trace: false,
            stop_on_convergence: true,
        }
    }

    pub fn restart(mut self, restart: impl Into<RestartScheme>) -> Self {
        self.restart = restart.into();
        self
    }

    pub fn looping(mut self, looping: LoopingStrategy) -> Self {
        self.looping = looping;
        self
    }

    pub fn delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn momentum_init(mut self, init: MomentumInit) -> Self {
        self.momentum_init = init;
        self
    }

    pub fn track_energy(mut self, on: bool) -> Self {
        self.track_energy = on;
        self
    }

    pub fn record_trace(mut self, on: bool) -> Self {
        self.record_trace = on;
        self
    }

    pub fn stop_on_convergence(mut self, on: bool) -> Self {
        self.stop_on_convergence = on;
        self
    }

    /// Sets a named parameter: `h` or any name accepted by [`BregmanConfig::with_param`].
    pub fn with_param(mut self, name: &str, value: f64) -> Result<Self> {
        match crate::bregman::canonical_param(name) {
            Some("h") => self.h = value,
            _ => self.cfg = self.cfg.with_param(name, value)?,
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: self.delta,
                reason: "tolerance must be positive",
            });
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if self.q0.len() != self.problem.dim() {
            return Err(Error::InvalidDimension(format!(
                "q0 has {} entries, problem `{}` has dimension {}",
                self.q0.len(),
                self.problem.name(),
                self.problem.dim()
            )));
        }
        Integrator::new(self.cfg, self.kind, self.h)?;
        if self.looping.is_on() && (self.cfg.is_adaptive() || !matches!(self.cfg.family(), Family::Poly | Family::Expo)) {
            return Err(Error::Config(format!(
                "temporal looping needs a non-adaptive Poly or Expo family, got {}",
                self.cfg.label()
            )));
        }
        if self.track_energy {
            if self.kind != IntegratorKind::Slc {
                return Err(Error::Config("energy tracking needs the SLC integrator".into()));
            }
            if self.looping.is_on() {
                return Err(Error::Config("energy tracking cannot be combined with looping".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Converged,
    MaxIters,
    Diverged,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIters => "max_iters",
            Status::Diverged => "diverged",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Status::Converged, Status::MaxIters, Status::Diverged]
            .into_iter()
            .find(|v| v.as_str() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown status `{s}`")))
    }
}

/// One row of a run trace; row 0 is the starting point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub f: f64,
    pub grad_norm: f64,
    /// Physical time after the step.
    pub time: f64,
    /// Poincaré Hamiltonian; NaN unless energy tracking is on.
    pub energy: f64,
    pub restarted: bool,
    pub looped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub status: Status,
    /// Iteration at which the run stopped, or first converged.
    pub iters: usize,
    /// Iterations actually executed.
    pub steps: usize,
    /// First iteration at which the termination criterion held, even if the
    /// run continued or later diverged.
    pub converged_at: Option<usize>,
    /// `|f − f*|` when `f*` is known, otherwise the last `f`.
    pub final_error: f64,
    pub error_is_absolute: bool,
    pub restart_count: usize,
    pub loop_count: usize,
    pub trace: Option<Vec<TraceRow>>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Runs one configuration. Configuration problems are reported as errors
/// before the first iteration; numerical failures end the run as `Diverged`.
pub fn run(config: &RunConfig) -> Result<RunResult> {
    config.validate()?;
    let it = Integrator::new(config.cfg, config.kind, config.h)?;
    let problem = &config.problem;
    let f_star = problem.known_minimum();
    let (f0, mut grad) = problem.eval_grad(&config.q0);
    let mut out = Recorder::new(config, f_star);
    out.row(0, f0, norm(&grad), 1.0, f64::NAN, false, false);
    if !f0.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Ok(out.finish(Status::Diverged, 0, 0, f0));
    }

    if config.track_energy {
        return run_unfused(config, &it, out);
    }

    let mut state = match it.init_state(&config.q0, &grad, config.momentum_init) {
        Ok(s) => s,
        Err(Error::Step(_)) => return Ok(out.finish(Status::Diverged, 0, 0, f0)),
        Err(e) => return Err(e),
    };
    let d = problem.dim();
    let mut delta_q = vec![0.0; d];
    let mut delta_q_prev = vec![0.0; d];
    let mut have_prev = false;
    let mut f_prev = f0;
    let mut since_last = 0usize;
    let mut converged_at = None;

    for k in 1..=config.max_iters {
        since_last += 1;
        let time_k = state.time;
        let mut pending = match it.begin(&mut state, &mut grad, &mut delta_q, problem) {
            Ok(p) => p,
            Err(_) => return Ok(out.finish(Status::Diverged, k, k, f_prev)),
        };
        let f = pending.value;
        let gn = norm(&grad);
        if !f.is_finite() || !gn.is_finite() {
            return Ok(out.finish(Status::Diverged, k, k, f));
        }
        let restart = should_restart(
            &config.restart,
            &RestartInputs {
                f_k: f,
                f_prev,
                grad_k: &grad,
                delta_q: &delta_q,
                delta_q_prev: have_prev.then_some(&delta_q_prev[..]),
                iters_since_last: since_last,
            },
        );
        let mut looped = false;
        if config.looping.is_on() && instability_detected(&config.cfg, time_k, config.h, &grad, &delta_q)? {
            let reset = reset_time(&config.looping, time_k, config.h);
            pending.next_time = match it.advance_time(reset) {
                Ok(t) => t,
                Err(_) => return Ok(out.finish(Status::Diverged, k, k, f)),
            };
            looped = true;
        }
        if it.finish(&mut state, &pending, &grad, &delta_q, restart).is_err()
            || state.r.iter().any(|r| !r.is_finite())
        {
            return Ok(out.finish(Status::Diverged, k, k, f));
        }
        if restart {
            out.restarts += 1;
            since_last = 0;
        }
        if looped {
            out.loops += 1;
        }
        out.row(k, f, gn, state.time, f64::NAN, restart, looped);

        if converged_at.is_none() && (f - f_prev).abs() < config.delta && gn < config.delta {
            converged_at = Some(k);
            out.converged_at = converged_at;
            if config.stop_on_convergence {
                return Ok(out.finish(Status::Converged, k, k, f));
            }
        }
        f_prev = f;
        std::mem::swap(&mut delta_q, &mut delta_q_prev);
        have_prev = true;
    }
    let steps = config.max_iters;
    Ok(match converged_at {
        Some(k) => out.finish(Status::Converged, k, steps, f_prev),
        None => out.finish(Status::MaxIters, steps, steps, f_prev),
    })
}

/// Energy-tracked runs: unfused SLC steps, restart applied after the step.
fn run_unfused(config: &RunConfig, it: &Integrator, mut out: Recorder) -> Result<RunResult> {
    let problem = &config.problem;
    let mut s = UnfusedState::new(it, &config.q0, problem, true)?;
    if let Some(row) = out.trace.as_mut().and_then(|t| t.first_mut()) {
        row.energy = s.energy(&config.cfg).unwrap_or(f64::NAN);
    }
    let mut f_prev = s.value;
    let mut q_prev = config.q0.clone();
    let mut delta_q = vec![0.0; q_prev.len()];
    let mut delta_q_prev: Option<Vec<f64>> = None;
    let mut since_last = 0usize;
    let mut converged_at = None;
    for k in 1..=config.max_iters {
        since_last += 1;
        if s.step(it, config.h, problem).is_err() {
            return Ok(out.finish(Status::Diverged, k, k, f_prev));
        }
        let (f, gn) = (s.value, norm(&s.grad));
        if !f.is_finite() || !gn.is_finite() {
            return Ok(out.finish(Status::Diverged, k, k, f));
        }
        for ((d, q), qp) in delta_q.iter_mut().zip(&s.state.q).zip(&q_prev) {
            *d = q - qp;
        }
        let restart = should_restart(
            &config.restart,
            &RestartInputs {
                f_k: f,
                f_prev,
                grad_k: &s.grad,
                delta_q: &delta_q,
                delta_q_prev: delta_q_prev.as_deref(),
                iters_since_last: since_last,
            },
        );
        if restart {
            s.state.r.fill(0.0);
            out.restarts += 1;
            since_last = 0;
        }
        let energy = s.energy(&config.cfg).unwrap_or(f64::NAN);
        out.row(k, f, gn, s.state.time, energy, restart, false);
        if converged_at.is_none() && (f - f_prev).abs() < config.delta && gn < config.delta {
            converged_at = Some(k);
            out.converged_at = converged_at;
            if config.stop_on_convergence {
                return Ok(out.finish(Status::Converged, k, k, f));
            }
        }
        f_prev = f;
        q_prev.clone_from(&s.state.q);
        delta_q_prev = Some(delta_q.clone());
    }
    let steps = config.max_iters;
    Ok(match converged_at {
        Some(k) => out.finish(Status::Converged, k, steps, f_prev),
        None => out.finish(Status::MaxIters, steps, steps, f_prev),
    })
}

struct Recorder {
    trace: Option<Vec<TraceRow>>,
    f_star: Option<f64>,
    restarts: usize,
    loops: usize,
    converged_at: Option<usize>,
}

impl Recorder {
    fn new(config: &RunConfig, f_star: Option<f64>) -> Self {
        Self {
            trace: config.record_trace.then(Vec::new),
            f_star,
            restarts: 0,
            loops: 0,
            converged_at: None,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn row(&mut self, iter: usize, f: f64, grad_norm: f64, time: f64, energy: f64, restarted: bool, looped: bool) {
        if let Some(t) = self.trace.as_mut() {
            t.push(TraceRow {
                iter,
                f,
                grad_norm,
                time,
                energy,
                restarted,
                looped,
            });
        }
    }

    fn finish(self, status: Status, iters: usize, steps: usize, f_last: f64) -> RunResult {
        let final_error = match self.f_star {
            Some(fs) if f_last.is_finite() => (f_last - fs).abs(),
            Some(_) => f64::INFINITY,
            None => f_last,
        };
        RunResult {
            status,
            iters,
            steps,
            converged_at: self.converged_at,
            final_error,
            error_is_absolute: self.f_star.is_some(),
            restart_count: self.restarts,
            loop_count: self.loops,
            trace: self.trace,
        }
    }
}
