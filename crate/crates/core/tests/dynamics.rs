use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use approx::assert_relative_eq;
use bregman_opt::integrators::unfused::UnfusedState;
use bregman_opt::integrators::Integrator;
use bregman_opt::oracle::{dilation_residual, integrate_el, oscillation_count, DilationOptions};
use bregman_opt::problems::{make_ill_conditioned, make_log_barrier, make_quartic, DEFAULT_QUARTIC_DIM};
use bregman_opt::reference_opt::{adam_step, run_baseline, AdamParams, Baseline};
use bregman_opt::{
    run, BregmanConfig, IntegratorKind, LoopingStrategy, MomentumInit, Objective, ObjectiveProblem, RunConfig,
    Scheme, Status,
};
use proptest::prelude::*;

#[derive(Debug)]
struct Counted {
    inner: ObjectiveProblem,
    grads: Arc<AtomicUsize>,
}

impl Objective for Counted {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.eval(x)
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.grads.fetch_add(1, Ordering::Relaxed);
        self.inner.grad_into(x, out);
    }
    fn value_and_gradient(&self, x: &[f64], out: &mut [f64]) -> f64 {
        self.grads.fetch_add(1, Ordering::Relaxed);
        self.inner.objective().value_and_gradient(x, out)
    }
}

fn counted(inner: ObjectiveProblem) -> (ObjectiveProblem, Arc<AtomicUsize>) {
    let grads = Arc::new(AtomicUsize::new(0));
    let p = ObjectiveProblem::new("counted", Counted {
        inner,
        grads: grads.clone(),
    });
    (p, grads)
}

#[test]
fn one_gradient_per_iteration() {
    for kind in IntegratorKind::ALL {
        for cfg in [BregmanConfig::poly(4.0, 0.1).unwrap(), BregmanConfig::expo(1.0, 0.1).unwrap()] {
            let (p, grads) = counted(make_ill_conditioned());
            let r = run(
                &RunConfig::new(p, vec![1.0; 3], cfg, kind, 1e-3)
                    .max_iters(300)
                    .stop_on_convergence(false),
            )
            .unwrap();
            assert_eq!(r.steps, 300);
            assert_eq!(grads.load(Ordering::Relaxed), 301, "{kind} {}", cfg.label());
        }
    }
}

fn unfused_round_trip(cfg: BregmanConfig, kind: IntegratorKind) {
    let f = make_ill_conditioned();
    let h = 1e-3;
    let it = Integrator::new(cfg, kind, h).unwrap();
    let mut s = UnfusedState::new(&it, &[1.0, -0.5, 0.25], &f, false).unwrap();
    for _ in 0..5 {
        s.step(&it, h, &f).unwrap();
    }
    let start = s.clone();
    for _ in 0..20 {
        s.step(&it, h, &f).unwrap();
    }
    for _ in 0..20 {
        s.step(&it, -h, &f).unwrap();
    }
    for (a, b) in s.state.q.iter().zip(&start.state.q).chain(s.state.r.iter().zip(&start.state.r)) {
        assert_relative_eq!(a, b, max_relative = 1e-9, epsilon = 1e-12);
    }
    assert_relative_eq!(s.state.time, start.state.time, max_relative = 1e-12);
}

#[test]
fn symmetric_methods_are_self_adjoint() {
    let configs = [
        BregmanConfig::poly(4.0, 0.1).unwrap(),
        BregmanConfig::expo(1.0, 0.1).unwrap(),
        BregmanConfig::poly_adaptive(4.0, 3.0, 0.1).unwrap(),
        BregmanConfig::expo_adaptive(0.5, 0.8, 0.1).unwrap(),
        BregmanConfig::expo_to_poly(0.5, 4.0, 0.1).unwrap(),
        BregmanConfig::poly_to_expo(4.0, 0.5, 0.1).unwrap(),
    ];
    for cfg in configs {
        for kind in [IntegratorKind::Slc, IntegratorKind::Sv] {
            unfused_round_trip(cfg, kind);
        }
    }
}

/// Largest `|H̄|` over physical time `[1, 1.5]` for an energy-tracked ExpoSLC
/// run, relative to the initial time momentum.
fn energy_drift(h: f64) -> f64 {
    let cfg = BregmanConfig::expo(1.0, 0.1).unwrap();
    let f = make_ill_conditioned();
    let it = Integrator::new(cfg, IntegratorKind::Slc, h).unwrap();
    let mut s = UnfusedState::new(&it, &[1.0, 1.0, 1.0], &f, true).unwrap();
    let scale = s.state.time_momentum.unwrap().abs();
    let mut worst: f64 = s.energy(&cfg).unwrap().abs();
    while s.state.time < 1.5 - 1e-9 {
        s.step(&it, h, &f).unwrap();
        worst = worst.max(s.energy(&cfg).unwrap().abs());
    }
    worst / scale
}

#[test]
fn slc_energy_error_is_second_order() {
    let (coarse, fine) = (energy_drift(2e-3), energy_drift(1e-3));
    let ratio = coarse / fine;
    assert!(coarse < 1e-4, "coarse drift {coarse:e}");
    assert!((3.0..5.0).contains(&ratio), "ratio {ratio}, drift {coarse:e} -> {fine:e}");
}

#[test]
fn energy_tracking_run_records_energy() {
    let cfg = BregmanConfig::expo(1.0, 0.1).unwrap();
    let r = run(
        &RunConfig::new(make_ill_conditioned(), vec![1.0; 3], cfg, IntegratorKind::Slc, 1e-3)
            .restart(Scheme::None)
            .track_energy(true)
            .record_trace(true)
            .max_iters(200)
            .stop_on_convergence(false),
    )
    .unwrap();
    let trace = r.trace.unwrap();
    assert_eq!(trace.len(), 201);
    assert!(trace[0].energy.abs() < 1e-12);
    // |𝔯₀| is about 75 here.
    assert!(trace.iter().all(|row| row.energy.abs() < 1e-2), "energy left the band");
}

fn max_time(looping: LoopingStrategy, cfg: BregmanConfig, h: f64, iters: usize) -> (f64, f64, f64) {
    let r = run(
        &RunConfig::new(make_log_barrier(), vec![2.0, 2.0], cfg, IntegratorKind::Slc, h)
            .looping(looping)
            .max_iters(iters)
            .record_trace(true)
            .stop_on_convergence(false),
    )
    .unwrap();
    assert_ne!(r.status, Status::Diverged);
    let t = r.trace.unwrap();
    let half = t.len() / 2;
    let m = |rows: &[bregman_opt::TraceRow]| rows.iter().map(|r| r.time).fold(0.0, f64::max);
    (m(&t), m(&t[..half]), m(&t[half..]))
}

#[test]
fn looping_keeps_time_bounded() {
    let iters = 100_000;
    let cases = [
        (BregmanConfig::expo(1.0, 57.9).unwrap(), 0.0276),
        (BregmanConfig::poly(6.0, 0.1).unwrap(), 0.01),
    ];
    for (cfg, h) in cases {
        for looping in [LoopingStrategy::multiplicative(0.8).unwrap(), LoopingStrategy::subtractive(2.0).unwrap()] {
            let (all, first, second) = max_time(looping, cfg, h, iters);
            assert!(all < 1e6 * h, "{}: {all}", cfg.label());
            // Linear growth would reach 1 + iters·h; a bounded run does not keep climbing.
            assert!(all < 0.01 * (1.0 + iters as f64 * h), "{} {looping}: max time {all}", cfg.label());
            assert!(second <= 2.0 * first, "{} {looping}: {first} then {second}", cfg.label());
        }
    }
}

#[test]
fn smaller_c_oscillates_less() {
    let d = DEFAULT_QUARTIC_DIM;
    let f = make_quartic(d).unwrap();
    let counts: Vec<usize> = [1e-1, 1e-3, 1e-5]
        .iter()
        .map(|&c| {
            let cfg = BregmanConfig::poly(6.0, c).unwrap();
            let tr = integrate_el(&cfg, &f, &vec![0.0; d], 1.0, 50.0, 1e-3).unwrap();
            assert!(!tr.diverged);
            oscillation_count(&tr, 1.0, 50.0)
        })
        .collect();
    eprintln!("oscillation counts {counts:?}");
    assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
    assert!(counts[0] > counts[2], "{counts:?}");
}

#[test]
fn dilation_residual_detects_wrong_exponent() {
    let c = 0.1;
    let f = make_ill_conditioned();
    let base = BregmanConfig::poly(4.0, c).unwrap();
    let ring = BregmanConfig::poly(2.0, c).unwrap();
    let horizon: f64 = 4.0;
    let traj = integrate_el(&base, &f, &[1.0; 3], 1.0, horizon.powf(0.6), 1e-4).unwrap();
    let opts = DilationOptions::default();
    let right = dilation_residual(&traj, &ring, horizon, 0.5, opts).unwrap();
    let wrong = dilation_residual(&traj, &ring, horizon, 0.6, opts).unwrap();
    eprintln!("dilation residuals {right:e} vs {wrong:e}");
    assert!(right < 1e-4, "{right:e}");
    assert!(wrong > 1e3 * right, "{wrong:e}");
}

proptest! {
    #[test]
    fn adam_first_step_is_at_most_h(g in proptest::collection::vec(-1e3f64..1e3, 1..6), h in 1e-4f64..1.0) {
        let n = g.len();
        let mut x = vec![0.0; n];
        let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
        let p = AdamParams { h, ..AdamParams::default() };
        adam_step(&mut x, &mut m, &mut v, 0, &p, &g);
        for (xi, gi) in x.iter().zip(&g) {
            prop_assert!(xi.abs() <= h * (1.0 + 1e-12));
            prop_assert!(xi * gi <= 0.0);
        }
    }
}

#[test]
fn baselines_converge_on_ill_conditioned() {
    let f = make_ill_conditioned();
    let q0 = [1.0; 3];
    let gd = run_baseline(Baseline::Gd { h: 0.009 }, &f, &q0, 1e-8, 1_000_000);
    let nag = run_baseline(Baseline::Nag { h: 0.005 }, &f, &q0, 1e-8, 1_000_000);
    assert!(gd.converged && nag.converged);
    assert!(nag.iters < gd.iters, "nag {} gd {}", nag.iters, gd.iters);
    assert!(f.eval(&nag.x) - 1.0 < 1e-8);
    // Regression baseline for this start and step size.
    assert_eq!(nag.iters, 12_958);
    let adam = run_baseline(Baseline::Adam(AdamParams { h: 0.01, ..AdamParams::default() }), &f, &q0, 1e-8, 100_000);
    assert!(adam.trace.last().unwrap().0 < adam.trace[0].0);
}

#[test]
fn half_kick_start_matches_rest_for_fused_methods() {
    let f = make_ill_conditioned();
    let q0 = [1.0; 3];
    let g = f.grad(&q0);
    let cfg = BregmanConfig::poly(4.0, 0.1).unwrap();
    let it = Integrator::new(cfg, IntegratorKind::Slc, 0.01).unwrap();
    assert_eq!(
        it.init_state(&q0, &g, MomentumInit::Rest).unwrap(),
        it.init_state(&q0, &g, MomentumInit::HalfKick).unwrap()
    );
    let htvi = Integrator::new(cfg, IntegratorKind::Htvi, 0.01).unwrap();
    assert!(htvi.init_state(&q0, &g, MomentumInit::Rest).unwrap().r.iter().all(|&r| r == 0.0));
}
