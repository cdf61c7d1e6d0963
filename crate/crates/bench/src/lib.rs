//! Fixtures shared by the criterion benches in `benches/`.

use bregman_opt::harness::{expo_preset, poly_preset};
use bregman_opt::integrators::Integrator;
use bregman_opt::problems::make_least_squares;
use bregman_opt::{
    BregmanConfig, ExtendedState, IntegratorKind, MomentumInit, ObjectiveProblem, ProblemKind, ProblemSpec,
    Regularization, RunConfig,
};

/// A 400×200 least-squares problem, big enough that the gradient dominates.
pub fn lstsq_problem() -> ObjectiveProblem {
    make_least_squares(400, 200, Regularization::None, 7).expect("valid dimensions")
}

/// Integrator, starting state and gradient for one step on `problem`.
pub fn step_fixture(
    problem: &ObjectiveProblem,
    cfg: BregmanConfig,
    kind: IntegratorKind,
    h: f64,
) -> (Integrator, ExtendedState, Vec<f64>) {
    let it = Integrator::new(cfg, kind, h).expect("valid step size");
    let q0 = vec![0.1; problem.dim()];
    let grad = problem.grad(&q0);
    let state = it.init_state(&q0, &grad, MomentumInit::Rest).expect("dimensions agree");
    (it, state, grad)
}

/// The two recommended presets on one named problem, with gradient restart.
pub fn preset_runs(kind: ProblemKind) -> Vec<(&'static str, RunConfig)> {
    let spec = ProblemSpec::new(kind);
    let problem = spec.build().expect("default problem");
    let q0 = spec.default_start(problem.dim());
    let (poly, hp) = poly_preset();
    let (expo, he) = expo_preset();
    vec![
        ("PolySLC", RunConfig::new(problem.clone(), q0.clone(), poly, IntegratorKind::Slc, hp)),
        ("ExpoSLC", RunConfig::new(problem, q0, expo, IntegratorKind::Slc, he)),
    ]
}
