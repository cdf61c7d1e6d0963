//! Accelerated optimization by symplectic discretization of Bregman dynamics.
//!
//! The crate provides the Poly, Expo and cross-family Bregman Hamiltonians
//! ([`bregman`]), four symplectic integrators over the Poincaré-transformed
//! system ([`integrators`]), momentum restarting ([`restart`]), temporal
//! looping ([`looping`]), baseline optimizers ([`reference_opt`]), an RK4
//! reference for the continuous dynamics ([`oracle`]) and a run/sweep harness
//! ([`harness`]).
//!
//! ```
//! use bregman_opt::{run, BregmanConfig, IntegratorKind, ProblemKind, ProblemSpec, RunConfig, Status};
//!
//! let spec = ProblemSpec::new(ProblemKind::LogBarrier);
//! let problem = spec.build().unwrap();
//! let q0 = spec.default_start(problem.dim());
//! let cfg = BregmanConfig::poly(6.0, 0.1).unwrap();
//! let result = run(&RunConfig::new(problem, q0, cfg, IntegratorKind::Htvi, 0.01)).unwrap();
//! assert_eq!(result.status, Status::Converged);
//! ```

pub mod bregman;
pub mod error;
pub mod harness;
pub mod integrators;
pub mod looping;
pub mod oracle;
pub mod problems;
pub mod reference_opt;
pub mod restart;

pub use bregman::{BregmanConfig, ExtendedState, Family};
pub use error::{Error, Result, StepError};
pub use harness::{
    best_cell, run, sweep, sweep_with, Axis, BestCell, Execution, RunConfig, RunResult, Spacing, Status, SweepGrid,
    TraceRow,
};
pub use integrators::{parse_method, Integrator, IntegratorKind, MomentumInit};
pub use looping::{LoopMode, LoopingStrategy};
pub use problems::{Objective, ObjectiveProblem, ProblemKind, ProblemSpec, Regularization};
pub use restart::{RestartScheme, Scheme};
