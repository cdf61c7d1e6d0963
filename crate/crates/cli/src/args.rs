use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use bregman_opt::harness::{poly_preset, expo_preset};
use bregman_opt::{
    Axis, BregmanConfig, Family, IntegratorKind, LoopingStrategy, ObjectiveProblem, ProblemKind, ProblemSpec,
    Regularization, RunConfig, Scheme,
};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "bravo",
    version,
    about = "Symplectic accelerated optimization with Bregman dynamics",
    after_help = "Exit status: 0 converged or completed, 2 not converged, 3 invalid configuration or I/O failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one optimization and print a summary.
    Solve(SolveArgs),
    /// Grid search over 1 to 3 parameters.
    Sweep(SweepArgs),
    /// Run the Bregman method next to gradient descent, Nesterov and Adam.
    Compare(CompareArgs),
    /// Integrate the continuous dynamics and fit the decay rate of f - f*.
    RateCheck(RateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// quartic, logbarrier, entropy, illcond, lstsq, logistic or fermat-weber.
    #[arg(long, default_value = "logbarrier")]
    pub problem: ProblemKind,
    /// Dimension (feature count for the data-driven problems).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Sample count for the data-driven problems.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// none, l1:LAMBDA or l2:LAMBDA.
    #[arg(long)]
    pub reg: Option<Regularization>,
    /// Starting point as comma-separated values; defaults to a fixed interior point.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub q0: Option<Vec<f64>>,
}

impl ProblemArgs {
    pub fn build(&self) -> Result<(ObjectiveProblem, Vec<f64>)> {
        let mut spec = ProblemSpec::new(self.problem).seed(self.seed);
        if let Some(d) = self.dim {
            spec = spec.dim(d);
        }
        if let Some(m) = self.samples {
            spec = spec.samples(m);
        }
        if let Some(r) = self.reg {
            spec = spec.reg(r);
        }
        let problem = spec.build()?;
        let q0 = match &self.q0 {
            Some(q) => q.clone(),
            None => spec.default_start(problem.dim()),
        };
        Ok((problem, q0))
    }
}

#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    /// poly, expo, expo2poly or poly2expo. Giving --pring or --etaring makes
    /// poly or expo time-adaptive.
    #[arg(long, default_value = "poly")]
    pub family: Family,
    /// htvi, ltvi, slc or sv.
    #[arg(long, default_value = "slc")]
    pub integrator: IntegratorKind,
    /// Polynomial exponent p (poly, expo2poly, poly2expo)
    #[arg(long)]
    pub p: Option<f64>,
    /// Exponent of the polynomial time reparametrization
    #[arg(long)]
    pub pring: Option<f64>,
    /// Exponential rate eta (expo, expo2poly, poly2expo)
    #[arg(long)]
    pub eta: Option<f64>,
    /// Rate of the exponential time reparametrization
    #[arg(long)]
    pub etaring: Option<f64>,
    /// Scale constant C
    #[arg(long = "C")]
    pub c: Option<f64>,
    /// Step size in the fictive time
    #[arg(long)]
    pub h: Option<f64>,
    /// none, function, gradient or velocity.
    #[arg(long, default_value = "gradient")]
    pub restart: Scheme,
    /// off, mult[:BETA] or sub:NU. Defaults to mult:0.8 for poly and expo, off otherwise.
    #[arg(long = "loop")]
    pub looping: Option<LoopingStrategy>,
    /// Lower bound for the time after a loop.
    #[arg(long)]
    pub loop_eps: Option<f64>,
    /// Stop once |f_k - f_(k-1)| < delta and |grad f(q_k)| < delta.
    #[arg(long, default_value_t = 1e-8)]
    pub delta: f64,
    /// Iteration cap
    #[arg(long)]
    pub max_iters: Option<usize>,
}

impl MethodArgs {
    pub fn config(&self) -> Result<BregmanConfig> {
        let (poly, _) = poly_preset();
        let (expo, _) = expo_preset();
        let p = self.p.unwrap_or(poly.p());
        let eta = self.eta.unwrap_or(expo.eta());
        let cfg = match self.family {
            Family::Poly => {
                if self.eta.is_some() || self.etaring.is_some() {
                    bail!("--eta/--etaring do not apply to the poly family");
                }
                let c = self.c.unwrap_or(poly.c());
                match self.pring {
                    Some(pr) => BregmanConfig::poly_adaptive(p, pr, c)?,
                    None => BregmanConfig::poly(p, c)?,
                }
            }
            Family::Expo => {
                if self.p.is_some() || self.pring.is_some() {
                    bail!("--p/--pring do not apply to the expo family");
                }
                let c = self.c.unwrap_or(expo.c());
                match self.etaring {
                    Some(er) => BregmanConfig::expo_adaptive(eta, er, c)?,
                    None => BregmanConfig::expo(eta, c)?,
                }
            }
            Family::ExpoToPoly => BregmanConfig::expo_to_poly(eta, p, self.c.unwrap_or(expo.c()))?,
            Family::PolyToExpo => BregmanConfig::poly_to_expo(p, eta, self.c.unwrap_or(poly.c()))?,
        };
        Ok(cfg)
    }

    /// Step size, defaulting to the preset of the underlying family.
    pub fn h(&self) -> f64 {
        self.h.unwrap_or_else(|| {
            if self.family.base_is_poly() {
                poly_preset().1
            } else {
                expo_preset().1
            }
        })
    }

    pub fn looping(&self, cfg: &BregmanConfig) -> Result<LoopingStrategy> {
        let loopable = matches!(cfg.family(), Family::Poly | Family::Expo) && !cfg.is_adaptive();
        let mut strategy = match self.looping {
            Some(s) => s,
            None if loopable => LoopingStrategy::multiplicative(bregman_opt::looping::DEFAULT_BETA)?,
            None => LoopingStrategy::OFF,
        };
        if let Some(eps) = self.loop_eps {
            strategy = strategy.with_epsilon(eps)?;
        }
        Ok(strategy)
    }

    pub fn run_config(&self, problem: ObjectiveProblem, q0: Vec<f64>, default_max_iters: usize) -> Result<RunConfig> {
        let cfg = self.config()?;
        let looping = self.looping(&cfg)?;
        let rc = RunConfig::new(problem, q0, cfg, self.integrator, self.h())
            .restart(self.restart)
            .looping(looping)
            .delta(self.delta)
            .max_iters(self.max_iters.unwrap_or(default_max_iters));
        rc.validate().context("invalid run configuration")?;
        Ok(rc)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Write the per-iteration trace as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    /// NAME:MIN:MAX:COUNT[:log|lin], repeated once per axis (C, h, p, pring, eta, etaring).
    #[arg(long = "axis", required = true)]
    pub axes: Vec<Axis>,
    /// Grid CSV output.
    #[arg(long)]
    pub out: PathBuf,
    /// Heatmap SVG output (two axes only).
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Gd,
    Nag,
    Adam,
    Bravo,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Methods to run, comma-separated.
    #[arg(long = "method", value_enum, value_delimiter = ',', default_value = "gd,nag,adam,bravo")]
    pub methods: Vec<Method>,
    /// Step size shared by gradient descent, Nesterov and Adam.
    #[arg(long, default_value_t = 1e-3)]
    pub baseline_h: f64,
    /// Directory for one trace CSV per method.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// poly or expo.
    #[arg(long, default_value = "poly")]
    pub family: Family,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long = "C", default_value_t = 1.0)]
    pub c: f64,
    /// End of the time interval (the start is t = 1).
    #[arg(long, default_value_t = 20.0)]
    pub t_end: f64,
    /// RK4 step size.
    #[arg(long, default_value_t = 1e-4)]
    pub h_ode: f64,
    /// Keep every n-th RK4 step.
    #[arg(long, default_value_t = 10)]
    pub stride: usize,
    /// CSV of (t, error); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RateArgs {
    pub fn config(&self) -> Result<BregmanConfig> {
        Ok(match self.family {
            Family::Poly => BregmanConfig::poly(self.p.unwrap_or(poly_preset().0.p()), self.c)?,
            Family::Expo => BregmanConfig::expo(self.eta.unwrap_or(0.5), self.c)?,
            other => bail!("rate-check supports poly and expo, not {other}"),
        })
    }
}
