//! Convex test objectives used by the experiments.
//!
//! Every problem is an immutable [`ObjectiveProblem`]: a value/gradient pair
//! plus, where it is known in closed form, the minimizer and minimum value.
//! Objectives defined only on the positive orthant (log barrier, negative
//! entropy) return `+inf` outside their domain instead of failing, so a run
//! that leaves the domain is reported as divergent by the harness.
//!
//! Non-smooth terms (the `l1` penalties and the Fermat–Weber distances) use
//! the zero element of the subdifferential at their kinks.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A differentiable (or subdifferentiable) scalar objective on `R^dim`.
pub trait Objective: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Writes the gradient at `x` into `out` (`out.len() == dim`).
    fn gradient(&self, x: &[f64], out: &mut [f64]);

    fn value_and_gradient(&self, x: &[f64], out: &mut [f64]) -> f64 {
        self.gradient(x, out);
        self.value(x)
    }
}

/// Objective plus metadata used by the harness and the acceptance tests.
#[derive(Clone)]
pub struct ObjectiveProblem {
    name: String,
    objective: Arc<dyn Objective>,
    known_minimizer: Option<Vec<f64>>,
    known_minimum: Option<f64>,
}

impl fmt::Debug for ObjectiveProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveProblem")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("known_minimizer", &self.known_minimizer)
            .field("known_minimum", &self.known_minimum)
            .finish()
    }
}

impl ObjectiveProblem {
    pub fn new(name: impl Into<String>, objective: impl Objective + 'static) -> Self {
        Self::from_arc(name, Arc::new(objective))
    }

    pub fn from_arc(name: impl Into<String>, objective: Arc<dyn Objective>) -> Self {
        Self {
            name: name.into(),
            objective,
            known_minimizer: None,
            known_minimum: None,
        }
    }

    pub fn with_minimizer(mut self, x: Vec<f64>) -> Self {
        debug_assert_eq!(x.len(), self.dim());
        self.known_minimizer = Some(x);
        self
    }

    pub fn with_minimum(mut self, f: f64) -> Self {
        self.known_minimum = Some(f);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn known_minimizer(&self) -> Option<&[f64]> {
        self.known_minimizer.as_deref()
    }

    pub fn known_minimum(&self) -> Option<f64> {
        self.known_minimum
    }

    pub fn objective(&self) -> &Arc<dyn Objective> {
        &self.objective
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.objective.value(x)
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.objective.gradient(x, &mut g);
        g
    }

    pub fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        self.objective.gradient(x, out);
    }

    pub fn eval_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut g = vec![0.0; self.dim()];
        let f = self.objective.value_and_gradient(x, &mut g);
        (f, g)
    }

    /// Same objective under a different name.
    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Penalty added to the regression losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    None,
    L1(f64),
    L2(f64),
}

impl Regularization {
    fn validate(self) -> Result<Self> {
        match self {
            Regularization::L1(l) | Regularization::L2(l) if !(l > 0.0 && l.is_finite()) => {
                Err(Error::InvalidParameter {
                    name: "lambda",
                    value: l,
                    reason: "regularization weight must be positive",
                })
            }
            other => Ok(other),
        }
    }
}

impl FromStr for Regularization {
    type Err = Error;

    /// Accepts `none`, `l1:LAMBDA` and `l2:LAMBDA`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(Regularization::None);
        }
        let (kind, weight) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("regularization `{s}`: expected none|l1:λ|l2:λ")))?;
        let weight: f64 = weight
            .parse()
            .map_err(|_| Error::Parse(format!("regularization weight `{weight}`")))?;
        match kind.to_ascii_lowercase().as_str() {
            "l1" => Regularization::L1(weight).validate(),
            "l2" => Regularization::L2(weight).validate(),
            _ => Err(Error::Parse(format!("unknown regularization `{kind}`"))),
        }
    }
}

fn sign_or_zero(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------------------
// Quartic

#[derive(Debug)]
struct Quartic {
    sigma: DMatrix<f64>,
}

impl Quartic {
    fn shifted(&self, x: &[f64]) -> (DVector<f64>, DVector<f64>, f64) {
        let u = DVector::from_iterator(x.len(), x.iter().map(|v| v - 1.0));
        let su = &self.sigma * &u;
        let s = u.dot(&su);
        (u, su, s)
    }
}

impl Objective for Quartic {
    fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (_, _, s) = self.shifted(x);
        1.0 + s * s
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let (_, su, s) = self.shifted(x);
        for (o, v) in out.iter_mut().zip(su.iter()) {
            *o = 4.0 * s * v;
        }
    }
}

/// `f(x) = 1 + [(x-1)ᵀ Σ (x-1)]²` with `Σ_ij = 0.9^|i-j|`.
pub fn make_quartic(d: usize) -> Result<ObjectiveProblem> {
    if d == 0 {
        return Err(Error::InvalidDimension("quartic requires d >= 1".into()));
    }
    let sigma = DMatrix::from_fn(d, d, |i, j| 0.9f64.powi((i as i32 - j as i32).abs()));
    Ok(ObjectiveProblem::new("quartic", Quartic { sigma })
        .with_minimizer(vec![1.0; d])
        .with_minimum(1.0))
}

// ---------------------------------------------------------------------------
// Log barrier

#[derive(Debug)]
struct LogBarrier;

impl Objective for LogBarrier {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        if !(a > 0.0 && b > 0.0) {
            return f64::INFINITY;
        }
        a + b * b - a.ln() - b.ln()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let (a, b) = (x[0], x[1]);
        if !(a > 0.0 && b > 0.0) {
            out.fill(f64::NAN);
            return;
        }
        out[0] = 1.0 - 1.0 / a;
        out[1] = 2.0 * b - 1.0 / b;
    }
}

/// `f(x₁,x₂) = x₁ + x₂² − ln(x₁x₂)` on the open positive quadrant.
pub fn make_log_barrier() -> ObjectiveProblem {
    let x2 = std::f64::consts::FRAC_1_SQRT_2;
    ObjectiveProblem::new("logbarrier", LogBarrier)
        .with_minimizer(vec![1.0, x2])
        .with_minimum(1.5 + 0.5 * std::f64::consts::LN_2)
}

// ---------------------------------------------------------------------------
// Negative entropy

#[derive(Debug)]
struct NegativeEntropy {
    dim: usize,
}

impl Objective for NegativeEntropy {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for &v in x {
            if !(v > 0.0) {
                return f64::INFINITY;
            }
            total += v * v.ln();
        }
        total
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        if x.iter().any(|v| !(*v > 0.0)) {
            out.fill(f64::NAN);
            return;
        }
        for (o, v) in out.iter_mut().zip(x) {
            *o = v.ln() + 1.0;
        }
    }
}

/// `f(x) = Σ x_k ln x_k` on the open positive orthant.
pub fn make_negative_entropy(d: usize) -> Result<ObjectiveProblem> {
    if d == 0 {
        return Err(Error::InvalidDimension("negative entropy requires d >= 1".into()));
    }
    let inv_e = (-1.0f64).exp();
    Ok(ObjectiveProblem::new("entropy", NegativeEntropy { dim: d })
        .with_minimizer(vec![inv_e; d])
        .with_minimum(-(d as f64) * inv_e))
}

// ---------------------------------------------------------------------------
// Ill-conditioned quadratic

#[derive(Debug)]
struct IllConditioned;

const ILL_WEIGHTS: [f64; 3] = [0.01, 1.0, 100.0];

impl Objective for IllConditioned {
    fn dim(&self) -> usize {
        3
    }

    fn value(&self, x: &[f64]) -> f64 {
        1.0 + ILL_WEIGHTS.iter().zip(x).map(|(w, v)| w * v * v).sum::<f64>()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for ((o, w), v) in out.iter_mut().zip(ILL_WEIGHTS).zip(x) {
            *o = 2.0 * w * v;
        }
    }
}

/// `f = 1 + 0.01x₁² + x₂² + 100x₃²`.
pub fn make_ill_conditioned() -> ObjectiveProblem {
    ObjectiveProblem::new("illcond", IllConditioned)
        .with_minimizer(vec![0.0; 3])
        .with_minimum(1.0)
}

// ---------------------------------------------------------------------------
// Least squares

#[derive(Debug)]
struct LeastSquares {
    a: DMatrix<f64>,
    b: DVector<f64>,
    ata: DMatrix<f64>,
    atb: DVector<f64>,
    reg: Regularization,
}

impl Objective for LeastSquares {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        match self.reg {
            Regularization::None => 0.5 * x.dot(&(&self.ata * &x)) - self.atb.dot(&x),
            Regularization::L2(l) => (&self.a * &x - &self.b).norm_squared() + l * x.norm_squared(),
            Regularization::L1(l) => {
                0.5 * (&self.a * &x - &self.b).norm_squared() + l * x.iter().map(|v| v.abs()).sum::<f64>()
            }
        }
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let xv = DVector::from_column_slice(x);
        let base = &self.ata * &xv - &self.atb;
        match self.reg {
            Regularization::None => out.copy_from_slice(base.as_slice()),
            Regularization::L2(l) => {
                for ((o, g), v) in out.iter_mut().zip(base.iter()).zip(x) {
                    *o = 2.0 * g + 2.0 * l * v;
                }
            }
            Regularization::L1(l) => {
                for ((o, g), v) in out.iter_mut().zip(base.iter()).zip(x) {
                    *o = g + l * sign_or_zero(*v);
                }
            }
        }
    }
}

/// Least squares from an explicit design matrix (row-major `m × n`) and target.
///
/// * `None`: `½xᵀAᵀAx − bᵀAx`
/// * `L2(λ)`: `‖Ax − b‖² + λ‖x‖²`, minimizer `(AᵀA + λI)⁻¹Aᵀb`
/// * `L1(λ)`: `½‖Ax − b‖² + λ‖x‖₁` (no closed-form minimizer)
///
/// When `AᵀA` is numerically singular the unregularized minimizer is omitted.
pub fn least_squares_from(
    m: usize,
    n: usize,
    a_row_major: &[f64],
    b: &[f64],
    reg: Regularization,
) -> Result<ObjectiveProblem> {
    if n == 0 || m < n {
        return Err(Error::InvalidDimension(format!(
            "least squares requires m >= n >= 1, got m={m}, n={n}"
        )));
    }
    if a_row_major.len() != m * n || b.len() != m {
        return Err(Error::InvalidInput(format!(
            "least squares expects A of length {} and b of length {m}",
            m * n
        )));
    }
    let reg = reg.validate()?;
    let a = DMatrix::from_row_slice(m, n, a_row_major);
    let b = DVector::from_column_slice(b);
    let ata = a.transpose() * &a;
    let atb = a.transpose() * &b;

    let minimizer = match reg {
        Regularization::None => {
            let sv = a.clone().svd(false, false).singular_values;
            let max = sv.max();
            let min = sv.min();
            let tol = max * (m.max(n) as f64) * f64::EPSILON;
            if min > tol {
                ata.clone().cholesky().map(|c| c.solve(&atb))
            } else {
                None
            }
        }
        Regularization::L2(l) => {
            let shifted = &ata + DMatrix::identity(n, n) * l;
            shifted.cholesky().map(|c| c.solve(&atb))
        }
        Regularization::L1(_) => None,
    };

    let name = match reg {
        Regularization::None => "lstsq",
        Regularization::L1(_) => "lstsq-l1",
        Regularization::L2(_) => "lstsq-l2",
    };
    let objective = LeastSquares { a, b, ata, atb, reg };
    let minimum = minimizer.as_ref().map(|x| objective.value(x.as_slice()));
    let mut problem = ObjectiveProblem::new(name, objective);
    if let (Some(x), Some(f)) = (minimizer, minimum) {
        problem = problem.with_minimizer(x.as_slice().to_vec()).with_minimum(f);
    }
    Ok(problem)
}

/// Seeded random least-squares instance with standard-normal `A` (`m × n`) and `b`.
pub fn make_least_squares(m: usize, n: usize, reg: Regularization, seed: u64) -> Result<ObjectiveProblem> {
    if n == 0 || m < n {
        return Err(Error::InvalidDimension(format!(
            "least squares requires m >= n >= 1, got m={m}, n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    let b: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    least_squares_from(m, n, &a, &b, reg)
}

// ---------------------------------------------------------------------------
// Logistic regression

#[derive(Debug)]
struct Logistic {
    features: DMatrix<f64>,
    labels: Vec<f64>,
    reg: Regularization,
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// `1 / (1 + e^{-z})` without overflow.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Logistic {
    fn margins(&self, w: &[f64]) -> DVector<f64> {
        &self.features * DVector::from_column_slice(w)
    }
}

impl Objective for Logistic {
    fn dim(&self) -> usize {
        self.features.ncols()
    }

    fn value(&self, w: &[f64]) -> f64 {
        let loss: f64 = self
            .margins(w)
            .iter()
            .zip(&self.labels)
            .map(|(m, y)| softplus(-y * m))
            .sum();
        loss + match self.reg {
            Regularization::None => 0.0,
            Regularization::L1(l) => l * w.iter().map(|v| v.abs()).sum::<f64>(),
            Regularization::L2(l) => l * dot(w, w),
        }
    }

    fn gradient(&self, w: &[f64], out: &mut [f64]) {
        let weights: DVector<f64> = DVector::from_iterator(
            self.labels.len(),
            self.margins(w)
                .iter()
                .zip(&self.labels)
                .map(|(m, y)| -y * sigmoid(-y * m)),
        );
        let g = self.features.transpose() * weights;
        out.copy_from_slice(g.as_slice());
        match self.reg {
            Regularization::None => {}
            Regularization::L1(l) => out.iter_mut().zip(w).for_each(|(o, v)| *o += l * sign_or_zero(*v)),
            Regularization::L2(l) => out.iter_mut().zip(w).for_each(|(o, v)| *o += 2.0 * l * v),
        }
    }
}

/// Logistic loss `Σ ln(1 + exp(−yᵢ wᵀxᵢ))` plus an optional penalty.
///
/// `features` is row-major `m × n`; labels must be `±1`.
pub fn make_logistic(
    m: usize,
    n: usize,
    features: &[f64],
    labels: &[f64],
    reg: Regularization,
) -> Result<ObjectiveProblem> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidDimension("logistic regression needs m, n >= 1".into()));
    }
    if features.len() != m * n || labels.len() != m {
        return Err(Error::InvalidInput(format!(
            "logistic expects {m}x{n} features and {m} labels"
        )));
    }
    if let Some(bad) = labels.iter().find(|y| **y != 1.0 && **y != -1.0) {
        return Err(Error::InvalidInput(format!("label {bad} is not ±1")));
    }
    let reg = reg.validate()?;
    Ok(ObjectiveProblem::new(
        "logistic",
        Logistic {
            features: DMatrix::from_row_slice(m, n, features),
            labels: labels.to_vec(),
            reg,
        },
    ))
}

/// Seeded separable-with-noise binary classification data.
pub fn make_random_logistic(m: usize, n: usize, reg: Regularization, seed: u64) -> Result<ObjectiveProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let features: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    let labels: Vec<f64> = features
        .chunks(n)
        .map(|row| {
            let noise: f64 = rng.sample(StandardNormal);
            if dot(row, &truth) + 0.5 * noise >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    make_logistic(m, n, &features, &labels, reg)
}

// ---------------------------------------------------------------------------
// Fermat–Weber

#[derive(Debug)]
struct FermatWeber {
    anchors: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl Objective for FermatWeber {
    fn dim(&self) -> usize {
        self.anchors[0].len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.anchors
            .iter()
            .zip(&self.weights)
            .map(|(y, w)| w * distance(x, y))
            .sum()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (y, w) in self.anchors.iter().zip(&self.weights) {
            let d = distance(x, y);
            if d == 0.0 {
                continue;
            }
            for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
                *o += w * (xi - yi) / d;
            }
        }
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `f(x) = Σ w_j ‖x − y_j‖`.
pub fn make_fermat_weber(anchors: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<ObjectiveProblem> {
    if anchors.is_empty() || anchors.len() != weights.len() {
        return Err(Error::InvalidInput(
            "Fermat–Weber needs equally many anchors and weights (at least one)".into(),
        ));
    }
    let n = anchors[0].len();
    if n == 0 || anchors.iter().any(|a| a.len() != n) {
        return Err(Error::InvalidDimension("anchors must share a positive dimension".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidParameter {
            name: "weight",
            value: *w,
            reason: "weights must be positive",
        });
    }
    Ok(ObjectiveProblem::new("fermat-weber", FermatWeber { anchors, weights }))
}

/// Seeded random Fermat–Weber instance: standard-normal anchors, weights in `[0.5, 1.5)`.
pub fn make_random_fermat_weber(m: usize, n: usize, seed: u64) -> Result<ObjectiveProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchors = (0..m)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let weights = (0..m).map(|_| rng.random_range(0.5..1.5)).collect();
    make_fermat_weber(anchors, weights)
}

// ---------------------------------------------------------------------------
// Selection by name

/// Problem names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Quartic,
    LogBarrier,
    Entropy,
    IllConditioned,
    LeastSquares,
    Logistic,
    FermatWeber,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 7] = [
        ProblemKind::Quartic,
        ProblemKind::LogBarrier,
        ProblemKind::Entropy,
        ProblemKind::IllConditioned,
        ProblemKind::LeastSquares,
        ProblemKind::Logistic,
        ProblemKind::FermatWeber,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Quartic => "quartic",
            ProblemKind::LogBarrier => "logbarrier",
            ProblemKind::Entropy => "entropy",
            ProblemKind::IllConditioned => "illcond",
            ProblemKind::LeastSquares => "lstsq",
            ProblemKind::Logistic => "logistic",
            ProblemKind::FermatWeber => "fermat-weber",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown problem `{s}`")))
    }
}

/// Named problem plus the options needed to instantiate it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    /// Dimension for `quartic`/`entropy`; feature count `n` for the regressions
    /// and location problems. Ignored by the fixed-size problems.
    pub dim: Option<usize>,
    /// Sample count `m` for the regressions and location problems.
    pub samples: Option<usize>,
    pub seed: u64,
    pub reg: Regularization,
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind) -> Self {
        Self {
            kind,
            dim: None,
            samples: None,
            seed: 0,
            reg: Regularization::None,
        }
    }

    pub fn dim(mut self, d: usize) -> Self {
        self.dim = Some(d);
        self
    }

    pub fn samples(mut self, m: usize) -> Self {
        self.samples = Some(m);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn reg(mut self, reg: Regularization) -> Self {
        self.reg = reg;
        self
    }

    pub fn build(&self) -> Result<ObjectiveProblem> {
        match self.kind {
            ProblemKind::Quartic => make_quartic(self.dim.unwrap_or(DEFAULT_QUARTIC_DIM)),
            ProblemKind::LogBarrier => Ok(make_log_barrier()),
            ProblemKind::Entropy => make_negative_entropy(self.dim.unwrap_or(DEFAULT_ENTROPY_DIM)),
            ProblemKind::IllConditioned => Ok(make_ill_conditioned()),
            ProblemKind::LeastSquares => {
                let n = self.dim.unwrap_or(DEFAULT_REGRESSION_DIM);
                let m = self.samples.unwrap_or(2 * n);
                make_least_squares(m, n, self.reg, self.seed)
            }
            ProblemKind::Logistic => {
                let n = self.dim.unwrap_or(DEFAULT_REGRESSION_DIM);
                let m = self.samples.unwrap_or(10 * n);
                make_random_logistic(m, n, self.reg, self.seed)
            }
            ProblemKind::FermatWeber => {
                let n = self.dim.unwrap_or(2);
                let m = self.samples.unwrap_or(10);
                make_random_fermat_weber(m, n, self.seed)
            }
        }
    }

    /// Interior starting point used when none is supplied.
    ///
    /// The reference experiments do not publish their starting points; these
    /// are fixed choices away from each minimizer and inside each domain.
    pub fn default_start(&self, dim: usize) -> Vec<f64> {
        default_start(self.kind, dim)
    }
}

pub const DEFAULT_QUARTIC_DIM: usize = 5;
pub const DEFAULT_ENTROPY_DIM: usize = 5;
pub const DEFAULT_REGRESSION_DIM: usize = 10;

/// Fixed starting points: zeros for the quartic and the regressions, `(2, 2)`
/// for the log barrier, ones for the entropy and the ill-conditioned quadratic,
/// and `(3, …, 3)` for Fermat–Weber.
pub fn default_start(kind: ProblemKind, dim: usize) -> Vec<f64> {
    match kind {
        ProblemKind::Quartic | ProblemKind::LeastSquares | ProblemKind::Logistic => vec![0.0; dim],
        ProblemKind::LogBarrier => vec![2.0, 2.0],
        ProblemKind::Entropy | ProblemKind::IllConditioned => vec![1.0; dim],
        ProblemKind::FermatWeber => vec![3.0; dim],
    }
}
