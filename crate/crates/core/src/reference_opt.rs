//! Baseline first-order methods: gradient descent, Nesterov's accelerated
//! gradient and Adam.

use crate::problems::ObjectiveProblem;

pub fn gd_step(x: &[f64], grad: &[f64], h: f64) -> Vec<f64> {
    x.iter().zip(grad).map(|(xi, gi)| xi - h * gi).collect()
}

/// Nesterov iteration state: `x_k`, `y_k` and the counter `k`.
///
/// One step computes
/// `x_k = y_{k−1} − h∇f(y_{k−1})`, `y_k = x_k + ((k−1)/(k+2))(x_k − x_{k−1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Nesterov {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub k: usize,
    pub h: f64,
}

impl Nesterov {
    /// `x₀ = y₀`, `k = 0`.
    pub fn new(x0: &[f64], h: f64) -> Self {
        Self {
            x: x0.to_vec(),
            y: x0.to_vec(),
            k: 0,
            h,
        }
    }

    /// Momentum coefficient `(k−1)/(k+2)` used at step `k ≥ 1`.
    pub fn momentum(k: usize) -> f64 {
        (k as f64 - 1.0) / (k as f64 + 2.0)
    }

    /// Advances one step given `∇f(y_{k−1})`.
    pub fn step_with(&mut self, grad_y: &[f64]) {
        self.k += 1;
        let beta = Self::momentum(self.k);
        let x_next = gd_step(&self.y, grad_y, self.h);
        for ((y, xn), xp) in self.y.iter_mut().zip(&x_next).zip(&self.x) {
            *y = xn + beta * (xn - xp);
        }
        self.x = x_next;
    }
}

/// One Nesterov step from `(x_{k−1}, y_{k−1})` at counter `k ≥ 1`; returns `(x_k, y_k)`.
pub fn nag_step(
    x_prev: &[f64],
    y_prev: &[f64],
    k: usize,
    h: f64,
    grad_at: impl Fn(&[f64]) -> Vec<f64>,
) -> (Vec<f64>, Vec<f64>) {
    let mut state = Nesterov {
        x: x_prev.to_vec(),
        y: y_prev.to_vec(),
        k: k - 1,
        h,
    };
    state.step_with(&grad_at(y_prev));
    (state.x, state.y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub h: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            h: 0.001,
            eps: 1e-8,
        }
    }
}

/// One Adam step at index `k ≥ 0`, updating `x`, `m` and `v` in place.
///
/// `x ← x − h m̂ / (√v̂ + ε)` with `m̂ = m/(1−β₁^{k+1})`, `v̂ = v/(1−β₂^{k+1})`.
pub fn adam_step(x: &mut [f64], m: &mut [f64], v: &mut [f64], k: usize, p: &AdamParams, grad: &[f64]) {
    let c1 = 1.0 - p.beta1.powi(k as i32 + 1);
    let c2 = 1.0 - p.beta2.powi(k as i32 + 1);
    for i in 0..x.len() {
        let g = grad[i];
        m[i] = p.beta1 * m[i] + (1.0 - p.beta1) * g;
        v[i] = p.beta2 * v[i] + (1.0 - p.beta2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        x[i] -= p.h * m_hat / (v_hat.sqrt() + p.eps);
    }
}

/// Baseline method for comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Baseline {
    Gd { h: f64 },
    Nag { h: f64 },
    Adam(AdamParams),
}

/// Outcome of a baseline run under the same termination rule as the Bregman runs.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRun {
    pub converged: bool,
    pub iters: usize,
    /// `(f, ‖∇f‖)` at every iterate, starting with `x₀`.
    pub trace: Vec<(f64, f64)>,
    pub x: Vec<f64>,
}

/// Iterates until `|f_k − f_{k−1}| < δ` and `‖∇f(x_k)‖ < δ`, divergence, or `max_iters`.
///
/// For NAG the criterion is evaluated at the `x` iterates.
pub fn run_baseline(
    method: Baseline,
    problem: &ObjectiveProblem,
    x0: &[f64],
    delta: f64,
    max_iters: usize,
) -> BaselineRun {
    let norm = |g: &[f64]| g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (mut f_prev, mut grad) = problem.eval_grad(x0);
    let mut trace = vec![(f_prev, norm(&grad))];
    let mut x = x0.to_vec();
    let mut nag = Nesterov::new(x0, 0.0);
    let mut m = vec![0.0; x.len()];
    let mut v = vec![0.0; x.len()];
    if let Baseline::Nag { h } = method {
        nag.h = h;
    }
    for k in 0..max_iters {
        match method {
            Baseline::Gd { h } => {
                x = gd_step(&x, &grad, h);
            }
            Baseline::Nag { .. } => {
                let gy = problem.grad(&nag.y);
                nag.step_with(&gy);
                x.clone_from(&nag.x);
            }
            Baseline::Adam(p) => adam_step(&mut x, &mut m, &mut v, k, &p, &grad),
        }
        let (f, g) = problem.eval_grad(&x);
        grad = g;
        let gn = norm(&grad);
        trace.push((f, gn));
        if !f.is_finite() || !gn.is_finite() {
            return BaselineRun {
                converged: false,
                iters: k + 1,
                trace,
                x,
            };
        }
        if (f - f_prev).abs() < delta && gn < delta {
            return BaselineRun {
                converged: true,
                iters: k + 1,
                trace,
                x,
            };
        }
        f_prev = f;
    }
    BaselineRun {
        converged: false,
        iters: max_iters,
        trace,
        x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gradient_descent() {
        assert_eq!(gd_step(&[1.0, 2.0], &[0.0, 0.0], 0.3), vec![1.0, 2.0]);
        assert_eq!(gd_step(&[1.0], &[2.0], 0.5), vec![0.0]);
        // f = x²/2, unit curvature: exact in one step.
        assert_eq!(gd_step(&[3.7], &[3.7], 1.0), vec![0.0]);
    }

    #[test]
    fn nesterov_coefficients() {
        assert_eq!(Nesterov::momentum(1), 0.0);
        assert_eq!(Nesterov::momentum(2), 0.25);
        let (x1, y1) = nag_step(&[1.0], &[1.0], 1, 0.5, |y| vec![2.0 * y[0]]);
        assert_eq!(x1, gd_step(&[1.0], &[2.0], 0.5));
        assert_eq!(y1, x1);
        let mut s = Nesterov::new(&[4.0, -1.0], 0.1);
        for _ in 0..10 {
            s.step_with(&[0.0, 0.0]);
        }
        assert_eq!(s.x, vec![4.0, -1.0]);
        assert_eq!(s.y, vec![4.0, -1.0]);
    }

    #[test]
    fn adam_first_step() {
        let p = AdamParams::default();
        let (mut x, mut m, mut v) = (vec![1.0], vec![0.0], vec![0.0]);
        adam_step(&mut x, &mut m, &mut v, 0, &p, &[0.0]);
        assert_eq!(x, vec![1.0]);

        let g = 3.0;
        let (mut x, mut m, mut v) = (vec![1.0], vec![0.0], vec![0.0]);
        adam_step(&mut x, &mut m, &mut v, 0, &p, &[g]);
        assert_relative_eq!(m[0], (1.0 - p.beta1) * g, max_relative = 1e-15);
        assert_relative_eq!(v[0], (1.0 - p.beta2) * g * g, max_relative = 1e-12);
        // Scalar brute force: m̂ = g, v̂ = g², step = h g/(|g| + ε).
        let expected = 1.0 - p.h * g / (g.abs() + p.eps);
        assert_relative_eq!(x[0], expected, max_relative = 1e-12);
    }
}
