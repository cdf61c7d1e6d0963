//! Continuous-time reference trajectories.
//!
//! Integrates the Euler–Lagrange equations of the Poly and Expo families with
//! fixed-step classical RK4, starting at `t₀` with zero velocity, and provides
//! the rate and time-dilation checks built on top of them.

use crate::bregman::{el_acceleration_into, BregmanConfig, Family};
use crate::error::{Error, Result};
use crate::problems::ObjectiveProblem;

/// RK4 solution sampled every `stride` steps, with cubic Hermite dense output.
#[derive(Debug, Clone)]
pub struct OracleTrajectory {
    pub cfg: BregmanConfig,
    pub problem: ObjectiveProblem,
    pub times: Vec<f64>,
    dim: usize,
    q: Vec<f64>,
    v: Vec<f64>,
    /// Set when the state became non-finite; the trajectory stops there.
    pub diverged: bool,
}

impl OracleTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self, i: usize) -> &[f64] {
        &self.q[i * self.dim..(i + 1) * self.dim]
    }

    pub fn v(&self, i: usize) -> &[f64] {
        &self.v[i * self.dim..(i + 1) * self.dim]
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().expect("trajectory holds at least the initial point")
    }

    /// Position at time `t` by cubic Hermite interpolation between stored samples.
    pub fn position_at(&self, t: f64) -> Result<Vec<f64>> {
        let (t0, t1) = (self.start(), self.end());
        if !(t >= t0 && t <= t1) {
            return Err(Error::InvalidInput(format!(
                "time {t} lies outside the trajectory range [{t0}, {t1}]"
            )));
        }
        let i = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            k if k >= self.len() => self.len() - 2,
            k => k - 1,
        };
        if self.len() == 1 {
            return Ok(self.q(0).to_vec());
        }
        let (ta, tb) = (self.times[i], self.times[i + 1]);
        let dt = tb - ta;
        let s = (t - ta) / dt;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let (qa, qb, va, vb) = (self.q(i), self.q(i + 1), self.v(i), self.v(i + 1));
        Ok((0..self.dim)
            .map(|k| h00 * qa[k] + h10 * dt * va[k] + h01 * qb[k] + h11 * dt * vb[k])
            .collect())
    }
}

/// RK4 on `(q, v)` from `t0` to `t_end` with step `h_ode`, storing every step.
pub fn integrate_el(
    cfg: &BregmanConfig,
    problem: &ObjectiveProblem,
    q0: &[f64],
    t0: f64,
    t_end: f64,
    h_ode: f64,
) -> Result<OracleTrajectory> {
    integrate_el_strided(cfg, problem, q0, t0, t_end, h_ode, 1)
}

/// As [`integrate_el`] but stores only every `stride`-th step (and the last one).
pub fn integrate_el_strided(
    cfg: &BregmanConfig,
    problem: &ObjectiveProblem,
    q0: &[f64],
    t0: f64,
    t_end: f64,
    h_ode: f64,
    stride: usize,
) -> Result<OracleTrajectory> {
    if !matches!(cfg.family(), Family::Poly | Family::Expo) || cfg.is_adaptive() {
        return Err(Error::UnsupportedFamily {
            operation: "the continuous oracle",
            family: if cfg.is_adaptive() && matches!(cfg.family(), Family::Poly | Family::Expo) {
                "time-adaptive"
            } else {
                cfg.family().as_str()
            },
        });
    }
    if !(t0 >= 1.0 && t_end > t0 && t_end.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "oracle needs 1 <= t0 < T, got t0={t0}, T={t_end}"
        )));
    }
    if !(h_ode > 0.0) {
        return Err(Error::InvalidParameter {
            name: "h_ode",
            value: h_ode,
            reason: "must be positive",
        });
    }
    let d = problem.dim();
    if q0.len() != d {
        return Err(Error::InvalidDimension(format!("q0 has {} entries, problem has {d}", q0.len())));
    }
    let stride = stride.max(1);
    let steps = ((t_end - t0) / h_ode).ceil() as usize;
    let h = (t_end - t0) / steps as f64;

    let mut traj = OracleTrajectory {
        cfg: *cfg,
        problem: problem.clone(),
        times: Vec::with_capacity(steps / stride + 2),
        dim: d,
        q: Vec::with_capacity(d * (steps / stride + 2)),
        v: Vec::with_capacity(d * (steps / stride + 2)),
        diverged: false,
    };
    let mut q = q0.to_vec();
    let mut v = vec![0.0; d];
    traj.times.push(t0);
    traj.q.extend_from_slice(&q);
    traj.v.extend_from_slice(&v);

    let mut grad = vec![0.0; d];
    let mut k = [vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]];
    let mut kv = [vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]];
    let mut qs = vec![0.0; d];
    let mut vs = vec![0.0; d];

    for n in 0..steps {
        let t = t0 + n as f64 * h;
        // Stage derivatives: q' = v, v' = a(t, q, v).
        let mut accel = |t: f64, q: &[f64], v: &[f64], out_q: &mut [f64], out_v: &mut [f64]| -> Result<()> {
            problem.grad_into(q, &mut grad);
            out_q.copy_from_slice(v);
            el_acceleration_into(cfg, t, v, &grad, out_v)
        };
        let [k1, k2, k3, k4] = &mut k;
        let [l1, l2, l3, l4] = &mut kv;
        accel(t, &q, &v, k1, l1)?;
        for i in 0..d {
            qs[i] = q[i] + 0.5 * h * k1[i];
            vs[i] = v[i] + 0.5 * h * l1[i];
        }
        accel(t + 0.5 * h, &qs, &vs, k2, l2)?;
        for i in 0..d {
            qs[i] = q[i] + 0.5 * h * k2[i];
            vs[i] = v[i] + 0.5 * h * l2[i];
        }
        accel(t + 0.5 * h, &qs, &vs, k3, l3)?;
        for i in 0..d {
            qs[i] = q[i] + h * k3[i];
            vs[i] = v[i] + h * l3[i];
        }
        accel(t + h, &qs, &vs, k4, l4)?;
        for i in 0..d {
            q[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            v[i] += h / 6.0 * (l1[i] + 2.0 * l2[i] + 2.0 * l3[i] + l4[i]);
        }
        if q.iter().chain(&v).any(|x| !x.is_finite()) {
            traj.diverged = true;
            break;
        }
        if (n + 1) % stride == 0 || n + 1 == steps {
            traj.times.push(if n + 1 == steps { t_end } else { t0 + (n + 1) as f64 * h });
            traj.q.extend_from_slice(&q);
            traj.v.extend_from_slice(&v);
        }
    }
    Ok(traj)
}

/// Fitted decay of the error envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// Slope of `ln(f − f*)` against `ln t` (Poly) or `t` (Expo).
    pub slope: f64,
    /// False when the error is at the round-off floor or the objective is flat.
    pub reliable: bool,
    /// Envelope points `(x, ln(f − f*))` used in the fit.
    pub points: Vec<(f64, f64)>,
}

const ENVELOPE_BINS: usize = 20;

/// Fits the upper envelope of `ln(f(q(t)) − f*)` over `[T/10, T]`.
///
/// The window is split into equal bins in the regression coordinate; the
/// maximum of each bin is an envelope point and the slope is the least-squares
/// fit through those points. Points whose error is below `100·ε·max(1, |f*|)`
/// are discarded; the fit is unreliable when fewer than half the bins remain.
pub fn rate_envelope(traj: &OracleTrajectory, f_star: f64) -> RateFit {
    let poly = traj.cfg.family() == Family::Poly;
    let coord = |t: f64| if poly { t.ln() } else { t };
    let t_end = traj.end();
    let (x_lo, x_hi) = (coord((t_end / 10.0).max(traj.start())), coord(t_end));
    let floor = 1e2 * f64::EPSILON * f_star.abs().max(1.0);

    let mut best: Vec<Option<(f64, f64)>> = vec![None; ENVELOPE_BINS];
    let mut any_positive = false;
    for (i, &t) in traj.times.iter().enumerate() {
        let x = coord(t);
        if x < x_lo || x_hi <= x_lo {
            continue;
        }
        let err = traj.problem.eval(traj.q(i)) - f_star;
        if err > 0.0 {
            any_positive = true;
        }
        if !(err > floor) {
            continue;
        }
        let bin = (((x - x_lo) / (x_hi - x_lo)) * ENVELOPE_BINS as f64).min(ENVELOPE_BINS as f64 - 1.0) as usize;
        let y = err.ln();
        if best[bin].is_none_or(|(_, b)| y > b) {
            best[bin] = Some((x, y));
        }
    }
    let points: Vec<(f64, f64)> = best.into_iter().flatten().collect();
    let reliable = any_positive && points.len() >= ENVELOPE_BINS / 2;
    let slope = if points.len() >= 2 { least_squares_slope(&points) } else { f64::NAN };
    RateFit {
        slope,
        reliable: reliable && slope.is_finite(),
        points,
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Options for [`check_time_dilation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationOptions {
    /// RK4 step for the `p`-dynamics.
    pub h_ode: f64,
    /// Finite-difference step in the rescaled time.
    pub fd_step: f64,
    /// Number of evaluation points across `[1 + 2·fd_step, horizon − 2·fd_step]`.
    pub samples: usize,
}

impl Default for DilationOptions {
    fn default() -> Self {
        Self {
            h_ode: 1e-4,
            fd_step: 1e-3,
            samples: 200,
        }
    }
}

/// Sup-norm residual of the `p̊`-family Euler–Lagrange equation along
/// `y(s) = q(s^{p̊/p})`, where `q` solves the `p`-family equation.
///
/// `horizon` is the final rescaled time `s`. Derivatives of `y` are taken by
/// fourth-order central differences on the Hermite interpolant of `q`.
pub fn check_time_dilation(
    cfg_p: &BregmanConfig,
    cfg_ring: &BregmanConfig,
    problem: &ObjectiveProblem,
    q0: &[f64],
    horizon: f64,
    opts: DilationOptions,
) -> Result<f64> {
    if cfg_p.family() != Family::Poly || cfg_ring.family() != Family::Poly {
        return Err(Error::UnsupportedFamily {
            operation: "time dilation check",
            family: if cfg_p.family() != Family::Poly {
                cfg_p.family().as_str()
            } else {
                cfg_ring.family().as_str()
            },
        });
    }
    if cfg_p.c() != cfg_ring.c() {
        return Err(Error::Config("time dilation compares families with the same C".into()));
    }
    let (p, pr) = (cfg_p.p(), cfg_ring.p());
    let k = pr / p;
    let delta = opts.fd_step;
    if !(horizon > 1.0 + 4.0 * delta) {
        return Err(Error::InvalidInput(format!("horizon {horizon} is too short")));
    }
    let base = BregmanConfig::poly(p, cfg_p.c())?;
    let t_end = horizon.powf(k) * (1.0 + 1e-9);
    let traj = integrate_el(&base, problem, q0, 1.0, t_end.max(1.0 + opts.h_ode), opts.h_ode)?;
    if traj.diverged {
        return Err(Error::InvalidInput("oracle trajectory diverged".into()));
    }
    dilation_residual(&traj, cfg_ring, horizon, k, opts)
}

/// Sup-norm residual of the `cfg_ring` Euler–Lagrange equation along
/// `y(s) = q(s^exponent)` for `s ∈ [1, horizon]`, where `q` is `traj`.
///
/// [`check_time_dilation`] uses `exponent = p̊/p`; other exponents give a
/// curve that is not a solution and serve as a negative control.
pub fn dilation_residual(
    traj: &OracleTrajectory,
    cfg_ring: &BregmanConfig,
    horizon: f64,
    exponent: f64,
    opts: DilationOptions,
) -> Result<f64> {
    if cfg_ring.family() != Family::Poly || cfg_ring.is_adaptive() {
        return Err(Error::UnsupportedFamily {
            operation: "time dilation check",
            family: cfg_ring.family().as_str(),
        });
    }
    let pr = cfg_ring.p();
    let delta = opts.fd_step;
    let y = |s: f64| traj.position_at(s.powf(exponent));
    let problem = &traj.problem;

    let d = problem.dim();
    let (s_lo, s_hi) = (1.0 + 2.0 * delta, horizon - 2.0 * delta);
    let n = opts.samples.max(2);
    let mut sup: f64 = 0.0;
    let mut grad = vec![0.0; d];
    for i in 0..n {
        let s = s_lo + (s_hi - s_lo) * i as f64 / (n - 1) as f64;
        let ym2 = y(s - 2.0 * delta)?;
        let ym1 = y(s - delta)?;
        let y0 = y(s)?;
        let yp1 = y(s + delta)?;
        let yp2 = y(s + 2.0 * delta)?;
        problem.grad_into(&y0, &mut grad);
        let force = cfg_ring.c() * pr * pr * s.powf(pr - 2.0);
        let damping = (pr + 1.0) / s;
        let mut norm2 = 0.0;
        for j in 0..d {
            let d1 = (ym2[j] - 8.0 * ym1[j] + 8.0 * yp1[j] - yp2[j]) / (12.0 * delta);
            let d2 = (-ym2[j] + 16.0 * ym1[j] - 30.0 * y0[j] + 16.0 * yp1[j] - yp2[j]) / (12.0 * delta * delta);
            let res = d2 + damping * d1 + force * grad[j];
            norm2 += res * res;
        }
        sup = sup.max(norm2.sqrt());
    }
    Ok(sup)
}
/// Sign changes of `∇f(q)·v` between stored samples with `t ∈ [t_lo, t_hi]`.
/// Exact zeros are skipped.
pub fn oscillation_count(traj: &OracleTrajectory, t_lo: f64, t_hi: f64) -> usize {
    let mut grad = vec![0.0; traj.dim()];
    let mut prev: Option<bool> = None;
    let mut count = 0;
    for (i, &t) in traj.times.iter().enumerate() {
        if t < t_lo || t > t_hi {
            continue;
        }
        traj.problem.grad_into(traj.q(i), &mut grad);
        let power: f64 = grad.iter().zip(traj.v(i)).map(|(g, v)| g * v).sum();
        if power == 0.0 || !power.is_finite() {
            continue;
        }
        let sign = power > 0.0;
        if prev.is_some_and(|p| p != sign) {
            count += 1;
        }
        prev = Some(sign);
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_ill_conditioned, make_quartic};

    #[test]
    fn minimizer_is_an_equilibrium() {
        let cfg = BregmanConfig::poly(3.0, 1.0).unwrap();
        let tr = integrate_el(&cfg, &make_ill_conditioned(), &[0.0; 3], 1.0, 3.0, 1e-2).unwrap();
        assert!(!tr.diverged);
        for i in 0..tr.len() {
            assert!(tr.q(i).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let cfg = BregmanConfig::expo(0.5, 0.2).unwrap();
        let f = make_ill_conditioned();
        let q0 = [1.0, 0.5, 0.05];
        let end = |h| {
            let tr = integrate_el(&cfg, &f, &q0, 1.0, 2.0, h).unwrap();
            tr.q(tr.len() - 1).to_vec()
        };
        let fine = end(1e-4);
        let err = |h| {
            end(h).iter().zip(&fine).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        };
        let order = (err(4e-2) / err(2e-2)).log2();
        assert!(order >= 3.7, "observed order {order}");
    }

    #[test]
    fn hermite_reproduces_samples() {
        let cfg = BregmanConfig::poly(2.0, 1.0).unwrap();
        let tr = integrate_el_strided(&cfg, &make_quartic(2).unwrap(), &[0.0, 0.0], 1.0, 2.0, 1e-3, 10).unwrap();
        for i in [0, 7, tr.len() - 1] {
            assert_eq!(tr.position_at(tr.times[i]).unwrap(), tr.q(i));
        }
        assert!(tr.position_at(0.5).is_err());
    }

    #[test]
    fn rejects_unsupported_families() {
        let f = make_ill_conditioned();
        let q0 = [1.0; 3];
        for cfg in [
            BregmanConfig::poly_adaptive(4.0, 2.0, 1.0).unwrap(),
            BregmanConfig::expo_to_poly(1.0, 2.0, 1.0).unwrap(),
        ] {
            assert!(integrate_el(&cfg, &f, &q0, 1.0, 2.0, 1e-2).is_err());
        }
        let poly = BregmanConfig::poly(4.0, 1.0).unwrap();
        let expo = BregmanConfig::expo(1.0, 1.0).unwrap();
        assert!(check_time_dilation(&poly, &expo, &f, &q0, 2.0, DilationOptions::default()).is_err());
    }

    #[test]
    fn counts_sign_changes() {
        let cfg = BregmanConfig::poly(2.0, 1.0).unwrap();
        let tr = integrate_el(&cfg, &make_ill_conditioned(), &[0.0, 0.0, 1.0], 1.0, 6.0, 1e-3).unwrap();
        // The stiff coordinate oscillates many times; the range filter applies.
        let all = oscillation_count(&tr, 1.0, 6.0);
        assert!(all > 5, "{all}");
        assert!(oscillation_count(&tr, 1.0, 3.0) <= all);
        assert_eq!(oscillation_count(&tr, 7.0, 8.0), 0);
    }
}
