use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::{run, RunConfig, RunResult, Status};
use crate::bregman::canonical_param;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spacing {
    Log,
    Linear,
}

impl fmt::Display for Spacing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spacing::Log => "log",
            Spacing::Linear => "lin",
        })
    }
}

/// One sweep axis over a named parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    /// Canonical parameter name (`C`, `h`, `p`, `pring`, `eta`, `etaring`).
    pub name: &'static str,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn new(name: &str, min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Self> {
        let canonical = canonical_param(name).ok_or_else(|| Error::Parse(format!("unknown axis parameter `{name}`")))?;
        if count == 0 {
            return Err(Error::Config(format!("axis `{name}` needs at least one point")));
        }
        if !(min.is_finite() && max.is_finite() && min <= max) {
            return Err(Error::Config(format!("axis `{name}` has bad bounds [{min}, {max}]")));
        }
        if spacing == Spacing::Log && min <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "axis min",
                value: min,
                reason: "log-spaced axes need a positive minimum",
            });
        }
        Ok(Self {
            name: canonical,
            min,
            max,
            count,
            spacing,
        })
    }

    pub fn log(name: &str, min: f64, max: f64, count: usize) -> Result<Self> {
        Self::new(name, min, max, count, Spacing::Log)
    }

    pub fn linear(name: &str, min: f64, max: f64, count: usize) -> Result<Self> {
        Self::new(name, min, max, count, Spacing::Linear)
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count == 1 || i == 0 {
            return self.min;
        }
        if i + 1 == self.count {
            return self.max;
        }
        let s = i as f64 / (self.count - 1) as f64;
        match self.spacing {
            Spacing::Linear => self.min + s * (self.max - self.min),
            Spacing::Log => (self.min.ln() + s * (self.max.ln() - self.min.ln())).exp(),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

impl FromStr for Axis {
    type Err = Error;

    /// `NAME:MIN:MAX:COUNT[:log|:lin]`, log spacing by default.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(Error::Parse(format!("axis `{s}` must look like NAME:MIN:MAX:COUNT[:log|lin]")));
        }
        let num = |x: &str| x.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{x}` in axis `{s}`")));
        let count = parts[3]
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad count `{}` in axis `{s}`", parts[3])))?;
        let spacing = match parts.get(4).map(|x| x.to_ascii_lowercase()) {
            None => Spacing::Log,
            Some(x) if x == "log" => Spacing::Log,
            Some(x) if x == "lin" || x == "linear" => Spacing::Linear,
            Some(x) => return Err(Error::Parse(format!("unknown spacing `{x}`"))),
        };
        Axis::new(parts[0], num(parts[1])?, num(parts[2])?, count, spacing)
    }
}

/// Axes plus one result per cell, in row-major order (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub axes: Vec<Axis>,
    pub cells: Vec<RunResult>,
}

impl SweepGrid {
    pub fn cell_count(axes: &[Axis]) -> usize {
        axes.iter().map(|a| a.count).product()
    }

    /// Axis indices of cell `flat`.
    pub fn index(&self, flat: usize) -> Vec<usize> {
        unravel(&self.axes, flat)
    }

    /// Parameter values of cell `flat`, one per axis.
    pub fn params(&self, flat: usize) -> Vec<f64> {
        cell_params(&self.axes, flat)
    }

    pub fn cell(&self, idx: &[usize]) -> &RunResult {
        let mut flat = 0;
        for (a, i) in self.axes.iter().zip(idx) {
            flat = flat * a.count + i;
        }
        &self.cells[flat]
    }
}

fn unravel(axes: &[Axis], mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0; axes.len()];
    for (slot, a) in idx.iter_mut().zip(axes).rev() {
        *slot = flat % a.count;
        flat /= a.count;
    }
    idx
}

fn cell_params(axes: &[Axis], flat: usize) -> Vec<f64> {
    unravel(axes, flat).iter().zip(axes).map(|(&i, a)| a.value(i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon's global pool.
    #[default]
    Parallel,
    /// A dedicated pool with this many threads.
    Threads(usize),
}

/// Runs every cell in parallel on the global pool.
pub fn sweep(axes: &[Axis], base: &RunConfig) -> Result<SweepGrid> {
    sweep_with(axes, base, Execution::Parallel)
}

/// Runs every cell of the grid. All cell configurations are built and
/// validated before anything runs; traces are never recorded.
pub fn sweep_with(axes: &[Axis], base: &RunConfig, exec: Execution) -> Result<SweepGrid> {
    if axes.is_empty() || axes.len() > 3 {
        return Err(Error::Config(format!("a sweep needs 1 to 3 axes, got {}", axes.len())));
    }
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].iter().any(|b| b.name == a.name) {
            return Err(Error::Config(format!("axis `{}` appears twice", a.name)));
        }
    }
    let n = SweepGrid::cell_count(axes);
    let mut base = base.clone().record_trace(false);
    base.stop_on_convergence = true;
    let configs = (0..n)
        .map(|flat| {
            let mut c = base.clone();
            for (a, v) in axes.iter().zip(cell_params(axes, flat)) {
                c = c.with_param(a.name, v)?;
            }
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;

    let run_cell = |c: &RunConfig| run(c).expect("validated before the sweep");
    let cells = match exec {
        Execution::Sequential => configs.iter().map(run_cell).collect(),
        Execution::Parallel => configs.par_iter().map(run_cell).collect(),
        Execution::Threads(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| configs.par_iter().map(run_cell).collect()),
    };
    Ok(SweepGrid {
        axes: axes.to_vec(),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestCell {
    pub flat: usize,
    /// `(axis name, value)` pairs.
    pub params: Vec<(&'static str, f64)>,
    pub iters: usize,
}

/// Fewest iterations among converged cells; ties go to the smaller `h`, then
/// the smaller `C`, then the earlier cell.
pub fn best_cell(grid: &SweepGrid) -> Option<BestCell> {
    let key_value = |flat: usize, name: &str| -> f64 {
        grid.axes
            .iter()
            .position(|a| a.name == name)
            .map(|i| grid.params(flat)[i])
            .unwrap_or(0.0)
    };
    grid.cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.status == Status::Converged)
        .min_by(|(i, a), (j, b)| {
            a.iters
                .cmp(&b.iters)
                .then(key_value(*i, "h").total_cmp(&key_value(*j, "h")))
                .then(key_value(*i, "C").total_cmp(&key_value(*j, "C")))
                .then(i.cmp(j))
        })
        .map(|(flat, c)| BestCell {
            flat,
            params: grid.axes.iter().map(|a| a.name).zip(grid.params(flat)).collect(),
            iters: c.iters,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bregman::BregmanConfig;
    use crate::integrators::IntegratorKind;
    use crate::problems::make_log_barrier;

    fn base() -> RunConfig {
        let cfg = BregmanConfig::poly(4.0, 1.0).unwrap();
        RunConfig::new(make_log_barrier(), vec![2.0, 2.0], cfg, IntegratorKind::Htvi, 0.1)
            .delta(1e-5)
            .max_iters(2000)
    }

    #[test]
    fn axis_values() {
        let a = Axis::log("C", 1e-2, 1e2, 5).unwrap();
        let v = a.values();
        assert_eq!(v[0], 1e-2);
        assert_eq!(v[4], 1e2);
        assert!((v[2] - 1.0).abs() < 1e-14);
        let l: Axis = "p:2:40:39:lin".parse().unwrap();
        assert_eq!(l.value(1), 3.0);
        assert!(Axis::log("h", 0.0, 1.0, 3).is_err());
        assert!("q:1:2:3".parse::<Axis>().is_err());
        assert_eq!("eta:1:2:3".parse::<Axis>().unwrap().name, "eta");
    }

    #[test]
    fn single_cell_matches_run() {
        let axes = [Axis::log("C", 0.5, 0.5, 1).unwrap(), Axis::log("h", 0.05, 0.05, 1).unwrap()];
        let g = sweep(&axes, &base()).unwrap();
        let direct = run(&base().with_param("C", 0.5).unwrap().with_param("h", 0.05).unwrap()).unwrap();
        assert_eq!(g.cells, vec![direct]);
    }

    #[test]
    fn row_major_layout_and_tie_break() {
        let axes = [Axis::log("C", 0.1, 10.0, 3).unwrap(), Axis::log("h", 0.01, 0.1, 2).unwrap()];
        let mut g = sweep_with(&axes, &base(), Execution::Sequential).unwrap();
        assert_eq!(g.cells.len(), 6);
        assert_eq!(g.index(3), vec![1, 1]);
        assert_eq!(g.params(1), vec![0.1, 0.1]);
        for c in g.cells.iter_mut() {
            c.status = Status::Converged;
            c.iters = 7;
        }
        // All tied: smallest h, then smallest C.
        assert_eq!(best_cell(&g).unwrap().flat, 0);
        g.cells[0].status = Status::Diverged;
        assert_eq!(best_cell(&g).unwrap().flat, 2);
        for c in g.cells.iter_mut() {
            c.status = Status::MaxIters;
        }
        assert!(best_cell(&g).is_none());
    }

    #[test]
    fn invalid_cells_rejected_up_front() {
        let axes = [Axis::linear("p", -1.0, 2.0, 2).unwrap()];
        assert!(sweep(&axes, &base()).is_err());
        let dup = [Axis::log("C", 1.0, 2.0, 2).unwrap(), Axis::log("C", 1.0, 2.0, 2).unwrap()];
        assert!(sweep(&dup, &base()).is_err());
    }
}
