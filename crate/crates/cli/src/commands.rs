use std::fs::{self, File};
use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use bregman_opt::harness::{render_heatmap, write_grid_csv, write_trace_csv, SWEEP_3D_MAX_ITERS, DEFAULT_MAX_ITERS};
use bregman_opt::oracle::{integrate_el_strided, rate_envelope};
use bregman_opt::reference_opt::{run_baseline, AdamParams, Baseline, BaselineRun};
use bregman_opt::{best_cell, run, sweep_with, Execution, RunResult, Status};

use crate::args::{CompareArgs, Method, RateArgs, SolveArgs, SweepArgs};

/// How a successful command ended; errors are reported separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    NotConverged,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Completed => 0,
            Outcome::NotConverged => 2,
        }
    }
}

pub fn solve(args: SolveArgs) -> Result<Outcome> {
    let (problem, q0) = args.problem.build()?;
    let name = problem.name().to_string();
    let dim = problem.dim();
    let rc = args.method.run_config(problem, q0, DEFAULT_MAX_ITERS)?.record_trace(args.out.is_some());
    let result = run(&rc)?;
    if let Some(path) = &args.out {
        write_trace_csv(&result, path)?;
    }
    println!("problem      {name} (dim {dim})");
    println!(
        "method       {}{} {} h={}",
        family_prefix(&rc.cfg),
        rc.kind,
        rc.cfg.label(),
        rc.h
    );
    println!("restart      {}", rc.restart.scheme);
    println!("looping      {}", rc.looping);
    print_result(&result);
    Ok(if result.status == Status::Converged {
        Outcome::Completed
    } else {
        Outcome::NotConverged
    })
}

fn family_prefix(cfg: &bregman_opt::BregmanConfig) -> &'static str {
    use bregman_opt::Family;
    match cfg.family() {
        Family::Poly => "Poly",
        Family::Expo => "Expo",
        Family::ExpoToPoly => "ExpoToPoly",
        Family::PolyToExpo => "PolyToExpo",
    }
}

fn print_result(r: &RunResult) {
    match r.status {
        Status::Converged => println!("status       converged after {} iterations", r.iters),
        Status::MaxIters => println!("status       not converged within {} iterations", r.iters),
        Status::Diverged => println!("status       diverged at iteration {}", r.iters),
    }
    let kind = if r.error_is_absolute { "|f - f*|" } else { "f" };
    println!("final error  {:e} ({kind})", r.final_error);
    println!("restarts     {}", r.restart_count);
    println!("loops        {}", r.loop_count);
}

pub fn sweep(args: SweepArgs) -> Result<Outcome> {
    if args.axes.len() > 3 {
        bail!("at most 3 sweep axes are supported, got {}", args.axes.len());
    }
    let default_iters = if args.axes.len() == 3 {
        SWEEP_3D_MAX_ITERS
    } else {
        DEFAULT_MAX_ITERS
    };
    let (problem, q0) = args.problem.build()?;
    let base = args.method.run_config(problem, q0, default_iters)?;
    let exec = match args.threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(n) => Execution::Threads(n),
        None => Execution::Parallel,
    };
    let grid = sweep_with(&args.axes, &base, exec)?;
    write_grid_csv(&grid, &args.out)?;
    if let Some(svg) = &args.svg {
        render_heatmap(&grid, svg)?;
    }
    let count = |s: Status| grid.cells.iter().filter(|c| c.status == s).count();
    println!(
        "cells        {} ({} converged, {} hit the iteration cap, {} diverged)",
        grid.cells.len(),
        count(Status::Converged),
        count(Status::MaxIters),
        count(Status::Diverged)
    );
    match best_cell(&grid) {
        Some(best) => {
            let params: Vec<String> = best.params.iter().map(|(n, v)| format!("{n}={v:e}")).collect();
            println!("best         {} iterations at {}", best.iters, params.join(", "));
        }
        None => println!("best         none converged"),
    }
    println!("grid         {}", args.out.display());
    Ok(Outcome::Completed)
}

fn write_baseline_trace(run: &BaselineRun, path: &Path) -> Result<()> {
    let mut out = io::BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(out, "iter,f,grad_norm")?;
    for (k, (f, g)) in run.trace.iter().enumerate() {
        writeln!(out, "{k},{f},{g}")?;
    }
    out.flush().with_context(|| format!("writing {}", path.display()))
}

pub fn compare(args: CompareArgs) -> Result<Outcome> {
    let (problem, q0) = args.problem.build()?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let max_iters = args.method.max_iters.unwrap_or(DEFAULT_MAX_ITERS);
    let f_star = problem.known_minimum();
    println!("{:<8} {:<14} {:>10} {:>14}", "method", "status", "iters", "final error");
    for &m in &args.methods {
        let (label, status, iters, f_last) = match m {
            Method::Bravo => {
                let rc = args
                    .method
                    .run_config(problem.clone(), q0.clone(), DEFAULT_MAX_ITERS)?
                    .record_trace(args.out.is_some());
                let r = run(&rc)?;
                if let Some(dir) = &args.out {
                    write_trace_csv(&r, dir.join("bravo.csv"))?;
                }
                let f_last = r.trace.as_ref().and_then(|t| t.last()).map(|row| row.f);
                ("bravo", r.status.to_string(), r.iters, f_last.or_else(|| final_f(&r, f_star)))
            }
            baseline => {
                let h = args.baseline_h;
                let (label, method) = match baseline {
                    Method::Gd => ("gd", Baseline::Gd { h }),
                    Method::Nag => ("nag", Baseline::Nag { h }),
                    _ => ("adam", Baseline::Adam(AdamParams { h, ..AdamParams::default() })),
                };
                let r = run_baseline(method, &problem, &q0, args.method.delta, max_iters);
                if let Some(dir) = &args.out {
                    write_baseline_trace(&r, &dir.join(format!("{label}.csv")))?;
                }
                let f_last = r.trace.last().map(|t| t.0);
                let status = if r.converged {
                    "converged"
                } else if f_last.is_some_and(f64::is_finite) {
                    "max_iters"
                } else {
                    "diverged"
                };
                (label, status.to_string(), r.iters, f_last)
            }
        };
        let err = match (f_last, f_star) {
            (Some(f), Some(s)) => format!("{:e}", (f - s).abs()),
            (Some(f), None) => format!("f={f:e}"),
            _ => "-".into(),
        };
        println!("{label:<8} {status:<14} {iters:>10} {err:>14}");
    }
    Ok(Outcome::Completed)
}

fn final_f(r: &RunResult, f_star: Option<f64>) -> Option<f64> {
    if r.error_is_absolute {
        f_star.map(|s| s + r.final_error)
    } else {
        Some(r.final_error)
    }
}

pub fn rate_check(args: RateArgs) -> Result<Outcome> {
    let cfg = args.config()?;
    let (problem, q0) = args.problem.build()?;
    let Some(f_star) = problem.known_minimum() else {
        bail!("problem `{}` has no known minimum to measure the error against", problem.name());
    };
    let traj = integrate_el_strided(&cfg, &problem, &q0, 1.0, args.t_end, args.h_ode, args.stride.max(1))?;
    let mut sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(io::BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    };
    writeln!(sink, "t,error")?;
    for (i, &t) in traj.times.iter().enumerate() {
        writeln!(sink, "{t},{}", problem.eval(traj.q(i)) - f_star)?;
    }
    sink.flush()?;
    drop(sink);
    let fit = rate_envelope(&traj, f_star);
    eprintln!(
        "{} on {}: envelope slope {:.3} over {} bins{}{}",
        cfg.label(),
        problem.name(),
        fit.slope,
        fit.points.len(),
        if fit.reliable { "" } else { " (unreliable: too few bins above the noise floor)" },
        if traj.diverged { ", trajectory diverged" } else { "" }
    );
    Ok(Outcome::Completed)
}
