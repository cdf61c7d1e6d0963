use std::fs::File;
use std::path::Path;

use super::{RunResult, Status, SweepGrid};
use crate::error::{Error, Result};

/// One parsed row of a grid CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub params: Vec<f64>,
    pub status: Status,
    pub iters: usize,
    pub final_error: f64,
    pub restarts: usize,
    pub loops: usize,
}

impl CellRecord {
    pub fn matches(&self, params: &[f64], r: &RunResult) -> bool {
        self.params == params
            && self.status == r.status
            && self.iters == r.iters
            && self.final_error.to_bits() == r.final_error.to_bits()
            && self.restarts == r.restart_count
            && self.loops == r.loop_count
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        context: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Writes `axis…,status,iters,final_error,restarts,loops`, one row per cell in
/// row-major order. Floats use the shortest representation that round-trips.
pub fn write_grid_csv(grid: &SweepGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(File::create(path).map_err(|e| io_err(path, e))?);
    let mut header: Vec<String> = grid.axes.iter().map(|a| a.name.to_string()).collect();
    header.extend(["status", "iters", "final_error", "restarts", "loops"].map(String::from));
    w.write_record(&header).map_err(|e| io_err(path, e))?;
    for (flat, cell) in grid.cells.iter().enumerate() {
        let mut row: Vec<String> = grid.params(flat).iter().map(|v| v.to_string()).collect();
        row.push(cell.status.to_string());
        row.push(cell.iters.to_string());
        row.push(cell.final_error.to_string());
        row.push(cell.restart_count.to_string());
        row.push(cell.loop_count.to_string());
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_grid_csv(path: impl AsRef<Path>) -> Result<Vec<CellRecord>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_reader(File::open(path).map_err(|e| io_err(path, e))?);
    let n_axes = r
        .headers()
        .map_err(|e| io_err(path, e))?
        .len()
        .checked_sub(5)
        .ok_or_else(|| Error::Parse(format!("{}: too few columns", path.display())))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let float = |i: usize| {
            field(i)
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("{}: bad number `{}`", path.display(), field(i))))
        };
        let int = |i: usize| {
            field(i)
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("{}: bad integer `{}`", path.display(), field(i))))
        };
        out.push(CellRecord {
            params: (0..n_axes).map(float).collect::<Result<_>>()?,
            status: field(n_axes).parse()?,
            iters: int(n_axes + 1)?,
            final_error: float(n_axes + 2)?,
            restarts: int(n_axes + 3)?,
            loops: int(n_axes + 4)?,
        });
    }
    Ok(out)
}

/// Writes `iter,f,grad_norm,time,energy,restarted,looped`. A run without a
/// recorded trace produces a header-only file.
pub fn write_trace_csv(result: &RunResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(File::create(path).map_err(|e| io_err(path, e))?);
    w.write_record(["iter", "f", "grad_norm", "time", "energy", "restarted", "looped"])
        .map_err(|e| io_err(path, e))?;
    for t in result.trace.iter().flatten() {
        w.write_record([
            t.iter.to_string(),
            t.f.to_string(),
            t.grad_norm.to_string(),
            t.time.to_string(),
            t.energy.to_string(),
            u8::from(t.restarted).to_string(),
            u8::from(t.looped).to_string(),
        ])
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}
