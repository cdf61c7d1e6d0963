use std::fmt::Write as _;
use std::path::Path;

use super::{Spacing, Status, SweepGrid};
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 110.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 70.0;
const TICKS: usize = 5;

/// Viridis-like stops, dark (few iterations) to bright (many).
const STOPS: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

fn color(s: f64) -> String {
    let s = s.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (s.floor() as usize).min(STOPS.len() - 2);
    let u = s - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |x: f64, y: f64| (x + u * (y - x)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Renders a 2-D grid as SVG: first axis vertical, second horizontal.
/// Converged cells are colored by `log(iters)`; other cells stay blank.
pub fn render_heatmap(grid: &SweepGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let svg = heatmap_svg(grid)?;
    std::fs::write(path, svg).map_err(|e| Error::Io {
        context: path.display().to_string(),
        message: e.to_string(),
    })
}

pub(crate) fn heatmap_svg(grid: &SweepGrid) -> Result<String> {
    if grid.axes.len() != 2 {
        return Err(Error::Config(format!("a heatmap needs exactly 2 axes, got {}", grid.axes.len())));
    }
    let (ya, xa) = (&grid.axes[0], &grid.axes[1]);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let cw = plot_w / xa.count as f64;
    let ch = plot_h / ya.count as f64;

    let converged: Vec<f64> = grid
        .cells
        .iter()
        .filter(|c| c.status == Status::Converged)
        .map(|c| (c.iters.max(1) as f64).ln())
        .collect();
    let lo = converged.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = converged.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    for (flat, cell) in grid.cells.iter().enumerate() {
        if cell.status != Status::Converged {
            continue;
        }
        let idx = grid.index(flat);
        let x = MARGIN_LEFT + idx[1] as f64 * cw;
        // Row 0 of the vertical axis at the bottom.
        let y = MARGIN_TOP + (ya.count - 1 - idx[0]) as f64 * ch;
        let v = (cell.iters.max(1) as f64).ln();
        let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
        let _ = writeln!(
            s,
            r#"<rect class="cell" x="{x:.3}" y="{y:.3}" width="{:.3}" height="{:.3}" fill="{}"><title>{}</title></rect>"#,
            cw + 0.05,
            ch + 0.05,
            color(t),
            cell.iters
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    let label = |v: f64, spacing: Spacing| match spacing {
        Spacing::Log => format!("1e{:.1}", v.log10()),
        Spacing::Linear => format!("{v:.3}"),
    };
    let ticks = |n: usize| -> Vec<f64> { (0..TICKS).map(|k| k as f64 / (TICKS - 1) as f64 * (n as f64)).collect() };
    for pos in ticks(xa.count) {
        let frac = pos / xa.count as f64;
        let v = axis_at(xa.min, xa.max, xa.spacing, frac);
        let x = MARGIN_LEFT + frac * plot_w;
        let yb = MARGIN_TOP + plot_h;
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{yb}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, yb + 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            yb + 18.0,
            label(v, xa.spacing)
        );
    }
    for pos in ticks(ya.count) {
        let frac = pos / ya.count as f64;
        let v = axis_at(ya.min, ya.max, ya.spacing, frac);
        let y = MARGIN_TOP + (1.0 - frac) * plot_h;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN_LEFT}" y2="{y:.2}" stroke="black"/>"#,
            MARGIN_LEFT - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 8.0,
            y + 4.0,
            label(v, ya.spacing)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 20.0,
        xa.name
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" font-size="14" transform="rotate(-90 20 {:.2})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        ya.name
    );

    if !converged.is_empty() {
        let bx = WIDTH - MARGIN_RIGHT + 25.0;
        let steps = 32;
        for k in 0..steps {
            let t = k as f64 / (steps - 1) as f64;
            let y = MARGIN_TOP + (1.0 - t) * (plot_h - plot_h / steps as f64);
            let _ = writeln!(
                s,
                r#"<rect x="{bx}" y="{y:.2}" width="18" height="{:.2}" fill="{}"/>"#,
                plot_h / steps as f64 + 0.5,
                color(t)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            bx + 22.0,
            MARGIN_TOP + 10.0,
            hi.exp().round()
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            bx + 22.0,
            MARGIN_TOP + plot_h,
            lo.exp().round()
        );
        let _ = writeln!(s, r#"<text x="{bx}" y="{:.2}">iters</text>"#, MARGIN_TOP - 10.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Parameter value at fraction `frac` of the axis extent, treating cells as
/// equal-width bins around the sample points.
fn axis_at(min: f64, max: f64, spacing: Spacing, frac: f64) -> f64 {
    match spacing {
        Spacing::Linear => min + frac * (max - min),
        Spacing::Log => (min.ln() + frac * (max.ln() - min.ln())).exp(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{Axis, RunResult};

    fn grid(statuses: &[(Status, usize)]) -> SweepGrid {
        SweepGrid {
            axes: vec![Axis::log("C", 0.1, 10.0, 2).unwrap(), Axis::log("h", 0.01, 1.0, 2).unwrap()],
            cells: statuses
                .iter()
                .map(|&(status, iters)| RunResult {
                    status,
                    iters,
                    steps: iters,
                    converged_at: (status == Status::Converged).then_some(iters),
                    final_error: 0.0,
                    error_is_absolute: true,
                    restart_count: 0,
                    loop_count: 0,
                    trace: None,
                })
                .collect(),
        }
    }

    #[test]
    fn diverged_grid_is_blank() {
        let svg = heatmap_svg(&grid(&[(Status::Diverged, 1); 4])).unwrap();
        assert_eq!(svg.matches("class=\"cell\"").count(), 0);
        assert!(svg.contains("<line"));
    }

    #[test]
    fn one_cell_one_rect() {
        let svg = heatmap_svg(&grid(&[
            (Status::Converged, 10),
            (Status::MaxIters, 5),
            (Status::Diverged, 1),
            (Status::Diverged, 1),
        ]))
        .unwrap();
        assert_eq!(svg.matches("class=\"cell\"").count(), 1);
    }

    #[test]
    fn colors_are_monotone() {
        let lum = |c: &str| {
            let v = |i| u8::from_str_radix(&c[i..i + 2], 16).unwrap() as f64;
            0.2126 * v(1) + 0.7152 * v(3) + 0.0722 * v(5)
        };
        let mut prev = -1.0;
        for k in 0..=20 {
            let l = lum(&color(k as f64 / 20.0));
            assert!(l > prev);
            prev = l;
        }
    }

    #[test]
    fn rejects_wrong_rank() {
        let mut g = grid(&[(Status::Converged, 1); 4]);
        g.axes.pop();
        assert!(heatmap_svg(&g).is_err());
    }
}
