//! SVG plots rendered from exported CSVs only.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::artifacts::{write_atomic, Table, CONVERGENCE, SCHEDULES};
use crate::error::{CliError, Result};

pub const SCHEDULES_SVG: &str = "schedules.svg";
pub const CONVERGENCE_SVG: &str = "convergence.svg";

const WIDTH: f64 = 720.0;
const LEFT: f64 = 150.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const PANEL_HEIGHT: f64 = 60.0;
const PANEL_GAP: f64 = 24.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn column(table: &Table, name: &str, path: &Path) -> Result<usize> {
    table.column(name).ok_or_else(|| CliError::Csv {
        path: path.to_path_buf(),
        message: format!("missing column `{name}`"),
    })
}

/// Step plot of every schedule column, one panel each, values on `[0, 1]`.
pub fn schedules_svg(table: &Table, path: &Path) -> Result<String> {
    let start = column(table, "t_start", path)?;
    let end = column(table, "t_end", path)?;
    let first = end + 1;
    let t0 = table.rows.first().map_or(0.0, |r| r[start]);
    let t1 = table.rows.last().map_or(1.0, |r| r[end]);
    let span = if t1 > t0 { t1 - t0 } else { 1.0 };
    let plot_width = WIDTH - LEFT - RIGHT;
    let xs = |t: f64| LEFT + plot_width * (t - t0) / span;
    let panels = table.headers.len().saturating_sub(first);
    let height = TOP + panels as f64 * (PANEL_HEIGHT + PANEL_GAP) + 20.0;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    for (k, name) in table.headers[first..].iter().enumerate() {
        let c = first + k;
        let top = TOP + k as f64 * (PANEL_HEIGHT + PANEL_GAP);
        let ys = |v: f64| top + PANEL_HEIGHT * (1.0 - v);
        let name = escape(name);
        writeln!(
            svg,
            r#"<g class="panel" data-schedule="{name}" data-top="{top}" data-height="{PANEL_HEIGHT}">"#
        )
        .unwrap();
        writeln!(
            svg,
            r##"<rect x="{LEFT}" y="{top}" width="{plot_width}" height="{PANEL_HEIGHT}" fill="none" stroke="#999"/>"##
        )
        .unwrap();
        writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y}" x2="{x2}" y2="{y}" stroke="#ddd" stroke-dasharray="4 3"/>"##,
            y = ys(0.5),
            x2 = LEFT + plot_width
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{name}</text>"#,
            LEFT - 8.0,
            ys(0.5) + 4.0
        )
        .unwrap();
        // Steps that render at the same height merge into one stroke.
        let mut runs: Vec<(f64, f64, String)> = Vec::new();
        for row in &table.rows {
            let y = format!("{:.3}", ys(row[c]));
            match runs.last_mut() {
                Some(run) if run.2 == y => run.1 = row[end],
                _ => runs.push((row[start], row[end], y)),
            }
        }
        let mut d = String::new();
        for (k, (from, to, y)) in runs.iter().enumerate() {
            if k == 0 {
                write!(d, "M{:.3} {y}", xs(*from)).unwrap();
            } else {
                write!(d, " V{y}").unwrap();
            }
            write!(d, " H{:.3}", xs(*to)).unwrap();
        }
        writeln!(
            svg,
            r##"<path d="{d}" fill="none" stroke="#1f5fa8" stroke-width="2"/>"##
        )
        .unwrap();
        svg.push_str("</g>\n");
    }
    writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">time [s]</text>"#,
        LEFT + plot_width / 2.0,
        height - 6.0
    )
    .unwrap();
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Objective and gradient norm against the global iteration index, log scale.
pub fn convergence_svg(table: &Table, path: &Path) -> Result<String> {
    let index = column(table, "index", path)?;
    let series = [
        (column(table, "objective", path)?, "objective", "#1f5fa8"),
        (column(table, "gradient_norm", path)?, "gradient_norm", "#c0392b"),
    ];
    let log = |v: f64| v.max(1e-300).log10();
    let n = table.rows.last().map_or(1.0, |r| r[index]).max(1.0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for row in &table.rows {
        for (c, _, _) in series {
            if row[c].is_finite() {
                lo = lo.min(log(row[c]));
                hi = hi.max(log(row[c]));
            }
        }
    }
    if !(lo < hi) {
        (lo, hi) = (lo.min(0.0) - 1.0, hi.max(0.0) + 1.0);
    }
    let (lo, hi) = (lo.floor(), hi.ceil());
    let height = 360.0;
    let plot_width = WIDTH - LEFT - RIGHT;
    let plot_height = height - TOP - 50.0;
    let xs = |i: f64| LEFT + plot_width * i / n;
    let ys = |v: f64| TOP + plot_height * (hi - log(v)) / (hi - lo);

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(
        svg,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_width}" height="{plot_height}" fill="none" stroke="#999"/>"##
    )
    .unwrap();
    let mut e = lo;
    while e <= hi {
        let y = TOP + plot_height * (hi - e) / (hi - lo);
        writeln!(
            svg,
            r#"<text x="{}" y="{:.3}" text-anchor="end">1e{e}</text>"#,
            LEFT - 6.0,
            y + 4.0
        )
        .unwrap();
        e += ((hi - lo) / 8.0).ceil().max(1.0);
    }
    for (k, (c, name, colour)) in series.iter().enumerate() {
        let points: Vec<String> = table
            .rows
            .iter()
            .filter(|r| r[*c].is_finite())
            .map(|r| format!("{:.3},{:.3}", xs(r[index]), ys(r[*c])))
            .collect();
        writeln!(
            svg,
            r#"<polyline data-series="{name}" points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            points.join(" ")
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{colour}">{name}</text>"#,
            LEFT + 10.0,
            TOP + 16.0 + 14.0 * k as f64
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">iteration</text>"#,
        LEFT + plot_width / 2.0,
        height - 14.0
    )
    .unwrap();
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders both plots from the CSVs in `dir` into `out`.
pub fn render(dir: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let schedules_csv = dir.join(SCHEDULES);
    let convergence_csv = dir.join(CONVERGENCE);
    let schedules = Table::read(&schedules_csv)?;
    let convergence = Table::read(&convergence_csv)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let written = vec![out.join(SCHEDULES_SVG), out.join(CONVERGENCE_SVG)];
    write_atomic(&written[0], schedules_svg(&schedules, &schedules_csv)?.as_bytes())?;
    write_atomic(&written[1], convergence_svg(&convergence, &convergence_csv)?.as_bytes())?;
    Ok(written)
}
