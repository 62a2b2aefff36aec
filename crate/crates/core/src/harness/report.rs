//! Plain CSV tables and a single log–log SVG chart.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{ConvergenceReport, HarnessError};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits round-trip every f64
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// Comma-separated, LF-terminated, header first.
pub fn render_csv(table: &Table) -> String {
    let mut out = table.header.join(",");
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<(), HarnessError> {
    fs::write(path, render_csv(table))?;
    Ok(())
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
/// Zero errors are drawn at this floor on the log axis.
const ERROR_FLOOR: f64 = 1e-16;

/// Line chart of `abs_error` against `n`, both axes logarithmic.
pub fn render_svg(report: &ConvergenceReport) -> String {
    let points: Vec<(f64, f64)> = report
        .rows
        .iter()
        .map(|r| ((r.n as f64).log10(), r.abs_error.max(ERROR_FLOOR).log10()))
        .collect();
    let (x_lo, x_hi) = decade_range(points.iter().map(|p| p.0));
    let (y_lo, y_hi) = decade_range(points.iter().map(|p| p.1));
    let sx = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" stroke="black" fill="none"/>"#
    );
    for d in (x_lo as i32)..=(x_hi as i32) {
        let x = sx(d as f64);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-size="12" text-anchor="middle">1e{d}</text>"#,
            bottom + 18.0
        );
    }
    for d in (y_lo as i32)..=(y_hi as i32) {
        let y = sy(d as f64);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{y:.2}" font-size="12" text-anchor="end">1e{d}</text>"#,
            left - 6.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">n</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">abs_error</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    if !points.is_empty() {
        let path: Vec<String> = points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| format!("{}{:.2} {:.2}", if i == 0 { "M" } else { "L" }, sx(x), sy(y)))
            .collect();
        let _ = writeln!(s, r#"<path d="{}" stroke="steelblue" stroke-width="2" fill="none"/>"#, path.join(" "));
        for &(x, y) in &points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(x), sy(y));
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg(report: &ConvergenceReport, path: &Path) -> Result<(), HarnessError> {
    fs::write(path, render_svg(report))?;
    Ok(())
}

/// Enclosing whole decades, at least one decade wide.
fn decade_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let (lo, hi) = (lo.floor(), hi.ceil());
    if hi > lo {
        (lo, hi)
    } else {
        (lo, lo + 1.0)
    }
}
