use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use super::{Projection, TsneError};

/// Tableau 10.
pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScatterFormat {
    Csv,
    Svg,
}

impl ScatterFormat {
    /// Format implied by the file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        path.extension()?.to_str()?.parse().ok()
    }
}

impl FromStr for ScatterFormat {
    type Err = TsneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "svg" => Ok(Self::Svg),
            _ => Err(TsneError::Config(format!("unknown scatter format '{s}' (expected csv or svg)"))),
        }
    }
}

/// Nine significant digits.
fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

fn csv(p: &Projection) -> String {
    let mut out = String::from("x,y,label\n");
    for (i, &label) in p.labels.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", sig9(p.coords.get(i, 0)), sig9(p.coords.get(i, 1)), label);
    }
    out
}

const SIZE: f64 = 800.0;
const MARGIN: f64 = 20.0;
const LEGEND_WIDTH: f64 = 140.0;

fn svg(p: &Projection) -> String {
    let n = p.labels.len();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let (x, y) = (p.coords.get(i, 0), p.coords.get(i, 1));
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let plot = SIZE - 2.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = SIZE + LEGEND_WIDTH,
        h = SIZE
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<g stroke="none" fill-opacity="0.8">"#);
    for (i, &label) in p.labels.iter().enumerate() {
        let cx = MARGIN + (p.coords.get(i, 0) - x0) / span * plot;
        let cy = SIZE - MARGIN - (p.coords.get(i, 1) - y0) / span * plot;
        let _ = writeln!(
            out,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="2.5" fill="{}"/>"#,
            PALETTE[label % PALETTE.len()]
        );
    }
    let _ = writeln!(out, "</g>");
    let mut classes: Vec<usize> = p.labels.clone();
    classes.sort_unstable();
    classes.dedup();
    let _ = writeln!(out, r#"<g font-family="sans-serif" font-size="14">"#);
    for (k, class) in classes.iter().enumerate() {
        let y = MARGIN + 22.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{y}" width="12" height="12" fill="{}"/><text x="{tx}" y="{ty}">class {class}</text>"#,
            PALETTE[class % PALETTE.len()],
            x = SIZE + 10.0,
            tx = SIZE + 28.0,
            ty = y + 11.0,
        );
    }
    let _ = writeln!(out, "</g>\n</svg>");
    out
}

/// Writes the projection as `x,y,label` CSV or as an SVG scatter plot.
pub fn emit_scatter(p: &Projection, path: impl AsRef<Path>, format: ScatterFormat) -> Result<(), TsneError> {
    let path = path.as_ref();
    let text = match format {
        ScatterFormat::Csv => csv(p),
        ScatterFormat::Svg => svg(p),
    };
    let io = |source| TsneError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = std::fs::File::create(path).map_err(io)?;
    file.write_all(text.as_bytes()).map_err(io)
}
