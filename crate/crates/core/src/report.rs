//! CSV tables and optional SVG charts.
//!
//! Column layouts are fixed:
//!
//! | file              | columns                                   |
//! |-------------------|-------------------------------------------|
//! | `convergence.csv` | `iteration,cost,mean,std`                 |
//! | `histogram.csv`   | `lower,upper,count,density`               |
//! | `kde.csv`         | `x,density`                               |
//! | `surface.csv`     | `y1,y2,value`                             |
//! | `counts.csv`      | `fidelity,evaluations`                    |
//! | `uncertainty.csv` | `iteration,cost,max_uncertainty,relative` |
//!
//! Floats are written in shortest round-trip form, so identical results
//! give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;
use crate::quadrature::ParamDomain;
use crate::stats::{Histogram, Kde};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub iteration: usize,
    pub cost: f64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyRow {
    pub iteration: usize,
    pub cost: f64,
    pub max_uncertainty: f64,
    /// Relative to the response range.
    pub relative: f64,
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_convergence(path: impl AsRef<Path>, rows: &[ConvergenceRow]) -> Result<()> {
    write_rows(path.as_ref(), rows)
}

pub fn read_convergence(path: impl AsRef<Path>) -> Result<Vec<ConvergenceRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_uncertainty(path: impl AsRef<Path>, rows: &[UncertaintyRow]) -> Result<()> {
    write_rows(path.as_ref(), rows)
}

pub fn write_histogram(path: impl AsRef<Path>, h: &Histogram) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        lower: f64,
        upper: f64,
        count: usize,
        density: f64,
    }
    let rows: Vec<Row> = (0..h.counts.len())
        .map(|i| Row {
            lower: h.edges[i],
            upper: h.edges[i + 1],
            count: h.counts[i],
            density: h.density[i],
        })
        .collect();
    write_rows(path.as_ref(), &rows)
}

pub fn write_kde(path: impl AsRef<Path>, k: &Kde) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        x: f64,
        density: f64,
    }
    let rows: Vec<Row> = k
        .x
        .iter()
        .zip(&k.density)
        .map(|(&x, &density)| Row { x, density })
        .collect();
    write_rows(path.as_ref(), &rows)
}

pub fn write_counts(path: impl AsRef<Path>, counts: &[(MultiIndex, usize)]) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        fidelity: String,
        evaluations: usize,
    }
    let rows: Vec<Row> = counts
        .iter()
        .map(|(a, n)| Row {
            fidelity: a.to_string(),
            evaluations: *n,
        })
        .collect();
    write_rows(path.as_ref(), &rows)
}

/// Values of a response surface on a regular grid over the first two
/// parameters; any further parameters sit at the domain centre.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRaster {
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    /// `values[i][j]` at `(y1[i], y2[j])`.
    pub values: Vec<Vec<f64>>,
}

impl SurfaceRaster {
    /// Samples `f` on an `n x n` grid including the domain bounds.
    pub fn sample<F>(mut f: F, dom: &ParamDomain, n: usize) -> Result<Self>
    where
        F: FnMut(&[f64]) -> f64,
    {
        if n < 2 {
            return Err(Error::InvalidArgument("surface raster needs n >= 2".into()));
        }
        let axis = |d: usize| -> Vec<f64> {
            if d >= dom.dim() {
                return vec![0.0];
            }
            (0..n)
                .map(|i| dom.lower[d] + (dom.upper[d] - dom.lower[d]) * i as f64 / (n - 1) as f64)
                .collect()
        };
        let (y1, y2) = (axis(0), axis(1));
        let mut y = dom.center();
        let mut values = Vec::with_capacity(y1.len());
        for a in &y1 {
            y[0] = *a;
            let mut row = Vec::with_capacity(y2.len());
            for b in &y2 {
                if dom.dim() > 1 {
                    y[1] = *b;
                }
                row.push(f(&y));
            }
            values.push(row);
        }
        Ok(SurfaceRaster { y1, y2, values })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            y1: f64,
            y2: f64,
            value: f64,
        }
        let mut rows = Vec::new();
        for (i, a) in self.y1.iter().enumerate() {
            for (j, b) in self.y2.iter().enumerate() {
                rows.push(Row {
                    y1: *a,
                    y2: *b,
                    value: self.values[i][j],
                });
            }
        }
        write_rows(path.as_ref(), &rows)
    }
}

/// A named polyline for [`line_chart_svg`].
pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn bounds(points: impl Iterator<Item = (f64, f64)>) -> (f64, f64, f64, f64) {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        let pad = 0.5 * y0.abs().max(1.0);
        y0 -= pad;
        y1 += pad;
    }
    (x0, x1, y0, y1)
}

/// Minimal SVG line chart: axes, tick labels at the extremes, legend.
pub fn line_chart_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h, m) = (640.0, 400.0, 60.0);
    let (x0, x1, y0, y1) = bounds(series.iter().flat_map(|s| s.points.iter().copied()));
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} V{} H{}" fill="none" stroke="black"/>"#,
        h - m,
        w - m
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 15.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(y_label)
    );
    for (v, x) in [(x0, sx(x0)), (x1, sx(x1))] {
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">{v:.4}</text>"#, h - m + 16.0);
    }
    for (v, y) in [(y0, sy(y0)), (y1, sy(y1))] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end">{v:.4}</text>"#, m - 4.0);
    }
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        for (j, (x, y)) in ser.points.iter().enumerate() {
            let _ = write!(d, "{}{:.2} {:.2} ", if j == 0 { "M" } else { "L" }, sx(*x), sy(*y));
        }
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end());
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            w - m - 120.0,
            m + 16.0 * (i as f64 + 1.0),
            escape(ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Histogram bars with the density estimate overlaid.
pub fn distribution_svg(title: &str, h: &Histogram, k: &Kde) -> String {
    let bars: Vec<(f64, f64)> = h
        .density
        .iter()
        .enumerate()
        .flat_map(|(i, d)| [(h.edges[i], *d), (h.edges[i + 1], *d)])
        .collect();
    line_chart_svg(
        title,
        "value",
        "density",
        &[
            Series {
                name: "histogram",
                points: bars,
            },
            Series {
                name: "kde",
                points: k.x.iter().copied().zip(k.density.iter().copied()).collect(),
            },
        ],
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
