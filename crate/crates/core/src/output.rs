//! CSV, JSON and SVG writers.
//!
//! Every writer is a pure function of its input returning a `String`, so
//! output bytes depend only on the data. The `write_*` helpers put those
//! strings on disk.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::conductance::level_energy;
use crate::dispersion::DispersionCurve;
use crate::error::{Error, Result};

/// Header of the curve CSV.
pub const CSV_HEADER: &str = "xi,branch,lambda,dlambda_dxi";

/// Float with 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn check_finite(curves: &[DispersionCurve]) -> Result<()> {
    for c in curves {
        let bad = c
            .xis
            .iter()
            .chain(&c.thetas)
            .chain(&c.slopes)
            .any(|v| !v.is_finite());
        if bad {
            return Err(Error::Invariant(format!("branch {} has non-finite samples", c.branch)));
        }
    }
    Ok(())
}

/// One row per sample, grouped by branch in the given order.
pub fn curves_csv(curves: &[DispersionCurve]) -> Result<String> {
    check_finite(curves)?;
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for c in curves {
        for i in 0..c.len() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                num(c.xis[i]),
                c.branch,
                num(c.lambda(i)),
                num(c.slopes[i])
            );
        }
    }
    Ok(s)
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidParameter(format!("cannot serialize: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Plot layout for [`curves_svg`].
#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    pub width: f64,
    pub height: f64,
    /// Energy range; `None` chooses one from the branches and Landau levels.
    pub y_range: Option<(f64, f64)>,
    pub title: Option<String>,
    pub x_label: Option<String>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            width: 640.0,
            height: 480.0,
            y_range: None,
            title: None,
            x_label: None,
        }
    }
}

const MARGIN: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// How a [`Series`] is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Points,
}

/// One labelled data set of a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub colour: &'static str,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
}

/// Static chart with dashed horizontal reference lines at `dashed`.
pub fn line_chart(series: &[Series], dashed: &[f64], opts: &SvgOptions) -> Result<String> {
    let all = || series.iter().flat_map(|s| s.points.iter().copied());
    if all().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
        return Err(Error::Invariant("non-finite chart data".into()));
    }
    let fold = |f: fn(&(f64, f64)) -> f64| {
        all().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(f(&p)), hi.max(f(&p))))
    };
    let (x0, x1) = fold(|p| p.0);
    let (y0, y1) = opts.y_range.unwrap_or_else(|| {
        let (lo, hi) = fold(|p| p.1);
        let pad = 0.05 * (hi - lo).max(1e-9);
        (lo - pad, hi + pad)
    });
    if !(x1 > x0 && y1 > y0) {
        return Err(Error::InvalidParameter("degenerate plot range".into()));
    }
    let (w, h) = (opts.width, opts.height);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (w - 2.0 * MARGIN);
    let py = |y: f64| h - MARGIN - (y - y0) / (y1 - y0) * (h - 2.0 * MARGIN);
    let p = |v: f64| format!("{v:.3}");
    let text = |s: &mut String, x: f64, y: f64, anchor: &str, body: &str| {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{}</text>"#,
            p(x),
            p(y),
            escape(body)
        );
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let frame = format!(
        r#"x="{}" y="{}" width="{}" height="{}""#,
        p(MARGIN),
        p(MARGIN),
        p(w - 2.0 * MARGIN),
        p(h - 2.0 * MARGIN)
    );
    let _ = writeln!(s, r#"<defs><clipPath id="plot"><rect {frame}/></clipPath></defs>"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<rect {frame} fill="none" stroke="black"/>"#);
    if let Some(t) = &opts.title {
        text(&mut s, w / 2.0, MARGIN / 2.0, "middle", t);
    }
    text(&mut s, px(x0), h - MARGIN / 2.0, "start", &format!("{x0}"));
    text(&mut s, px(x1), h - MARGIN / 2.0, "end", &format!("{x1}"));
    for v in [y0, y1] {
        text(&mut s, MARGIN - 4.0, py(v) + 4.0, "end", &format!("{v:.2}"));
    }
    if let Some(l) = &opts.x_label {
        text(&mut s, w / 2.0, h - MARGIN / 2.0, "middle", l);
    }
    for &level in dashed.iter().filter(|&&l| l > y0 && l < y1) {
        let _ = writeln!(
            s,
            r##"<line class="landau" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#777" stroke-dasharray="6,4"/>"##,
            p(MARGIN),
            p(py(level)),
            p(w - MARGIN),
            p(py(level))
        );
    }
    let _ = writeln!(s, r#"<g clip-path="url(#plot)" fill="none" stroke-width="1.5">"#);
    for series in series {
        match series.style {
            Style::Line => {
                let pts: Vec<String> = series
                    .points
                    .iter()
                    .map(|&(x, y)| format!("{},{}", p(px(x)), p(py(y))))
                    .collect();
                let _ = writeln!(
                    s,
                    r#"<polyline data-label="{}" stroke="{}" points="{}"/>"#,
                    escape(&series.label),
                    series.colour,
                    pts.join(" ")
                );
            }
            Style::Points => {
                for &(x, y) in &series.points {
                    let _ = writeln!(
                        s,
                        r#"<circle data-label="{}" cx="{}" cy="{}" r="4" fill="{}"/>"#,
                        escape(&series.label),
                        p(px(x)),
                        p(py(y)),
                        series.colour
                    );
                }
            }
        }
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

/// Dispersion chart: one polyline per branch, positive branches blue and
/// negative ones red, with dashed lines at the Landau levels.
pub fn curves_svg(curves: &[DispersionCurve], opts: &SvgOptions) -> Result<String> {
    check_finite(curves)?;
    let Some(first) = curves.iter().find(|c| !c.is_empty()) else {
        return Err(Error::InvalidParameter("nothing to plot".into()));
    };
    let b = first.b;
    let mut opts = opts.clone();
    if opts.y_range.is_none() {
        let n = curves.iter().map(|c| c.branch.n).max().unwrap_or(1);
        let top = (2.0 * (n + 1) as f64 * b.abs()).sqrt();
        opts.y_range = Some((-top, top));
    }
    let (y0, y1) = opts.y_range.unwrap_or_default();
    let mut levels = vec![0.0];
    let mut k = 1;
    while level_energy(k, b) < y1.abs().max(y0.abs()) {
        levels.extend([level_energy(k, b), -level_energy(k, b)]);
        k += 1;
    }
    let series: Vec<Series> = curves
        .iter()
        .map(|c| Series {
            label: c.branch.to_string(),
            colour: if c.branch.sign.factor() > 0.0 { "#1f5fbf" } else { "#c0392b" },
            style: Style::Line,
            points: c.xis.iter().copied().zip(c.lambdas()).collect(),
        })
        .collect();
    line_chart(&series, &levels, &opts)
}

/// Write `contents` to `path`.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
