//! Dependency-free SVG 1.1 line charts for traces, the YonX fit and
//! confidence ellipses.
//!
//! Output is a pure function of the inputs: fixed 960×640 viewBox, fixed
//! number formatting, no timestamps or random ids.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::inference::EllipseSpec;
use crate::model::StandardizedModel;
use crate::paths::{PathKind, ShrinkagePath};
use crate::trace::{TraceBundle, TraceType};

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 640.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 760.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 580.0;

/// Solid, short-dash, dot-dash, long-dash.
pub const DASHES: [&str; 4] = ["", "8,4", "2,4,10,4", "18,6"];
pub const COLORS: [&str; 8] = [
    "black",
    "red",
    "green",
    "blue",
    "purple",
    "darkorange",
    "brown",
    "teal",
];

/// Default vertical range of the likelihood-ratio chart.
pub const LR_RANGE: (f64, f64) = (0.0, 80.0);

#[derive(Debug, Clone, Default)]
pub struct RenderOptions<'a> {
    /// A second bundle drawn on the same axes (likelihood-ratio comparisons only).
    pub compare: Option<&'a TraceBundle>,
    /// Fixed vertical range; values outside it are clipped off-scale.
    pub y_range: Option<(f64, f64)>,
    pub title: Option<String>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (RIGHT - LEFT)
    }

    fn py(&self, y: f64) -> f64 {
        BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (BOTTOM - TOP)
    }

    fn contains_y(&self, y: f64) -> bool {
        y.is_finite() && y >= self.y0 && y <= self.y1
    }
}

fn fmt2(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_owned()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="13">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        fmt2((LEFT + RIGHT) / 2.0),
        escape(title)
    );
}

/// Roughly five round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if span.is_nan() || span <= 0.0 || !span.is_finite() {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|f| f * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.').to_owned();
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str, x_ticks: &[f64]) {
    let _ = writeln!(
        out,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        fmt2(LEFT),
        fmt2(TOP),
        fmt2(RIGHT - LEFT),
        fmt2(BOTTOM - TOP)
    );
    for &t in x_ticks {
        let x = fmt2(frame.px(t));
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            fmt2(BOTTOM),
            fmt2(BOTTOM + 6.0),
            fmt2(BOTTOM + 22.0),
            tick_label(t)
        );
    }
    for t in ticks(frame.y0, frame.y1) {
        let y = fmt2(frame.py(t));
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="black"/><text x="{}" y="{y}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            fmt2(LEFT - 6.0),
            fmt2(LEFT),
            fmt2(LEFT - 10.0),
            tick_label(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        fmt2((LEFT + RIGHT) / 2.0),
        fmt2(HEIGHT - 18.0),
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="22" y="{}" text-anchor="middle" transform="rotate(-90 22 {})">{}</text>"#,
        fmt2((TOP + BOTTOM) / 2.0),
        fmt2((TOP + BOTTOM) / 2.0),
        escape(y_label)
    );
}

fn dash_attr(k: usize) -> String {
    match DASHES[k % DASHES.len()] {
        "" => String::new(),
        d => format!(r#" stroke-dasharray="{d}""#),
    }
}

fn legend(out: &mut String, entries: &[(String, &str, String)]) {
    for (k, (name, color, dash)) in entries.iter().enumerate() {
        let y = TOP + 14.0 + 22.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line class="legend" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/><text x="{}" y="{y}" dominant-baseline="middle">{}</text>"#,
            fmt2(RIGHT + 16.0),
            fmt2(RIGHT + 56.0),
            fmt2(RIGHT + 64.0),
            escape(name)
        );
    }
}

/// Drops interior points collinear with their neighbours.
fn simplify(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() < 3 {
        return points.to_vec();
    }
    let scale = points
        .iter()
        .fold(0.0_f64, |m, (x, y)| m.max(x.abs()).max(y.abs()))
        .max(1.0);
    let mut out = vec![points[0]];
    for k in 1..points.len() - 1 {
        let a = *out.last().unwrap();
        let b = points[k];
        let c = points[k + 1];
        let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
        let len = ((c.0 - a.0).powi(2) + (c.1 - a.1).powi(2)).sqrt();
        if cross.abs() > 1e-9 * scale * len.max(f64::MIN_POSITIVE) {
            out.push(b);
        }
    }
    out.push(points[points.len() - 1]);
    out
}

fn polyline(
    out: &mut String,
    frame: &Frame,
    name: &str,
    pts: &[(f64, f64)],
    color: &str,
    dash: &str,
) {
    let coords: Vec<String> = simplify(pts)
        .iter()
        .map(|&(x, y)| format!("{},{}", fmt2(frame.px(x)), fmt2(frame.py(y))))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline class="series" data-series="{}" points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
        escape(name),
        coords.join(" ")
    );
}

/// Splits a series into runs of on-scale points.
fn runs(ms: &[f64], values: &[Option<f64>], frame: &Frame) -> Vec<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for (m, v) in ms.iter().zip(values) {
        match v {
            Some(v) if frame.contains_y(*v) => cur.push((*m, *v)),
            _ => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn auto_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((0.0_f64, 0.0_f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo <= 0.0 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn y_label(trace: TraceType) -> &'static str {
    match trace {
        TraceType::Coef => "fitted coefficients",
        TraceType::Spat => "shrinkage factors (delta)",
        TraceType::Rmse => "relative MSE",
        TraceType::Exev => "excess eigenvalues",
        TraceType::Infd => "inferior direction cosines",
        TraceType::Lr => "-2 log(likelihood ratio)",
    }
}

fn bundle_label(b: &TraceBundle) -> String {
    match (b.path.kind, b.path.q) {
        (PathKind::Qm, Some(q)) => format!("qm (q = {})", tick_label(q)),
        (PathKind::Yonx, _) => "yonx".into(),
        _ => "efficient".into(),
    }
}

fn vline(out: &mut String, frame: &Frame, x: f64, color: &str, dash: &str, class: &str) {
    let px = fmt2(frame.px(x));
    let _ = writeln!(
        out,
        r#"<line class="{class}" x1="{px}" y1="{}" x2="{px}" y2="{}" stroke="{color}" stroke-width="1.5" stroke-dasharray="{dash}"/>"#,
        fmt2(TOP),
        fmt2(BOTTOM)
    );
}

/// Line chart of one trace type against m, with the knot marked.
pub fn render_trace(
    bundle: &TraceBundle,
    trace: TraceType,
    options: &RenderOptions,
) -> Result<String> {
    if options.compare.is_some() && trace != TraceType::Lr {
        return Err(Error::InvalidArgument(
            "a comparison bundle is only supported for the lr trace".into(),
        ));
    }
    let p = bundle.path.p.max(1) as f64;
    let headers = trace.headers(bundle);
    let rows = trace.rows(bundle);
    let mut bundles = vec![bundle];
    if let Some(other) = options.compare {
        bundles.push(other);
    }

    let (y0, y1) = options.y_range.unwrap_or_else(|| match trace {
        TraceType::Lr => LR_RANGE,
        _ => auto_range(rows.iter().flatten().flatten().copied()),
    });
    let frame = Frame {
        x0: 0.0,
        x1: p,
        y0,
        y1,
    };

    let mut out = String::new();
    let title = options
        .title
        .clone()
        .unwrap_or_else(|| format!("{} TRACE ({})", trace.name(), bundle_label(bundle)));
    header(&mut out, &title);
    // quarter steps on short axes, whole numbers otherwise
    let per_unit = if p <= 2.0 { 4 } else { 1 };
    let x_ticks: Vec<f64> = (0..=p as usize * per_unit)
        .map(|k| k as f64 / per_unit as f64)
        .collect();
    axes(
        &mut out,
        &frame,
        "m-extent of shrinkage",
        y_label(trace),
        &x_ticks,
    );

    if frame.contains_y(0.0) {
        let y = fmt2(frame.py(0.0));
        let _ = writeln!(
            out,
            r#"<line class="zero" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="gray" stroke-width="1"/>"#,
            fmt2(LEFT),
            fmt2(RIGHT)
        );
    }
    if !bundle.is_empty() {
        vline(&mut out, &frame, bundle.m_star(), "gray", "6,4", "knot");
    }
    if let Some(other) = options.compare {
        if !other.is_empty() {
            vline(
                &mut out,
                &frame,
                other.m_star(),
                "red",
                "2,4,10,4",
                "marker",
            );
        }
    }

    let mut entries = Vec::new();
    let mut k_style = 0;
    for b in &bundles {
        let b_rows = trace.rows(b);
        for (col, name) in headers.iter().enumerate() {
            let label = if bundles.len() > 1 {
                bundle_label(b)
            } else {
                name.clone()
            };
            let color = if bundles.len() > 1 {
                ["black", "blue"][k_style % 2]
            } else {
                COLORS[k_style % COLORS.len()]
            };
            let dash = if bundles.len() > 1 {
                String::new()
            } else {
                dash_attr(k_style)
            };
            let values: Vec<Option<f64>> =
                b_rows.iter().map(|r| r.as_ref().map(|v| v[col])).collect();
            for run in runs(b.lattice(), &values, &frame) {
                polyline(&mut out, &frame, &label, &run, color, &dash);
            }
            entries.push((label, color, dash));
            k_style += 1;
        }
    }
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    Ok(out)
}

/// `(slope, intercept)` in original units of the OLS, minimum-MSE and
/// double-shrunk lines for a YonX path.
pub fn yonx_lines(model: &StandardizedModel, path: &ShrinkagePath) -> Result<[(f64, f64); 3]> {
    if model.p != 1 {
        return Err(Error::InvalidArgument(format!(
            "YonX plot needs exactly one predictor, got {}",
            model.p
        )));
    }
    let slopes = path
        .display_slopes
        .ok_or_else(|| Error::InvalidArgument("path carries no YonX slopes".into()))?;
    Ok(slopes.map(|s| (s, model.y_mean - s * model.x_means[0])))
}

/// Scatter of (x, y) with the three fitted lines through the centroid.
pub fn render_yonx(model: &StandardizedModel, path: &ShrinkagePath) -> Result<String> {
    let lines = yonx_lines(model, path)?;
    let xs: Vec<f64> = model.x_raw.column(0).iter().copied().collect();
    let ys: Vec<f64> = model.y_raw.iter().copied().collect();
    let (xmin, xmax) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let (ymin, ymax) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let xpad = 0.05 * (xmax - xmin);
    let ypad = 0.1 * (ymax - ymin);
    let frame = Frame {
        x0: xmin - xpad,
        x1: xmax + xpad,
        y0: ymin - ypad,
        y1: ymax + ypad,
    };
    let mut out = String::new();
    header(
        &mut out,
        &format!(
            "{} ~ {}: three shrinkage fits",
            model.y_name, model.x_names[0]
        ),
    );
    axes(
        &mut out,
        &frame,
        &model.x_names[0],
        &model.y_name,
        &ticks(frame.x0, frame.x1),
    );
    for (x, y) in xs.iter().zip(&ys) {
        let _ = writeln!(
            out,
            r#"<circle class="obs" cx="{}" cy="{}" r="4" fill="none" stroke="black"/>"#,
            fmt2(frame.px(*x)),
            fmt2(frame.py(*y))
        );
    }
    let m_star = path.m_star;
    let names = [
        "OLS (m = 0)".to_owned(),
        format!("minimum MSE (m = {})", tick_label(m_star)),
        format!(
            "double shrunk (m = {})",
            tick_label((2.0 * m_star).min(1.0))
        ),
    ];
    let colors = ["blue", "purple", "red"];
    let mut entries = Vec::new();
    for ((&(b, b0), name), color) in lines.iter().zip(&names).zip(colors) {
        let clip = |y: f64| y.clamp(frame.y0, frame.y1);
        // clip the segment to the frame vertically by solving for x
        let xa = if b != 0.0 {
            ((clip(b * frame.x0 + b0) - b0) / b).max(frame.x0)
        } else {
            frame.x0
        };
        let xb = if b != 0.0 {
            ((clip(b * frame.x1 + b0) - b0) / b).min(frame.x1)
        } else {
            frame.x1
        };
        let (xa, xb) = (xa.min(xb), xa.max(xb));
        let _ = writeln!(
            out,
            r#"<line class="fit" data-slope="{}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"/>"#,
            b,
            fmt2(frame.px(xa)),
            fmt2(frame.py(b * xa + b0)),
            fmt2(frame.px(xb)),
            fmt2(frame.py(b * xb + b0))
        );
        entries.push((name.clone(), color, String::new()));
    }
    let xbar = model.x_means[0];
    let _ = writeln!(
        out,
        r#"<circle class="centroid" cx="{}" cy="{}" r="5" fill="black"/>"#,
        fmt2(frame.px(xbar)),
        fmt2(frame.py(model.y_mean))
    );
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Nested confidence ellipses with the shrinkage trajectory overlaid.
pub fn render_ellipse(spec: &EllipseSpec) -> String {
    let all = spec
        .boundaries
        .iter()
        .flatten()
        .chain(&spec.overlay)
        .chain(std::iter::once(&[0.0, 0.0]));
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for p in all {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let (xp, yp) = (0.05 * (x1 - x0).max(1e-12), 0.05 * (y1 - y0).max(1e-12));
    let frame = Frame {
        x0: x0 - xp,
        x1: x1 + xp,
        y0: y0 - yp,
        y1: y1 + yp,
    };
    let mut out = String::new();
    header(
        &mut out,
        &format!("Confidence ellipses: {} vs {}", spec.names.0, spec.names.1),
    );
    axes(
        &mut out,
        &frame,
        &spec.names.0,
        &spec.names.1,
        &ticks(frame.x0, frame.x1),
    );
    if frame.x0 <= 0.0 && frame.x1 >= 0.0 {
        let x = fmt2(frame.px(0.0));
        let _ = writeln!(
            out,
            r#"<line class="zero" x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="gray"/>"#,
            fmt2(TOP),
            fmt2(BOTTOM)
        );
    }
    if frame.contains_y(0.0) {
        let y = fmt2(frame.py(0.0));
        let _ = writeln!(
            out,
            r#"<line class="zero" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="gray"/>"#,
            fmt2(LEFT),
            fmt2(RIGHT)
        );
    }
    let mut entries = Vec::new();
    for (k, (ring, level)) in spec.boundaries.iter().zip(&spec.levels).enumerate() {
        let pts: Vec<String> = ring
            .iter()
            .map(|p| format!("{},{}", fmt2(frame.px(p[0])), fmt2(frame.py(p[1]))))
            .collect();
        let color = COLORS[(k + 1) % COLORS.len()];
        let _ = writeln!(
            out,
            r#"<polygon class="ellipse" data-level="{level}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            pts.join(" ")
        );
        entries.push((
            format!("{}% confidence", tick_label(level * 100.0)),
            color,
            String::new(),
        ));
    }
    let overlay: Vec<(f64, f64)> = spec.overlay.iter().map(|p| (p[0], p[1])).collect();
    polyline(&mut out, &frame, "path", &overlay, "black", &dash_attr(1));
    entries.push(("shrinkage path".into(), "black", dash_attr(1)));
    if let Some(k) = spec.knot_index {
        let p = spec.overlay[k];
        let _ = writeln!(
            out,
            r#"<circle class="knot" cx="{}" cy="{}" r="5" fill="gray"/>"#,
            fmt2(frame.px(p[0])),
            fmt2(frame.py(p[1]))
        );
    }
    let _ = writeln!(
        out,
        r#"<circle class="center" cx="{}" cy="{}" r="4" fill="black"/>"#,
        fmt2(frame.px(spec.center[0])),
        fmt2(frame.py(spec.center[1]))
    );
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplify_collapses_straight_runs() {
        let pts: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 2.0 * k as f64)).collect();
        assert_eq!(simplify(&pts), vec![(0.0, 0.0), (9.0, 18.0)]);
        let mut kinked = pts.clone();
        kinked.extend((10..15).map(|k| (k as f64, 18.0 - (k as f64 - 9.0))));
        assert_eq!(simplify(&kinked).len(), 3);
    }

    #[test]
    fn tick_positions_are_round() {
        assert_eq!(ticks(0.0, 80.0), vec![0.0, 20.0, 40.0, 60.0, 80.0]);
        assert_eq!(tick_label(0.25), "0.25");
        assert_eq!(tick_label(-0.0), "0");
    }
}
