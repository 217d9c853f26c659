//! Static 2x2 SVG figure: (A) Euclidean drift, (B) cosine vs Fubini–Study
//! drift, (C) log ratio, (D) stepwise dot product with flip markers.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{DriftError, Result};
use crate::trajectory::DriftReport;

const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 340.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const COSINE: &str = "#1f77b4";
const PROJECTIVE: &str = "#ff7f0e";
const FLIP: &str = "#d62728";

struct Frame {
    ox: f64,
    oy: f64,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn new(col: usize, row: usize, x_max: f64, (y_min, y_max): (f64, f64)) -> Frame {
        Frame {
            ox: col as f64 * PANEL_W,
            oy: row as f64 * PANEL_H,
            x_min: 1.0,
            x_max: x_max.max(2.0),
            y_min,
            y_max,
        }
    }

    fn plot_w() -> f64 {
        PANEL_W - MARGIN_L - MARGIN_R
    }

    fn plot_h() -> f64 {
        PANEL_H - MARGIN_T - MARGIN_B
    }

    fn x(&self, v: f64) -> f64 {
        self.ox + MARGIN_L + (v - self.x_min) / (self.x_max - self.x_min) * Frame::plot_w()
    }

    fn y(&self, v: f64) -> f64 {
        self.oy + MARGIN_T + (self.y_max - v) / (self.y_max - self.y_min) * Frame::plot_h()
    }
}

/// Padded range covering all values, never empty.
fn y_range<'a>(series: impl IntoIterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = series
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    if span <= 1e-12 * hi.abs().max(1.0) {
        let pad = hi.abs().max(1.0) * 0.5;
        return (lo - pad, hi + pad);
    }
    (lo - 0.05 * span, hi + 0.05 * span)
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a >= 100.0 {
        format!("{v:.0}")
    } else if a >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

fn axes(svg: &mut String, f: &Frame, title: &str, y_label: &str) {
    let (x0, x1) = (f.ox + MARGIN_L, f.ox + MARGIN_L + Frame::plot_w());
    let (y0, y1) = (f.oy + MARGIN_T, f.oy + MARGIN_T + Frame::plot_h());
    let _ = writeln!(
        svg,
        r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
        x1 - x0,
        y1 - y0
    );
    let _ = writeln!(
        svg,
        r##"<text x="{:.2}" y="{:.2}" font-size="14" font-weight="bold">{title}</text>"##,
        f.ox + 12.0,
        f.oy + 24.0
    );
    for i in 0..=4 {
        let v = f.y_min + (f.y_max - f.y_min) * i as f64 / 4.0;
        let y = f.y(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="#444"/>"##,
            x0 - 4.0
        );
        let _ = writeln!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"##,
            x0 - 6.0,
            y + 3.0,
            tick_label(v)
        );
    }
    let n_ticks = ((f.x_max - f.x_min) as usize).clamp(1, 6);
    for i in 0..=n_ticks {
        let v = (f.x_min + (f.x_max - f.x_min) * i as f64 / n_ticks as f64).round();
        let x = f.x(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{y1:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/>"##,
            y1 + 4.0
        );
        let _ = writeln!(
            svg,
            r##"<text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle">{v:.0}</text>"##,
            y1 + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r##"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">step k</text>"##,
        (x0 + x1) / 2.0,
        y1 + 34.0
    );
    let (lx, ly) = (f.ox + 16.0, (y0 + y1) / 2.0);
    let _ = writeln!(
        svg,
        r##"<text x="{lx:.2}" y="{ly:.2}" font-size="11" text-anchor="middle" transform="rotate(-90 {lx:.2} {ly:.2})">{y_label}</text>"##
    );
}

fn polyline(svg: &mut String, f: &Frame, values: &[f64], color: &str, dash: Option<&str>) {
    let points: Vec<String> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| format!("{:.2},{:.2}", f.x((i + 1) as f64), f.y(v)))
        .collect();
    let dash = dash.map_or(String::new(), |d| format!(r##" stroke-dasharray="{d}""##));
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"##,
        points.join(" ")
    );
}

fn legend(svg: &mut String, f: &Frame, row: usize, label: &str, color: &str, dash: Option<&str>) {
    let x = f.ox + MARGIN_L + 10.0;
    let y = f.oy + MARGIN_T + 14.0 + 16.0 * row as f64;
    let dash = dash.map_or(String::new(), |d| format!(r##" stroke-dasharray="{d}""##));
    let _ = writeln!(
        svg,
        r##"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"{dash}/>"##,
        x + 24.0
    );
    let _ = writeln!(
        svg,
        r##"<text x="{:.2}" y="{:.2}" font-size="11">{label}</text>"##,
        x + 30.0,
        y + 4.0
    );
}

pub fn render_panels_string(report: &DriftReport) -> Result<String> {
    if report.is_empty() {
        return Err(DriftError::TrajectoryTooShort { len: 1 });
    }
    let n = report.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif">"##,
        w = 2.0 * PANEL_W,
        h = 2.0 * PANEL_H
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    let a = Frame::new(0, 0, n, y_range(std::iter::once(&0.0).chain(&report.cum_e)));
    axes(
        &mut svg,
        &a,
        "(A) Cumulative Euclidean drift",
        "Δ_E (raw units)",
    );
    polyline(&mut svg, &a, &report.cum_e, "#2ca02c", None);

    let b = Frame::new(
        1,
        0,
        n,
        y_range(
            std::iter::once(&0.0)
                .chain(&report.cum_c)
                .chain(&report.cum_fs),
        ),
    );
    axes(
        &mut svg,
        &b,
        "(B) Cosine vs Fubini–Study drift",
        "cumulative drift (rad)",
    );
    polyline(&mut svg, &b, &report.cum_c, COSINE, None);
    polyline(&mut svg, &b, &report.cum_fs, PROJECTIVE, Some("6 4"));
    legend(&mut svg, &b, 0, "Δ_C cosine", COSINE, None);
    legend(
        &mut svg,
        &b,
        1,
        "Δ_FS Fubini–Study",
        PROJECTIVE,
        Some("6 4"),
    );

    let c = Frame::new(0, 1, n, y_range(&report.log_ratio));
    axes(
        &mut svg,
        &c,
        "(C) log10 ratio Euclidean / Fubini–Study",
        "R(n) (log10)",
    );
    polyline(&mut svg, &c, &report.log_ratio, "#9467bd", None);

    let dots: Vec<f64> = report.steps.iter().map(|s| s.dot).collect();
    let d = Frame::new(1, 1, n, (-1.1, 1.1));
    axes(
        &mut svg,
        &d,
        "(D) Stepwise dot product of consecutive PC1",
        "⟨r_k, r_k+1⟩",
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
        d.x(d.x_min),
        d.x(d.x_max),
        y = d.y(0.0)
    );
    polyline(&mut svg, &d, &dots, "#7f7f7f", None);
    for s in &report.steps {
        let (fill, class) = if s.flip {
            (FLIP, "flip")
        } else {
            ("#333", "step")
        };
        let _ = writeln!(
            svg,
            r##"<circle class="{class}" cx="{:.2}" cy="{:.2}" r="3.5" fill="{fill}"/>"##,
            d.x(s.index as f64),
            d.y(s.dot)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn render_panels(report: &DriftReport, path: &Path) -> Result<()> {
    super::write_file(path, render_panels_string(report)?.as_bytes())
}
