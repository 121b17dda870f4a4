//! Minimal SVG line charts.

use std::fmt::Write;

use super::output::{EnvelopeTable, TrajectoryTable};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 140.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;
const TICKS: usize = 5;
/// Points kept per series after decimation.
const MAX_POINTS: usize = 2000;

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub dashed: bool,
    /// Disjoint pieces; each is drawn as its own polyline.
    pub segments: Vec<Vec<(f64, f64)>>,
}

impl Series {
    pub fn solid(label: &str, color: &'static str, t: &[f64], y: &[f64]) -> Self {
        let points = t.iter().copied().zip(y.iter().copied()).collect();
        Series {
            label: label.into(),
            color,
            dashed: false,
            segments: vec![points],
        }
    }

    /// Builds a dashed curve that breaks wherever `y` is missing.
    pub fn dashed(label: &str, color: &'static str, t: &[f64], y: &[Option<f64>]) -> Self {
        let mut segments = Vec::new();
        let mut run = Vec::new();
        for (&t, y) in t.iter().zip(y) {
            match y {
                Some(v) if v.is_finite() => run.push((t, *v)),
                _ if !run.is_empty() => segments.push(std::mem::take(&mut run)),
                _ => {}
            }
        }
        if !run.is_empty() {
            segments.push(run);
        }
        Series {
            label: label.into(),
            color,
            dashed: true,
            segments,
        }
    }
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn decimate(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(MAX_POINTS);
    let mut out: Vec<_> = points.iter().copied().step_by(stride).collect();
    if out.last() != points.last() {
        out.push(points[points.len() - 1]);
    }
    out
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

impl Chart {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        let pts = self
            .series
            .iter()
            .flat_map(|s| s.segments.iter().flatten())
            .filter(|(x, y)| x.is_finite() && y.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, 1.0f64);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1) = (0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        (x0, x1, y0, y1)
    }

    pub fn to_svg(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| MARGIN_TOP + plot_h - (y - y0) / (y1 - y0) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            escape(&self.title)
        );

        // axes
        let (left, right, top, bottom) = (
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w,
            MARGIN_TOP,
            MARGIN_TOP + plot_h,
        );
        let _ = writeln!(
            svg,
            r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" fill="none" stroke="black"/>"#
        );
        for k in 0..=TICKS {
            let f = k as f64 / TICKS as f64;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let (px, py) = (sx(xv), sy(yv));
            let _ = writeln!(
                svg,
                r#"<line x1="{px:.2}" y1="{bottom}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                bottom + 5.0,
                bottom + 18.0,
                tick_label(xv)
            );
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{py:.2}" x2="{left}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                left - 5.0,
                left - 8.0,
                py + 4.0,
                tick_label(yv)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            left + plot_w / 2.0,
            HEIGHT - 10.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            top + plot_h / 2.0,
            top + plot_h / 2.0,
            escape(&self.y_label)
        );

        for s in &self.series {
            let dash = if s.dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            for seg in &s.segments {
                let pts: Vec<String> = decimate(seg)
                    .into_iter()
                    .filter(|(x, y)| x.is_finite() && y.is_finite())
                    .map(|(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                    .collect();
                if pts.is_empty() {
                    continue;
                }
                let _ = writeln!(
                    svg,
                    r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
                    pts.join(" "),
                    s.color
                );
            }
        }

        // legend
        for (n, s) in self.series.iter().enumerate() {
            let y = top + 10.0 + 20.0 * n as f64;
            let x = right + 15.0;
            let dash = if s.dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            let _ = writeln!(
                svg,
                r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
                x + 25.0,
                s.color,
                x + 32.0,
                y + 4.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// S, I, R against time, with optional envelope curves around I.
pub fn trajectory_chart(title: &str, traj: &TrajectoryTable, env: Option<&EnvelopeTable>) -> Chart {
    let mut series = Vec::new();
    if !traj.is_empty() {
        series.push(Series::solid("S", "#1f77b4", &traj.t, &traj.s));
        series.push(Series::solid("I", "#d62728", &traj.t, &traj.i));
        series.push(Series::solid("R", "#2ca02c", &traj.t, &traj.r));
    }
    if let Some(env) = env {
        series.push(Series::dashed("I lower", "#7f7f7f", &env.t, &env.lower));
        series.push(Series::dashed("I upper", "#000000", &env.t, &env.upper));
    }
    Chart {
        title: title.into(),
        x_label: "t".into(),
        y_label: "fraction".into(),
        series,
    }
}
