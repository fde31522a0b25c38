//! Minimal SVG 1.1 emitter: line plots, scatter plots and heatmaps.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
    LineMarkers,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

impl Series {
    pub fn new(label: &str, x: &[f64], y: &[f64], style: Style) -> Self {
        Self {
            label: label.to_string(),
            points: x.iter().copied().zip(y.iter().copied()).collect(),
            style,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (l, r) = (LEFT, WIDTH - RIGHT);
    let (t, b) = (TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        r - l,
        b - t
    );
    for x in ticks(f.x0, f.x1) {
        let px = f.px(x);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{b}" x2="{px:.2}" y2="{}" stroke="black"/><text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
            b + 5.0,
            b + 18.0,
            fmt_tick(x)
        );
    }
    for y in ticks(f.y0, f.y1) {
        let py = f.py(y);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{py:.2}" x2="{l}" y2="{py:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            l - 5.0,
            l - 8.0,
            py + 4.0,
            fmt_tick(y)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        HEIGHT - 15.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{0:.2}" text-anchor="middle" transform="rotate(-90 18 {0:.2})">{1}</text>"#,
        (t + b) / 2.0,
        escape(ylabel)
    );
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

pub fn xy_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let (x0, x1) = span(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = span(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let f = Frame { x0, x1, y0, y1 };
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &f, xlabel, ylabel);
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let finite: Vec<(f64, f64)> = s
            .points
            .iter()
            .copied()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        if matches!(s.style, Style::Line | Style::LineMarkers) && finite.len() > 1 {
            let pts: Vec<String> = finite
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
        }
        if matches!(s.style, Style::Markers | Style::LineMarkers) {
            for &(x, y) in &finite {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    f.px(x),
                    f.py(y)
                );
            }
        }
    }
    let labelled: Vec<_> = series.iter().enumerate().filter(|(_, s)| !s.label.is_empty()).collect();
    if labelled.len() <= 8 {
        for (row, (k, s)) in labelled.iter().enumerate() {
            let y = TOP + 15.0 + 15.0 * row as f64;
            let x = WIDTH - RIGHT - 150.0;
            let _ = writeln!(
                out,
                r#"<line x1="{x}" y1="{0}" x2="{1}" y2="{0}" stroke="{2}" stroke-width="2"/><text x="{3}" y="{4}">{5}</text>"#,
                y - 4.0,
                x + 20.0,
                PALETTE[k % PALETTE.len()],
                x + 25.0,
                y,
                escape(&s.label)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Cell-centred heatmap of integer classes; `None` cells are drawn grey. `edges` are
/// extra segments in data coordinates, drawn on top.
pub struct Heatmap<'a> {
    pub title: &'a str,
    pub xlabel: &'a str,
    pub ylabel: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
    /// Row-major in x: `values[ix * y.len() + iy]`.
    pub values: &'a [Option<i64>],
    pub edges: &'a [((f64, f64), (f64, f64))],
}

pub fn heatmap(h: &Heatmap<'_>) -> String {
    let dx = cell_width(h.x);
    let dy = cell_width(h.y);
    let (x0, x1) = span(h.x.iter().copied());
    let (y0, y1) = span(h.y.iter().copied());
    let f = Frame {
        x0: x0 - dx / 2.0,
        x1: x1 + dx / 2.0,
        y0: y0 - dy / 2.0,
        y1: y1 + dy / 2.0,
    };
    let mut out = String::new();
    header(&mut out, h.title);
    let w = (f.px(dx) - f.px(0.0)).abs();
    let hgt = (f.py(0.0) - f.py(dy)).abs();
    for (ix, &x) in h.x.iter().enumerate() {
        for (iy, &y) in h.y.iter().enumerate() {
            let fill = match h.values[ix * h.y.len() + iy] {
                None => "#bbbbbb",
                Some(0) => "#f2f2f2",
                Some(1) => "#3b6fb6",
                Some(v) => PALETTE[(v.unsigned_abs() as usize) % PALETTE.len()],
            };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                f.px(x - dx / 2.0),
                f.py(y + dy / 2.0),
                w + 0.05,
                hgt + 0.05
            );
        }
    }
    for &((xa, ya), (xb, yb)) in h.edges {
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
            f.px(xa),
            f.py(ya),
            f.px(xb),
            f.py(yb)
        );
    }
    axes(&mut out, &f, h.xlabel, h.ylabel);
    out.push_str("</svg>\n");
    out
}

fn cell_width(v: &[f64]) -> f64 {
    if v.len() < 2 {
        1.0
    } else {
        (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64
    }
}
