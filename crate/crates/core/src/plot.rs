//! Minimal SVG 1.1 line plots with numeric axis ticks.
//!
//! Output depends only on the data, so identical inputs give byte-identical
//! documents.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

const PALETTE: [&str; 6] = ["#1f4e9c", "#c0392b", "#27853a", "#8e44ad", "#d68910", "#555555"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, xs: &[f64], ys: &[f64]) -> Self {
        Self {
            label: label.into(),
            points: xs.iter().copied().zip(ys.iter().copied()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvgPlot {
    pub width: u32,
    pub height: u32,
    pub margin: u32,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Same data scale on both axes (for projected curves).
    pub equal_aspect: bool,
    pub series: Vec<Series>,
}

impl SvgPlot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            width: 640,
            height: 480,
            margin: 64,
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            equal_aspect: false,
            series: Vec::new(),
        }
    }

    pub fn with_series(mut self, series: Series) -> Self {
        self.series.push(series);
        self
    }

    pub fn equal_aspect(mut self) -> Self {
        self.equal_aspect = true;
        self
    }

    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut x = [f64::INFINITY, f64::NEG_INFINITY];
        let mut y = x;
        for &(px, py) in self.series.iter().flat_map(|s| &s.points) {
            if px.is_finite() && py.is_finite() {
                x = [x[0].min(px), x[1].max(px)];
                y = [y[0].min(py), y[1].max(py)];
            }
        }
        let widen = |r: [f64; 2]| {
            if !r[0].is_finite() {
                [0.0, 1.0]
            } else if r[1] - r[0] <= 1e-12 * r[0].abs().max(1.0) {
                let pad = 0.5 * r[0].abs().max(1.0);
                [r[0] - pad, r[1] + pad]
            } else {
                r
            }
        };
        (widen(x), widen(y))
    }

    pub fn render(&self) -> String {
        let (mut xr, mut yr) = self.bounds();
        let m = self.margin as f64;
        let pw = self.width as f64 - 2.0 * m;
        let ph = self.height as f64 - 2.0 * m;
        if self.equal_aspect {
            let scale = ((xr[1] - xr[0]) / pw).max((yr[1] - yr[0]) / ph);
            let (cx, cy) = (0.5 * (xr[0] + xr[1]), 0.5 * (yr[0] + yr[1]));
            xr = [cx - 0.5 * scale * pw, cx + 0.5 * scale * pw];
            yr = [cy - 0.5 * scale * ph, cy + 0.5 * scale * ph];
        }
        let sx = |x: f64| m + (x - xr[0]) / (xr[1] - xr[0]) * pw;
        let sy = |y: f64| m + ph - (y - yr[0]) / (yr[1] - yr[0]) * ph;

        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = self.width,
            h = self.height
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
            self.width as f64 / 2.0,
            m / 2.0,
            escape(&self.title)
        );
        // Frame.
        let _ = writeln!(
            out,
            r#"<rect x="{m:.2}" y="{m:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black" stroke-width="1"/>"#
        );
        for t in ticks(xr[0], xr[1]) {
            let x = sx(t);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
                m + ph,
                m + ph + 5.0,
                m + ph + 18.0,
                tick_label(t)
            );
        }
        for t in ticks(yr[0], yr[1]) {
            let y = sy(t);
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{m:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
                m - 5.0,
                m - 8.0,
                y + 4.0,
                tick_label(t)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
            m + pw / 2.0,
            self.height as f64 - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{y:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {y:.2})">{}</text>"#,
            escape(&self.y_label),
            y = m + ph / 2.0
        );
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
            if self.series.len() > 1 {
                let ly = m + 16.0 + 16.0 * i as f64;
                let lx = m + pw - 150.0;
                let _ = writeln!(
                    out,
                    r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
                    lx + 20.0,
                    lx + 26.0,
                    ly + 4.0,
                    escape(&s.label)
                );
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick positions at multiples of 1, 2 or 5 times a power of ten, about 5 per axis.
pub fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|f| f * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(t: f64) -> String {
    if t == 0.0 {
        return "0".into();
    }
    let a = t.abs();
    if !(1e-3..1e4).contains(&a) {
        return format!("{t:.1e}");
    }
    let s = format!("{t:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}
