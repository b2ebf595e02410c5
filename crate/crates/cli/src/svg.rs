//! Minimal SVG 1.1 line plots.

use std::fmt::Write;

const PANEL_WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn panel(out: &mut String, p: &Panel, top: f64) {
    let xs = bounds(p.series.iter().flat_map(|s| s.points.iter().map(|q| q.0)));
    let ys = bounds(p.series.iter().flat_map(|s| s.points.iter().map(|q| q.1)));
    let (w, h) = (PANEL_WIDTH - 2.0 * MARGIN, PANEL_HEIGHT - 2.0 * MARGIN);
    let sx = |x: f64| MARGIN + (x - xs.0) / (xs.1 - xs.0) * w;
    let sy = |y: f64| top + MARGIN + (ys.1 - y) / (ys.1 - ys.0) * h;
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{:.2}" width="{w}" height="{h}" fill="none" stroke="black"/>"#,
        top + MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="16">{}</text>"#,
        PANEL_WIDTH / 2.0,
        top + 0.6 * MARGIN,
        escape(&p.title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
        PANEL_WIDTH / 2.0,
        top + PANEL_HEIGHT - 0.2 * MARGIN,
        escape(&p.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
        0.3 * MARGIN,
        top + PANEL_HEIGHT / 2.0,
        0.3 * MARGIN,
        top + PANEL_HEIGHT / 2.0,
        escape(&p.y_label)
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (x, y) = (xs.0 + t * (xs.1 - xs.0), ys.0 + t * (ys.1 - ys.0));
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{x:.4}</text>"#,
            sx(x),
            top + MARGIN + h + 15.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{y:.4}</text>"#,
            MARGIN - 4.0,
            sy(y) + 4.0
        );
    }
    for (k, s) in p.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|q| q.0.is_finite() && q.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ =
            writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" fill="{color}">{}</text>"#,
            MARGIN + 10.0,
            top + MARGIN + 18.0 + 16.0 * k as f64,
            escape(&s.label)
        );
    }
}

/// Panels stacked vertically in one document.
pub fn render(panels: &[Panel]) -> String {
    let height = PANEL_HEIGHT * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{PANEL_WIDTH}" height="{height}" viewBox="0 0 {PANEL_WIDTH} {height}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        panel(&mut out, p, PANEL_HEIGHT * i as f64);
    }
    out.push_str("</svg>\n");
    out
}
