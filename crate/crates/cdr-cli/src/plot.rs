//! Minimal SVG plots for report output. No drawing dependencies: the charts
//! are simple enough that emitting the markup directly keeps the bytes
//! deterministic.

use std::fmt::Write as _;

pub struct PlotPoint {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

pub struct BarDatum {
    pub label: String,
    pub value: f64,
}

const ACCENT: &str = "#4878a8";

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let span = (hi - lo).max(1e-9);
    (lo - 0.08 * span, hi + 0.08 * span)
}

/// Labeled scatter of one point per row, e.g. accuracy against token cost.
pub fn scatter_svg(title: &str, x_label: &str, y_label: &str, points: &[PlotPoint]) -> String {
    let (width, height) = (720.0, 480.0);
    let (left, right, top, bottom) = (80.0, 24.0, 48.0, 56.0);
    let (x_lo, x_hi) = padded_range(points.iter().map(|p| p.x));
    let (y_lo, y_hi) = padded_range(points.iter().map(|p| p.y));
    let sx = |x: f64| left + (x - x_lo) / (x_hi - x_lo) * (width - left - right);
    let sy = |y: f64| height - bottom - (y - y_lo) / (y_hi - y_lo) * (height - top - bottom);

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = write!(svg, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = write!(
        svg,
        r#"<text x="{:.1}" y="28" text-anchor="middle" font-size="16">{title}</text>"#,
        width / 2.0
    );

    // Axes and ticks.
    let _ = write!(
        svg,
        r#"<line x1="{left}" y1="{0:.1}" x2="{1:.1}" y2="{0:.1}" stroke="black"/>"#,
        height - bottom,
        width - right
    );
    let _ = write!(
        svg,
        r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{:.1}" stroke="black"/>"#,
        height - bottom
    );
    for i in 0..=4 {
        let fx = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        let fy = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let px = sx(fx);
        let py = sy(fy);
        let _ = write!(
            svg,
            r#"<line x1="{px:.1}" y1="{0:.1}" x2="{px:.1}" y2="{1:.1}" stroke="black"/>"#,
            height - bottom,
            height - bottom + 5.0
        );
        let _ = write!(
            svg,
            r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle" font-size="11">{fx:.1}</text>"#,
            height - bottom + 18.0
        );
        let _ = write!(
            svg,
            r#"<line x1="{0:.1}" y1="{py:.1}" x2="{left}" y2="{py:.1}" stroke="black"/>"#,
            left - 5.0
        );
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{fy:.3}</text>"#,
            left - 9.0,
            py + 4.0
        );
    }
    let _ = write!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{x_label}</text>"#,
        (left + width - right) / 2.0,
        height - 12.0
    );
    let _ = write!(
        svg,
        r#"<text x="18" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 18 {0:.1})">{y_label}</text>"#,
        (top + height - bottom) / 2.0
    );

    for p in points {
        let px = sx(p.x);
        let py = sy(p.y);
        let _ = write!(svg, r#"<circle cx="{px:.1}" cy="{py:.1}" r="4" fill="{ACCENT}"/>"#);
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
            px + 6.0,
            py - 6.0,
            p.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Horizontal bar chart, one bar per row, value labels at the bar ends.
pub fn bar_svg(title: &str, value_label: &str, data: &[BarDatum]) -> String {
    let bar_height = 24.0;
    let gap = 10.0;
    let (left, right, top, bottom) = (150.0, 70.0, 48.0, 40.0);
    let width = 720.0;
    let height = top + bottom + data.len() as f64 * (bar_height + gap);
    let max = data.iter().map(|d| d.value).fold(0.0f64, f64::max).max(1e-9);
    let scale = (width - left - right) / max;

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height:.1}" viewBox="0 0 {width} {height:.1}" font-family="sans-serif">"#
    );
    let _ = write!(svg, r#"<rect width="{width}" height="{height:.1}" fill="white"/>"#);
    let _ = write!(
        svg,
        r#"<text x="{:.1}" y="28" text-anchor="middle" font-size="16">{title}</text>"#,
        width / 2.0
    );
    for (i, d) in data.iter().enumerate() {
        let y = top + i as f64 * (bar_height + gap);
        let w = d.value * scale;
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="12">{}</text>"#,
            left - 8.0,
            y + bar_height / 2.0 + 4.0,
            d.label
        );
        let _ = write!(
            svg,
            r#"<rect x="{left}" y="{y:.1}" width="{w:.1}" height="{bar_height}" fill="{ACCENT}"/>"#
        );
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11">{:.1}</text>"#,
            left + w + 6.0,
            y + bar_height / 2.0 + 4.0,
            d.value
        );
    }
    let _ = write!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{value_label}</text>"#,
        (left + width - right) / 2.0,
        height - 10.0
    );
    svg.push_str("</svg>\n");
    svg
}
