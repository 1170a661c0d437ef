//! Minimal scatter plots as SVG text. Output depends only on the inputs.

use std::fmt::Write;

use ascprobe_core::corpus::Construction;
use ascprobe_core::Matrix;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 40.0;
const LEGEND_H: f64 = 24.0;

pub fn class_color(c: Construction) -> &'static str {
    match c {
        Construction::CausedMotion => "#1f77b4",
        Construction::Ditransitive => "#2ca02c",
        Construction::Transitive => "#d62728",
        Construction::Resultative => "#ff7f0e",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Scatter of the first two columns of `coords`, colored by class label.
pub fn scatter(title: &str, coords: &Matrix, labels: &[usize]) -> String {
    let n = coords.rows();
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        xmin = xmin.min(coords[(i, 0)]);
        xmax = xmax.max(coords[(i, 0)]);
        ymin = ymin.min(coords[(i, 1)]);
        ymax = ymax.max(coords[(i, 1)]);
    }
    let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
    let (sx, sy) = (span(xmin, xmax), span(ymin, ymax));
    let plot = SIZE - 2.0 * MARGIN;
    let height = SIZE + LEGEND_H;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{height}" viewBox="0 0 {SIZE} {height}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        escape(title)
    )
    .unwrap();
    writeln!(
        out,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{plot}" height="{plot}" fill="none" stroke="#999"/>"##
    )
    .unwrap();
    for c in Construction::ALL {
        writeln!(out, r#"<g fill="{}" fill-opacity="0.7">"#, class_color(c)).unwrap();
        for i in (0..n).filter(|&i| labels[i] == c.label()) {
            let x = MARGIN + (coords[(i, 0)] - xmin) / sx * plot;
            let y = MARGIN + (1.0 - (coords[(i, 1)] - ymin) / sy) * plot;
            writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5"/>"#).unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }
    let mut x = MARGIN;
    let y = SIZE + 4.0;
    for c in [Construction::CausedMotion, Construction::Ditransitive, Construction::Transitive, Construction::Resultative] {
        writeln!(out, r#"<circle cx="{:.2}" cy="{y:.2}" r="5" fill="{}"/>"#, x + 5.0, class_color(c)).unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13">{}</text>"#,
            x + 14.0,
            y + 4.5,
            c.as_str().replace('_', "-")
        )
        .unwrap();
        x += 140.0;
    }
    out.push_str("</svg>\n");
    out
}
