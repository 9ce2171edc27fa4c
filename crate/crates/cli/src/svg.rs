//! SVG figures: the triangle complex and a strip plot of the measure sets.

use std::fmt::Write;

use subarcs_core::dendrite::{Contact, TriangleComplex};
use subarcs_core::measures::MeasureSetApprox;
use subarcs_core::Point2;

const WIDTH: f64 = 1000.0;
const HEIGHT: f64 = 1000.0 * 0.866_025_403_784_438_6;

const FILLS: [&str; 4] = ["#9e9e9e", "#d1495b", "#2e86ab", "#edae49"];

fn to_view(p: Point2) -> (f64, f64) {
    (p.x * WIDTH, HEIGHT - p.y * WIDTH)
}

/// One polygon per cell of the deepest level, filled by first digit, and a
/// circle at each contact point.
pub fn complex_svg(complex: &TriangleComplex, contacts: &[Contact]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH:.2} {HEIGHT:.2}" width="{WIDTH:.2}" height="{HEIGHT:.2}">"#
    )
    .expect("writing to a string");
    let k = complex.depth();
    let level = complex.level(k);
    let shift = 2 * k.saturating_sub(1);
    for (code, tri) in level.iter().enumerate() {
        let first = if k == 0 { 0 } else { (code >> shift) & 3 };
        let pts: Vec<String> = tri
            .vertices()
            .iter()
            .map(|&v| {
                let (x, y) = to_view(v);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        writeln!(
            out,
            r##"  <polygon points="{}" fill="{}" stroke="#333333" stroke-width="0.3"/>"##,
            pts.join(" "),
            FILLS[first]
        )
        .expect("writing to a string");
    }
    for c in contacts {
        let (x, y) = to_view(c.point);
        writeln!(out, r##"  <circle cx="{x:.3}" cy="{y:.3}" r="2" fill="#000000"/>"##).expect("writing to a string");
    }
    out.push_str("</svg>\n");
    out
}

/// Each node's intervals drawn as bars along its own horizontal line.
pub fn strip_svg(sets: &[MeasureSetApprox]) -> String {
    let lo = sets
        .iter()
        .flat_map(|s| s.intervals.iter().map(|i| i.0))
        .fold(f64::INFINITY, f64::min);
    let hi = sets
        .iter()
        .flat_map(|s| s.intervals.iter().map(|i| i.1))
        .fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let lo = if lo.is_finite() { lo } else { 0.0 };
    let (margin, row) = (40.0, 60.0);
    let height = margin * 2.0 + row * sets.len() as f64;
    let x = |v: f64| margin + (v - lo) / span * (WIDTH - 2.0 * margin);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH:.2} {height:.2}" width="{WIDTH:.2}" height="{height:.2}">"#
    )
    .expect("writing to a string");
    for (i, s) in sets.iter().enumerate() {
        let y = margin + row * i as f64 + row / 2.0;
        writeln!(
            out,
            r##"  <text x="4" y="{:.2}" font-size="14" font-family="monospace">{}</text>"##,
            y + 5.0,
            s.node
        )
        .expect("writing to a string");
        writeln!(
            out,
            r##"  <line x1="{margin:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#cccccc"/>"##,
            WIDTH - margin
        )
        .expect("writing to a string");
        for &(a, b) in &s.intervals {
            let (xa, xb) = (x(a), x(b));
            writeln!(
                out,
                r##"  <rect x="{xa:.3}" y="{:.2}" width="{:.3}" height="12" fill="{}"/>"##,
                y - 6.0,
                (xb - xa).max(0.5),
                FILLS[1 + i % 3]
            )
            .expect("writing to a string");
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use subarcs_core::geometry::{A1, A2, A3};

    #[test]
    fn viewport_flips_y() {
        assert_eq!(to_view(A1), (0.0, HEIGHT));
        assert_eq!(to_view(A2), (1000.0, HEIGHT));
        let (x, y) = to_view(A3);
        assert!((x - 500.0).abs() < 1e-9 && y.abs() < 1e-9);
    }
}
