//! Minimal SVG polyline plot: one curve, axis frame, title. Numeric
//! formatting is fixed so identical data yields identical bytes.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;

/// Renders `points` (already sorted by caller or not; drawn in order)
/// as a polyline with a light frame and min/max labels.
pub fn polyline(points: &[(f64, f64)], title: &str) -> String {
    let (x_lo, x_hi) = span(points.iter().map(|p| p.0));
    let (y_lo, y_hi) = span(points.iter().map(|p| p.1));

    let inner_w = WIDTH - 2.0 * MARGIN;
    let inner_h = HEIGHT - 2.0 * MARGIN;
    let sx = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * inner_w;
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * inner_h;

    let mut path = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        if i > 0 {
            path.push(' ');
        }
        let _ = write!(path, "{:.2},{:.2}", sx(*x), sy(*y));
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(out, "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "  <rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{inner_w}\" height=\"{inner_h}\" fill=\"none\" stroke=\"#999\"/>"
    );
    let _ = writeln!(
        out,
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        MARGIN / 2.0 + 4.0,
        escape(title)
    );
    for (x, anchor, label) in [
        (MARGIN, "start", fmt_num(x_lo)),
        (WIDTH - MARGIN, "end", fmt_num(x_hi)),
    ] {
        let _ = writeln!(
            out,
            "  <text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"{anchor}\">{label}</text>",
            HEIGHT - MARGIN / 2.0
        );
    }
    for (y, label) in [(HEIGHT - MARGIN, fmt_num(y_lo)), (MARGIN, fmt_num(y_hi))] {
        let _ = writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{y:.2}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">{label}</text>",
            MARGIN - 6.0
        );
    }
    let _ = writeln!(
        out,
        "  <polyline points=\"{path}\" fill=\"none\" stroke=\"#2060c0\" stroke-width=\"1.5\"/>"
    );
    out.push_str("</svg>\n");
    out
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        // degenerate span: widen so the scale map stays finite
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 0.01 && v.abs() < 1e6 {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.3e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn produces_well_formed_polyline() {
        let svg = polyline(&[(1.0, 2.0), (2.0, 1.0), (3.0, 4.0)], "widths");
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("<polyline points="));
        assert!(svg.contains("widths"));
    }

    #[test]
    fn constant_series_does_not_divide_by_zero() {
        let svg = polyline(&[(1.0, 3.0), (2.0, 3.0)], "flat");
        assert!(!svg.contains("NaN"));
        assert!(!svg.contains("inf"));
    }

    #[test]
    fn identical_input_identical_bytes() {
        let pts = [(0.5, 0.25), (1.5, 0.125)];
        assert_eq!(polyline(&pts, "t"), polyline(&pts, "t"));
    }
}
