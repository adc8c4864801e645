//! Self-contained SVG plots.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 60.0;

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
        W / 2.0
    )
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= 1e-300 + 1e-12 * hi.abs() {
        (lo - 0.5 * lo.abs().max(1.0), hi + 0.5 * hi.abs().max(1.0))
    } else {
        (lo, hi)
    }
}

/// Line plot of y against x with labelled axes.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let (x0, x1) = range(points.iter().map(|p| p.0));
    let (y0, y1) = range(points.iter().map(|p| p.1));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    let mut s = header(title);
    let _ = writeln!(
        s,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    for (v, y) in [(y0, H - MARGIN), (y1, MARGIN)] {
        let _ = writeln!(s, "<text x=\"{}\" y=\"{y:.1}\" text-anchor=\"end\">{v:.4e}</text>", MARGIN - 4.0);
    }
    for (v, x) in [(x0, MARGIN), (x1, W - MARGIN)] {
        let _ = writeln!(s, "<text x=\"{x:.1}\" y=\"{}\" text-anchor=\"middle\">{v:.3}</text>", H - MARGIN + 16.0);
    }
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>", W / 2.0, H - 16.0);
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{y_label}</text>",
        H / 2.0,
        H / 2.0
    );
    let path: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"{}\"/>", path.join(" "));
    s.push_str("</svg>\n");
    s
}

/// Blue to yellow through green.
fn colour(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let stops = [(0.27, 0.00, 0.33), (0.13, 0.57, 0.55), (0.99, 0.91, 0.14)];
    let (a, b, u) = if t < 0.5 { (stops[0], stops[1], 2.0 * t) } else { (stops[1], stops[2], 2.0 * t - 1.0) };
    let mix = |p: f64, q: f64| ((p + (q - p) * u) * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Heat map of node values over the (theta, s) chart, rows of length `n_theta`.
pub fn heat_map(title: &str, n_s: usize, n_theta: usize, values: &[f64]) -> String {
    let (lo, hi) = range(values.iter().copied());
    let cw = (W - 2.0 * MARGIN) / n_theta as f64;
    let ch = (H - 2.0 * MARGIN) / n_s as f64;
    let mut s = header(title);
    for j in 0..n_s {
        for k in 0..n_theta {
            let v = values[j * n_theta + k];
            let _ = writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                MARGIN + k as f64 * cw,
                MARGIN + j as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                colour((v - lo) / (hi - lo))
            );
        }
    }
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">theta</text>", W / 2.0, H - 16.0);
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">s</text>",
        H / 2.0,
        H / 2.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">min {lo:.3e}  max {hi:.3e}</text>",
        W - MARGIN,
        MARGIN - 8.0
    );
    s.push_str("</svg>\n");
    s
}
