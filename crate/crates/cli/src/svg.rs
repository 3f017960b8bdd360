//! Minimal SVG polyline charts; a convenience output, never an acceptance
//! surface.

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Renders named series as polylines with auto-scaled axes.
pub fn polyline_chart(title: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let points: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &points {
        x_lo = x_lo.min(*x);
        x_hi = x_hi.max(*x);
        y_lo = y_lo.min(*y);
        y_hi = y_hi.max(*y);
    }
    if !x_lo.is_finite() {
        x_lo = 0.0;
        x_hi = 1.0;
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if x_hi == x_lo {
        x_hi = x_lo + 1.0;
    }
    if y_hi == y_lo {
        y_hi = y_lo + 1.0;
    }
    let sx = (WIDTH - 2.0 * MARGIN) / (x_hi - x_lo);
    let sy = (HEIGHT - 2.0 * MARGIN) / (y_hi - y_lo);
    let map = |x: f64, y: f64| {
        (
            MARGIN + (x - x_lo) * sx,
            HEIGHT - MARGIN - (y - y_lo) * sy,
        )
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
        WIDTH / 2.0,
        title
    ));
    // Axes with min/max labels.
    let (ox, oy) = map(x_lo, y_lo);
    let (ex, _) = map(x_hi, y_lo);
    let (_, ty) = map(x_lo, y_hi);
    out.push_str(&format!(
        "<line x1=\"{ox}\" y1=\"{oy}\" x2=\"{ex}\" y2=\"{oy}\" stroke=\"black\"/>\n"
    ));
    out.push_str(&format!(
        "<line x1=\"{ox}\" y1=\"{oy}\" x2=\"{ox}\" y2=\"{ty}\" stroke=\"black\"/>\n"
    ));
    for (x, v) in [(ox, x_lo), (ex, x_hi)] {
        out.push_str(&format!(
            "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{v:.4}</text>\n",
            oy + 18.0
        ));
    }
    for (y, v) in [(oy, y_lo), (ty, y_hi)] {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{y}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{v:.4}</text>\n",
            ox - 6.0
        ));
    }
    for (idx, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| {
                let (px, py) = map(x, y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{name}</text>\n",
            WIDTH - MARGIN - 140.0,
            MARGIN + 16.0 * idx as f64
        ));
    }
    out.push_str("</svg>\n");
    out
}
