//! Minimal static SVG renderings of the explanation exports. Every plot is
//! fully specified by its CSV/JSON sibling; these are convenience views with
//! no styling dependencies.

use playerval::explain::{BeeswarmRow, ForceData, PdpCurve};

const WIDTH: f64 = 720.0;
const BAR_HEIGHT: f64 = 22.0;
const MARGIN_LEFT: f64 = 170.0;
const MARGIN: f64 = 30.0;

fn header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    )
}

fn esc(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Horizontal bar chart of mean |SHAP| per feature, strongest on top.
pub fn importance_bars(items: &[(String, f64)]) -> String {
    let height = MARGIN * 2.0 + items.len() as f64 * (BAR_HEIGHT + 6.0);
    let max_score = items.iter().map(|(_, s)| *s).fold(f64::MIN_POSITIVE, f64::max);
    let span = WIDTH - MARGIN_LEFT - MARGIN;
    let mut out = header(WIDTH, height);
    for (i, (name, score)) in items.iter().enumerate() {
        let y = MARGIN + i as f64 * (BAR_HEIGHT + 6.0);
        let w = span * score / max_score;
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 8.0,
            y + BAR_HEIGHT * 0.7,
            esc(name)
        ));
        out.push_str(&format!(
            "<rect x=\"{MARGIN_LEFT:.1}\" y=\"{y:.1}\" width=\"{w:.2}\" height=\"{BAR_HEIGHT}\" \
             fill=\"#d62728\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">{score:.4}</text>\n",
            MARGIN_LEFT + w + 6.0,
            y + BAR_HEIGHT * 0.7
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Beeswarm: one row per feature, dots at their SHAP value, colored by the
/// within-feature value percentile (blue low, red high).
pub fn beeswarm(rows: &[BeeswarmRow], feature_order: &[String]) -> String {
    let row_height = 34.0;
    let height = MARGIN * 2.0 + feature_order.len() as f64 * row_height;
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for row in rows {
        lo = lo.min(row.shap_value);
        hi = hi.max(row.shap_value);
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let span = WIDTH - MARGIN_LEFT - MARGIN;
    let x_of = |v: f64| MARGIN_LEFT + span * (v - lo) / (hi - lo);
    let mut out = header(WIDTH, height);
    // Zero line.
    out.push_str(&format!(
        "<line x1=\"{0:.1}\" y1=\"{MARGIN}\" x2=\"{0:.1}\" y2=\"{1:.1}\" stroke=\"#999\"/>\n",
        x_of(0.0),
        height - MARGIN
    ));
    for (i, feature) in feature_order.iter().enumerate() {
        let y = MARGIN + i as f64 * row_height + row_height / 2.0;
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 8.0,
            y + 4.0,
            esc(feature)
        ));
        for (j, row) in rows.iter().filter(|r| &r.feature == feature).enumerate() {
            // Deterministic vertical jitter from the row index.
            let jitter = ((j * 2654435761) % 17) as f64 - 8.0;
            let red = (row.feature_value_percentile * 255.0).round() as u8;
            let blue = 255 - red;
            out.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.4\" fill=\"rgb({red},40,{blue})\" \
                 fill-opacity=\"0.75\"/>\n",
                x_of(row.shap_value),
                y + jitter * 0.9
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Force plot: contributions stacked from the base value, positive pushes in
/// red, negative in blue.
pub fn force_plot(force: &ForceData) -> String {
    let height = MARGIN * 2.0 + 90.0 + force.entries.len() as f64 * 18.0;
    let total_abs: f64 = force.entries.iter().map(|e| e.phi.abs()).sum();
    let span = WIDTH - 2.0 * MARGIN;
    let scale = if total_abs > 0.0 { span / total_abs } else { 0.0 };
    let mut out = header(WIDTH, height);
    out.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"20\">{} | base {:.4} | prediction {:.4}{}</text>\n",
        esc(&force.row_id),
        force.base_value,
        force.prediction_transformed,
        match force.prediction_euro {
            Some(euro) => format!(" | {euro:.0} EUR"),
            None => String::new(),
        }
    ));
    let mut x = MARGIN;
    let y = 40.0;
    for entry in &force.entries {
        let w = entry.phi.abs() * scale;
        let fill = if entry.phi >= 0.0 { "#d62728" } else { "#1f77b4" };
        out.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y}\" width=\"{w:.2}\" height=\"26\" fill=\"{fill}\" \
             stroke=\"white\"/>\n"
        ));
        x += w;
    }
    let mut label_y = y + 50.0;
    for entry in &force.entries {
        out.push_str(&format!(
            "<text x=\"{MARGIN}\" y=\"{label_y:.1}\">{} = {:.1} ({}{:.4})</text>\n",
            esc(&entry.feature),
            entry.value,
            if entry.phi >= 0.0 { "+" } else { "" },
            entry.phi
        ));
        label_y += 18.0;
    }
    out.push_str("</svg>\n");
    out
}

/// Partial-dependence line over the feature grid.
pub fn pdp_line(curve: &PdpCurve) -> String {
    let height = 320.0;
    let (gx0, gx1) = (curve.grid[0], *curve.grid.last().unwrap());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in &curve.mean_prediction {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
        lo -= 1.0;
    }
    let span_x = WIDTH - 2.0 * MARGIN - 40.0;
    let span_y = height - 2.0 * MARGIN - 20.0;
    let x_of = |v: f64| MARGIN + 40.0 + span_x * (v - gx0) / (gx1 - gx0).max(1e-12);
    let y_of = |v: f64| height - MARGIN - span_y * (v - lo) / (hi - lo);
    let mut out = header(WIDTH, height);
    out.push_str(&format!("<text x=\"{MARGIN}\" y=\"18\">{}</text>\n", esc(&curve.feature)));
    let points: Vec<String> = curve
        .grid
        .iter()
        .zip(&curve.mean_prediction)
        .map(|(g, p)| format!("{:.2},{:.2}", x_of(*g), y_of(*p)))
        .collect();
    out.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n",
        points.join(" ")
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{lo:.3} .. {hi:.3}</text>\n",
        WIDTH - MARGIN,
        height - 8.0
    ));
    out.push_str("</svg>\n");
    out
}
