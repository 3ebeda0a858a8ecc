//! Minimal deterministic SVG line plots for sweep curves and waveforms.

/// Which vertical axis a series is drawn against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YAxis {
    Left,
    Right,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub axis: YAxis,
    pub points: Vec<(f64, f64)>,
}

const W: f64 = 720.0;
const H: f64 = 420.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 64.0;
const MARGIN_T: f64 = 48.0;
const MARGIN_B: f64 = 56.0;

struct Range {
    min: f64,
    max: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Range {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        if !min.is_finite() || !max.is_finite() {
            return Range { min: 0.0, max: 1.0 };
        }
        if min == max {
            // Flat series: pad so the line sits mid-plot.
            return Range {
                min: min - 0.5,
                max: max + 0.5,
            };
        }
        Range { min, max }
    }

    fn norm(&self, v: f64) -> f64 {
        (v - self.min) / (self.max - self.min)
    }
}

/// Dual-axis line chart; left axis is used by all `YAxis::Left` series.
pub fn line_plot_svg(
    title: &str,
    x_label: &str,
    y_left_label: &str,
    y_right_label: Option<&str>,
    series: &[Series],
    x_tick_labels: Option<&[(f64, String)]>,
) -> String {
    let xr = Range::of(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let lr = Range::of(
        series
            .iter()
            .filter(|s| s.axis == YAxis::Left)
            .flat_map(|s| s.points.iter().map(|p| p.1)),
    );
    let rr = Range::of(
        series
            .iter()
            .filter(|s| s.axis == YAxis::Right)
            .flat_map(|s| s.points.iter().map(|p| p.1)),
    );
    let px = |x: f64| MARGIN_L + xr.norm(x) * (W - MARGIN_L - MARGIN_R);
    let py = |r: &Range, y: f64| H - MARGIN_B - r.norm(y) * (H - MARGIN_T - MARGIN_B);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
        W / 2.0,
        xml_escape(title)
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        H - MARGIN_B,
        W - MARGIN_R,
        H - MARGIN_B
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        H - MARGIN_B
    ));
    if y_right_label.is_some() {
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{MARGIN_T}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            W - MARGIN_R,
            W - MARGIN_R,
            H - MARGIN_B
        ));
    }
    // Axis labels.
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
        W / 2.0,
        H - 12.0,
        xml_escape(x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        H / 2.0,
        H / 2.0,
        xml_escape(y_left_label)
    ));
    if let Some(lab) = y_right_label {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(90 {:.1} {:.1})\">{}</text>\n",
            W - 16.0,
            H / 2.0,
            W - 16.0,
            H / 2.0,
            xml_escape(lab)
        ));
    }
    // Y tick labels (min/max on each used axis).
    for (r, x, anchor) in [
        (&lr, MARGIN_L - 6.0, "end"),
        (&rr, W - MARGIN_R + 6.0, "start"),
    ] {
        let used = if std::ptr::eq(r, &lr) {
            series.iter().any(|s| s.axis == YAxis::Left)
        } else {
            series.iter().any(|s| s.axis == YAxis::Right)
        };
        if !used {
            continue;
        }
        for v in [r.min, r.max] {
            svg.push_str(&format!(
                "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"10\">{v:.3}</text>\n",
                py(r, v) + 3.0
            ));
        }
    }
    // X ticks.
    match x_tick_labels {
        Some(ticks) => {
            for (x, label) in ticks {
                svg.push_str(&format!(
                    "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{}</text>\n",
                    px(*x),
                    H - MARGIN_B + 16.0,
                    xml_escape(label)
                ));
            }
        }
        None => {
            for v in [xr.min, (xr.min + xr.max) / 2.0, xr.max] {
                svg.push_str(&format!(
                    "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{v:.3}</text>\n",
                    px(v),
                    H - MARGIN_B + 16.0
                ));
            }
        }
    }
    // Series.
    for (i, s) in series.iter().enumerate() {
        let r = match s.axis {
            YAxis::Left => &lr,
            YAxis::Right => &rr,
        };
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(r, y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            s.color,
            pts.join(" ")
        ));
        // Legend.
        let ly = MARGIN_T + 14.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
            MARGIN_L + 8.0,
            MARGIN_L + 28.0,
            s.color
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>\n",
            MARGIN_L + 32.0,
            ly + 3.0,
            xml_escape(&s.label)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Single-panel area-vs-time waveform plot.
pub fn waveform_svg(title: &str, areas: &[f64], fps: f64) -> String {
    let points: Vec<(f64, f64)> = areas
        .iter()
        .enumerate()
        .map(|(t, &a)| (t as f64 / fps, a))
        .collect();
    line_plot_svg(
        title,
        "time (s)",
        "glottal area (px^2)",
        None,
        &[Series {
            label: "area".into(),
            color: "#1f77b4",
            axis: YAxis::Left,
            points,
        }],
        None,
    )
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
