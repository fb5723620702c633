//! Minimal static SVG rendering for run reports: time-series line plots,
//! exponent sweeps, and per-inequality ratio bars.
//!
//! The output is plain hand-assembled SVG text, a pure function of the data,
//! so report artifacts are byte-stable across reruns.

use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 58.0;
const TICKS: usize = 5;

/// Fixed series palette, cycled in order.
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn esc(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Short deterministic tick label: plain notation in a moderate range,
/// scientific outside it, trailing zeros trimmed.
fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let mag = v.abs();
    let s = if (1e-3..1e5).contains(&mag) {
        format!("{v:.4}")
    } else {
        return format!("{v:.2e}");
    };
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    /// Fit the data, widening degenerate spans so every finite point maps
    /// to a finite pixel.
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Option<Self> {
        let mut f = Frame {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        let mut any = false;
        for (x, y) in points {
            if !x.is_finite() || !y.is_finite() {
                continue;
            }
            any = true;
            f.x_min = f.x_min.min(x);
            f.x_max = f.x_max.max(x);
            f.y_min = f.y_min.min(y);
            f.y_max = f.y_max.max(y);
        }
        if !any {
            return None;
        }
        if f.x_max == f.x_min {
            let pad = if f.x_min == 0.0 { 1.0 } else { f.x_min.abs() * 0.5 };
            f.x_min -= pad;
            f.x_max += pad;
        }
        if f.y_max == f.y_min {
            let pad = if f.y_min == 0.0 { 1.0 } else { f.y_min.abs() * 0.5 };
            f.y_min -= pad;
            f.y_max += pad;
        }
        Some(f)
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"12\">\n\
<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        WIDTH / 2.0,
        esc(title)
    )
}

fn axes(frame: &Frame, x_label: &str, y_label: &str) -> String {
    let mut s = String::new();
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    s.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let xv = frame.x_min + f * (frame.x_max - frame.x_min);
        let yv = frame.y_min + f * (frame.y_max - frame.y_min);
        let px = frame.px(xv);
        let py = frame.py(yv);
        s.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{y0}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n\
<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            y0 + 5.0,
            y0 + 19.0,
            esc(&fmt_tick(xv))
        ));
        s.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{x0}\" y2=\"{py:.1}\" stroke=\"black\"/>\n\
<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            esc(&fmt_tick(yv))
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 16.0,
        esc(x_label)
    ));
    s.push_str(&format!(
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        esc(y_label)
    ));
    s
}

/// Multi-series line plot. Non-finite samples break the polyline rather than
/// corrupting it; a plot with no finite data renders a labelled empty frame.
pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(String, Vec<(f64, f64)>)],
) -> String {
    let mut svg = svg_open(title);
    let frame = Frame::fit(series.iter().flat_map(|(_, pts)| pts.iter().copied()));
    let Some(frame) = frame else {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">no finite data</text>\n</svg>\n",
            WIDTH / 2.0,
            HEIGHT / 2.0
        ));
        return svg;
    };
    svg.push_str(&axes(&frame, x_label, y_label));
    for (idx, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut run: Vec<String> = Vec::new();
        let flush = |run: &mut Vec<String>, svg: &mut String| {
            match run.len() {
                0 => {}
                1 => svg.push_str(&format!(
                    "<circle cx=\"{}\" r=\"2.5\" fill=\"{color}\"/>\n",
                    run[0].replace(',', "\" cy=\"")
                )),
                _ => svg.push_str(&format!(
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                    run.join(" ")
                )),
            }
            run.clear();
        };
        for &(x, y) in pts {
            if x.is_finite() && y.is_finite() {
                run.push(format!("{:.2},{:.2}", frame.px(x), frame.py(y)));
            } else {
                flush(&mut run, &mut svg);
            }
        }
        flush(&mut run, &mut svg);
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{}</text>\n",
            MARGIN_LEFT + 10.0,
            MARGIN_TOP + 16.0 + 15.0 * idx as f64,
            esc(name)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Horizontal-category bar chart of non-negative values (e.g. worst observed
/// inequality ratio per estimate). Values are clipped at zero; non-finite
/// bars render as zero-height with an annotation.
pub fn bar_chart(title: &str, y_label: &str, bars: &[(String, f64)]) -> Result<String> {
    if bars.is_empty() {
        return Err(Error::Parameter("bar chart needs at least one bar".into()));
    }
    let mut svg = svg_open(title);
    let finite_max = bars
        .iter()
        .map(|(_, v)| if v.is_finite() { v.max(0.0) } else { 0.0 })
        .fold(0.0f64, f64::max);
    let top = if finite_max > 0.0 { finite_max * 1.1 } else { 1.0 };
    let frame = Frame {
        x_min: 0.0,
        x_max: bars.len() as f64,
        y_min: 0.0,
        y_max: top,
    };
    svg.push_str(&axes(&frame, "", y_label));
    let slot = (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / bars.len() as f64;
    for (idx, (name, value)) in bars.iter().enumerate() {
        let x = MARGIN_LEFT + slot * (idx as f64 + 0.15);
        let w = slot * 0.7;
        // Non-finite values render as a zero-height bar labelled "n/a".
        let v = if value.is_finite() { value.max(0.0) } else { 0.0 };
        let label = if value.is_finite() { fmt_tick(v) } else { "n/a".to_string() };
        let y = frame.py(v);
        let h = (HEIGHT - MARGIN_BOTTOM) - y;
        let color = PALETTE[idx % PALETTE.len()];
        svg.push_str(&format!(
            "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{w:.1}\" height=\"{h:.1}\" fill=\"{color}\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            x + w / 2.0,
            y - 5.0,
            esc(&label)
        ));
        // Slanted category label under the axis.
        let cx = x + w / 2.0;
        let cy = HEIGHT - MARGIN_BOTTOM + 14.0;
        svg.push_str(&format!(
            "<text x=\"{cx:.1}\" y=\"{cy:.1}\" text-anchor=\"end\" transform=\"rotate(-30 {cx:.1} {cy:.1})\" font-size=\"10\">{}</text>\n",
            esc(name)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
