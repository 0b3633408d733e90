//! Minimal self-contained SVG writer: axes, polylines, step curves, point
//! markers, and heatmap cells. Every chart written by the CLI has a sibling
//! CSV carrying the exact plotted numbers.

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_BOTTOM: f64 = 46.0;

pub const SERIES_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub struct Chart {
    title: String,
    x_label: String,
    y_label: String,
    x_range: (f64, f64),
    y_range: (f64, f64),
    body: Vec<String>,
    legend: Vec<(String, String)>,
}

/// Pads a data range so strokes stay inside the frame; degenerate ranges get
/// a unit pad.
pub fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 1.0 };
    (lo - pad, hi + pad)
}

impl Chart {
    pub fn new(
        title: &str,
        x_label: &str,
        y_label: &str,
        x_range: (f64, f64),
        y_range: (f64, f64),
    ) -> Self {
        Self {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            x_range,
            y_range,
            body: Vec::new(),
            legend: Vec::new(),
        }
    }

    fn tx(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        MARGIN_LEFT + (x - lo) / (hi - lo) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn ty(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        HEIGHT - MARGIN_BOTTOM - (y - lo) / (hi - lo) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], color: &str, label: Option<&str>) {
        if points.is_empty() {
            return;
        }
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.tx(x), self.ty(y)))
            .collect();
        self.body.push(format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            coords.join(" ")
        ));
        if let Some(l) = label {
            self.legend.push((l.to_string(), color.to_string()));
        }
    }

    /// Horizontal segments (x_lo, x_hi, y) joined by vertical connectors.
    pub fn step_line(&mut self, segments: &[(f64, f64, f64)], color: &str, label: Option<&str>) {
        if segments.is_empty() {
            return;
        }
        let mut d = String::new();
        for (i, &(x0, x1, y)) in segments.iter().enumerate() {
            if i == 0 {
                d.push_str(&format!("M {:.2} {:.2} ", self.tx(x0), self.ty(y)));
            } else {
                d.push_str(&format!("L {:.2} {:.2} ", self.tx(x0), self.ty(y)));
            }
            d.push_str(&format!("L {:.2} {:.2} ", self.tx(x1), self.ty(y)));
        }
        self.body.push(format!(
            "<path fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" d=\"{d}\"/>"
        ));
        if let Some(l) = label {
            self.legend.push((l.to_string(), color.to_string()));
        }
    }

    pub fn points(&mut self, points: &[(f64, f64)], color: &str, radius: f64) {
        for &(x, y) in points {
            self.body.push(format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{radius}\" fill=\"{color}\" fill-opacity=\"0.6\"/>",
                self.tx(x),
                self.ty(y)
            ));
        }
    }

    /// Filled cell with intensity t in [0,1] on a white-to-blue ramp.
    pub fn heat_cell(&mut self, x0: f64, x1: f64, y0: f64, y1: f64, t: f64) {
        let t = t.clamp(0.0, 1.0);
        let lerp = |a: f64, b: f64| (a + t * (b - a)).round() as u8;
        let (r, g, b) = (lerp(255.0, 8.0), lerp(255.0, 69.0), lerp(255.0, 148.0));
        self.body.push(format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({r},{g},{b})\"/>",
            self.tx(x0),
            self.ty(y1),
            self.tx(x1) - self.tx(x0),
            self.ty(y0) - self.ty(y1),
        ));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        out.push_str(&format!(
            "<text x=\"{:.0}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
            WIDTH / 2.0,
            escape(&self.title)
        ));
        // frame
        out.push_str(&format!(
            "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#333\"/>\n",
            WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
            HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
        ));
        for e in &self.body {
            out.push_str(e);
            out.push('\n');
        }
        // ticks
        for i in 0..=4 {
            let fx = self.x_range.0 + (self.x_range.1 - self.x_range.0) * i as f64 / 4.0;
            let px = self.tx(fx);
            out.push_str(&format!(
                "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#333\"/>\n",
                HEIGHT - MARGIN_BOTTOM,
                HEIGHT - MARGIN_BOTTOM + 4.0
            ));
            out.push_str(&format!(
                "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{}</text>\n",
                HEIGHT - MARGIN_BOTTOM + 16.0,
                format_tick(fx)
            ));
            let fy = self.y_range.0 + (self.y_range.1 - self.y_range.0) * i as f64 / 4.0;
            let py = self.ty(fy);
            out.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{MARGIN_LEFT}\" y2=\"{py:.2}\" stroke=\"#333\"/>\n",
                MARGIN_LEFT - 4.0
            ));
            out.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{}</text>\n",
                MARGIN_LEFT - 7.0,
                py + 3.0,
                format_tick(fy)
            ));
        }
        out.push_str(&format!(
            "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
            HEIGHT - 8.0,
            escape(&self.x_label)
        ));
        out.push_str(&format!(
            "<text x=\"14\" y=\"{:.0}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 {:.0})\">{}</text>\n",
            (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0,
            (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0,
            escape(&self.y_label)
        ));
        for (i, (label, color)) in self.legend.iter().enumerate() {
            let y = MARGIN_TOP + 14.0 + 14.0 * i as f64;
            out.push_str(&format!(
                "<line x1=\"{:.0}\" y1=\"{y:.0}\" x2=\"{:.0}\" y2=\"{y:.0}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                WIDTH - MARGIN_RIGHT - 110.0,
                WIDTH - MARGIN_RIGHT - 90.0
            ));
            out.push_str(&format!(
                "<text x=\"{:.0}\" y=\"{:.0}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>\n",
                WIDTH - MARGIN_RIGHT - 85.0,
                y + 3.0,
                escape(label)
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (0.001..10000.0).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
