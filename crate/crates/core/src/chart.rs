//! Static SVG charts on a fixed 960×540 canvas.
//!
//! Output depends only on the [`ChartSpec`]: numbers are printed with fixed
//! precision and nothing time- or randomness-dependent is emitted, so two
//! renders of one spec are byte-identical.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 540.0;

const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 180.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 70.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    Line,
    Bar,
    Scatter,
    Heatmap,
    Elbow,
}

/// A named series. `None` y values are gaps.
///
/// For bar charts and heatmaps x is a category index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, Option<f64>)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, Option<f64>)>) -> Self {
        Series {
            label: label.into(),
            points,
        }
    }

    /// Series over consecutive years starting at `first`.
    pub fn yearly(label: impl Into<String>, first: i32, values: &[Option<f64>]) -> Self {
        let points = values
            .iter()
            .enumerate()
            .map(|(i, v)| ((first + i as i32) as f64, *v))
            .collect();
        Series::new(label, points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartSpec {
    pub kind: ChartKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Tick labels for category axes (bar x axis, heatmap columns and rows).
    pub categories: Vec<String>,
    /// x position drawn as a dashed guide, e.g. the knee of an elbow chart.
    pub marker: Option<f64>,
}

impl ChartSpec {
    pub fn new(
        kind: ChartKind,
        title: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
    ) -> Self {
        ChartSpec {
            kind,
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
            categories: Vec::new(),
            marker: None,
        }
    }

    pub fn with_series(mut self, series: Series) -> Self {
        self.series.push(series);
        self
    }

    pub fn with_categories<S: Into<String>>(mut self, categories: impl IntoIterator<Item = S>) -> Self {
        self.categories = categories.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_marker(mut self, x: f64) -> Self {
        self.marker = Some(x);
        self
    }

    /// Heatmap of a square matrix with the same labels on both axes.
    pub fn heatmap(title: impl Into<String>, labels: &[String], values: &[Vec<f64>]) -> Self {
        let mut spec = ChartSpec::new(ChartKind::Heatmap, title, "", "").with_categories(labels.iter().cloned());
        for (label, row) in labels.iter().zip(values) {
            let points = row.iter().enumerate().map(|(j, v)| (j as f64, Some(*v))).collect();
            spec.series.push(Series::new(label.clone(), points));
        }
        spec
    }

    fn validate(&self) -> Result<()> {
        if self.series.is_empty() {
            return Err(Error::Argument(format!("chart `{}` has no series", self.title)));
        }
        for s in &self.series {
            for (x, y) in &s.points {
                if !x.is_finite() || y.is_some_and(|y| !y.is_finite()) {
                    return Err(Error::Argument(format!(
                        "chart `{}`: series `{}` has a non-finite point",
                        self.title, s.label
                    )));
                }
            }
        }
        if let Some(m) = self.marker {
            if !m.is_finite() {
                return Err(Error::Argument(format!("chart `{}`: non-finite marker", self.title)));
            }
        }
        Ok(())
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Fixed two-decimal coordinates; `-0.00` is normalized.
fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10().floor()) as usize
    };
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s.trim_start_matches(['-', '0', '.']).is_empty() {
        s[1..].to_string()
    } else {
        s
    }
}

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Axis {
    fn fit(lo: f64, hi: f64, include_zero: bool) -> Axis {
        let (mut lo, mut hi) = if include_zero {
            (lo.min(0.0), hi.max(0.0))
        } else {
            (lo, hi)
        };
        if hi - lo < 1e-12 {
            lo -= 1.0;
            hi += 1.0;
        }
        let step = nice_step(hi - lo, 5);
        Axis {
            lo: (lo / step).floor() * step,
            hi: (hi / step).ceil() * step,
            step,
        }
    }

    fn ticks(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step).round() as usize;
        (0..=n).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

struct Frame {
    x: Axis,
    y: Axis,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x.lo) / (self.x.hi - self.x.lo) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y.lo) / (self.y.hi - self.y.lo) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn data_range(spec: &ChartSpec) -> ((f64, f64), (f64, f64)) {
    let mut xr = (f64::INFINITY, f64::NEG_INFINITY);
    let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &spec.series {
        for (x, y) in &s.points {
            xr = (xr.0.min(*x), xr.1.max(*x));
            if let Some(y) = y {
                yr = (yr.0.min(*y), yr.1.max(*y));
            }
        }
    }
    if let Some(m) = spec.marker {
        xr = (xr.0.min(m), xr.1.max(m));
    }
    if !xr.0.is_finite() {
        xr = (0.0, 1.0);
    }
    if !yr.0.is_finite() {
        yr = (0.0, 1.0);
    }
    (xr, yr)
}

/// Diverging blue-white-red scale over [-1, 1]; values outside are clamped.
pub fn heat_color(v: f64) -> String {
    let t = v.clamp(-1.0, 1.0);
    let (r, g, b) = if t < 0.0 {
        let s = -t;
        (
            255.0 - s * (255.0 - 33.0),
            255.0 - s * (255.0 - 102.0),
            255.0 - s * (255.0 - 172.0),
        )
    } else {
        (
            255.0 - t * (255.0 - 178.0),
            255.0 - t * (255.0 - 24.0),
            255.0 - t * (255.0 - 43.0),
        )
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

fn open(svg: &mut String, title: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="16" font-weight="bold">{}</text>"#,
        num(WIDTH / 2.0),
        escape(title)
    );
}

fn axes(svg: &mut String, spec: &ChartSpec, f: &Frame, categorical_x: bool) {
    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
    svg.push_str("<g class=\"grid\" stroke=\"#dddddd\">\n");
    for t in f.y.ticks() {
        let y = num(f.py(t));
        let _ = writeln!(svg, r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}"/>"#, num(x0), num(x1));
    }
    svg.push_str("</g>\n<g class=\"axes\" stroke=\"black\">\n");
    let _ = writeln!(
        svg,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
        num(x0),
        num(y0),
        num(x1),
        num(y0)
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
        num(x0),
        num(y0),
        num(x0),
        num(y1)
    );
    svg.push_str("</g>\n<g class=\"ticks\">\n");
    for t in f.y.ticks() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            num(x0 - 6.0),
            num(f.py(t) + 4.0),
            tick_label(t, f.y.step)
        );
    }
    if categorical_x {
        for (i, c) in spec.categories.iter().enumerate() {
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                num(f.px(i as f64)),
                num(y0 + 18.0),
                escape(c)
            );
        }
    } else {
        for t in f.x.ticks() {
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                num(f.px(t)),
                num(y0 + 18.0),
                tick_label(t, f.x.step)
            );
        }
    }
    svg.push_str("</g>\n");
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        num((x0 + x1) / 2.0),
        num(HEIGHT - 24.0),
        escape(&spec.x_label)
    );
    let ym = num((y0 + y1) / 2.0);
    let _ = writeln!(
        svg,
        r#"<text x="22" y="{ym}" text-anchor="middle" transform="rotate(-90 22 {ym})">{}</text>"#,
        escape(&spec.y_label)
    );
}

fn legend(svg: &mut String, spec: &ChartSpec) {
    svg.push_str("<g class=\"legend\">\n");
    let x = WIDTH - MARGIN_RIGHT + 16.0;
    for (i, s) in spec.series.iter().enumerate() {
        let y = MARGIN_TOP + 10.0 + i as f64 * 20.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="12" height="12" fill="{}"/>"#,
            num(x),
            num(y - 10.0),
            PALETTE[i % PALETTE.len()]
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">{}</text>"#,
            num(x + 18.0),
            num(y),
            escape(&s.label)
        );
    }
    svg.push_str("</g>\n");
}

/// Consecutive present points; a `None` ends the current run.
fn runs(points: &[(f64, Option<f64>)]) -> Vec<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for (x, y) in points {
        match y {
            Some(y) => cur.push((*x, *y)),
            None if !cur.is_empty() => out.push(std::mem::take(&mut cur)),
            None => {}
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn plot_lines(svg: &mut String, spec: &ChartSpec, f: &Frame, draw_lines: bool) {
    for (i, s) in spec.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(svg, r#"<g class="series" fill="{color}" stroke="{color}">"#);
        for run in runs(&s.points) {
            if draw_lines && run.len() > 1 {
                let pts: Vec<String> = run
                    .iter()
                    .map(|(x, y)| format!("{},{}", num(f.px(*x)), num(f.py(*y))))
                    .collect();
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke-width="2" points="{}"/>"#,
                    pts.join(" ")
                );
            }
            for (x, y) in &run {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{}" cy="{}" r="3.5"/>"#,
                    num(f.px(*x)),
                    num(f.py(*y))
                );
            }
        }
        svg.push_str("</g>\n");
    }
    if let Some(m) = spec.marker {
        let _ = writeln!(
            svg,
            r##"<line class="marker" x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#444444" stroke-dasharray="6 4"/>"##,
            num(HEIGHT - MARGIN_BOTTOM),
            num(MARGIN_TOP),
            x = num(f.px(m))
        );
    }
}

fn render_xy(svg: &mut String, spec: &ChartSpec, draw_lines: bool) {
    let ((xlo, xhi), (ylo, yhi)) = data_range(spec);
    let f = Frame {
        x: Axis::fit(xlo, xhi, false),
        y: Axis::fit(ylo, yhi, spec.kind == ChartKind::Elbow),
    };
    axes(svg, spec, &f, false);
    plot_lines(svg, spec, &f, draw_lines);
    legend(svg, spec);
}

fn render_bar(svg: &mut String, spec: &ChartSpec) {
    let ((xlo, xhi), (ylo, yhi)) = data_range(spec);
    let n_cat = spec.categories.len().max(xhi as usize + 1) as f64;
    let f = Frame {
        x: Axis {
            lo: xlo.min(0.0) - 0.5,
            hi: n_cat - 0.5,
            step: 1.0,
        },
        y: Axis::fit(ylo, yhi, true),
    };
    axes(svg, spec, &f, true);
    let slot = f.px(1.0) - f.px(0.0);
    let width = slot * 0.8 / spec.series.len() as f64;
    for (i, s) in spec.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(svg, r#"<g class="series" fill="{color}">"#);
        for (x, y) in &s.points {
            let Some(y) = y else { continue };
            let left = f.px(*x) - slot * 0.4 + i as f64 * width;
            let (top, bottom) = (f.py(y.max(0.0)), f.py(y.min(0.0)));
            let _ = writeln!(
                svg,
                r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
                num(left),
                num(top),
                num(width),
                num(bottom - top)
            );
        }
        svg.push_str("</g>\n");
    }
    legend(svg, spec);
}

fn render_heatmap(svg: &mut String, spec: &ChartSpec) {
    let rows = spec.series.len();
    let cols = spec.series.iter().map(|s| s.points.len()).max().unwrap_or(0).max(1);
    let left = 220.0;
    let top = MARGIN_TOP + 10.0;
    let cell = ((WIDTH - left - 60.0) / cols as f64).min((HEIGHT - top - 130.0) / rows as f64);
    svg.push_str("<g class=\"cells\" stroke=\"white\">\n");
    for (r, s) in spec.series.iter().enumerate() {
        for (x, v) in &s.points {
            let c = *x as usize;
            let (cx, cy) = (left + c as f64 * cell, top + r as f64 * cell);
            let fill = v.map_or_else(|| "#eeeeee".to_string(), heat_color);
            let _ = writeln!(
                svg,
                r#"<rect class="cell" x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
                num(cx),
                num(cy),
                num(cell),
                num(cell)
            );
            let text = v.map_or_else(String::new, |v| format!("{v:.2}"));
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="middle" stroke="none">{text}</text>"#,
                num(cx + cell / 2.0),
                num(cy + cell / 2.0 + 4.0)
            );
        }
    }
    svg.push_str("</g>\n<g class=\"labels\">\n");
    for (r, s) in spec.series.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            num(left - 8.0),
            num(top + (r as f64 + 0.5) * cell + 4.0),
            escape(&s.label)
        );
    }
    for (c, label) in spec.categories.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            num(left + (c as f64 + 0.5) * cell),
            num(top + rows as f64 * cell + 18.0),
            escape(label)
        );
    }
    svg.push_str("</g>\n");
}

/// Renders `spec` as a standalone SVG document.
pub fn render_chart(spec: &ChartSpec) -> Result<String> {
    spec.validate()?;
    let mut svg = String::new();
    open(&mut svg, &spec.title);
    match spec.kind {
        ChartKind::Line | ChartKind::Elbow => render_xy(&mut svg, spec, true),
        ChartKind::Scatter => render_xy(&mut svg, spec, false),
        ChartKind::Bar => render_bar(&mut svg, spec),
        ChartKind::Heatmap => render_heatmap(&mut svg, spec),
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
