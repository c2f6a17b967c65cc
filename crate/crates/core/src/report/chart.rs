//! Dependency-free SVG charts with byte-stable output.
//!
//! Every number written into the document goes through [`fmt_num`], which
//! rounds to six significant digits, so identical input renders to identical
//! bytes on every platform.

use std::fmt::Write as _;

use thiserror::Error;

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 540.0;

const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 90.0;

#[derive(Debug, Error, PartialEq)]
pub enum ChartError {
    #[error("chart {0:?} has no data")]
    EmptySeries(String),
    #[error("chart {title:?}: {reason}")]
    InvalidData { title: String, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChartData {
    Bar {
        categories: Vec<String>,
        values: Vec<f64>,
    },
    Histogram {
        lower: f64,
        bin_width: f64,
        counts: Vec<u64>,
    },
    Line {
        points: Vec<(f64, f64)>,
    },
    Scatter {
        points: Vec<ScatterPoint>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Fixed value-axis range; derived from the data when absent.
    pub y_range: Option<(f64, f64)>,
    pub data: ChartData,
}

impl ChartSpec {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>, data: ChartData) -> Self {
        ChartSpec {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            y_range: None,
            data,
        }
    }

    pub fn with_y_range(mut self, lo: f64, hi: f64) -> Self {
        self.y_range = Some((lo, hi));
        self
    }
}

/// Six significant digits, trailing zeros removed. Integer parts are never
/// truncated, so values of a million or more print whole.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Linear map from a data interval onto a pixel interval.
#[derive(Debug, Clone, Copy)]
struct Scale {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn new(d0: f64, d1: f64, p0: f64, p1: f64) -> Self {
        let (d0, d1) = if d1 > d0 { (d0, d1) } else { (d0 - 1.0, d0 + 1.0) };
        Scale { d0, d1, p0, p1 }
    }

    fn at(&self, v: f64) -> f64 {
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }
}

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let pow = 10f64.powf(raw.log10().floor());
    let frac = raw / pow;
    let nice = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * pow
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let step = nice_step(hi - lo, 5);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

struct Canvas {
    out: String,
    plot_left: f64,
    plot_right: f64,
    plot_top: f64,
    plot_bottom: f64,
}

impl Canvas {
    fn new(spec: &ChartSpec) -> Self {
        let mut out = String::new();
        writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>").unwrap();
        writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">",
            w = fmt_num(WIDTH),
            h = fmt_num(HEIGHT)
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">{}</text>",
            fmt_num(WIDTH / 2.0),
            escape(&spec.title)
        )
        .unwrap();
        Canvas {
            out,
            plot_left: MARGIN_LEFT,
            plot_right: WIDTH - MARGIN_RIGHT,
            plot_top: MARGIN_TOP,
            plot_bottom: HEIGHT - MARGIN_BOTTOM,
        }
    }

    fn axes(&mut self, spec: &ChartSpec) {
        let (l, r, t, b) = (self.plot_left, self.plot_right, self.plot_top, self.plot_bottom);
        writeln!(
            self.out,
            "<path d=\"M{} {}V{}H{}\" fill=\"none\" stroke=\"#333\"/>",
            fmt_num(l),
            fmt_num(t),
            fmt_num(b),
            fmt_num(r)
        )
        .unwrap();
        writeln!(
            self.out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            fmt_num((l + r) / 2.0),
            fmt_num(HEIGHT - 12.0),
            escape(&spec.x_label)
        )
        .unwrap();
        let cy = (t + b) / 2.0;
        writeln!(
            self.out,
            "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>",
            fmt_num(cy),
            fmt_num(cy),
            escape(&spec.y_label)
        )
        .unwrap();
    }

    fn y_ticks(&mut self, scale: &Scale, lo: f64, hi: f64) {
        for v in ticks(lo, hi) {
            let y = scale.at(v);
            writeln!(
                self.out,
                "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#333\"/><text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
                fmt_num(self.plot_left - 5.0),
                fmt_num(self.plot_left),
                fmt_num(self.plot_left - 8.0),
                fmt_num(y + 4.0),
                fmt_num(v),
                y = fmt_num(y)
            )
            .unwrap();
        }
    }

    fn x_ticks(&mut self, scale: &Scale, lo: f64, hi: f64) {
        for v in ticks(lo, hi) {
            let x = scale.at(v);
            writeln!(
                self.out,
                "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"#333\"/><text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                fmt_num(self.plot_bottom),
                fmt_num(self.plot_bottom + 5.0),
                fmt_num(self.plot_bottom + 20.0),
                fmt_num(v),
                x = fmt_num(x)
            )
            .unwrap();
        }
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn check_finite(spec: &ChartSpec, values: impl IntoIterator<Item = f64>) -> Result<(), ChartError> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(ChartError::InvalidData {
            title: spec.title.clone(),
            reason: "non-finite value".into(),
        })
    }
}

/// Renders a 960×540 SVG 1.1 document.
pub fn render_chart(spec: &ChartSpec) -> Result<String, ChartError> {
    let empty = || ChartError::EmptySeries(spec.title.clone());
    match &spec.data {
        ChartData::Bar { categories, values } => {
            if values.is_empty() {
                return Err(empty());
            }
            if categories.len() != values.len() {
                return Err(ChartError::InvalidData {
                    title: spec.title.clone(),
                    reason: format!("{} categories for {} values", categories.len(), values.len()),
                });
            }
            check_finite(spec, values.iter().copied())?;
            Ok(render_bar(spec, categories, values))
        }
        ChartData::Histogram { lower, bin_width, counts } => {
            if counts.is_empty() || !bin_width.is_finite() || *bin_width <= 0.0 {
                return Err(empty());
            }
            check_finite(spec, [*lower, *bin_width])?;
            Ok(render_histogram(spec, *lower, *bin_width, counts))
        }
        ChartData::Line { points } => {
            if points.is_empty() {
                return Err(empty());
            }
            check_finite(spec, points.iter().flat_map(|p| [p.0, p.1]))?;
            Ok(render_line(spec, points))
        }
        ChartData::Scatter { points } => {
            if points.is_empty() {
                return Err(empty());
            }
            check_finite(spec, points.iter().flat_map(|p| [p.x, p.y]))?;
            Ok(render_scatter(spec, points))
        }
    }
}

fn value_range(spec: &ChartSpec, data: (f64, f64), include_zero: bool) -> (f64, f64) {
    if let Some(r) = spec.y_range {
        return r;
    }
    let (lo, hi) = data;
    if include_zero {
        let (lo, hi) = (lo.min(0.0), hi.max(0.0));
        if hi > lo {
            (lo, hi)
        } else {
            (0.0, 1.0)
        }
    } else {
        padded(lo, hi)
    }
}

fn render_bar(spec: &ChartSpec, categories: &[String], values: &[f64]) -> String {
    let mut c = Canvas::new(spec);
    let (lo, hi) = value_range(spec, bounds(values.iter().copied()), true);
    let y = Scale::new(lo, hi, c.plot_bottom, c.plot_top);
    c.axes(spec);
    c.y_ticks(&y, lo, hi);
    let slot = (c.plot_right - c.plot_left) / values.len() as f64;
    let width = slot * 0.8;
    let base = y.at(0.0_f64.clamp(lo, hi));
    for (i, (cat, &v)) in categories.iter().zip(values).enumerate() {
        let x = c.plot_left + slot * i as f64 + slot * 0.1;
        let top = y.at(v).min(base);
        let h = (y.at(v) - base).abs();
        writeln!(
            c.out,
            "<rect class=\"bar\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#4e79a7\"/>",
            fmt_num(x),
            fmt_num(top),
            fmt_num(width),
            fmt_num(h)
        )
        .unwrap();
        let lx = x + width / 2.0;
        let ly = c.plot_bottom + 12.0;
        writeln!(
            c.out,
            "<text x=\"{lx}\" y=\"{ly}\" text-anchor=\"end\" transform=\"rotate(-60 {lx} {ly})\">{}</text>",
            escape(cat),
            lx = fmt_num(lx),
            ly = fmt_num(ly)
        )
        .unwrap();
    }
    c.finish()
}

fn render_histogram(spec: &ChartSpec, lower: f64, bin_width: f64, counts: &[u64]) -> String {
    let mut c = Canvas::new(spec);
    let upper = lower + bin_width * counts.len() as f64;
    let max = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let (lo, hi) = spec.y_range.unwrap_or((0.0, max));
    let x = Scale::new(lower, upper, c.plot_left, c.plot_right);
    let y = Scale::new(lo, hi, c.plot_bottom, c.plot_top);
    c.axes(spec);
    c.y_ticks(&y, lo, hi);
    c.x_ticks(&x, lower, upper);
    for (i, &n) in counts.iter().enumerate() {
        let x0 = x.at(lower + bin_width * i as f64);
        let x1 = x.at(lower + bin_width * (i + 1) as f64);
        let top = y.at(n as f64);
        writeln!(
            c.out,
            "<rect class=\"bin\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#4e79a7\" stroke=\"#fff\" stroke-width=\"0.5\"/>",
            fmt_num(x0),
            fmt_num(top),
            fmt_num(x1 - x0),
            fmt_num(c.plot_bottom - top)
        )
        .unwrap();
    }
    c.finish()
}

fn render_line(spec: &ChartSpec, points: &[(f64, f64)]) -> String {
    let mut c = Canvas::new(spec);
    let (xlo, xhi) = bounds(points.iter().map(|p| p.0));
    let (xlo, xhi) = if xhi > xlo { (xlo, xhi) } else { (xlo - 1.0, xhi + 1.0) };
    let (lo, hi) = value_range(spec, bounds(points.iter().map(|p| p.1)), false);
    let x = Scale::new(xlo, xhi, c.plot_left, c.plot_right);
    let y = Scale::new(lo, hi, c.plot_bottom, c.plot_top);
    c.axes(spec);
    c.y_ticks(&y, lo, hi);
    c.x_ticks(&x, xlo, xhi);
    if lo < 0.0 && hi > 0.0 {
        writeln!(
            c.out,
            "<line x1=\"{}\" y1=\"{y0}\" x2=\"{}\" y2=\"{y0}\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>",
            fmt_num(c.plot_left),
            fmt_num(c.plot_right),
            y0 = fmt_num(y.at(0.0))
        )
        .unwrap();
    }
    let path: Vec<String> = points
        .iter()
        .map(|&(px, py)| format!("{},{}", fmt_num(x.at(px)), fmt_num(y.at(py))))
        .collect();
    writeln!(
        c.out,
        "<polyline class=\"series\" points=\"{}\" fill=\"none\" stroke=\"#e15759\" stroke-width=\"2\"/>",
        path.join(" ")
    )
    .unwrap();
    for &(px, py) in points {
        writeln!(
            c.out,
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"#e15759\"/>",
            fmt_num(x.at(px)),
            fmt_num(y.at(py))
        )
        .unwrap();
    }
    c.finish()
}

fn render_scatter(spec: &ChartSpec, points: &[ScatterPoint]) -> String {
    let mut c = Canvas::new(spec);
    let (xlo, xhi) = padded_pair(bounds(points.iter().map(|p| p.x)));
    let (lo, hi) = value_range(spec, bounds(points.iter().map(|p| p.y)), false);
    let x = Scale::new(xlo, xhi, c.plot_left, c.plot_right);
    let y = Scale::new(lo, hi, c.plot_bottom, c.plot_top);
    c.axes(spec);
    c.y_ticks(&y, lo, hi);
    c.x_ticks(&x, xlo, xhi);
    for p in points {
        let (px, py) = (x.at(p.x), y.at(p.y));
        writeln!(
            c.out,
            "<circle class=\"point\" cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"#59a14f\"/><text x=\"{}\" y=\"{}\">{}</text>",
            fmt_num(px),
            fmt_num(py),
            fmt_num(px + 6.0),
            fmt_num(py - 6.0),
            escape(&p.label)
        )
        .unwrap();
    }
    c.finish()
}

fn padded_pair((lo, hi): (f64, f64)) -> (f64, f64) {
    padded(lo, hi)
}
