//! Deterministic SVG emission of the standard chart kinds.
//!
//! Output is standalone SVG 1.1 built by plain string assembly: fixed
//! element order, fixed decimal formatting (6 significant digits, `.`
//! separator), no timestamps, no generated ids. The same data and spec
//! always produce byte-identical documents.

use thiserror::Error;

/// Fixed-notation formatting with 6 significant digits and trailing zeros
/// trimmed. Every number the toolkit writes (CSV, SVG, stdout) goes through
/// this.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".to_string()
        } else if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let exponent = v.abs().log10().floor() as i32;
    let decimals = (5 - exponent).max(0) as usize;
    let mut s = format!("{v:.decimals$}");
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

/// A value rounded to its 6-significant-digit textual form; the exported
/// representation and the plotted value are kept identical this way.
pub fn round_sig6(v: f64) -> f64 {
    format_sig6(v).parse().expect("format_sig6 emits parseable text")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    DiagramScatter,
    FractionScatter,
    HistogramPair,
    TrajectoryPath,
}

/// What to write next to scatter points: the composer's 1-based index, the
/// composer id, or nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelPolicy {
    #[default]
    Indices,
    Names,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub width: u32,
    pub height: u32,
    /// Requested ranges; always expanded to contain the data.
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub label_policy: LabelPolicy,
    /// Reference overlays: the x + y = 1 line on fraction plots, the axes
    /// through the marked point (0, 0) elsewhere.
    pub overlay: bool,
}

impl PlotSpec {
    pub fn new(kind: PlotKind) -> PlotSpec {
        PlotSpec {
            kind,
            width: 640,
            height: 480,
            x_range: None,
            y_range: None,
            label_policy: LabelPolicy::Indices,
            overlay: true,
        }
    }
}

/// One labeled scatter point.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub name: String,
    /// 1-based chart label.
    pub index: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistBin {
    pub degree: i8,
    pub major: u64,
    pub minor: u64,
    pub combined: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajPoint {
    pub year: i32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlotData {
    /// Composer points on the chromatic diagram; axes cross at the marked
    /// point (0, 0).
    DiagramScatter(Vec<PlotPoint>),
    /// Major/minor fractions with the x + y = 1 reference line.
    FractionScatter(Vec<PlotPoint>),
    /// Per-degree bars: major/minor side by side on the left panel, the
    /// pooled counts on the right panel.
    HistogramPair(Vec<HistBin>),
    /// A career path in composition-year order.
    TrajectoryPath {
        composer: String,
        points: Vec<TrajPoint>,
    },
}

impl PlotData {
    pub fn kind(&self) -> PlotKind {
        match self {
            PlotData::DiagramScatter(_) => PlotKind::DiagramScatter,
            PlotData::FractionScatter(_) => PlotKind::FractionScatter,
            PlotData::HistogramPair(_) => PlotKind::HistogramPair,
            PlotData::TrajectoryPath { .. } => PlotKind::TrajectoryPath,
        }
    }
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("plot data is {data:?} but the plot spec asks for {spec:?}")]
    MismatchedSpec { data: PlotKind, spec: PlotKind },
}

const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 44.0;
const POINT_COLOR: &str = "#1f77b4";
const MAJOR_COLOR: &str = "#d62728";
const MINOR_COLOR: &str = "#1f77b4";
const COMBINED_COLOR: &str = "#7f7f7f";

/// Linear data-to-pixel mapping for one panel.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x0) / (self.x1 - self.x0) * self.width
    }

    fn py(&self, y: f64) -> f64 {
        self.top + self.height - (y - self.y0) / (self.y1 - self.y0) * self.height
    }
}

fn expand_range(base: (f64, f64), values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = base;
    for v in values {
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    if lo == hi {
        lo -= 1.0;
        hi += 1.0;
    }
    (lo, hi)
}

fn tag(out: &mut String, s: &str) {
    out.push_str(s);
    out.push('\n');
}

fn svg_open(out: &mut String, width: u32, height: u32) {
    tag(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    tag(
        out,
        &format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" \
             height=\"{height}\" viewBox=\"0 0 {width} {height}\" \
             font-family=\"Helvetica, Arial, sans-serif\">"
        ),
    );
    tag(
        out,
        &format!("<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>"),
    );
}

fn frame_box(out: &mut String, f: &Frame) {
    tag(
        out,
        &format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" \
             stroke=\"black\" stroke-width=\"1\"/>",
            format_sig6(f.left),
            format_sig6(f.top),
            format_sig6(f.width),
            format_sig6(f.height)
        ),
    );
}

/// Five evenly spaced ticks per axis with 6-significant-digit labels.
fn axes_ticks(out: &mut String, f: &Frame) {
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x0 + t * (f.x1 - f.x0);
        let px = f.px(xv);
        tag(
            out,
            &format!(
                "<line x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{y1}\" stroke=\"black\" \
                 stroke-width=\"1\"/>",
                x = format_sig6(px),
                y0 = format_sig6(f.top + f.height),
                y1 = format_sig6(f.top + f.height + 5.0)
            ),
        );
        tag(
            out,
            &format!(
                "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" font-size=\"11\">{v}</text>",
                x = format_sig6(px),
                y = format_sig6(f.top + f.height + 18.0),
                v = format_sig6(xv)
            ),
        );
        let yv = f.y0 + t * (f.y1 - f.y0);
        let py = f.py(yv);
        tag(
            out,
            &format!(
                "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"black\" \
                 stroke-width=\"1\"/>",
                x0 = format_sig6(f.left - 5.0),
                x1 = format_sig6(f.left),
                y = format_sig6(py)
            ),
        );
        tag(
            out,
            &format!(
                "<text x=\"{x}\" y=\"{y}\" text-anchor=\"end\" font-size=\"11\">{v}</text>",
                x = format_sig6(f.left - 8.0),
                y = format_sig6(py + 4.0),
                v = format_sig6(yv)
            ),
        );
    }
}

fn axis_titles(out: &mut String, f: &Frame, x_title: &str, y_title: &str, height: u32) {
    tag(
        out,
        &format!(
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" font-size=\"12\">{x_title}</text>",
            x = format_sig6(f.left + f.width / 2.0),
            y = format_sig6(height as f64 - 8.0)
        ),
    );
    tag(
        out,
        &format!(
            "<text x=\"14\" y=\"{y}\" text-anchor=\"middle\" font-size=\"12\" \
             transform=\"rotate(-90, 14, {y})\">{y_title}</text>",
            y = format_sig6(f.top + f.height / 2.0)
        ),
    );
}

/// Axes through the marked point (0, 0) plus its glyph, drawn when the
/// origin is inside the frame.
fn marked_point_overlay(out: &mut String, f: &Frame) {
    if f.x0 <= 0.0 && 0.0 <= f.x1 {
        tag(
            out,
            &format!(
                "<line class=\"axis-zero\" x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{y1}\" \
                 stroke=\"#bbbbbb\" stroke-width=\"1\"/>",
                x = format_sig6(f.px(0.0)),
                y0 = format_sig6(f.top),
                y1 = format_sig6(f.top + f.height)
            ),
        );
    }
    if f.y0 <= 0.0 && 0.0 <= f.y1 {
        tag(
            out,
            &format!(
                "<line class=\"axis-zero\" x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" \
                 stroke=\"#bbbbbb\" stroke-width=\"1\"/>",
                x0 = format_sig6(f.left),
                x1 = format_sig6(f.left + f.width),
                y = format_sig6(f.py(0.0))
            ),
        );
    }
    if f.x0 <= 0.0 && 0.0 <= f.x1 && f.y0 <= 0.0 && 0.0 <= f.y1 {
        tag(
            out,
            &format!(
                "<circle class=\"marked\" cx=\"{x}\" cy=\"{y}\" r=\"4\" fill=\"none\" \
                 stroke=\"{MAJOR_COLOR}\" stroke-width=\"1.5\"/>",
                x = format_sig6(f.px(0.0)),
                y = format_sig6(f.py(0.0))
            ),
        );
    }
}

fn scatter_points(out: &mut String, f: &Frame, points: &[PlotPoint], policy: LabelPolicy) {
    for p in points {
        tag(
            out,
            &format!(
                "<circle class=\"pt\" cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"{POINT_COLOR}\"/>",
                x = format_sig6(f.px(p.x)),
                y = format_sig6(f.py(p.y))
            ),
        );
    }
    match policy {
        LabelPolicy::None => {}
        LabelPolicy::Indices | LabelPolicy::Names => {
            for p in points {
                let label = match policy {
                    LabelPolicy::Indices => p.index.to_string(),
                    _ => escape_text(&p.name),
                };
                tag(
                    out,
                    &format!(
                        "<text class=\"lbl\" x=\"{x}\" y=\"{y}\" font-size=\"10\">{label}</text>",
                        x = format_sig6(f.px(p.x) + 5.0),
                        y = format_sig6(f.py(p.y) - 5.0)
                    ),
                );
            }
        }
    }
}

fn escape_text(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render `data` under `spec` into a standalone SVG document.
pub fn render(data: &PlotData, spec: &PlotSpec) -> Result<String, RenderError> {
    if data.kind() != spec.kind {
        return Err(RenderError::MismatchedSpec {
            data: data.kind(),
            spec: spec.kind,
        });
    }
    let mut out = String::new();
    svg_open(&mut out, spec.width, spec.height);
    match data {
        PlotData::DiagramScatter(points) => diagram_scatter(&mut out, spec, points),
        PlotData::FractionScatter(points) => fraction_scatter(&mut out, spec, points),
        PlotData::HistogramPair(bins) => histogram_pair(&mut out, spec, bins),
        PlotData::TrajectoryPath { composer, points } => {
            trajectory_path(&mut out, spec, composer, points)
        }
    }
    tag(&mut out, "</svg>");
    Ok(out)
}

fn single_frame(spec: &PlotSpec, x_range: (f64, f64), y_range: (f64, f64)) -> Frame {
    Frame {
        x0: x_range.0,
        x1: x_range.1,
        y0: y_range.0,
        y1: y_range.1,
        left: MARGIN_LEFT,
        top: MARGIN_TOP,
        width: spec.width as f64 - MARGIN_LEFT - MARGIN_RIGHT,
        height: spec.height as f64 - MARGIN_TOP - MARGIN_BOTTOM,
    }
}

fn diagram_scatter(out: &mut String, spec: &PlotSpec, points: &[PlotPoint]) {
    let x_range = expand_range(
        spec.x_range.unwrap_or((-7.0, 7.0)),
        points.iter().map(|p| p.x),
    );
    let y_range = expand_range(
        spec.y_range.unwrap_or((-7.0, 7.0)),
        points.iter().map(|p| p.y),
    );
    let f = single_frame(spec, x_range, y_range);
    frame_box(out, &f);
    axes_ticks(out, &f);
    axis_titles(out, &f, "major degree", "minor degree", spec.height);
    if spec.overlay {
        marked_point_overlay(out, &f);
    }
    scatter_points(out, &f, points, spec.label_policy);
}

fn fraction_scatter(out: &mut String, spec: &PlotSpec, points: &[PlotPoint]) {
    let x_range = expand_range(
        spec.x_range.unwrap_or((0.0, 1.0)),
        points.iter().map(|p| p.x),
    );
    let y_range = expand_range(
        spec.y_range.unwrap_or((0.0, 1.0)),
        points.iter().map(|p| p.y),
    );
    let f = single_frame(spec, x_range, y_range);
    frame_box(out, &f);
    axes_ticks(out, &f);
    axis_titles(out, &f, "major fraction", "minor fraction", spec.height);
    if spec.overlay {
        // The construction line x + y = 1.
        tag(
            out,
            &format!(
                "<line class=\"refline\" x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" \
                 stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>",
                x1 = format_sig6(f.px(0.0)),
                y1 = format_sig6(f.py(1.0)),
                x2 = format_sig6(f.px(1.0)),
                y2 = format_sig6(f.py(0.0))
            ),
        );
    }
    scatter_points(out, &f, points, spec.label_policy);
}

fn histogram_pair(out: &mut String, spec: &PlotSpec, bins: &[HistBin]) {
    let max_split = bins.iter().map(|b| b.major.max(b.minor)).max().unwrap_or(0);
    let max_combined = bins.iter().map(|b| b.combined).max().unwrap_or(0);
    let gap = 36.0;
    let panel_width = (spec.width as f64 - MARGIN_LEFT - MARGIN_RIGHT - gap) / 2.0;
    let height = spec.height as f64 - MARGIN_TOP - MARGIN_BOTTOM;

    let panels = [
        (MARGIN_LEFT, max_split, "per-mode counts"),
        (MARGIN_LEFT + panel_width + gap, max_combined, "combined counts"),
    ];
    for (panel, (left, max_count, title)) in panels.into_iter().enumerate() {
        let f = Frame {
            x0: 0.0,
            x1: bins.len().max(1) as f64,
            y0: 0.0,
            y1: max_count.max(1) as f64,
            left,
            top: MARGIN_TOP,
            width: panel_width,
            height,
        };
        frame_box(out, &f);
        tag(
            out,
            &format!(
                "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" font-size=\"12\">{title}</text>",
                x = format_sig6(f.left + f.width / 2.0),
                y = format_sig6(MARGIN_TOP - 8.0)
            ),
        );
        let slot = f.width / bins.len().max(1) as f64;
        for (i, bin) in bins.iter().enumerate() {
            let x = f.left + i as f64 * slot;
            if panel == 0 {
                bar(out, &f, x + slot * 0.15, slot * 0.35, bin.major, "bar-major", MAJOR_COLOR);
                bar(out, &f, x + slot * 0.5, slot * 0.35, bin.minor, "bar-minor", MINOR_COLOR);
            } else {
                bar(
                    out,
                    &f,
                    x + slot * 0.2,
                    slot * 0.6,
                    bin.combined,
                    "bar-combined",
                    COMBINED_COLOR,
                );
            }
            tag(
                out,
                &format!(
                    "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" font-size=\"9\">{d}</text>",
                    x = format_sig6(x + slot / 2.0),
                    y = format_sig6(f.top + f.height + 14.0),
                    d = bin.degree
                ),
            );
        }
        // Count scale: top tick only.
        tag(
            out,
            &format!(
                "<text x=\"{x}\" y=\"{y}\" text-anchor=\"end\" font-size=\"10\">{v}</text>",
                x = format_sig6(f.left - 5.0),
                y = format_sig6(f.top + 10.0),
                v = max_count.max(1)
            ),
        );
    }
    tag(
        out,
        &format!(
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" font-size=\"12\">degree</text>",
            x = format_sig6(spec.width as f64 / 2.0),
            y = format_sig6(spec.height as f64 - 8.0)
        ),
    );
}

fn bar(out: &mut String, f: &Frame, x: f64, width: f64, count: u64, class: &str, color: &str) {
    if count == 0 {
        return;
    }
    let top = f.py(count as f64);
    tag(
        out,
        &format!(
            "<rect class=\"{class}\" x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" \
             fill=\"{color}\"/>",
            x = format_sig6(x),
            y = format_sig6(top),
            w = format_sig6(width),
            h = format_sig6(f.top + f.height - top)
        ),
    );
}

fn trajectory_path(out: &mut String, spec: &PlotSpec, composer: &str, points: &[TrajPoint]) {
    // Keep the marked point in view and pad so the path is not glued to the
    // frame.
    let pad = 0.5;
    let x_base = spec.x_range.unwrap_or((-pad, pad));
    let y_base = spec.y_range.unwrap_or((-pad, pad));
    let x_range = expand_range(
        x_base,
        points.iter().flat_map(|p| [p.x - pad, p.x + pad]),
    );
    let y_range = expand_range(
        y_base,
        points.iter().flat_map(|p| [p.y - pad, p.y + pad]),
    );
    let f = single_frame(spec, x_range, y_range);
    frame_box(out, &f);
    axes_ticks(out, &f);
    axis_titles(out, &f, "major degree", "minor degree", spec.height);
    if spec.overlay {
        marked_point_overlay(out, &f);
    }

    if !points.is_empty() {
        let mut d = String::new();
        for (i, p) in points.iter().enumerate() {
            d.push_str(if i == 0 { "M " } else { " L " });
            d.push_str(&format_sig6(f.px(p.x)));
            d.push(' ');
            d.push_str(&format_sig6(f.py(p.y)));
        }
        tag(
            out,
            &format!(
                "<path class=\"traj\" d=\"{d}\" fill=\"none\" stroke=\"{POINT_COLOR}\" \
                 stroke-width=\"1.5\"/>"
            ),
        );
    }
    for p in points {
        tag(
            out,
            &format!(
                "<circle class=\"pt\" cx=\"{x}\" cy=\"{y}\" r=\"2.5\" fill=\"{POINT_COLOR}\"/>",
                x = format_sig6(f.px(p.x)),
                y = format_sig6(f.py(p.y))
            ),
        );
    }
    if spec.label_policy != LabelPolicy::None {
        for p in points {
            tag(
                out,
                &format!(
                    "<text class=\"lbl\" x=\"{x}\" y=\"{y}\" font-size=\"9\">{year}</text>",
                    x = format_sig6(f.px(p.x) + 4.0),
                    y = format_sig6(f.py(p.y) - 4.0),
                    year = p.year
                ),
            );
        }
    }
    tag(
        out,
        &format!(
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"start\" font-size=\"12\">{name}</text>",
            x = format_sig6(f.left + 8.0),
            y = format_sig6(f.top + 16.0),
            name = escape_text(composer)
        ),
    );
}
