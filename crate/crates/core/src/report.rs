//! Long-form CSV tables and SVG curve panels.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::experiment::{CellStatus, RawRecord, SummaryRow};
use crate::metrics::Metric;
use crate::perturb::NoiseKind;
use crate::scale::ScalingKind;

pub const SUMMARY_HEADER: [&str; 9] = [
    "dataset", "noise", "scaling", "ratio", "metric", "mean", "std", "repeats", "status",
];

pub const RAW_HEADER: [&str; 11] = [
    "dataset",
    "noise",
    "scaling",
    "ratio",
    "repeat",
    "seed",
    "nmi",
    "ri",
    "ari",
    "silhouette",
    "davies_bouldin",
];

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.dataset.as_str(),
            r.noise.as_str(),
            r.scaling.as_str(),
            &r.ratio.to_string(),
            r.metric.as_str(),
            &r.mean.to_string(),
            &r.std.to_string(),
            &r.repeats.to_string(),
            &r.status.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("writing summary csv", e))?;
    Ok(())
}

pub fn write_raw_csv<W: Write>(records: &[RawRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RAW_HEADER)?;
    for r in records {
        let m = &r.report;
        w.write_record([
            r.dataset.as_str(),
            r.noise.as_str(),
            r.scaling.as_str(),
            &r.ratio.to_string(),
            &r.repeat.to_string(),
            &r.seed.to_string(),
            &m.nmi.to_string(),
            &m.ri.to_string(),
            &m.ari.to_string(),
            &m.silhouette.to_string(),
            &m.davies_bouldin.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("writing raw csv", e))?;
    Ok(())
}

/// Reads and validates a summary table written by [`write_summary_csv`].
pub fn read_summary_csv<R: Read>(input: R) -> Result<Vec<SummaryRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader.headers()?.clone();
    let missing: Vec<&str> = SUMMARY_HEADER
        .iter()
        .copied()
        .filter(|h| !header.iter().any(|x| x == *h))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Schema(format!("missing column(s): {}", missing.join(", "))));
    }
    if header.iter().ne(SUMMARY_HEADER.iter().copied()) {
        return Err(Error::Schema(format!(
            "unexpected header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = idx + 2;
        let field = |i: usize| record.get(i).unwrap_or("");
        let schema = |what: &str, value: &str| Error::Schema(format!("line {line}: invalid {what} `{value}`"));
        let number = |i: usize, what: &str| -> Result<f64> { field(i).parse().map_err(|_| schema(what, field(i))) };

        let metric: Metric = field(4)
            .parse()
            .map_err(|_| Error::UnknownMetric(field(4).to_string()))?;
        let status: CellStatus = field(8).parse().map_err(|_| schema("status", field(8)))?;
        let ratio = number(3, "ratio")?;
        if !(ratio >= 0.0 && ratio.is_finite()) {
            return Err(schema("ratio", field(3)));
        }
        let std = number(6, "std")?;
        if std < 0.0 {
            return Err(schema("std", field(6)));
        }
        rows.push(SummaryRow {
            dataset: field(0).to_string(),
            noise: field(1).parse().map_err(|_| schema("noise", field(1)))?,
            scaling: field(2).parse().map_err(|_| schema("scaling", field(2)))?,
            ratio,
            metric,
            mean: number(5, "mean")?,
            std,
            repeats: field(7).parse().map_err(|_| schema("repeats", field(7)))?,
            status,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PanelKind {
    Mean,
    Std,
}

impl PanelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PanelKind::Mean => "mean",
            PanelKind::Std => "std",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub kind: PanelKind,
    pub metric: Metric,
    pub noise: NoiseKind,
    pub scaling: ScalingKind,
    pub file_name: String,
    pub svg: String,
}

struct Series<'a> {
    dataset: &'a str,
    /// (ratio, mean, std), sorted by ratio.
    points: Vec<(f64, f64, f64)>,
}

type PanelKey = (Metric, NoiseKind, ScalingKind);

/// One mean panel and one standard-deviation panel per
/// (metric, noise, scaling) present among the successful rows.
pub fn render_panels(rows: &[SummaryRow]) -> Result<Vec<Panel>> {
    let mut groups: BTreeMap<PanelKey, Vec<Series<'_>>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.status.is_ok()) {
        let series = groups.entry((r.metric, r.noise, r.scaling)).or_default();
        match series.iter_mut().find(|s| s.dataset == r.dataset) {
            Some(s) => s.points.push((r.ratio, r.mean, r.std)),
            None => series.push(Series {
                dataset: &r.dataset,
                points: vec![(r.ratio, r.mean, r.std)],
            }),
        }
    }
    if groups.is_empty() {
        return Err(Error::Schema("empty selection: no successful rows to plot".into()));
    }
    let mut panels = Vec::with_capacity(groups.len() * 2);
    for kind in [PanelKind::Mean, PanelKind::Std] {
        for ((metric, noise, scaling), series) in groups.iter_mut() {
            for s in series.iter_mut() {
                s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
            }
            panels.push(Panel {
                kind,
                metric: *metric,
                noise: *noise,
                scaling: *scaling,
                file_name: format!("{}_{}_{}_{}.svg", kind.as_str(), metric, noise, scaling),
                svg: render_svg(kind, *metric, *noise, *scaling, series),
            });
        }
    }
    Ok(panels)
}

const WIDTH: f64 = 520.0;
const HEIGHT: f64 = 340.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Rounded tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn render_svg(
    kind: PanelKind,
    metric: Metric,
    noise: NoiseKind,
    scaling: ScalingKind,
    series: &[Series<'_>],
) -> String {
    let value = |p: &(f64, f64, f64)| match kind {
        PanelKind::Mean => p.1,
        PanelKind::Std => p.2,
    };
    let mut x_max = 0.0f64;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for s in series {
        for p in &s.points {
            x_max = x_max.max(p.0);
            let v = value(p);
            if !v.is_finite() {
                continue;
            }
            let (lo, hi) = match kind {
                PanelKind::Mean if p.2.is_finite() => (v - p.2, v + p.2),
                _ => (v, v),
            };
            y_lo = y_lo.min(lo);
            y_hi = y_hi.max(hi);
        }
    }
    if !y_lo.is_finite() {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if kind == PanelKind::Std {
        y_lo = y_lo.min(0.0);
    }
    if y_hi - y_lo < 1e-12 {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    let pad = 0.05 * (y_hi - y_lo);
    let (y_lo, y_hi) = (y_lo - pad, y_hi + pad);
    if x_max <= 0.0 {
        x_max = 1.0;
    }

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + x / x_max * plot_w;
    let sy = |y: f64| TOP + (y_hi - y.clamp(y_lo, y_hi)) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let title = match kind {
        PanelKind::Mean => format!("{} (mean) | {} noise | {}", metric.label(), noise, scaling),
        PanelKind::Std => format!("{} (std over repeats) | {} noise | {}", metric.label(), noise, scaling),
    };
    let _ = writeln!(
        w,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&title)
    );

    // axes and grid
    for t in ticks(y_lo, y_hi, 6) {
        let y = sy(t);
        let _ = writeln!(
            w,
            r##"<line x1="{LEFT:.1}" y1="{y:.2}" x2="{:.1}" y2="{y:.2}" stroke="#e0e0e0"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            tick_label(t)
        );
    }
    for t in ticks(0.0, x_max, 6) {
        let x = sx(t);
        let _ = writeln!(
            w,
            r##"<line x1="{x:.2}" y1="{TOP:.1}" x2="{x:.2}" y2="{:.1}" stroke="#f0f0f0"/>"##,
            TOP + plot_h
        );
        let _ = writeln!(
            w,
            r#"<text x="{x:.2}" y="{:.1}" text-anchor="middle">{}:1</text>"#,
            TOP + plot_h + 16.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        w,
        r##"<rect x="{LEFT:.1}" y="{TOP:.1}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="#333"/>"##
    );
    let _ = writeln!(
        w,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">noise : feature ratio</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let y_label = match kind {
        PanelKind::Mean => metric.label().to_string(),
        PanelKind::Std => format!("std({})", metric.label()),
    };
    let _ = writeln!(
        w,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&y_label)
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let finite: Vec<&(f64, f64, f64)> = s.points.iter().filter(|p| value(p).is_finite()).collect();
        if kind == PanelKind::Mean {
            let banded: Vec<&&(f64, f64, f64)> = finite.iter().filter(|p| p.2.is_finite()).collect();
            if banded.len() > 1 {
                let mut pts = String::new();
                for p in &banded {
                    let _ = write!(pts, "{:.2},{:.2} ", sx(p.0), sy(p.1 + p.2));
                }
                for p in banded.iter().rev() {
                    let _ = write!(pts, "{:.2},{:.2} ", sx(p.0), sy(p.1 - p.2));
                }
                let _ = writeln!(
                    w,
                    r#"<polygon points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#,
                    pts.trim_end()
                );
            }
        }
        let mut pts = String::new();
        for p in &finite {
            let _ = write!(pts, "{:.2},{:.2} ", sx(p.0), sy(value(p)));
        }
        let _ = writeln!(
            w,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"/>"#,
            pts.trim_end()
        );
        let ly = TOP + 10.0 + 16.0 * i as f64;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(
            w,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 24.0,
            ly + 4.0,
            escape(s.dataset)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
