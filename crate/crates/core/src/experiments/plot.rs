//! SVG line charts of sweep results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::sweep::{Depth, SweepResult, SweepRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    VsLambda,
    VsWidth,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Series<'a> {
    label: String,
    rows: Vec<&'a SweepRow>,
}

fn series(result: &SweepResult, kind: PlotKind) -> Vec<Series<'_>> {
    let other = |r: &SweepRow| match kind {
        PlotKind::VsLambda => r.width as f64,
        PlotKind::VsWidth => r.lambda,
    };
    let mut others: Vec<f64> = result.rows.iter().map(other).collect();
    others.sort_by(f64::total_cmp);
    others.dedup();
    let mut groups: BTreeMap<(Depth, usize), Vec<&SweepRow>> = BTreeMap::new();
    for r in &result.rows {
        let idx = others.iter().position(|&o| o == other(r)).unwrap_or(0);
        groups.entry((r.depth, idx)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((depth, idx), mut rows)| {
            let x = |r: &&SweepRow| match kind {
                PlotKind::VsLambda => r.lambda,
                PlotKind::VsWidth => r.width as f64,
            };
            rows.sort_by(|a, b| x(a).total_cmp(&x(b)));
            let label = if others.len() > 1 {
                match kind {
                    PlotKind::VsLambda => format!("{} (n={})", depth.label(), others[idx]),
                    PlotKind::VsWidth => format!("{} (λ={:.4})", depth.label(), others[idx]),
                }
            } else {
                depth.label().to_string()
            };
            Series { label, rows }
        })
        .collect()
}

/// Renders `result` as an SVG chart with one polyline and CI band per series.
pub fn render_svg(result: &SweepResult, kind: PlotKind) -> Result<String> {
    if result.rows.is_empty() {
        return Err(Error::InvalidConfig("cannot plot an empty sweep".into()));
    }
    let log_x = kind == PlotKind::VsLambda;
    let xv = |r: &SweepRow| {
        let v = match kind {
            PlotKind::VsLambda => r.lambda,
            PlotKind::VsWidth => r.width as f64,
        };
        if log_x {
            v.ln()
        } else {
            v
        }
    };
    let (mut x0, mut x1) = result
        .rows
        .iter()
        .map(xv)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if x1 - x0 < 1e-12 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
    let sy = |p: f64| TOP + (1.0 - p) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let p = k as f64 / 4.0;
        let y = sy(p);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{p:.2}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let mut ticks: Vec<f64> = result.rows.iter().map(xv).collect();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    let step = ticks.len().div_ceil(8).max(1);
    for t in ticks.iter().step_by(step) {
        let shown = if log_x { t.exp() } else { *t };
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{shown:.0}</text>"#, sx(*t), TOP + ph + 16.0);
    }
    let xlabel = match kind {
        PlotKind::VsLambda => "λ (log scale)",
        PlotKind::VsWidth => "width n",
    };
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"#, LEFT + pw / 2.0, H - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">separation probability</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    for (i, ser) in series(result, kind).iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let upper: Vec<String> = ser.rows.iter().map(|r| format!("{:.2},{:.2}", sx(xv(r)), sy(r.ci_high))).collect();
        let lower: Vec<String> = ser.rows.iter().rev().map(|r| format!("{:.2},{:.2}", sx(xv(r)), sy(r.ci_low))).collect();
        let _ = writeln!(
            s,
            r#"<polygon class="ci" points="{} {}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
            upper.join(" "),
            lower.join(" ")
        );
        let pts: Vec<String> = ser.rows.iter().map(|r| format!("{:.2},{:.2}", sx(xv(r)), sy(r.p_hat))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            pts.join(" ")
        );
        for r in &ser.rows {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(xv(r)), sy(r.p_hat));
        }
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = W - RIGHT + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#, ly - 4.0, lx + 20.0, ly - 4.0);
        let _ = writeln!(s, r#"<text class="legend" x="{:.2}" y="{ly:.2}">{}</text>"#, lx + 26.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes the SVG chart to `path` and the sweep CSV next to it; returns the CSV path.
pub fn emit_plots(result: &SweepResult, kind: PlotKind, path: impl AsRef<Path>) -> Result<PathBuf> {
    let path = path.as_ref();
    let svg = render_svg(result, kind)?;
    std::fs::write(path, svg)?;
    let csv_path = path.with_extension("csv");
    result.write_csv(std::fs::File::create(&csv_path)?)?;
    Ok(csv_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::sweep::{DatasetKind, ExperimentConfig};

    fn row(width: usize, lambda: f64, depth: Depth, successes: u64) -> SweepRow {
        SweepRow {
            width,
            lambda,
            depth,
            successes,
            trials: 10,
            p_hat: successes as f64 / 10.0,
            ci_low: 0.0,
            ci_high: 1.0,
            mean_margin: None,
            errors: 0,
        }
    }

    fn result(rows: Vec<SweepRow>) -> SweepResult {
        SweepResult {
            config: ExperimentConfig::new(DatasetKind::Rings2D, vec![30], vec![1.0]),
            lambdas: vec![],
            criterion: "one-vs-rest".into(),
            rows,
        }
    }

    #[test]
    fn three_series_with_legend() {
        let mut rows = Vec::new();
        for d in Depth::ALL {
            for l in [50.0, 100.0, 200.0] {
                rows.push(row(30, l, d, 5));
            }
        }
        let svg = render_svg(&result(rows), PlotKind::VsLambda).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        for label in ["one-layer", "two-layer-λ̂", "two-layer-λ<"] {
            assert!(svg.contains(label), "{label}");
        }
    }

    #[test]
    fn single_cell_and_empty() {
        let svg = render_svg(&result(vec![row(10, 1.0, Depth::One, 3)]), PlotKind::VsWidth).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(render_svg(&result(vec![]), PlotKind::VsWidth).is_err());
    }
}
