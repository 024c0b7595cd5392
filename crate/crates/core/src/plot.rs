//! SVG charts of level sets in the sweep plane.
//!
//! Output is plain text assembled with fixed `{:.3}` formatting, so the same
//! table and spec always produce the same bytes.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::experiment::{conjecture_curve, level_set, SweepMode};
use crate::table::ResultsTable;

/// Number of samples of the conjecture and comparison curves.
pub const CURVE_SAMPLES: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct PlotSpec {
    pub levels: Vec<f64>,
    /// `δ = H(η)/2`; `EtaDelta` tables only.
    pub conjecture: bool,
    /// `δ = η·log₂(1/η)`, i.e. `k·log₂(n/k)/n`; `EtaDelta` tables only.
    pub comparison: bool,
    pub title: Option<String>,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self { levels: vec![0.1, 0.5, 0.9], conjecture: false, comparison: false, title: None }
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 220.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn px(x: f64) -> f64 {
    LEFT + x.clamp(0.0, 1.0) * (WIDTH - LEFT - RIGHT)
}

fn py(y: f64) -> f64 {
    HEIGHT - BOTTOM - y.clamp(0.0, 1.0) * (HEIGHT - TOP - BOTTOM)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn polyline(out: &mut String, class: &str, attrs: &str, style: &str, pts: &[(f64, f64)]) {
    let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.3},{:.3}", px(x), py(y))).collect();
    let _ = writeln!(out, r#"<polyline class="{class}" {attrs}fill="none" {style} points="{}"/>"#, coords.join(" "));
}

/// Samples `f` at [`CURVE_SAMPLES`] points of η from 0.01 to 0.99.
pub fn sample_curve(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    (0..CURVE_SAMPLES)
        .map(|i| {
            let eta = 0.01 + 0.98 * i as f64 / (CURVE_SAMPLES - 1) as f64;
            (eta, f(eta))
        })
        .collect()
}

pub fn render_svg(table: &ResultsTable, spec: &PlotSpec) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::InvalidInput("cannot plot an empty table".into()));
    }
    let mode = table.config.mode;
    if (spec.conjecture || spec.comparison) && mode != SweepMode::EtaDelta {
        return Err(Error::InvalidInput("entropy curves live in the (η, δ) plane; table is rho_delta".into()));
    }
    let (xlabel, ylabel) = match mode {
        SweepMode::EtaDelta => ("η = k/n", "δ = m/n"),
        SweepMode::RhoDelta => ("δ = m/n", "ρ = k/m"),
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    if let Some(title) = &spec.title {
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            px(0.5),
            escape(title)
        );
    }

    // axes and ticks
    let _ = writeln!(out, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(out, r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#, px(0.0), py(0.0), px(1.0), py(0.0));
    let _ = writeln!(out, r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#, px(0.0), py(0.0), px(0.0), py(1.0));
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let _ = writeln!(
            out,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            px(t),
            py(0.0),
            px(t),
            py(0.0) + 5.0
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            px(0.0) - 5.0,
            py(t),
            px(0.0),
            py(t)
        );
    }
    let _ = writeln!(out, "</g>");
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let _ = writeln!(out, r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{t:.1}</text>"#, px(t), py(0.0) + 18.0);
        let _ =
            writeln!(out, r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{t:.1}</text>"#, px(0.0) - 8.0, py(t) + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{xlabel}</text>"#, px(0.5), HEIGHT - 12.0);
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.3}" text-anchor="middle" transform="rotate(-90 16 {:.3})">{ylabel}</text>"#,
        py(0.5),
        py(0.5)
    );

    let mut legend: Vec<(String, String, &str)> = Vec::new();
    for (si, (formulation, distribution)) in table.slices().into_iter().enumerate() {
        let cells = table.slice(formulation, distribution);
        let color = PALETTE[si % PALETTE.len()];
        for &level in &spec.levels {
            let ls = level_set(&cells, mode, level)?;
            if ls.points.is_empty() {
                continue;
            }
            let pts: Vec<(f64, f64)> = ls.points.iter().map(|p| (p.abscissa, p.ordinate)).collect();
            let dash = if level == 0.5 { "" } else { r#" stroke-dasharray="5,3""# };
            let attrs =
                format!(r#"data-formulation="{formulation}" data-distribution="{distribution}" data-level="{level}" "#);
            polyline(&mut out, "level", &attrs, &format!(r#"stroke="{color}" stroke-width="1.5"{dash}"#), &pts);
            legend.push((format!("{formulation} {distribution} @ {level}"), color.to_string(), dash));
        }
    }
    if spec.conjecture {
        let pts = sample_curve(|eta| conjecture_curve(eta).expect("η in range"));
        polyline(&mut out, "conjecture", "", r#"stroke="black" stroke-width="1.5""#, &pts);
        legend.push(("H(η)/2".into(), "black".into(), ""));
    }
    if spec.comparison {
        let pts = sample_curve(|eta| -eta * eta.log2());
        polyline(&mut out, "comparison", "", r#"stroke="gray" stroke-width="1.5" stroke-dasharray="2,2""#, &pts);
        legend.push(("k·log₂(n/k)/n".into(), "gray".into(), r#" stroke-dasharray="2,2""#));
    }

    let _ = writeln!(out, r#"<g class="legend">"#);
    let x0 = WIDTH - RIGHT + 16.0;
    for (i, (label, color, dash)) in legend.iter().enumerate() {
        let y = TOP + 12.0 + 18.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{x0:.3}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            x0 + 24.0
        );
        let _ = writeln!(out, r#"<text x="{:.3}" y="{:.3}">{}</text>"#, x0 + 30.0, y + 4.0, escape(label));
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{CellResult, SweepConfig};
    use crate::randgen::DistributionSpec;
    use crate::recovery::Formulation;

    fn step_table(mode: SweepMode) -> ResultsTable {
        let n = 100;
        let mut rows = Vec::new();
        for k in [10, 20, 30] {
            for m in [40, 60] {
                rows.push(CellResult {
                    distribution: DistributionSpec::D1,
                    formulation: Formulation::L1Box,
                    n,
                    m,
                    k,
                    trials: 10,
                    successes: if m == 60 { 10 } else { 0 },
                    error: None,
                });
            }
        }
        ResultsTable::new(SweepConfig::new(mode, n, vec![Formulation::L1Box]), rows)
    }

    #[test]
    fn one_level_one_polyline() {
        let spec = PlotSpec { levels: vec![0.5], ..Default::default() };
        let svg = render_svg(&step_table(SweepMode::EtaDelta), &spec).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches(r#"class="level""#).count(), 1);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn curves_have_256_samples() {
        let spec = PlotSpec { levels: vec![], conjecture: true, comparison: true, title: Some("a < b".into()) };
        let svg = render_svg(&step_table(SweepMode::EtaDelta), &spec).unwrap();
        let line = svg.lines().find(|l| l.contains(r#"class="conjecture""#)).unwrap();
        let points = line.split("points=\"").nth(1).unwrap();
        assert_eq!(points.split(' ').count(), CURVE_SAMPLES);
        assert!(svg.contains("a &lt; b"));
        let pts = sample_curve(|x| x);
        assert_eq!(pts.first().unwrap().0, 0.01);
        assert!((pts.last().unwrap().0 - 0.99).abs() < 1e-15);
    }

    #[test]
    fn deterministic_output() {
        let spec = PlotSpec { conjecture: true, ..Default::default() };
        let t = step_table(SweepMode::EtaDelta);
        assert_eq!(render_svg(&t, &spec).unwrap(), render_svg(&t, &spec).unwrap());
    }

    #[test]
    fn errors() {
        let mut t = step_table(SweepMode::EtaDelta);
        t.rows.clear();
        assert!(render_svg(&t, &PlotSpec::default()).is_err());
        let spec = PlotSpec { conjecture: true, ..Default::default() };
        assert!(render_svg(&step_table(SweepMode::RhoDelta), &spec).is_err());
    }
}
