//! Log-log regret plots as plain SVG, plus the matching CSV.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::experiment::{BenchRow, RunRecord};
use super::regret::mean_stderr;
use crate::error::{invalid, Result};

/// One line on the plot.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Averages regret curves point-wise per (instance, policy, horizon).
pub fn aggregate_records(records: &[RunRecord]) -> Vec<BenchRow> {
    let mut groups: BTreeMap<(String, String, u64), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.instance.clone(), r.policy.clone(), r.horizon))
            .or_default()
            .push(r);
    }
    let mut rows = Vec::new();
    for ((instance, policy, horizon), recs) in groups {
        let mut by_t: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for r in &recs {
            for p in &r.regret_curve {
                by_t.entry(p.t).or_default().push(p.regret);
            }
        }
        for (t, vals) in by_t {
            let (mean, se) = mean_stderr(&vals);
            rows.push(BenchRow {
                run_id: format!("{instance}-{}-T{horizon}", policy.replace(':', "_")),
                t,
                regret_mean: mean,
                regret_stderr: se,
                policy: policy.clone(),
                instance: instance.clone(),
                seed_count: vals.len(),
            });
        }
    }
    rows
}

/// One series per policy (per run group when several share a policy).
pub fn series_from_rows(rows: &[BenchRow]) -> Vec<Series> {
    let mut map: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        map.entry(r.run_id.clone())
            .or_default()
            .push((r.t as f64, r.regret_mean));
    }
    map.into_iter()
        .map(|(label, points)| Series { label, points })
        .collect()
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Renders positive points on log-log axes; nonpositive values are dropped.
pub fn loglog_svg(title: &str, series: &[Series]) -> Result<String> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .collect();
    if pts.is_empty() {
        return invalid("nothing positive to plot on log axes");
    }
    let (w, h, m) = (640.0, 420.0, 60.0);
    let lx = |x: f64| x.log10();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &pts {
        x0 = x0.min(lx(*x).floor());
        x1 = x1.max(lx(*x).ceil());
        y0 = y0.min(lx(*y).floor());
        y1 = y1.max(lx(*y).ceil());
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| m + (lx(x) - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (lx(y) - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    for d in (x0 as i32)..=(x1 as i32) {
        let x = sx(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{m}" x2="{x:.1}" y2="{}" stroke="#ddd"/><text x="{x:.1}" y="{}" text-anchor="middle">1e{d}</text>"##,
            h - m,
            h - m + 16.0
        );
    }
    for d in (y0 as i32)..=(y1 as i32) {
        let y = sy(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{m}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">1e{d}</text>"##,
            w - m,
            m - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">T</text>"#,
        w / 2.0,
        h - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">regret</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = ser
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .map(|(x, y)| format!("{:.1},{:.1}", sx(*x), sy(*y)))
            .collect();
        if path.is_empty() {
            continue;
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        let ly = m + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#,
            m + 8.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
