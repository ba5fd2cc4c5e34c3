//! Records CSV, fit JSON and SVG plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{LabError, Result};
use crate::io::write_bytes;
use crate::lab::fit::FitReport;
use crate::lab::sweep::StabilityRecord;

pub const RECORDS_CSV: &str = "records.csv";
pub const FIT_JSON: &str = "fit.json";
pub const ERROR_VS_NOISE_SVG: &str = "error_vs_noise.svg";
pub const ERROR_VS_K_SVG: &str = "error_vs_k.svg";

fn csv_error(e: csv::Error) -> LabError {
    LabError::Format(e.to_string())
}

pub fn records_csv_string(records: &[StabilityRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| LabError::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn write_records_csv(path: &Path, records: &[StabilityRecord]) -> Result<()> {
    write_bytes(path, records_csv_string(records)?.as_bytes())
}

pub fn read_records_csv(path: &Path) -> Result<Vec<StabilityRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    r.deserialize().map(|row| row.map_err(csv_error)).collect()
}

pub fn write_fit_json(path: &Path, fit: &FitReport) -> Result<()> {
    let text = serde_json::to_string_pretty(fit).map_err(|e| LabError::Format(e.to_string()))?;
    write_bytes(path, text.as_bytes())
}

/// A named polyline for [`svg_plot`].
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// Minimal line plot; `x_log`/`y_log` select base-10 axes. Non-positive
/// values on a log axis are dropped.
pub fn svg_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], x_log: bool, y_log: bool) -> String {
    let (w, h, left, right, top, bottom) = (640.0, 440.0, 80.0, 150.0, 40.0, 60.0);
    let tx = |v: f64| if x_log { v.log10() } else { v };
    let ty = |v: f64| if y_log { v.log10() } else { v };
    let keep = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!x_log || x > 0.0) && (!y_log || y > 0.0);
    let pts: Vec<Vec<(f64, f64)>> =
        series.iter().map(|s| s.points.iter().filter(|p| keep(p)).map(|&(x, y)| (tx(x), ty(y))).collect()).collect();
    let all: Vec<(f64, f64)> = pts.iter().flatten().copied().collect();
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let lo = all.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = all.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let px = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| top + (1.0 - (y - y0) / (y1 - y0)) * ph;
    let tick = |v: f64, log: bool| if log { format!("1e{v:.1}") } else { format!("{v:.3}") };

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, left + pw / 2.0, escape(title));
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, px(fx), top + ph + 18.0, tick(fx, x_log));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, left - 6.0, py(fy) + 4.0, tick(fy, y_log));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, left + pw / 2.0, h - 15.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        top + ph / 2.0,
        escape(y_label)
    );
    for (i, (ser, p)) in series.iter().zip(&pts).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if p.len() > 1 {
            let path: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        }
        for &(x, y) in p {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(x), py(y));
        }
        let ly = top + 14.0 + 18.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, w - right + 10.0, w - right + 30.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, w - right + 36.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn grouped(records: &[StabilityRecord], key: fn(&StabilityRecord) -> f64, x: fn(&StabilityRecord) -> f64) -> Vec<(f64, Vec<(f64, f64)>)> {
    let mut groups: BTreeMap<u64, (f64, Vec<(f64, f64)>)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_ok()) {
        let kv = key(r);
        let entry = groups.entry(kv.to_bits()).or_insert((kv, Vec::new()));
        entry.1.push((x(r), r.error_h_minus_s));
    }
    let mut out: Vec<_> = groups.into_values().collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, pts) in out.iter_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    out
}

/// Writes `records.csv`, `fit.json` (when a fit is given) and the two plot
/// families into `dir`; returns the paths written.
pub fn render_report(records: &[StabilityRecord], fit: Option<&FitReport>, dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(LabError::InsufficientData("no records to report".into()));
    }
    let mut paths = Vec::new();
    let csv = dir.join(RECORDS_CSV);
    write_records_csv(&csv, records)?;
    paths.push(csv);
    if let Some(f) = fit {
        let p = dir.join(FIT_JSON);
        write_fit_json(&p, f)?;
        paths.push(p);
    }
    let by_k: Vec<Series> = grouped(records, |r| r.k, |r| r.noise)
        .into_iter()
        .map(|(k, points)| Series { label: format!("k = {k}"), points })
        .collect();
    let p = dir.join(ERROR_VS_NOISE_SVG);
    write_bytes(&p, svg_plot("H^-s error vs noise", "noise eps", "error", &by_k, true, true).as_bytes())?;
    paths.push(p);
    let by_eps: Vec<Series> = grouped(records, |r| r.noise, |r| r.k)
        .into_iter()
        .map(|(e, points)| Series { label: format!("eps = {e:e}"), points })
        .collect();
    let p = dir.join(ERROR_VS_K_SVG);
    write_bytes(&p, svg_plot("H^-s error vs wave number", "k", "error", &by_eps, false, true).as_bytes())?;
    paths.push(p);
    Ok(paths)
}
