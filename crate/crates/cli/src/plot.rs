//! Statistic-vs-n line plots as standalone SVG files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use excursions_core::homogenization::Report;

use crate::io::FormatError;

const W: f64 = 480.0;
const H: f64 = 320.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

struct Series {
    points: Vec<(i32, f64, f64)>,
}

fn file_stem(functional: &str) -> String {
    let mut s: String = functional
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    s.trim_matches('_').to_string()
}

/// Groups the per-`n` statistic rows of `report` by functional. Analytic
/// rows and trend rows are not plotted.
fn collect(report: &Report) -> Result<BTreeMap<String, BTreeMap<String, Series>>, FormatError> {
    let mut out: BTreeMap<String, BTreeMap<String, Series>> = BTreeMap::new();
    for (i, r) in report.rows.iter().enumerate() {
        let Some(n) = r.n else { continue };
        if r.statistic == "analytic" || r.statistic == "proportion" || r.statistic == "violations" {
            continue;
        }
        if !r.value.is_finite() || !(r.null_band.is_finite() || r.null_band.is_nan()) {
            return Err(FormatError::Malformed {
                line: i + 2,
                reason: format!("non-finite {} value for {}", r.statistic, r.functional),
            });
        }
        out.entry(r.functional.clone())
            .or_default()
            .entry(r.statistic.clone())
            .or_insert_with(|| Series { points: Vec::new() })
            .points
            .push((n, r.value, r.null_band));
    }
    Ok(out)
}

fn render(functional: &str, stats: &BTreeMap<String, Series>) -> String {
    let mut n_lo = i32::MAX;
    let mut n_hi = i32::MIN;
    let mut y_hi: f64 = 0.0;
    for s in stats.values() {
        for &(n, v, b) in &s.points {
            n_lo = n_lo.min(n);
            n_hi = n_hi.max(n);
            y_hi = y_hi.max(v);
            if b.is_finite() {
                y_hi = y_hi.max(b);
            }
        }
    }
    if y_hi <= 0.0 {
        y_hi = 1.0;
    }
    let span = f64::from((n_hi - n_lo).max(1));
    let px = |n: i32| PAD + (W - 2.0 * PAD) * f64::from(n - n_lo) / span;
    let py = |v: f64| H - PAD - (H - 2.0 * PAD) * v / (1.05 * y_hi);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        W / 2.0,
        escape(functional)
    );
    let (x0, y0, x1, y1) = (PAD, H - PAD, W - PAD, PAD);
    let _ = writeln!(
        s,
        "<path d=\"M{x0:.1} {y1:.1} L{x0:.1} {y0:.1} L{x1:.1} {y0:.1}\" stroke=\"black\" fill=\"none\"/>"
    );
    for n in n_lo..=n_hi {
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{n}</text>",
            px(n),
            y0 + 16.0
        );
    }
    for k in 0..=4 {
        let v = 1.05 * y_hi * f64::from(k) / 4.0;
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{v:.3}</text>",
            x0 - 4.0,
            py(v) + 3.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">n</text>",
        W / 2.0,
        H - 10.0
    );
    for (k, (name, series)) in stats.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut pts = series.points.clone();
        pts.sort_by_key(|p| p.0);
        let line: Vec<String> = pts
            .iter()
            .map(|&(n, v, _)| format!("{:.1},{:.1}", px(n), py(v)))
            .collect();
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" stroke=\"{color}\" fill=\"none\" stroke-width=\"2\"/>",
            line.join(" ")
        );
        for &(n, v, _) in &pts {
            let _ = writeln!(
                s,
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>",
                px(n),
                py(v)
            );
        }
        let band: Vec<String> = pts
            .iter()
            .filter(|p| p.2.is_finite())
            .map(|&(n, _, b)| format!("{:.1},{:.1}", px(n), py(b)))
            .collect();
        if !band.is_empty() {
            let _ = writeln!(
                s,
                "<polyline points=\"{}\" stroke=\"{color}\" fill=\"none\" stroke-dasharray=\"5,4\"/>",
                band.join(" ")
            );
        }
        let ly = PAD + 14.0 * k as f64;
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{ly:.1}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{color}\">{} (dashed: null band)</text>",
            W - PAD - 150.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// One SVG per functional under `dir`. Returns the files written, in
/// sorted order; an empty report writes nothing.
pub fn emit_plots(report: &Report, dir: &Path) -> Result<Vec<PathBuf>, FormatError> {
    let groups = collect(report)?;
    let mut files = Vec::new();
    if groups.is_empty() {
        return Ok(files);
    }
    fs::create_dir_all(dir)?;
    for (functional, stats) in &groups {
        let path = dir.join(format!("{}.svg", file_stem(functional)));
        fs::write(&path, render(functional, stats))?;
        files.push(path);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use excursions_core::homogenization::{ReportRow, Verdict};

    fn row(n: i32, f: &str, v: f64) -> ReportRow {
        ReportRow {
            n: Some(n),
            functional: f.into(),
            statistic: "ks".into(),
            value: v,
            null_band: 0.05,
            verdict: Verdict::Info,
        }
    }

    #[test]
    fn deterministic_and_grouped() {
        let dir = tempfile::tempdir().unwrap();
        let r = Report {
            rows: vec![
                row(0, "x(1)", 0.3),
                row(2, "x(1)", 0.1),
                row(0, "L(1)", 0.2),
            ],
        };
        let a = emit_plots(&r, &dir.path().join("a")).unwrap();
        let b = emit_plots(&r, &dir.path().join("b")).unwrap();
        assert_eq!(a.len(), 2);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
        }
        assert_eq!(file_stem("sup[0,1]"), "sup_0_1");
    }

    #[test]
    fn empty_and_malformed() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_plots(&Report::default(), dir.path())
            .unwrap()
            .is_empty());
        let bad = Report {
            rows: vec![row(0, "x(1)", f64::NAN)],
        };
        assert!(emit_plots(&bad, dir.path()).is_err());
    }
}
