//! Text formats: path CSV, point-process dump, report CSV, manifest.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a path
//! read back is bit-identical to the one written.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use excursions_core::homogenization::{Report, ReportRow, Verdict};
use excursions_core::path::{CadlagPath, SegmentMode};
use excursions_core::piecing::PiecedTriple;
use excursions_core::point_process::MarkedPointProcess;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("{0}")]
    Path(#[from] excursions_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

fn malformed(line: usize, reason: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        line,
        reason: reason.into(),
    }
}

fn mode_str(m: SegmentMode) -> &'static str {
    match m {
        SegmentMode::Linear => "linear",
        SegmentMode::ConstantRight => "constant",
    }
}

/// `t,x1,...,xd,mode` rows followed by `lifetime=<value>`.
pub fn path_to_csv(p: &CadlagPath) -> String {
    let mut s = String::from("t");
    for k in 1..=p.dim() {
        let _ = write!(s, ",x{k}");
    }
    s.push_str(",mode\n");
    for i in 0..p.len() {
        let _ = write!(s, "{}", p.time(i));
        for v in p.value(i) {
            let _ = write!(s, ",{v}");
        }
        let _ = writeln!(s, ",{}", mode_str(p.mode(i)));
    }
    let _ = writeln!(s, "lifetime={}", p.lifetime());
    s
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, FormatError> {
    tok.trim()
        .parse::<f64>()
        .map_err(|_| malformed(line, format!("`{tok}` is not a number")))
}

pub fn path_from_csv(text: &str) -> Result<CadlagPath, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| malformed(1, "empty file"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 3 || cols[0] != "t" || cols[cols.len() - 1] != "mode" {
        return Err(malformed(1, "expected header t,x1,...,xd,mode"));
    }
    let dim = cols.len() - 2;
    for (k, c) in cols[1..=dim].iter().enumerate() {
        if *c != format!("x{}", k + 1) {
            return Err(malformed(1, format!("unexpected column `{c}`")));
        }
    }
    let (mut times, mut values, mut modes) = (Vec::new(), Vec::new(), Vec::new());
    let mut lifetime = None;
    for (i, l) in lines {
        let line = i + 1;
        if lifetime.is_some() {
            return Err(malformed(line, "data after the lifetime row"));
        }
        if let Some(v) = l.trim().strip_prefix("lifetime=") {
            lifetime = Some(parse_f64(v, line)?);
            continue;
        }
        let toks: Vec<&str> = l.split(',').collect();
        if toks.len() != dim + 2 {
            return Err(malformed(line, format!("expected {} fields", dim + 2)));
        }
        times.push(parse_f64(toks[0], line)?);
        for t in &toks[1..=dim] {
            values.push(parse_f64(t, line)?);
        }
        modes.push(match toks[dim + 1].trim() {
            "linear" => SegmentMode::Linear,
            "constant" => SegmentMode::ConstantRight,
            m => return Err(malformed(line, format!("unknown mode `{m}`"))),
        });
    }
    let lifetime = lifetime.ok_or_else(|| malformed(0, "missing lifetime row"))?;
    Ok(CadlagPath::new(dim, times, values, modes, lifetime)?)
}

pub fn write_path(path: &Path, p: &CadlagPath) -> std::io::Result<()> {
    fs::write(path, path_to_csv(p))
}

pub fn read_path(path: &Path) -> Result<CadlagPath, FormatError> {
    path_from_csv(&fs::read_to_string(path)?)
}

/// Writes `x.csv`, `local_time.csv` and `eta.csv` (columns `l,jump`) into
/// `dir`.
pub fn write_triple(dir: &Path, t: &PiecedTriple) -> std::io::Result<()> {
    write_path(&dir.join("x.csv"), &t.x)?;
    write_path(&dir.join("local_time.csv"), &t.local_time)?;
    let mut s = String::from("l,jump\n");
    for (l, j) in t.eta.locations().iter().zip(t.eta.sizes()) {
        let _ = writeln!(s, "{l},{j}");
    }
    let _ = writeln!(s, "drift={}", t.eta.drift());
    let _ = writeln!(s, "l_max={}", t.eta.l_max());
    fs::write(dir.join("eta.csv"), s)
}

/// `points.csv` with columns `l,lifetime,sup,mark,path_file`, one path file
/// per excursion under `excursions/`.
pub fn write_points(dir: &Path, p: &MarkedPointProcess) -> std::io::Result<()> {
    let sub = dir.join("excursions");
    fs::create_dir_all(&sub)?;
    let mut s = String::from("l,lifetime,sup,mark,path_file\n");
    for (i, pt) in p.points().iter().enumerate() {
        let name = format!("excursions/exc_{i:06}.csv");
        write_path(&dir.join(&name), &pt.excursion)?;
        let mark = pt.mark.map_or(String::from("none"), |m| m.0.to_string());
        let _ = writeln!(
            s,
            "{},{},{},{mark},{name}",
            pt.location,
            pt.excursion.lifetime(),
            pt.excursion.sup_norm()
        );
    }
    fs::write(dir.join("points.csv"), s)
}

pub const REPORT_HEADER: &str = "n,functional,statistic,value,null_band,verdict";

pub fn report_to_csv(r: &Report) -> String {
    let mut s = String::from(REPORT_HEADER);
    s.push('\n');
    for row in &r.rows {
        let n = row.n.map_or(String::from("*"), |n| n.to_string());
        let _ = writeln!(
            s,
            "{n},{},{},{},{},{}",
            row.functional,
            row.statistic,
            row.value,
            row.null_band,
            row.verdict.as_str()
        );
    }
    s
}

pub fn report_from_csv(text: &str) -> Result<Report, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == REPORT_HEADER => {}
        None => return Ok(Report::default()),
        Some(_) => return Err(malformed(1, format!("expected header {REPORT_HEADER}"))),
    }
    let mut rows = Vec::new();
    for (i, l) in lines {
        let line = i + 1;
        let toks: Vec<&str> = l.split(',').collect();
        if toks.len() != 6 {
            return Err(malformed(line, "expected 6 fields"));
        }
        let n = match toks[0] {
            "*" => None,
            s => Some(
                s.parse::<i32>()
                    .map_err(|_| malformed(line, format!("bad n `{s}`")))?,
            ),
        };
        if toks[1].is_empty() || toks[2].is_empty() {
            return Err(malformed(line, "empty functional or statistic"));
        }
        let verdict = match toks[5] {
            "pass" => Verdict::Pass,
            "fail" => Verdict::Fail,
            "info" => Verdict::Info,
            v => return Err(malformed(line, format!("bad verdict `{v}`"))),
        };
        rows.push(ReportRow {
            n,
            functional: toks[1].to_string(),
            statistic: toks[2].to_string(),
            value: parse_f64(toks[3], line)?,
            null_band: parse_f64(toks[4], line)?,
            verdict,
        });
    }
    Ok(Report { rows })
}

pub fn write_manifest(path: &Path, entries: &BTreeMap<String, String>) -> std::io::Result<()> {
    let mut s = String::new();
    for (k, v) in entries {
        let _ = writeln!(s, "{k}={v}");
    }
    fs::write(path, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn report_round_trip() {
        let r = Report {
            rows: vec![
                ReportRow {
                    n: Some(2),
                    functional: "x(1)".into(),
                    statistic: "ks".into(),
                    value: 0.1,
                    null_band: 0.2,
                    verdict: Verdict::Pass,
                },
                ReportRow {
                    n: None,
                    functional: "varsigma_n".into(),
                    statistic: "analytic_trend".into(),
                    value: 0.0,
                    null_band: f64::NAN,
                    verdict: Verdict::Info,
                },
            ],
        };
        let text = report_to_csv(&r);
        let back = report_from_csv(&text).unwrap();
        assert_eq!(report_to_csv(&back), text);
        assert!(report_from_csv("n,functional\n").is_err());
        assert!(report_from_csv(&format!("{REPORT_HEADER}\n1,a,b,c,0,pass\n")).is_err());
        assert!(report_from_csv("").unwrap().rows.is_empty());
    }

    #[test]
    fn path_csv_example() {
        let p = CadlagPath::scalar(
            &[
                (0.0, 0.0, SegmentMode::Linear),
                (0.5, 1.0, SegmentMode::ConstantRight),
            ],
            1.0,
        )
        .unwrap();
        let text = path_to_csv(&p);
        assert_eq!(text, "t,x1,mode\n0,0,linear\n0.5,1,constant\nlifetime=1\n");
        assert_eq!(path_from_csv(&text).unwrap(), p);
        assert!(path_from_csv("t,x1,mode\n0,0,linear\n").is_err());
        assert!(path_from_csv("t,x1,mode\n0,0,curved\nlifetime=1\n").is_err());
    }

    proptest! {
        #[test]
        fn path_csv_is_bit_exact(raw in prop::collection::vec((1e-9f64..10.0, -1e3f64..1e3, -1e3f64..1e3, any::<bool>()), 1..20)) {
            let mut t = 0.0;
            let (mut times, mut values, mut modes) = (vec![], vec![], vec![]);
            for (dt, a, b, lin) in raw {
                times.push(t);
                values.extend([a, b]);
                modes.push(if lin { SegmentMode::Linear } else { SegmentMode::ConstantRight });
                t += dt;
            }
            let p = CadlagPath::new(2, times, values, modes, f64::INFINITY).unwrap();
            let back = path_from_csv(&path_to_csv(&p)).unwrap();
            prop_assert_eq!(back.times(), p.times());
            prop_assert_eq!(back.values(), p.values());
            prop_assert_eq!(back.modes(), p.modes());
            prop_assert_eq!(back.lifetime().to_bits(), p.lifetime().to_bits());
        }
    }
}
