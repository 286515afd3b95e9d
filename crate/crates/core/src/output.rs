//! CSV and JSON emission with stable bytes and atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{io_err, Error, Result};
use crate::experiments::{Cell, Check, ExperimentReport, Fit, Projection, Series, Table};

/// Shortest text that parses back to the same `f64`. Plain notation for
/// moderate magnitudes, exponent notation otherwise.
pub fn fmt_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Writes to `<path>.tmp` and renames over `path`, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn series_csv(s: &Series) -> String {
    let mut out = format!("t,{}\n", s.name);
    for (t, v) in s.t.iter().zip(&s.values) {
        out.push_str(&fmt_float(*t));
        out.push(',');
        out.push_str(&fmt_float(*v));
        out.push('\n');
    }
    out
}

pub fn table_csv(t: &Table) -> String {
    let mut out = t.columns.join(",");
    out.push('\n');
    for row in &t.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(x) => fmt_float(*x),
                Cell::Text(s) => s.clone(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Versions {
    metagrav: &'static str,
    summary_format: u32,
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario: &'a str,
    config: &'a std::collections::BTreeMap<String, String>,
    passed: bool,
    checks: &'a [Check],
    fits: &'a [Fit],
    projections: &'a [Projection],
    notes: &'a [String],
    steps: usize,
    files: Vec<String>,
    versions: Versions,
}

fn file_names(report: &ExperimentReport) -> Vec<String> {
    let series = report.series.iter().map(|s| format!("{}.csv", s.name));
    let tables = report.tables.iter().map(|t| format!("{}.csv", t.name));
    series.chain(tables).collect()
}

pub fn summary_json(report: &ExperimentReport) -> Result<String> {
    let summary = Summary {
        scenario: &report.scenario,
        config: &report.config,
        passed: report.passed(),
        checks: &report.checks,
        fits: &report.fits,
        projections: &report.projections,
        notes: &report.notes,
        steps: report.steps,
        files: file_names(report),
        versions: Versions { metagrav: env!("CARGO_PKG_VERSION"), summary_format: 1 },
    };
    let mut text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Domain(format!("summary: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Writes one CSV per series and table plus `summary.json` into `dir`.
/// Returns the paths written, summary last.
pub fn emit(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let names = file_names(report);
    for (i, n) in names.iter().enumerate() {
        if n == "summary.json" || names[..i].contains(n) || n.contains(['/', '\\']) {
            return Err(Error::Domain(format!("output name `{n}` is reserved, repeated or not a plain file name")));
        }
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    // render everything before touching the destination
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    for s in &report.series {
        files.push((dir.join(format!("{}.csv", s.name)), series_csv(s)));
    }
    for t in &report.tables {
        files.push((dir.join(format!("{}.csv", t.name)), table_csv(t)));
    }
    files.push((dir.join("summary.json"), summary_json(report)?));
    for (path, text) in &files {
        write_atomic(path, text.as_bytes())?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn float_format_is_compact() {
        assert_eq!(fmt_float(0.0), "0");
        assert_eq!(fmt_float(0.25), "0.25");
        assert_eq!(fmt_float(1e24), "1e24");
        assert_eq!(fmt_float(-3.5e-9), "-3.5e-9");
        assert_eq!(fmt_float(12345.0), "12345");
    }

    proptest! {
        #[test]
        fn float_format_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            prop_assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
    }

    fn report() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo", Default::default());
        r.series.push(Series::new("visibility", vec![0.0, 0.5], vec![1.0, 0.125]));
        r.tables.push(Table {
            name: "grid".into(),
            columns: vec!["x".into(), "tag".into()],
            rows: vec![vec![Cell::Num(1e30), Cell::Text("a".into())]],
        });
        r.check_within("unit", 1.0, 0.5, 1.5);
        r
    }

    #[test]
    fn emit_writes_all_files_and_is_repeatable() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit(&report(), dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
        let vis = fs::read_to_string(dir.path().join("visibility.csv")).unwrap();
        assert_eq!(vis, "t,visibility\n0,1\n0.5,0.125\n");
        assert_eq!(fs::read_to_string(dir.path().join("grid.csv")).unwrap(), "x,tag\n1e30,a\n");
        let first = fs::read(dir.path().join("summary.json")).unwrap();
        emit(&report(), dir.path()).unwrap();
        assert_eq!(first, fs::read(dir.path().join("summary.json")).unwrap());
        let json: serde_json::Value = serde_json::from_slice(&first).unwrap();
        assert_eq!(json["scenario"], "demo");
        assert_eq!(json["passed"], true);
        assert!(json["versions"]["metagrav"].is_string());
        assert!(fs::read_dir(dir.path()).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
    }

    #[test]
    fn emit_rejects_colliding_names_before_writing() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = report();
        r.series.push(Series::new("grid", vec![0.0], vec![0.0]));
        assert!(emit(&r, dir.path()).is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn io_errors_carry_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        match emit(&report(), &blocker.join("sub")) {
            Err(Error::Io { path, .. }) => assert!(path.starts_with(&blocker)),
            other => panic!("expected an I/O error, got {other:?}"),
        }
    }
}
