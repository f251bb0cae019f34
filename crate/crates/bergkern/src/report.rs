//! Deterministic run reports: a text summary plus fixed-schema CSV files.
//! Identical config and seed must reproduce identical bytes, so wall-clock
//! goes to the log stream, never into the artifacts.

use crate::config::ExperimentConfig;
use serde::Serialize;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("io failure writing {path}: {source}")]
    IoFailure {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CsvFile {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub echoed_config: serde_json::Value,
    pub outputs: Vec<(String, String)>,
    pub assertions: Vec<Assertion>,
    pub csv_files: Vec<CsvFile>,
}

/// 17-significant-digit float formatting used everywhere in artifacts.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl RunReport {
    pub fn new(config: &ExperimentConfig, params: &impl Serialize) -> Self {
        let mut echoed = serde_json::to_value(config).expect("config serializes");
        // Materialize defaulted params back into the echo.
        echoed["params"] = serde_json::to_value(params).expect("params serialize");
        RunReport {
            echoed_config: echoed,
            outputs: Vec::new(),
            assertions: Vec::new(),
            csv_files: Vec::new(),
        }
    }

    pub fn push_output(&mut self, key: &str, value: String) {
        self.outputs.push((key.to_string(), value));
    }

    pub fn push_float(&mut self, key: &str, value: f64) {
        self.push_output(key, fmt_f64(value));
    }

    pub fn assert_that(&mut self, name: &str, pass: bool, detail: String) {
        self.assertions.push(Assertion {
            name: name.to_string(),
            pass,
            detail,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn text_summary(&self) -> String {
        let mut out = String::new();
        out.push_str("# bergkern run report\n\n## config\n");
        out.push_str(
            &serde_json::to_string_pretty(&self.echoed_config).expect("config serializes"),
        );
        out.push_str("\n\n## outputs\n");
        for (k, v) in &self.outputs {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out.push_str("\n## assertions\n");
        for a in &self.assertions {
            let tag = if a.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("[{tag}] {}: {}\n", a.name, a.detail));
        }
        out.push_str(&format!(
            "\nresult: {}\n",
            if self.all_pass() { "PASS" } else { "FAIL" }
        ));
        out
    }
}

/// Writes the text summary and (optionally) the CSV artifacts; returns the
/// list of written paths.
pub fn emit_report(
    report: &RunReport,
    out_dir: &Path,
    csv: bool,
) -> Result<Vec<std::path::PathBuf>, ReportError> {
    std::fs::create_dir_all(out_dir).map_err(|e| ReportError::IoFailure {
        path: out_dir.display().to_string(),
        source: e,
    })?;
    let mut written = Vec::new();
    let txt_path = out_dir.join("report.txt");
    write_atomic(&txt_path, report.text_summary().as_bytes())?;
    written.push(txt_path);
    if csv {
        for file in &report.csv_files {
            let path = out_dir.join(&file.name);
            let mut buf = Vec::new();
            writeln!(buf, "{}", file.header.join(",")).expect("vec write");
            for row in &file.rows {
                writeln!(buf, "{}", row.join(",")).expect("vec write");
            }
            write_atomic(&path, &buf)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ReportError> {
    std::fs::write(path, bytes).map_err(|e| ReportError::IoFailure {
        path: path.display().to_string(),
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Kind;

    #[test]
    fn byte_identical_reruns() {
        let cfg = ExperimentConfig {
            kind: Kind::Profile,
            seed: 7,
            params: serde_json::json!({"gamma": [[2,0],[0,2]]}),
        };
        let build = || {
            let mut r = RunReport::new(&cfg, &serde_json::json!({"gamma": [[2,0],[0,2]]}));
            r.push_float("sigma", 0.0);
            r.assert_that("decoupled", true, "σ=τ=0".into());
            r.csv_files.push(CsvFile {
                name: "profile.csv".into(),
                header: vec!["key".into(), "value".into()],
                rows: vec![vec!["sigma".into(), fmt_f64(0.0)]],
            });
            r
        };
        let dir = tempfile::tempdir().unwrap();
        let a = build();
        emit_report(&a, dir.path(), true).unwrap();
        let txt1 = std::fs::read(dir.path().join("report.txt")).unwrap();
        let csv1 = std::fs::read(dir.path().join("profile.csv")).unwrap();
        let b = build();
        emit_report(&b, dir.path(), true).unwrap();
        assert_eq!(txt1, std::fs::read(dir.path().join("report.txt")).unwrap());
        assert_eq!(csv1, std::fs::read(dir.path().join("profile.csv")).unwrap());
    }

    #[test]
    fn float_format_width() {
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_f64(std::f64::consts::PI), "3.1415926535897931e0");
    }
}
