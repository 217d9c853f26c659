//! Output files: `steps.csv`, `summary.json` and `panels.svg`.

mod svg;

pub use svg::{render_panels, render_panels_string};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::stats::{SignTestResult, TAIL_CONVENTION};
use crate::trajectory::DriftReport;

pub const STEPS_FILE: &str = "steps.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PANELS_FILE: &str = "panels.svg";
pub const STEP_HEADER: &str =
    "step,window_start,dot,flip,d_e,d_c,d_fs,cum_e,cum_c,cum_fs,gauge_diff,log_ratio";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn step_csv_string(report: &DriftReport) -> String {
    let mut out = String::with_capacity(64 * (report.len() + 1));
    out.push_str(STEP_HEADER);
    out.push('\n');
    for (n, s) in report.steps.iter().enumerate() {
        let d = &s.distances;
        let cells = [
            s.index.to_string(),
            s.window_start.to_string(),
            fmt_f64(s.dot),
            s.flip.to_string(),
            fmt_f64(d.d_e),
            fmt_f64(d.d_c),
            fmt_f64(d.d_fs),
            fmt_f64(report.cum_e[n]),
            fmt_f64(report.cum_c[n]),
            fmt_f64(report.cum_fs[n]),
            fmt_f64(report.gauge_diff[n]),
            fmt_f64(report.log_ratio[n]),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_step_csv(report: &DriftReport, path: &Path) -> Result<()> {
    write_file(path, step_csv_string(report).as_bytes())
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(bytes)?;
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pc1Info {
    pub method: String,
    pub sign_convention: String,
    pub tol: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parameters {
    /// `"pca"` or `"trajectory"`.
    pub mode: String,
    pub n_samples: usize,
    pub dimension: usize,
    pub window_length: Option<usize>,
    pub step: Option<usize>,
    pub windows: usize,
    pub epsilon: f64,
    pub zero_tol: f64,
    pub pc1: Option<Pc1Info>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Totals {
    pub steps: usize,
    pub cum_e: f64,
    pub cum_c: f64,
    pub cum_fs: f64,
    pub gauge_diff: f64,
    pub flip_count: usize,
}

impl Totals {
    pub fn from_report(report: &DriftReport) -> Self {
        Totals {
            steps: report.len(),
            cum_e: report.total_e(),
            cum_c: report.total_c(),
            cum_fs: report.total_fs(),
            gauge_diff: report.total_gauge_diff(),
            flip_count: report.flip_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignTestSummary {
    /// `"ok"` or `"not_applicable"` (no nonzero differences).
    pub status: String,
    pub n_nonzero: u64,
    pub n_positive: u64,
    pub p_value: Option<f64>,
    pub convention: String,
}

impl SignTestSummary {
    pub fn from_result(result: Option<&SignTestResult>) -> Self {
        match result {
            Some(r) => SignTestSummary {
                status: "ok".into(),
                n_nonzero: r.n_nonzero,
                n_positive: r.n_positive,
                p_value: Some(r.p_value),
                convention: TAIL_CONVENTION.into(),
            },
            None => SignTestSummary {
                status: "not_applicable".into(),
                n_nonzero: 0,
                n_positive: 0,
                p_value: None,
                convention: TAIL_CONVENTION.into(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryDocument {
    pub tool: ToolInfo,
    pub parameters: Parameters,
    pub totals: Totals,
    pub sign_test: SignTestSummary,
    pub steps_file: String,
    pub panels_file: String,
}

impl SummaryDocument {
    /// Keys sorted at every level.
    pub fn to_canonical_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        let mut s = serde_json::to_string_pretty(&value)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn write_summary_json(summary: &SummaryDocument, path: &Path) -> Result<()> {
    write_file(path, summary.to_canonical_json()?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{compute_steps, drift_report, RepresentationTrajectory};

    fn report() -> DriftReport {
        let traj = RepresentationTrajectory::from_unit_directions(
            vec![vec![1.0, 0.0], vec![0.6, 0.8], vec![0.0, -1.0]],
            vec![0, 5, 10],
            None,
        )
        .unwrap();
        drift_report(&compute_steps(&traj).unwrap(), 1e-12).unwrap()
    }

    #[test]
    fn fmt_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0, std::f64::consts::PI] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_rows_and_flip_mapping() {
        let r = report();
        let csv = step_csv_string(&r);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], STEP_HEADER);
        let second: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(second[0], "2");
        assert_eq!(second[1], "5");
        assert_eq!(second[3], "true");
        assert!(second[2].parse::<f64>().unwrap() < 0.0);
        assert_eq!(second[11].parse::<f64>().unwrap(), r.log_ratio[1]);
    }

    #[test]
    fn summary_has_sorted_keys() {
        let r = report();
        let doc = SummaryDocument {
            tool: ToolInfo::default(),
            parameters: Parameters {
                mode: "trajectory".into(),
                n_samples: 3,
                dimension: 2,
                window_length: None,
                step: None,
                windows: 3,
                epsilon: 1e-12,
                zero_tol: 1e-12,
                pc1: None,
            },
            totals: Totals::from_report(&r),
            sign_test: SignTestSummary::from_result(None),
            steps_file: STEPS_FILE.into(),
            panels_file: PANELS_FILE.into(),
        };
        let json = doc.to_canonical_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(v["totals"]["cum_c"].as_f64().unwrap(), r.total_c());
        assert_eq!(v["sign_test"]["status"], "not_applicable");
        assert!(v["sign_test"]["p_value"].is_null());
    }
}
