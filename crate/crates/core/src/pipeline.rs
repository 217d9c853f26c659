//! End-to-end runs behind the `analyze` and `synth` commands.

use std::fs;
use std::path::PathBuf;

use crate::error::{DriftError, Result};
use crate::ingest::{load_csv, write_csv, CsvOptions};
use crate::linalg::{FeatureMatrix, Pc1Extractor, PowerIteration};
use crate::report::{
    render_panels, write_step_csv, write_summary_json, Parameters, Pc1Info, SignTestSummary,
    SummaryDocument, ToolInfo, Totals, PANELS_FILE, STEPS_FILE, SUMMARY_FILE,
};
use crate::stats::{exact_sign_test, SignTestResult, ZERO_TOL};
use crate::synth::{generate, SynthSpec};
use crate::trajectory::{
    build_trajectory_with, compute_steps, drift_report, DriftReport, RepresentationTrajectory,
    WindowSpec,
};

#[derive(Debug, Clone)]
pub struct AnalyzeConfig {
    pub input: PathBuf,
    pub csv: CsvOptions,
    pub window: WindowSpec,
    pub epsilon: f64,
    pub out_dir: PathBuf,
    /// Treat each row as an already-extracted direction instead of running PCA.
    pub trajectory_mode: bool,
    pub pc1_tol: f64,
    pub pc1_max_iters: usize,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub trajectory: RepresentationTrajectory,
    pub report: DriftReport,
    pub sign_test: Option<SignTestResult>,
    pub summary: SummaryDocument,
}

impl AnalyzeOutcome {
    pub fn files(&self, out_dir: &std::path::Path) -> [PathBuf; 3] {
        [STEPS_FILE, SUMMARY_FILE, PANELS_FILE].map(|f| out_dir.join(f))
    }
}

/// Run the analysis in memory without touching the output directory.
pub fn analyze(config: &AnalyzeConfig) -> Result<AnalyzeOutcome> {
    if !config.epsilon.is_finite() || config.epsilon <= 0.0 {
        return Err(DriftError::InvalidEpsilon(config.epsilon));
    }
    let extractor = PowerIteration {
        tol: config.pc1_tol,
        max_iters: config.pc1_max_iters,
    };
    let x = load_csv(&config.input, &config.csv)?;
    let trajectory = if config.trajectory_mode {
        RepresentationTrajectory::from_rows(&x)?
    } else {
        config.window.validate(x.nrows())?;
        build_trajectory_with(&x, &config.window, &extractor)?
    };
    let report = drift_report(&compute_steps(&trajectory)?, config.epsilon)?;
    let sign_test = match exact_sign_test(&report.paired_differences(), ZERO_TOL) {
        Ok(r) => Some(r),
        Err(DriftError::AllZero { .. }) => None,
        Err(e) => return Err(e),
    };

    let pca = !config.trajectory_mode;
    let summary = SummaryDocument {
        tool: ToolInfo::default(),
        parameters: Parameters {
            mode: if pca { "pca" } else { "trajectory" }.into(),
            n_samples: x.nrows(),
            dimension: x.ncols(),
            window_length: pca.then_some(config.window.window_length),
            step: pca.then_some(config.window.step),
            windows: trajectory.len(),
            epsilon: config.epsilon,
            zero_tol: ZERO_TOL,
            pc1: pca.then(|| Pc1Info {
                method: extractor.name().into(),
                sign_convention: extractor.sign_convention().into(),
                tol: extractor.tol,
                max_iters: extractor.max_iters,
            }),
        },
        totals: Totals::from_report(&report),
        sign_test: SignTestSummary::from_result(sign_test.as_ref()),
        steps_file: STEPS_FILE.into(),
        panels_file: PANELS_FILE.into(),
    };
    Ok(AnalyzeOutcome {
        trajectory,
        report,
        sign_test,
        summary,
    })
}

/// Analyze and write `steps.csv`, `summary.json` and `panels.svg`.
pub fn cmd_analyze(config: &AnalyzeConfig) -> Result<AnalyzeOutcome> {
    let outcome = analyze(config)?;
    fs::create_dir_all(&config.out_dir)?;
    let [steps, summary, panels] = outcome.files(&config.out_dir);
    write_step_csv(&outcome.report, &steps)?;
    write_summary_json(&outcome.summary, &summary)?;
    render_panels(&outcome.report, &panels)?;
    Ok(outcome)
}

/// Write a T x D CSV of synthetic unit directions.
pub fn cmd_synth(spec: &SynthSpec, out: &std::path::Path) -> Result<RepresentationTrajectory> {
    let traj = generate(spec)?;
    let data = traj.directions.concat();
    let m = FeatureMatrix::new(traj.len(), traj.dimension(), data)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    write_csv(&m, out)?;
    Ok(traj)
}
