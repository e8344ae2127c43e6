//! Measured against predicted times, per configuration.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::metrics::{read_records, RunRecord};
use crate::perf_model::{predict_speedup_vs_pure_fast, read_calibration, time_hetero, Calibration, PerfError, ProblemShape};

use super::{create, io_err, open, HarnessError};

/// Predictions more than this fraction below the measurement count as
/// underestimating the overhead.
pub const UNDERESTIMATE_BAND: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictRow {
    pub case: String,
    pub ni: usize,
    pub nj: usize,
    #[serde(rename = "G")]
    pub g: usize,
    #[serde(rename = "C")]
    pub c: usize,
    #[serde(rename = "W")]
    pub w: f64,
    /// Seconds per substep.
    pub measured_s: f64,
    pub predicted_s: f64,
    /// `(predicted - measured) / measured`.
    pub rel_error: f64,
    /// Predicted pure-fast time over this configuration's time; empty
    /// without fast workers.
    pub predicted_speedup: Option<f64>,
    pub underestimates: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictReport {
    pub rows: Vec<PredictRow>,
    pub max_error: f64,
    pub mean_error: f64,
}

/// Compare every completed run with the calibrated model.
pub fn predict_report(records: &[RunRecord], cal: &Calibration) -> Result<PredictReport, PerfError> {
    let p = &cal.params;
    let mut rows = Vec::new();
    for r in records.iter().filter(|r| r.wall_s.is_finite() && r.wall_s > 0.0 && r.substeps > 0) {
        let shape = ProblemShape::planar(r.ni, r.nj)?;
        let measured = r.wall_per_substep();
        let predicted = time_hetero(&shape, r.g, r.c, p)?;
        let rel_error = (predicted - measured) / measured;
        let predicted_speedup = if r.g > 0 {
            Some(predict_speedup_vs_pure_fast(&shape, r.g, r.c, p)?)
        } else {
            None
        };
        rows.push(PredictRow {
            case: r.case.clone(),
            ni: r.ni,
            nj: r.nj,
            g: r.g,
            c: r.c,
            w: r.w,
            measured_s: measured,
            predicted_s: predicted,
            rel_error,
            predicted_speedup,
            underestimates: rel_error < -UNDERESTIMATE_BAND,
        });
    }
    if rows.is_empty() {
        return Err(PerfError::InsufficientRuns("at least one completed run to compare".into()));
    }
    let max_error = rows.iter().map(|r| r.rel_error.abs()).fold(0.0, f64::max);
    let mean_error = rows.iter().map(|r| r.rel_error.abs()).sum::<f64>() / rows.len() as f64;
    Ok(PredictReport {
        rows,
        max_error,
        mean_error,
    })
}

pub fn write_report(mut w: impl Write, report: &PredictReport) -> Result<(), PerfError> {
    let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut w);
    for r in &report.rows {
        wr.serialize(r).map_err(|e| PerfError::Csv(e.to_string()))?;
    }
    wr.flush().map_err(|e| PerfError::Csv(e.to_string()))
}

/// Read a records CSV and a calibration CSV, write `predict_report.csv`
/// into `out_dir`.
pub fn predict_files(records: &Path, calibration: &Path, out_dir: &Path) -> Result<(PredictReport, PathBuf), HarnessError> {
    let recs = read_records(open(records)?)?;
    let cal = read_calibration(open(calibration)?)?;
    let report = predict_report(&recs, &cal)?;
    let (path, mut f) = create(out_dir, "predict_report.csv")?;
    write_report(&mut f, &report)?;
    f.flush().map_err(io_err(&path))?;
    Ok((report, path))
}
