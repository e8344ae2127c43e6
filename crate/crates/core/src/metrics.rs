//! The ssspnt throughput metric, run records and scaling classification.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Scale applied to ssspnt.
pub const SSSPNT_SCALE: f64 = 1e-6;

/// Relative band inside which a scaling segment counts as linear.
pub const LINEAR_BAND: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("scaling classification needs at least two records, got {0}")]
    TooFewRecords(usize),
    #[error("records mix cases: {0} and {1}")]
    MismatchedCases(String, String),
    #[error("np must increase along the series ({0} then {1})")]
    NotIncreasing(f64, f64),
    #[error("run record CSV: {0}")]
    Csv(String),
}

fn positive(name: &'static str, value: f64) -> Result<f64, MetricsError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(MetricsError::NonPositive { name, value })
    }
}

/// Scaled size-steps per np-time. `steps` counts RK substeps.
pub fn ssspnt(size: f64, steps: f64, np: f64, time: f64) -> Result<f64, MetricsError> {
    let size = positive("size", size)?;
    let steps = positive("steps", steps)?;
    let np = positive("np", np)?;
    let time = positive("time", time)?;
    Ok(SSSPNT_SCALE * size * steps / (np * time))
}

/// One measured (or synthesised) run. Column order is the CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub case: String,
    pub solver: String,
    pub scheme: String,
    pub ni: usize,
    pub nj: usize,
    #[serde(rename = "G")]
    pub g: usize,
    #[serde(rename = "C")]
    pub c: usize,
    pub r_gc: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub steps: usize,
    pub substeps: usize,
    pub wall_s: f64,
    pub ssspnt: f64,
    pub t_interior_s: f64,
    pub t_boundary_s: f64,
    pub t_pack_s: f64,
    pub t_exchange_s: f64,
    pub t_unpack_s: f64,
    pub t_barrier_s: f64,
}

pub const RUN_RECORD_HEADER: &str = "case,solver,scheme,ni,nj,G,C,r_gc,W,steps,substeps,wall_s,ssspnt,t_interior_s,t_boundary_s,t_pack_s,t_exchange_s,t_unpack_s,t_barrier_s";

impl RunRecord {
    pub fn size(&self) -> usize {
        self.ni * self.nj
    }

    /// Workers counted for normalisation: fast workers only when any are
    /// present, otherwise the slow workers.
    pub fn np(&self) -> usize {
        if self.g > 0 {
            self.g
        } else {
            self.c
        }
    }

    /// Fill `ssspnt` from the other fields.
    pub fn with_ssspnt(mut self) -> Result<Self, MetricsError> {
        self.ssspnt = ssspnt(self.size() as f64, self.substeps as f64, self.np() as f64, self.wall_s)?;
        Ok(self)
    }

    pub fn wall_per_substep(&self) -> f64 {
        self.wall_s / self.substeps as f64
    }

    fn series_key(&self) -> String {
        format!("{}/{}/{}x{}", self.case, self.solver, self.ni, self.nj)
    }
}

pub fn write_records(w: impl Write, records: &[RunRecord]) -> Result<(), MetricsError> {
    let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    if records.is_empty() {
        wr.write_record(RUN_RECORD_HEADER.split(','))
            .map_err(|e| MetricsError::Csv(e.to_string()))?;
    }
    for r in records {
        wr.serialize(r).map_err(|e| MetricsError::Csv(e.to_string()))?;
    }
    wr.flush().map_err(|e| MetricsError::Csv(e.to_string()))
}

pub fn read_records(r: impl Read) -> Result<Vec<RunRecord>, MetricsError> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd
        .headers()
        .map_err(|e| MetricsError::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    // sweep reports append bookkeeping columns after the fixed ones
    let fixed: Vec<&str> = RUN_RECORD_HEADER.split(',').collect();
    if header.len() < fixed.len() || header[..fixed.len()] != fixed[..] {
        return Err(MetricsError::Csv(format!("unexpected header {}", header.join(","))));
    }
    rd.deserialize()
        .map(|r| r.map_err(|e| MetricsError::Csv(e.to_string())))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    Super,
    Linear,
    Sub,
}

impl fmt::Display for Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scaling::Super => "super",
            Scaling::Linear => "linear",
            Scaling::Sub => "sub",
        })
    }
}

/// Classify each segment of an `(np, ssspnt)` series by the relative change
/// of ssspnt.
pub fn classify_series(points: &[(f64, f64)]) -> Result<Vec<Scaling>, MetricsError> {
    if points.len() < 2 {
        return Err(MetricsError::TooFewRecords(points.len()));
    }
    for &(np, s) in points {
        positive("np", np)?;
        positive("ssspnt", s)?;
    }
    points
        .windows(2)
        .map(|w| {
            let ((n0, s0), (n1, s1)) = (w[0], w[1]);
            if n1 <= n0 {
                return Err(MetricsError::NotIncreasing(n0, n1));
            }
            let change = (s1 - s0) / s0;
            Ok(if change > LINEAR_BAND {
                Scaling::Super
            } else if change < -LINEAR_BAND {
                Scaling::Sub
            } else {
                Scaling::Linear
            })
        })
        .collect()
}

/// Classify a series of runs of one case at increasing np.
pub fn classify_scaling(records: &[RunRecord]) -> Result<Vec<Scaling>, MetricsError> {
    if let Some(first) = records.first() {
        let key = first.series_key();
        if let Some(other) = records.iter().find(|r| r.series_key() != key) {
            return Err(MetricsError::MismatchedCases(key, other.series_key()));
        }
    }
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.np() as f64, r.ssspnt)).collect();
    classify_series(&points)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn record(np: usize, wall: f64) -> RunRecord {
        RunRecord {
            case: "ramp_inlet".into(),
            solver: "euler".into(),
            scheme: "rk2".into(),
            ni: 100,
            nj: 50,
            g: 0,
            c: np,
            r_gc: 1.0,
            w: 1.0,
            steps: 10,
            substeps: 20,
            wall_s: wall,
            ssspnt: 0.0,
            t_interior_s: 0.5 * wall,
            t_boundary_s: 0.1,
            t_pack_s: 0.0,
            t_exchange_s: 1e-7,
            t_unpack_s: 3.5e-300,
            t_barrier_s: 0.0,
        }
        .with_ssspnt()
        .unwrap()
    }

    #[test]
    fn metric_arithmetic() {
        assert_eq!(ssspnt(1e6, 400.0, 2.0, 200.0).unwrap(), 1.0);
        let a = ssspnt(5000.0, 30.0, 2.0, 0.75).unwrap();
        assert_eq!(a, ssspnt(5000.0, 30.0, 4.0, 0.375).unwrap());
        assert!(ssspnt(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(ssspnt(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(ssspnt(1.0, 1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn substep_accounting() {
        // same per-substep cost, twice the substeps per step
        let per_substep = 0.01;
        let rk2 = ssspnt(1e4, 2.0 * 50.0, 1.0, 2.0 * 50.0 * per_substep).unwrap();
        let rk4 = ssspnt(1e4, 4.0 * 50.0, 1.0, 4.0 * 50.0 * per_substep).unwrap();
        assert!((rk2 - rk4).abs() <= 1e-15 * rk2);
    }

    #[test]
    fn classification_bands() {
        let flat: Vec<(f64, f64)> = (1..=5).map(|n| (n as f64, 2.0)).collect();
        assert!(classify_series(&flat).unwrap().iter().all(|s| *s == Scaling::Linear));
        assert_eq!(
            classify_series(&[(1.0, 1.0), (2.0, 1.2), (4.0, 1.0)]).unwrap(),
            vec![Scaling::Super, Scaling::Sub]
        );
        assert!(classify_series(&[(1.0, 1.0)]).is_err());
        assert!(classify_series(&[(2.0, 1.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn halving_time_is_linear() {
        let recs: Vec<RunRecord> = [1, 2, 4, 8].iter().map(|&n| record(n, 8.0 / n as f64)).collect();
        assert!(classify_scaling(&recs).unwrap().iter().all(|s| *s == Scaling::Linear));
        let mut mixed = recs.clone();
        mixed[1].case = "sod_tube".into();
        assert!(matches!(classify_scaling(&mixed), Err(MetricsError::MismatchedCases(..))));
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let mut recs = vec![record(1, 1.0 / 3.0), record(2, 0.1 + 0.2)];
        recs[1].g = 1;
        recs[1].w = 12.5;
        let mut buf = Vec::new();
        write_records(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(RUN_RECORD_HEADER));
        assert!(!text.contains('\r'));
        assert_eq!(read_records(buf.as_slice()).unwrap(), recs);
        let mut empty = Vec::new();
        write_records(&mut empty, &[]).unwrap();
        assert!(read_records(empty.as_slice()).unwrap().is_empty());
        assert!(read_records("a,b\n1,2\n".as_bytes()).is_err());
    }
}
