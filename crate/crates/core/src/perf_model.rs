//! Analytic execution-time model for homogeneous and heterogeneous worker
//! pools, its calibration from measured runs, and the predictions derived
//! from it.
//!
//! All times are per iteration (one RK substep).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::RunRecord;

/// Range of `beta` usually seen on real hardware.
pub const BETA_TYPICAL: (f64, f64) = (0.2, 0.5);
/// Range outside which a calibrated `beta` is probably a measurement fault.
pub const BETA_SANE: (f64, f64) = (0.05, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerfError {
    #[error("invalid model input: {0}")]
    Invalid(String),
    #[error("missing model parameter: {0}")]
    Missing(&'static str),
    #[error("calibration needs {0}")]
    InsufficientRuns(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("calibration CSV: {0}")]
    Csv(String),
}

/// Interior cell counts per dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemShape {
    pub n_l: usize,
    pub n_w: usize,
    pub n_d: usize,
}

impl ProblemShape {
    pub fn new(n_l: usize, n_w: usize, n_d: usize) -> Result<Self, PerfError> {
        if n_l == 0 || n_w == 0 || n_d == 0 {
            return Err(PerfError::Invalid(format!("shape ({n_l}, {n_w}, {n_d}) has an empty dimension")));
        }
        Ok(Self { n_l, n_w, n_d })
    }

    pub fn planar(n_l: usize, n_w: usize) -> Result<Self, PerfError> {
        Self::new(n_l, n_w, 1)
    }

    pub fn cells(&self) -> f64 {
        (self.n_l * self.n_w * self.n_d) as f64
    }
}

/// Separately measured transfer and synchronisation times.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RawOverheads {
    pub t_s: f64,
    pub t_dh: f64,
    pub t_hh: f64,
    pub t_hd: f64,
}

impl RawOverheads {
    /// Three transfers and five synchronisations.
    pub fn total(&self) -> f64 {
        self.t_dh + self.t_hh + self.t_hd + 5.0 * self.t_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfParams {
    /// Seconds per interior cell on a slow worker.
    pub t_i: f64,
    /// Boundary-cell cost relative to `t_i`.
    pub beta: f64,
    /// Transfer and synchronisation overhead as a fraction of boundary time.
    pub alpha: Option<f64>,
    pub raw: Option<RawOverheads>,
    /// Fast/slow per-cell throughput ratio.
    pub r_gc: f64,
}

impl PerfParams {
    /// Parameters of the aggregated form.
    pub fn aggregated(t_i: f64, beta: f64, alpha: f64, r_gc: f64) -> Self {
        Self {
            t_i,
            beta,
            alpha: Some(alpha),
            raw: None,
            r_gc,
        }
    }

    pub fn t_b(&self) -> f64 {
        self.beta * self.t_i
    }

    pub fn validate(&self) -> Result<(), PerfError> {
        if !(self.t_i > 0.0) || !self.t_i.is_finite() {
            return Err(PerfError::Invalid(format!("t_I must be positive, got {}", self.t_i)));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(PerfError::Invalid(format!("beta must be non-negative, got {}", self.beta)));
        }
        if let Some(a) = self.alpha {
            if !(a >= 0.0) || !a.is_finite() {
                return Err(PerfError::Invalid(format!("alpha must be non-negative, got {a}")));
            }
        }
        if !(self.r_gc > 0.0) || !self.r_gc.is_finite() {
            return Err(PerfError::Invalid(format!("r_gc must be positive, got {}", self.r_gc)));
        }
        Ok(())
    }

    /// Transfers plus synchronisation for a configuration whose boundary
    /// work costs `boundary_s`.
    fn overhead(&self, boundary_s: f64) -> Result<f64, PerfError> {
        match (self.raw, self.alpha) {
            (Some(raw), _) => Ok(raw.total()),
            (None, Some(a)) => Ok(a * boundary_s),
            (None, None) => Err(PerfError::Missing("alpha, or the raw stage times t_S, t_DH, t_HH, t_HD")),
        }
    }
}

/// One worker on the whole 3D block.
pub fn time_sequential(shape: &ProblemShape, p: &PerfParams) -> Result<f64, PerfError> {
    p.validate()?;
    let (l, w, d) = (shape.n_l as f64, shape.n_w as f64, shape.n_d as f64);
    let boundary = (2.0 * l * w + 2.0 * l * d + 2.0 * w * d) * p.t_b();
    Ok(l * w * d * p.t_i + boundary + p.overhead(boundary)?)
}

/// One worker on a planar block: the two faces normal to the third
/// dimension carry no boundary work.
pub fn time_sequential_planar(shape: &ProblemShape, p: &PerfParams) -> Result<f64, PerfError> {
    p.validate()?;
    let (l, w, d) = (shape.n_l as f64, shape.n_w as f64, shape.n_d as f64);
    let boundary = (2.0 * l * d + 2.0 * w * d) * p.t_b();
    Ok(l * w * d * p.t_i + boundary + p.overhead(boundary)?)
}

/// `units` equal workers splitting `N_l`.
fn time_split(shape: &ProblemShape, units: f64, p: &PerfParams) -> Result<f64, PerfError> {
    let (l, w, d) = (shape.n_l as f64, shape.n_w as f64, shape.n_d as f64);
    let boundary = (2.0 * w + 2.0 * l / units) * d * p.t_b();
    Ok(l * w * d / units * p.t_i + boundary + p.overhead(boundary)?)
}

/// `c` slow workers.
pub fn time_multi_cpu(shape: &ProblemShape, c: usize, p: &PerfParams) -> Result<f64, PerfError> {
    p.validate()?;
    if c == 0 {
        return Err(PerfError::Invalid("C must be at least 1".into()));
    }
    time_split(shape, c as f64, p)
}

/// `g` fast workers, each worth `r_gc` slow ones.
pub fn time_multi_gpu(shape: &ProblemShape, g: usize, p: &PerfParams) -> Result<f64, PerfError> {
    p.validate()?;
    if g == 0 {
        return Err(PerfError::Invalid("G must be at least 1".into()));
    }
    if p.r_gc < 1.0 {
        return Err(PerfError::Invalid(format!("r_gc must be at least 1, got {}", p.r_gc)));
    }
    time_split(shape, g as f64 * p.r_gc, p)
}

/// `g` fast and `c` slow workers in the aggregated alpha-beta form.
pub fn time_hetero(shape: &ProblemShape, g: usize, c: usize, p: &PerfParams) -> Result<f64, PerfError> {
    p.validate()?;
    if g + c == 0 {
        return Err(PerfError::Invalid("G and C cannot both be zero".into()));
    }
    let alpha = p.alpha.ok_or(PerfError::Missing("alpha"))?;
    let (l, w, d) = (shape.n_l as f64, shape.n_w as f64, shape.n_d as f64);
    let units = g as f64 * p.r_gc + c as f64;
    Ok((l * w * d / units + (2.0 * w + 2.0 * l / units) * d * (1.0 + alpha) * p.beta) * p.t_i)
}

/// Predicted time of the pure-fast pool over the heterogeneous one.
pub fn predict_speedup_vs_pure_fast(shape: &ProblemShape, g: usize, c: usize, p: &PerfParams) -> Result<f64, PerfError> {
    if g == 0 {
        return Err(PerfError::Invalid("a pure-fast reference needs G >= 1".into()));
    }
    Ok(time_hetero(shape, g, 0, p)? / time_hetero(shape, g, c, p)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalRatio {
    pub w: f64,
    pub note: &'static str,
}

/// Workload ratio at which fast and slow workers finish their interiors
/// together.
pub fn predict_optimal_ratio(p: &PerfParams) -> OptimalRatio {
    OptimalRatio {
        w: p.r_gc,
        note: "perfect-balance estimate; measured optima usually sit at or above it because slow workers also carry control and boundary overhead",
    }
}

/// One row of the calibration report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub param: String,
    pub value: f64,
    pub source_run: String,
    pub warning: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub params: PerfParams,
    pub entries: Vec<CalibrationEntry>,
}

impl Calibration {
    pub fn warnings(&self) -> impl Iterator<Item = &CalibrationEntry> {
        self.entries.iter().filter(|e| !e.warning.is_empty())
    }
}

fn run_label(r: &RunRecord) -> String {
    format!("{}:{}x{}:G{}C{}W{}", r.case, r.ni, r.nj, r.g, r.c, r.w)
}

fn shape_of(r: &RunRecord) -> Result<ProblemShape, PerfError> {
    ProblemShape::planar(r.ni, r.nj)
}

fn split_terms(shape: &ProblemShape, g: usize, c: usize, r_gc: f64) -> (f64, f64) {
    let (l, w) = (shape.n_l as f64, shape.n_w as f64);
    let units = g as f64 * r_gc + c as f64;
    (l * w / units, 2.0 * w + 2.0 * l / units)
}

/// Fit the model to measured runs.
///
/// Needs one single-slow-worker run (`G = 0, C = 1`) for `t_I` and `beta`,
/// one pure-fast run (`C = 0`) for `r_gc`, and at least two runs in all for
/// `alpha`, which is the least-squares fit of the time left over after the
/// interior and boundary terms.
pub fn calibrate(records: &[RunRecord]) -> Result<Calibration, PerfError> {
    let slow = records
        .iter()
        .find(|r| r.g == 0 && r.c == 1)
        .ok_or_else(|| PerfError::InsufficientRuns("a run with one slow worker and no fast ones".into()))?;
    let fast = records
        .iter()
        .find(|r| r.c == 0 && r.g >= 1)
        .ok_or_else(|| PerfError::InsufficientRuns("a run with fast workers only".into()))?;
    if records.len() < 2 {
        return Err(PerfError::InsufficientRuns("at least two configurations".into()));
    }
    for r in records {
        if r.substeps == 0 || !(r.wall_s > 0.0) {
            return Err(PerfError::Invalid(format!("run {} has no timed substeps", run_label(r))));
        }
    }

    let s_shape = shape_of(slow)?;
    let per = slow.substeps as f64;
    let t_i = slow.t_interior_s / (per * s_shape.cells());
    let t_b = slow.t_boundary_s / (per * (2.0 * s_shape.n_l as f64 + 2.0 * s_shape.n_w as f64));
    if !(t_i > 0.0) {
        return Err(PerfError::DegenerateFit(format!("slow run {} has no interior time", run_label(slow))));
    }
    let beta = t_b / t_i;

    let f_shape = shape_of(fast)?;
    let fast_cell = fast.t_interior_s * fast.g as f64 / (fast.substeps as f64 * f_shape.cells());
    if !(fast_cell > 0.0) {
        return Err(PerfError::DegenerateFit(format!("fast run {} has no interior time", run_label(fast))));
    }
    let r_gc = t_i / fast_cell;

    // residue y = alpha * x with x the modelled boundary time
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for r in records {
        let shape = shape_of(r)?;
        let (interior, boundary) = split_terms(&shape, r.g, r.c, r_gc);
        let x = boundary * beta * t_i;
        let y = r.wall_per_substep() - interior * t_i - x;
        sxy += x * y;
        sxx += x * x;
    }
    if !(sxx > 0.0) {
        return Err(PerfError::DegenerateFit("no boundary work to attribute overhead to".into()));
    }
    let raw_alpha = sxy / sxx;
    let alpha = raw_alpha.max(0.0);

    let slow_label = run_label(slow);
    let beta_warning = if beta < BETA_SANE.0 || beta > BETA_SANE.1 {
        format!("beta outside the sanity window {}-{}", BETA_SANE.0, BETA_SANE.1)
    } else if beta < BETA_TYPICAL.0 || beta > BETA_TYPICAL.1 {
        format!("beta outside the typical range {}-{}", BETA_TYPICAL.0, BETA_TYPICAL.1)
    } else {
        String::new()
    };
    let alpha_warning = if raw_alpha < 0.0 {
        format!("fit gave {raw_alpha:e}, clamped to 0")
    } else {
        String::new()
    };
    let entry = |param: &str, value: f64, source_run: String, warning: String| CalibrationEntry {
        param: param.into(),
        value,
        source_run,
        warning,
    };
    let entries = vec![
        entry("t_I", t_i, slow_label.clone(), String::new()),
        entry("t_B", t_b, slow_label.clone(), String::new()),
        entry("beta", beta, slow_label, beta_warning),
        entry("alpha", alpha, format!("fit over {} runs", records.len()), alpha_warning),
        entry("r_gc", r_gc, run_label(fast), String::new()),
    ];
    let params = PerfParams::aggregated(t_i, beta, alpha, r_gc);
    params.validate()?;
    Ok(Calibration { params, entries })
}

/// A run record whose timings follow the aggregated model exactly.
pub fn synthesize_record(shape: &ProblemShape, g: usize, c: usize, w: f64, substeps: usize, p: &PerfParams) -> Result<RunRecord, PerfError> {
    let alpha = p.alpha.ok_or(PerfError::Missing("alpha"))?;
    let per_substep = time_hetero(shape, g, c, p)?;
    let (interior, boundary) = split_terms(shape, g, c, p.r_gc);
    let n = substeps as f64;
    let record = RunRecord {
        case: "synthetic".into(),
        solver: "euler".into(),
        scheme: "rk2".into(),
        ni: shape.n_l,
        nj: shape.n_w,
        g,
        c,
        r_gc: p.r_gc,
        w,
        steps: substeps.div_ceil(2),
        substeps,
        wall_s: per_substep * n,
        ssspnt: 0.0,
        t_interior_s: interior * p.t_i * n,
        t_boundary_s: boundary * p.t_b() * n,
        t_pack_s: 0.0,
        t_exchange_s: boundary * p.t_b() * alpha * n,
        t_unpack_s: 0.0,
        t_barrier_s: 0.0,
    };
    record.with_ssspnt().map_err(|e| PerfError::Invalid(e.to_string()))
}

pub const CALIBRATION_HEADER: &str = "param,value,source_run,warning";

pub fn write_calibration(w: impl Write, cal: &Calibration) -> Result<(), PerfError> {
    let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    for e in &cal.entries {
        wr.serialize(e).map_err(|e| PerfError::Csv(e.to_string()))?;
    }
    wr.flush().map_err(|e| PerfError::Csv(e.to_string()))
}

/// Rebuild a calibration from its CSV report.
pub fn read_calibration(r: impl Read) -> Result<Calibration, PerfError> {
    let mut rd = csv::Reader::from_reader(r);
    let entries: Vec<CalibrationEntry> = rd
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| PerfError::Csv(e.to_string()))?;
    let get = |name: &'static str| {
        entries
            .iter()
            .find(|e| e.param == name)
            .map(|e| e.value)
            .ok_or(PerfError::Missing(name))
    };
    let params = PerfParams::aggregated(get("t_I")?, get("beta")?, get("alpha")?, get("r_gc")?);
    params.validate()?;
    Ok(Calibration { params, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn bare(t_i: f64, t_b: f64) -> PerfParams {
        PerfParams {
            t_i,
            beta: t_b / t_i,
            alpha: None,
            raw: Some(RawOverheads::default()),
            r_gc: 1.0,
        }
    }

    #[test]
    fn sequential_examples() {
        let s = ProblemShape::planar(100, 100).unwrap();
        assert!(rel(time_sequential(&s, &bare(1e-6, 0.0)).unwrap(), 0.01) < 1e-15);
        let s = ProblemShape::planar(10, 10).unwrap();
        let p = bare(1e-6, 3e-7);
        let t = time_sequential(&s, &p).unwrap();
        assert!(rel(t, 1.72e-4) < 1e-14, "{t}");
        let mut with_sync = p;
        with_sync.raw = Some(RawOverheads {
            t_s: 1e-5,
            ..RawOverheads::default()
        });
        assert!(rel(time_sequential(&s, &with_sync).unwrap() - t, 5e-5) < 1e-10);
    }

    #[test]
    fn sequential_is_linear_in_each_time() {
        let s = ProblemShape::new(7, 5, 3).unwrap();
        let base = PerfParams {
            t_i: 1e-6,
            beta: 0.3,
            alpha: None,
            raw: Some(RawOverheads {
                t_s: 1e-5,
                t_dh: 2e-5,
                t_hh: 3e-5,
                t_hd: 4e-5,
            }),
            r_gc: 1.0,
        };
        let t0 = time_sequential(&s, &base).unwrap();
        let mut bumped = base;
        bumped.raw.as_mut().unwrap().t_hh += 1e-5;
        assert!(rel(time_sequential(&s, &bumped).unwrap() - t0, 1e-5) < 1e-9);
        let mut twice_i = base;
        twice_i.t_i *= 2.0; // beta fixed, so t_B doubles too
        let no_over = time_sequential(&s, &base).unwrap() - base.raw.unwrap().total();
        assert!(rel(time_sequential(&s, &twice_i).unwrap() - base.raw.unwrap().total(), 2.0 * no_over) < 1e-12);
    }

    #[test]
    fn missing_overheads_are_named() {
        let p = PerfParams {
            t_i: 1e-6,
            beta: 0.3,
            alpha: None,
            raw: None,
            r_gc: 2.0,
        };
        let s = ProblemShape::planar(4, 4).unwrap();
        let err = time_sequential(&s, &p).unwrap_err();
        assert!(err.to_string().contains("alpha"));
        assert!(matches!(time_hetero(&s, 1, 1, &p), Err(PerfError::Missing("alpha"))));
    }

    #[test]
    fn multi_cpu_examples() {
        let s = ProblemShape::planar(1000, 100).unwrap();
        let p = PerfParams::aggregated(1e-6, 0.3, 0.0, 1.0);
        assert!(rel(time_multi_cpu(&s, 8, &p).unwrap(), 0.012635) < 1e-12);
        let small = ProblemShape::planar(30, 20).unwrap();
        assert!(rel(time_multi_cpu(&small, 1, &p).unwrap(), time_sequential_planar(&small, &p).unwrap()) < 1e-15);
        let free = PerfParams::aggregated(1e-6, 0.0, 0.0, 1.0);
        assert!(rel(time_multi_cpu(&s, 2, &free).unwrap(), 2.0 * time_multi_cpu(&s, 4, &free).unwrap()) < 1e-15);
        assert!(time_multi_cpu(&s, 0, &p).is_err());
    }

    #[test]
    fn multi_gpu_examples() {
        let s = ProblemShape::planar(1000, 100).unwrap();
        let p = PerfParams::aggregated(1e-6, 0.0, 0.0, 40.0);
        assert!(rel(time_multi_gpu(&s, 1, &p).unwrap(), 2.5e-3) < 1e-14);
        let unit = PerfParams::aggregated(1e-6, 0.3, 0.5, 1.0);
        assert_eq!(time_multi_gpu(&s, 3, &unit).unwrap(), time_multi_cpu(&s, 3, &unit).unwrap());
        let mut last = f64::INFINITY;
        for r in [1.0, 2.0, 8.0, 40.0] {
            let t = time_multi_gpu(&s, 1, &PerfParams::aggregated(1e-6, 0.0, 0.0, r)).unwrap();
            assert!(t < last);
            last = t;
        }
        assert!(time_multi_gpu(&s, 1, &PerfParams::aggregated(1e-6, 0.0, 0.0, 0.5)).is_err());
    }

    #[test]
    fn hetero_examples() {
        let s = ProblemShape::planar(1000, 100).unwrap();
        let p = PerfParams::aggregated(1e-6, 0.25, 1.0, 40.0);
        assert!(rel(time_hetero(&s, 1, 0, &p).unwrap(), 2.625e-3) < 1e-14);
        let free = PerfParams::aggregated(1e-6, 0.0, 0.0, 40.0);
        assert!(rel(time_hetero(&s, 1, 8, &free).unwrap(), 1e5 * 1e-6 / 48.0) < 1e-15);
        assert!(time_hetero(&s, 0, 0, &p).is_err());
    }

    #[test]
    fn hetero_monotone() {
        let s = ProblemShape::planar(300, 80).unwrap();
        let p = PerfParams::aggregated(1e-6, 0.3, 0.7, 8.0);
        let t = |g, c, p: &PerfParams| time_hetero(&s, g, c, p).unwrap();
        assert!(t(2, 4, &p) < t(1, 4, &p));
        assert!(t(1, 5, &p) < t(1, 4, &p));
        let faster = PerfParams { r_gc: 9.0, ..p };
        assert!(t(1, 4, &faster) < t(1, 4, &p));
    }

    #[test]
    fn speedup_predictions() {
        let s = ProblemShape::planar(1000, 100).unwrap();
        let free = PerfParams::aggregated(1e-6, 0.0, 0.0, 40.0);
        assert!(rel(predict_speedup_vs_pure_fast(&s, 1, 8, &free).unwrap(), 1.2) < 1e-14);
        let p = PerfParams::aggregated(1e-6, 0.3, 0.5, 40.0);
        assert_eq!(predict_speedup_vs_pure_fast(&s, 1, 0, &p).unwrap(), 1.0);
        let mut last = f64::INFINITY;
        for beta in [0.0, 0.1, 0.2, 0.4, 0.8, 1.6] {
            let r = predict_speedup_vs_pure_fast(&s, 1, 8, &PerfParams { beta, ..p }).unwrap();
            assert!(r < last && r > 1.0, "beta {beta}: {r}");
            last = r;
        }
    }

    #[test]
    fn optimal_ratio_is_r_gc() {
        let p = PerfParams::aggregated(1e-6, 0.3, 0.5, 40.0);
        let w = predict_optimal_ratio(&p).w;
        assert!((40.0..=55.0).contains(&w));
        assert_eq!(predict_optimal_ratio(&PerfParams { r_gc: 1.0, ..p }).w, 1.0);
    }

    fn random_params(rng: &mut ChaCha8Rng) -> PerfParams {
        PerfParams::aggregated(
            10f64.powf(rng.gen_range(-8.0..-4.0)),
            rng.gen_range(0.05..1.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(1.0..64.0),
        )
    }

    #[test]
    fn degenerate_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let p = random_params(&mut rng);
            let s = ProblemShape::planar(rng.gen_range(1..5000), rng.gen_range(1..2000)).unwrap();
            let g = rng.gen_range(1..16);
            let c = rng.gen_range(1..64);
            assert!(rel(time_hetero(&s, g, 0, &p).unwrap(), time_multi_gpu(&s, g, &p).unwrap()) < 1e-14);
            assert!(rel(time_hetero(&s, 0, c, &p).unwrap(), time_multi_cpu(&s, c, &p).unwrap()) < 1e-14);
        }
    }

    fn synthetic_set(s: &ProblemShape, p: &PerfParams) -> Vec<RunRecord> {
        [(0, 1), (1, 0), (1, 2), (1, 4), (2, 4)]
            .iter()
            .map(|&(g, c)| synthesize_record(s, g, c, p.r_gc, 40, p).unwrap())
            .collect()
    }

    #[test]
    fn calibration_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let p = random_params(&mut rng);
            let s = ProblemShape::planar(rng.gen_range(8..500), rng.gen_range(8..300)).unwrap();
            let recs = synthetic_set(&s, &p);
            let cal = calibrate(&recs).unwrap();
            let q = cal.params;
            assert!(rel(q.t_i, p.t_i) < 1e-10);
            assert!(rel(q.beta, p.beta) < 1e-10);
            assert!(rel(q.r_gc, p.r_gc) < 1e-10);
            let a = p.alpha.unwrap();
            assert!((q.alpha.unwrap() - a).abs() <= 1e-10 * a.max(1e-3), "{} vs {a}", q.alpha.unwrap());
        }
    }

    #[test]
    fn calibration_tolerates_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let p = PerfParams::aggregated(1e-6, 0.3, 1.0, 8.0);
        let s = ProblemShape::planar(60, 40).unwrap();
        let mut fits = Vec::new();
        for _ in 0..100 {
            let mut recs = synthetic_set(&s, &p);
            for r in recs.iter_mut() {
                r.wall_s *= 1.0 + rng.gen_range(-0.05..0.05);
            }
            fits.push(calibrate(&recs).unwrap().params.alpha.unwrap());
        }
        let mean = fits.iter().sum::<f64>() / fits.len() as f64;
        assert!(rel(mean, 1.0) <= 0.3, "mean alpha {mean}");
    }

    #[test]
    fn beta_warnings_do_not_fail() {
        let p = PerfParams::aggregated(1e-6, 0.9, 0.2, 4.0);
        let s = ProblemShape::planar(40, 20).unwrap();
        let recs = synthetic_set(&s, &p);
        let cal = calibrate(&recs).unwrap();
        let warned: Vec<_> = cal.warnings().map(|e| e.param.as_str()).collect();
        assert_eq!(warned, vec!["beta"]);
        let p = PerfParams::aggregated(1e-6, 0.01, 0.2, 4.0);
        let recs = synthetic_set(&s, &p);
        let cal = calibrate(&recs).unwrap();
        assert!(cal.warnings().next().unwrap().warning.contains("sanity"));
    }

    #[test]
    fn calibration_needs_reference_runs() {
        let p = PerfParams::aggregated(1e-6, 0.3, 0.2, 4.0);
        let s = ProblemShape::planar(40, 20).unwrap();
        let recs = synthetic_set(&s, &p);
        assert!(matches!(calibrate(&recs[1..]), Err(PerfError::InsufficientRuns(_))));
        assert!(matches!(calibrate(&recs[..1]), Err(PerfError::InsufficientRuns(_))));
    }

    #[test]
    fn calibration_csv_round_trip() {
        let p = PerfParams::aggregated(1.0 / 3.0 * 1e-6, 0.3, 0.7, 8.0);
        let s = ProblemShape::planar(40, 20).unwrap();
        let recs = synthetic_set(&s, &p);
        let cal = calibrate(&recs).unwrap();
        let mut buf = Vec::new();
        write_calibration(&mut buf, &cal).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with(CALIBRATION_HEADER));
        assert_eq!(read_calibration(buf.as_slice()).unwrap(), cal);
        assert!(read_calibration("param,value,source_run,warning\nt_I,1e-6,x,\n".as_bytes()).is_err());
    }
}
