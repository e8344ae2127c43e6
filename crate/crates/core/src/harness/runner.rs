//! Configured runs, ratio sweeps and model calibration.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::case::FlowProblem;
use crate::decomp::exec::{sample_boundary_cost, sample_interior_cost};
use crate::decomp::{calibrate_slowdown, run_heterogeneous, ExecSettings, HeteroRun, SlowdownCalibration, Stage, WorkerSpec};
use crate::metrics::{write_records, RunRecord, RUN_RECORD_HEADER};
use crate::perf_model::{self, write_calibration, Calibration};
use crate::state::{primitive_from_conserved, Conserved};
use crate::SolverError;

use super::config::ConfigError;
use super::{create, io_err, CaseConfig, HarnessError};

/// Emulated slowdown of the interior and boundary kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slowdowns {
    pub interior: SlowdownCalibration,
    pub boundary: SlowdownCalibration,
}

impl Slowdowns {
    pub fn none() -> Self {
        Self {
            interior: SlowdownCalibration::none(),
            boundary: SlowdownCalibration::none(),
        }
    }
}

/// Calibrate slow workers to run the interior and boundary kernels of
/// `problem` `r_gc` times slower than fast ones.
pub fn calibrate_slowdowns(problem: &FlowProblem, r_gc: f64, tolerance: f64) -> Result<Slowdowns, HarnessError> {
    if r_gc == 1.0 {
        return Ok(Slowdowns::none());
    }
    // both samplers only fail on an invalid initial field, which this catches
    sample_interior_cost(problem, 0)?;
    sample_boundary_cost(problem, 0)?;
    let interior = calibrate_slowdown(r_gc, tolerance, |u| {
        sample_interior_cost(problem, u).expect("initial field already validated")
    })?;
    let boundary = calibrate_slowdown(r_gc, tolerance, |u| {
        sample_boundary_cost(problem, u).expect("initial field already validated")
    })?;
    Ok(Slowdowns { interior, boundary })
}

fn settings(config: &CaseConfig, slow: &Slowdowns) -> ExecSettings {
    let mut s = ExecSettings::new(config.scheme.tableau(), config.cfl, config.steps);
    s.clock = config.workers.clock;
    s.timeout = Duration::from_secs_f64(config.workers.timeout_s);
    s.slow_interior = slow.interior;
    s.slow_boundary = slow.boundary;
    s
}

fn base_record(config: &CaseConfig, spec: &WorkerSpec) -> RunRecord {
    RunRecord {
        case: config.kind.name().into(),
        solver: config.mode.name().into(),
        scheme: config.scheme.name().into(),
        ni: config.ni,
        nj: config.nj,
        g: spec.fast,
        c: spec.slow,
        r_gc: spec.r_gc,
        w: spec.w,
        steps: config.steps,
        substeps: config.steps * config.scheme.tableau().s,
        wall_s: f64::NAN,
        ssspnt: f64::NAN,
        t_interior_s: f64::NAN,
        t_boundary_s: f64::NAN,
        t_pack_s: f64::NAN,
        t_exchange_s: f64::NAN,
        t_unpack_s: f64::NAN,
        t_barrier_s: f64::NAN,
    }
}

/// March `problem` on the pool `spec` and summarise the run. With
/// `[workers] repeats` above one, the fastest repetition is reported.
pub fn execute(config: &CaseConfig, problem: &FlowProblem, spec: &WorkerSpec, slow: &Slowdowns) -> Result<(RunRecord, HeteroRun), HarnessError> {
    let settings = settings(config, slow);
    let mut run = run_heterogeneous(problem, spec, &settings)?;
    for _ in 1..config.workers.repeats {
        let again = run_heterogeneous(problem, spec, &settings)?;
        if again.wall_s < run.wall_s {
            run = again;
        }
    }
    let cp = run.timings.critical_path();
    let record = RunRecord {
        wall_s: run.wall_s,
        t_interior_s: cp[Stage::Interior.index()],
        t_boundary_s: cp[Stage::Boundary.index()],
        t_pack_s: cp[Stage::Pack.index()],
        t_exchange_s: cp[Stage::Exchange.index()],
        t_unpack_s: cp[Stage::Unpack.index()],
        t_barrier_s: cp[Stage::Barrier.index()],
        ..base_record(config, spec)
    }
    .with_ssspnt()?;
    Ok((record, run))
}

fn worker_spec(config: &CaseConfig, fast: usize, slow: usize, w: f64) -> Result<WorkerSpec, HarnessError> {
    Ok(WorkerSpec::new(fast, slow, config.workers.r_gc, w)?)
}

fn slowdowns_for(config: &CaseConfig, problem: &FlowProblem) -> Result<Slowdowns, HarnessError> {
    if config.workers.c == 0 {
        return Ok(Slowdowns::none());
    }
    calibrate_slowdowns(problem, config.workers.r_gc, config.workers.tolerance)
}

/// Solution dump: interior primitives with 17 significant digits.
pub fn write_solution(mut w: impl Write, problem: &FlowProblem, solution: &[Conserved]) -> Result<(), SolverError> {
    let geo = &problem.geometry;
    let g = geo.ghost_depth;
    let io = |e: std::io::Error| SolverError::InvalidParameter(format!("writing solution: {e}"));
    writeln!(w, "i,j,x,y,rho,u,v,p").map_err(io)?;
    for j in 0..geo.nj {
        for i in 0..geo.ni {
            let c = geo.cell(i + g, j + g);
            let v = primitive_from_conserved(solution[j * geo.ni + i], &problem.gas)
                .map_err(|source| SolverError::InvalidState { i: i + g, j: j + g, source })?;
            writeln!(
                w,
                "{i},{j},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                geo.centroid_x[c], geo.centroid_y[c], v.rho, v.u, v.v, v.p
            )
            .map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub record: RunRecord,
    pub run: HeteroRun,
    pub records_path: PathBuf,
    pub solution_path: PathBuf,
    pub timings_path: PathBuf,
}

/// One configured run, writing `records.csv`, `solution.csv` and
/// `timings.csv` into the output directory.
pub fn run(config: &CaseConfig) -> Result<RunArtifacts, HarnessError> {
    let problem = config.problem()?;
    let w = &config.workers;
    let spec = worker_spec(config, w.g, w.c, w.w)?;
    let slow = slowdowns_for(config, &problem)?;
    let (record, run) = execute(config, &problem, &spec, &slow)?;
    let dir = config.resolved_output_dir();

    let (records_path, mut f) = create(&dir, "records.csv")?;
    write_records(&mut f, std::slice::from_ref(&record))?;
    let (solution_path, mut f) = create(&dir, "solution.csv")?;
    write_solution(&mut f, &problem, &run.solution)?;
    let (timings_path, mut f) = create(&dir, "timings.csv")?;
    run.timings.write_csv(&mut f).map_err(io_err(&timings_path))?;
    f.flush().map_err(io_err(&timings_path))?;
    Ok(RunArtifacts {
        record,
        run,
        records_path,
        solution_path,
        timings_path,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub record: RunRecord,
    /// Failure message of a run that did not complete.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// Sorted by `W`.
    pub rows: Vec<SweepRow>,
    /// Row with the highest ssspnt.
    pub best: Option<usize>,
    pub slowdowns: Slowdowns,
    pub path: PathBuf,
}

impl SweepReport {
    pub fn best_record(&self) -> Option<&RunRecord> {
        self.best.map(|b| &self.rows[b].record)
    }
}

fn sweep_ratios(config: &CaseConfig) -> Result<Vec<f64>, HarnessError> {
    let mut ws = config.workers.sweep.clone();
    if ws.is_empty() {
        return Err(ConfigError::Inconsistent("sweeping needs [workers] sweep = W1, W2, ...".into()).into());
    }
    ws.sort_by(f64::total_cmp);
    ws.dedup();
    Ok(ws)
}

pub const SWEEP_EXTRA_COLUMNS: &str = "status,best";

fn write_sweep(path: &Path, mut f: impl Write, rows: &[SweepRow], best: Option<usize>) -> Result<(), HarnessError> {
    let mut wr = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(&mut f);
    let csv_err = |e: csv::Error| HarnessError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    };
    let header: Vec<&str> = RUN_RECORD_HEADER.split(',').chain(SWEEP_EXTRA_COLUMNS.split(',')).collect();
    wr.write_record(&header).map_err(csv_err)?;
    for (n, row) in rows.iter().enumerate() {
        let status = match &row.error {
            None => "ok".to_string(),
            Some(e) => format!("failed: {e}"),
        };
        wr.serialize((&row.record, status, best == Some(n))).map_err(csv_err)?;
    }
    wr.flush().map_err(io_err(path))
}

/// One run per workload ratio with a shared slowdown calibration; writes
/// `sweep.csv`. Failed runs are recorded and the sweep continues. Repeats
/// are taken as whole passes over the ratios so slow drift in machine speed
/// affects every ratio alike.
pub fn sweep(config: &CaseConfig) -> Result<SweepReport, HarnessError> {
    let w = &config.workers;
    if w.g == 0 || w.c == 0 {
        return Err(ConfigError::Inconsistent("sweeping needs both fast and slow workers (G >= 1, C >= 1)".into()).into());
    }
    let ratios = sweep_ratios(config)?;
    let problem = config.problem()?;
    let slowdowns = calibrate_slowdowns(&problem, w.r_gc, w.tolerance)?;
    let mut once = config.clone();
    once.workers.repeats = 1;
    let mut rows: Vec<SweepRow> = Vec::with_capacity(ratios.len());
    for pass in 0..w.repeats {
        for (n, &ratio) in ratios.iter().enumerate() {
            let spec = worker_spec(config, w.g, w.c, ratio)?;
            let row = match execute(&once, &problem, &spec, &slowdowns) {
                Ok((record, _)) => SweepRow { record, error: None },
                Err(e) => SweepRow {
                    record: base_record(config, &spec),
                    error: Some(e.to_string()),
                },
            };
            if pass == 0 {
                rows.push(row);
            } else if row.error.is_none() && (rows[n].error.is_some() || row.record.wall_s < rows[n].record.wall_s) {
                rows[n] = row;
            }
        }
    }
    let best = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.error.is_none())
        .max_by(|a, b| a.1.record.ssspnt.total_cmp(&b.1.record.ssspnt))
        .map(|(n, _)| n);
    let (path, f) = create(&config.resolved_output_dir(), "sweep.csv")?;
    write_sweep(&path, f, &rows, best)?;
    Ok(SweepReport {
        rows,
        best,
        slowdowns,
        path,
    })
}

/// Reference runs for the model: one slow worker alone, the fast workers
/// alone, and (when slow workers are configured) the mixed pool at
/// `W = r_gc`. Writes `calibration.csv` and `calibration_runs.csv`.
pub fn calibrate(config: &CaseConfig) -> Result<(Calibration, Vec<RunRecord>), HarnessError> {
    let w = &config.workers;
    if w.g == 0 {
        return Err(ConfigError::Inconsistent("calibration needs at least one fast worker (G >= 1)".into()).into());
    }
    let problem = config.problem()?;
    let slowdowns = calibrate_slowdowns(&problem, w.r_gc, w.tolerance)?;
    let mut specs = vec![worker_spec(config, 0, 1, 1.0)?, worker_spec(config, w.g, 0, 1.0)?];
    if w.c > 0 {
        specs.push(worker_spec(config, w.g, w.c, w.r_gc)?);
    }
    // repeats as passes over the reference runs, as in `sweep`
    let mut once = config.clone();
    once.workers.repeats = 1;
    let mut records: Vec<RunRecord> = Vec::with_capacity(specs.len());
    for pass in 0..w.repeats {
        for (n, spec) in specs.iter().enumerate() {
            let r = execute(&once, &problem, spec, &slowdowns)?.0;
            if pass == 0 {
                records.push(r);
            } else if r.wall_s < records[n].wall_s {
                records[n] = r;
            }
        }
    }
    let cal = perf_model::calibrate(&records)?;
    let dir = config.resolved_output_dir();
    let (path, mut f) = create(&dir, "calibration.csv")?;
    write_calibration(&mut f, &cal)?;
    f.flush().map_err(io_err(&path))?;
    let (path, mut f) = create(&dir, "calibration_runs.csv")?;
    write_records(&mut f, &records)?;
    f.flush().map_err(io_err(&path))?;
    Ok((cal, records))
}
