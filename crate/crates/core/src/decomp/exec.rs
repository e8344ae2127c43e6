//! The synchronised heterogeneous workflow.
//!
//! Every RK substage, each worker runs interior residual, boundary
//! enforcement, pack, exchange and unpack, with a global barrier after each.
//! Workers own their slab exclusively and talk only through channels.

use std::any::Any;
use std::cell::Cell;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::case::FlowProblem;
use crate::error::SolverError;
use crate::mesh::BlockGeometry;
use crate::numerics::boundary::{physical_boundary_cells, BoundaryKind, BoundarySpec};
use crate::numerics::residual::ResidualContext;
use crate::numerics::{apply_boundary, BlockState, Edge};
use crate::solver::interior_residual;
use crate::state::Conserved;
use crate::time_integration::{combine, stable_dt, ButcherTableau};

use super::barrier::{BarrierError, StageBarrier};
use super::clock::{ClockKind, Stopwatch};
use super::exchange::{exchange_plan, gather_interior, pack_strip, scatter, unpack_strip, GhostStrip, Transfer};
use super::partition::{partition_weighted, Partition, WorkerClass, WorkerSpec};
use super::slowdown::{burn, SlowdownCalibration};
use super::timing::{Stage, StageRecord, StageTimings};
use super::DecompError;

/// Deliberate faults, for exercising the failure paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// The worker skips sending its ghost strips at `step`.
    WithholdGhosts { worker: usize, step: usize },
    /// The worker receives but does not unpack its ghost strips at `step`.
    SkipUnpack { worker: usize, step: usize },
    /// The worker panics in `stage` of `step`.
    Panic { worker: usize, step: usize, stage: Stage },
}

#[derive(Debug, Clone)]
pub struct ExecSettings {
    pub tableau: ButcherTableau,
    pub cfl: f64,
    pub steps: usize,
    pub clock: ClockKind,
    /// Limit on any single barrier or message wait.
    pub timeout: Duration,
    /// Extra work per interior cell on slow workers.
    pub slow_interior: SlowdownCalibration,
    /// Extra work per boundary cell on slow workers.
    pub slow_boundary: SlowdownCalibration,
    /// Explicit slab widths instead of the weighted partition.
    pub widths: Option<Vec<usize>>,
    pub fault: Option<Fault>,
}

impl ExecSettings {
    pub fn new(tableau: ButcherTableau, cfl: f64, steps: usize) -> Self {
        Self {
            tableau,
            cfl,
            steps,
            clock: ClockKind::ThreadCpu,
            timeout: Duration::from_secs(60),
            slow_interior: SlowdownCalibration::none(),
            slow_boundary: SlowdownCalibration::none(),
            widths: None,
            fault: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HeteroRun {
    pub partition: Partition,
    /// Gathered interior, row-major over the whole grid.
    pub solution: Vec<Conserved>,
    pub timings: StageTimings,
    /// Critical-path time (thread-CPU clock) or elapsed time (wall clock)
    /// of the marching loop.
    pub wall_s: f64,
    /// Real elapsed time of the marching loop.
    pub elapsed_s: f64,
    pub steps: usize,
    pub substeps: usize,
    /// Barriers completed inside the marching loop.
    pub barriers: u64,
    /// Simulated physical time reached.
    pub time: f64,
}

#[derive(Debug)]
enum Message {
    Ghost(GhostStrip),
    Dt { from: usize, epoch: u64, dt: f64 },
}

struct Shared<'a> {
    problem: &'a FlowProblem,
    settings: &'a ExecSettings,
    barrier: StageBarrier,
    senders: Vec<Sender<Message>>,
    workers: usize,
}

struct Worker {
    id: usize,
    class: WorkerClass,
    start: usize,
    geo: Arc<BlockGeometry>,
    bc: BoundarySpec,
    source: Option<Vec<Conserved>>,
    volumes: Vec<f64>,
    state: BlockState,
    u_n: Vec<Conserved>,
    residuals: Vec<Vec<Conserved>>,
    dt: f64,
    time: f64,
    inbox: Receiver<Message>,
    outbox: Vec<(usize, GhostStrip)>,
    received: Vec<GhostStrip>,
    received_dt: Vec<f64>,
    outgoing: Vec<Transfer>,
    incoming: Vec<Transfer>,
    /// Epoch of the last strip written for each incoming transfer.
    filled: Vec<Option<u64>>,
    records: Vec<StageRecord>,
    loop_start: Option<Instant>,
    loop_end: Option<Instant>,
    barriers_before: u64,
    barriers_after: u64,
}

fn globalize(err: SolverError, offset: usize) -> SolverError {
    match err {
        SolverError::InvalidState { i, j, source } => SolverError::InvalidState { i: i + offset, j, source },
        SolverError::Stage { stage, source } => SolverError::Stage {
            stage,
            source: Box::new(globalize(*source, offset)),
        },
        other => other,
    }
}

impl Worker {
    fn slow_units(&self, cal: &SlowdownCalibration) -> u64 {
        match self.class {
            WorkerClass::Slow => cal.units_per_cell,
            WorkerClass::Fast => 0,
        }
    }

    fn fail(&self, stage: Stage, e: SolverError) -> DecompError {
        DecompError::Solver {
            worker: self.id,
            stage,
            source: globalize(e, self.start),
        }
    }

    fn ctx<'a>(&'a self, problem: &FlowProblem) -> ResidualContext<'a> {
        ResidualContext {
            geo: &self.geo,
            gas: problem.gas,
            muscl: problem.muscl,
            mode: problem.mode,
            source: self.source.as_deref(),
        }
    }

    fn boundary(&mut self, sh: &Shared<'_>) -> Result<(), DecompError> {
        apply_boundary(&mut self.state, &self.geo, &self.bc, &sh.problem.gas)
            .map_err(|e| self.fail(Stage::Boundary, e))?;
        let units = self.slow_units(&sh.settings.slow_boundary);
        if units > 0 {
            burn(units * physical_boundary_cells(&self.bc, self.state.ni, self.state.nj) as u64);
        }
        Ok(())
    }

    fn pack(&mut self, epoch: u64) {
        self.outbox.clear();
        for t in &self.outgoing {
            self.outbox.push((t.to, pack_strip(&self.state, t, self.start, epoch)));
        }
    }

    fn exchange(&mut self, sh: &Shared<'_>, epoch: u64, send_dt: bool, withhold: bool) -> Result<(), DecompError> {
        if !withhold {
            for (n, strip) in self.outbox.drain(..) {
                // a closed channel means the receiver already failed; the
                // barrier abort reports that
                let _ = sh.senders[n].send(Message::Ghost(strip));
            }
        }
        if send_dt {
            for (n, tx) in sh.senders.iter().enumerate() {
                if n != self.id {
                    let _ = tx.send(Message::Dt {
                        from: self.id,
                        epoch,
                        dt: self.dt,
                    });
                }
            }
        }
        let want_dt = if send_dt { sh.workers - 1 } else { 0 };
        self.received.clear();
        self.received_dt.clear();
        let deadline = Instant::now() + sh.settings.timeout;
        while self.received.len() < self.incoming.len() || self.received_dt.len() < want_dt {
            if sh.barrier.is_aborted() {
                return Err(DecompError::Aborted);
            }
            let now = Instant::now();
            if now >= deadline {
                let missing = self
                    .incoming
                    .iter()
                    .find(|t| !self.received.iter().any(|s| s.from == t.from && s.edge == t.edge))
                    .map_or(Edge::Left, |t| t.edge);
                sh.barrier.abort();
                return Err(DecompError::Deadlock {
                    worker: self.id,
                    edge: missing,
                });
            }
            match self.inbox.recv_timeout((deadline - now).min(Duration::from_millis(20))) {
                Ok(Message::Ghost(strip)) => {
                    assert_eq!(strip.epoch, epoch, "ghost strip from another substage");
                    self.received.push(strip);
                }
                Ok(Message::Dt { epoch: e, dt, from }) => {
                    assert_eq!(e, epoch, "time step from worker {from} for another substage");
                    self.received_dt.push(dt);
                }
                Err(RecvTimeoutError::Timeout) => {}
                Err(RecvTimeoutError::Disconnected) => return Err(DecompError::Aborted),
            }
        }
        Ok(())
    }

    fn unpack(&mut self, epoch: u64, reduce_dt: bool, skip: bool) {
        if !skip {
            for strip in &self.received {
                unpack_strip(&mut self.state, strip, self.start);
                if let Some(n) = self.incoming.iter().position(|t| t.from == strip.from && t.edge == strip.edge) {
                    self.filled[n] = Some(epoch);
                }
            }
        }
        if reduce_dt {
            for &d in &self.received_dt {
                self.dt = self.dt.min(d);
            }
        }
    }

    fn check_ghosts(&self, epoch: u64) -> Result<(), DecompError> {
        for (t, filled) in self.incoming.iter().zip(&self.filled) {
            if *filled != Some(epoch) {
                return Err(self.fail(Stage::Interior, SolverError::MissingGhostData { edge: t.edge }));
            }
        }
        Ok(())
    }

    /// Residual of substage `k`, then the next stage state or the step update.
    fn interior(&mut self, sh: &Shared<'_>, k: usize) -> Result<(), DecompError> {
        let problem = sh.problem;
        let tab = &sh.settings.tableau;
        let r = interior_residual(&self.state, &self.ctx(problem), problem.limiter)
            .map_err(|e| self.fail(Stage::Interior, SolverError::Stage { stage: k, source: Box::new(e) }))?;
        let units = self.slow_units(&sh.settings.slow_interior);
        if units > 0 {
            burn(units * r.len() as u64);
        }
        self.residuals.truncate(k);
        self.residuals.push(r);
        let refs: Vec<&[Conserved]> = self.residuals.iter().map(|r| r.as_slice()).collect();
        let next = combine(&self.u_n, &self.volumes, self.dt, tab.stage_coefficients(k + 1), &refs);
        self.state.set_interior(&next);
        if k + 1 == tab.s {
            self.u_n = next;
            self.time += self.dt;
            self.dt = stable_dt(&self.state, &self.geo, sh.settings.cfl, &problem.gas)
                .map_err(|e| self.fail(Stage::Interior, e))?;
        }
        Ok(())
    }

    fn wait(&mut self, sh: &Shared<'_>, sw: &Stopwatch, stage: Stage, step: usize, k: usize, record: bool) -> Result<(), DecompError> {
        let t0 = Instant::now();
        match sh.barrier.wait() {
            Ok(()) => {}
            Err(BarrierError::Aborted) => return Err(DecompError::Aborted),
            Err(BarrierError::Timeout) => {
                return Err(DecompError::BarrierTimeout {
                    worker: self.id,
                    stage,
                })
            }
        }
        if record && sw_is_wall(sh) {
            let _ = sw;
            self.records.push(StageRecord {
                step,
                substage: k,
                worker: self.id,
                stage: Stage::Barrier,
                seconds: t0.elapsed().as_secs_f64(),
            });
        }
        Ok(())
    }

    fn run(&mut self, sh: &Shared<'_>, current: &Cell<Stage>) -> Result<(), DecompError> {
        let settings = sh.settings;
        let s = settings.tableau.s;
        let sw = Stopwatch::new(settings.clock);
        let fault = settings.fault;

        // initial ghost fill and time step
        let mut epoch = 0u64;
        current.set(Stage::Boundary);
        self.boundary(sh)?;
        self.wait(sh, &sw, Stage::Boundary, 0, 0, false)?;
        current.set(Stage::Pack);
        self.pack(epoch);
        current.set(Stage::Exchange);
        self.dt = stable_dt(&self.state, &self.geo, settings.cfl, &sh.problem.gas)
            .map_err(|e| self.fail(Stage::Interior, e))?;
        self.exchange(sh, epoch, true, false)?;
        self.wait(sh, &sw, Stage::Exchange, 0, 0, false)?;
        current.set(Stage::Unpack);
        self.unpack(epoch, true, false);
        self.wait(sh, &sw, Stage::Unpack, 0, 0, false)?;
        self.barriers_before = sh.barrier.generations();
        self.loop_start = Some(Instant::now());

        for step in 0..settings.steps {
            for k in 0..s {
                let last = k + 1 == s;
                let id = self.id;
                let hit = |stage: Stage| matches!(fault, Some(Fault::Panic { worker, step: fs, stage: st }) if worker == id && fs == step && st == stage);

                current.set(Stage::Interior);
                self.check_ghosts(epoch)?;
                if hit(Stage::Interior) {
                    panic!("injected fault");
                }
                let (res, t) = sw.time(|| self.interior(sh, k));
                res?;
                self.record(step, k, Stage::Interior, t);
                self.wait(sh, &sw, Stage::Interior, step, k, true)?;
                epoch += 1;

                current.set(Stage::Boundary);
                if hit(Stage::Boundary) {
                    panic!("injected fault");
                }
                let (res, t) = sw.time(|| self.boundary(sh));
                res?;
                self.record(step, k, Stage::Boundary, t);
                self.wait(sh, &sw, Stage::Boundary, step, k, true)?;

                current.set(Stage::Pack);
                let ((), t) = sw.time(|| self.pack(epoch));
                self.record(step, k, Stage::Pack, t);
                self.wait(sh, &sw, Stage::Pack, step, k, true)?;

                current.set(Stage::Exchange);
                let withhold = matches!(fault, Some(Fault::WithholdGhosts { worker, step: fs }) if worker == self.id && fs == step);
                let (res, t) = sw.time(|| self.exchange(sh, epoch, last, withhold));
                res?;
                self.record(step, k, Stage::Exchange, t);
                self.wait(sh, &sw, Stage::Exchange, step, k, true)?;

                current.set(Stage::Unpack);
                let skip = matches!(fault, Some(Fault::SkipUnpack { worker, step: fs }) if worker == self.id && fs == step);
                let ((), t) = sw.time(|| self.unpack(epoch, last, skip));
                self.record(step, k, Stage::Unpack, t);
                self.wait(sh, &sw, Stage::Unpack, step, k, true)?;
            }
        }
        self.loop_end = Some(Instant::now());
        self.barriers_after = sh.barrier.generations();
        Ok(())
    }

    fn record(&mut self, step: usize, substage: usize, stage: Stage, seconds: f64) {
        self.records.push(StageRecord {
            step,
            substage,
            worker: self.id,
            stage,
            seconds,
        });
    }
}

fn sw_is_wall(sh: &Shared<'_>) -> bool {
    sh.settings.clock == ClockKind::Wall
}

fn panic_message(p: &(dyn Any + Send)) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = p.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".into()
    }
}

fn local_boundaries(global: &BoundarySpec, k: usize, n: usize) -> BoundarySpec {
    BoundarySpec {
        left: if k == 0 { global.left.clone() } else { BoundaryKind::Connected(k - 1) },
        right: if k + 1 == n { global.right.clone() } else { BoundaryKind::Connected(k + 1) },
        bottom: global.bottom.clone(),
        top: global.top.clone(),
    }
}

/// March `problem` for `settings.steps` steps on the worker pool `spec`.
pub fn run_heterogeneous(problem: &FlowProblem, spec: &WorkerSpec, settings: &ExecSettings) -> Result<HeteroRun, DecompError> {
    spec.validate()?;
    if settings.cfl <= 0.0 || !settings.cfl.is_finite() {
        return Err(DecompError::InvalidSpec(format!("cfl must be positive, got {}", settings.cfl)));
    }
    let n_l = problem.ni();
    let partition = match &settings.widths {
        Some(w) => {
            let p = Partition::from_widths(w, spec)?;
            if p.n_l() != n_l {
                return Err(DecompError::InvalidSpec(format!("widths sum to {}, grid has {n_l} columns", p.n_l())));
            }
            p
        }
        None => partition_weighted(n_l, spec)?,
    };
    let n = partition.len();
    let geo = &problem.geometry;
    let blocks = scatter(&problem.initial, &partition);
    let plan = exchange_plan(&partition, geo.ghost_depth);

    let mut senders = Vec::with_capacity(n);
    let mut receivers = Vec::with_capacity(n);
    for _ in 0..n {
        let (tx, rx) = channel();
        senders.push(tx);
        receivers.push(rx);
    }
    let mut workers: Vec<Worker> = partition
        .slabs
        .iter()
        .zip(blocks)
        .zip(receivers)
        .map(|((slab, state), inbox)| {
            let g = geo.ghost_depth;
            let slab_geo = Arc::new(geo.slab(slab.start, slab.width));
            let source = problem.source.as_ref().map(|src| {
                (0..geo.nj)
                    .flat_map(|j| src[j * n_l + slab.start..j * n_l + slab.start + slab.width].iter().copied())
                    .collect()
            });
            let volumes = (g..g + geo.nj)
                .flat_map(|j| (g..g + slab.width).map(move |i| (i, j)))
                .map(|(i, j)| slab_geo.volume[slab_geo.cell(i, j)])
                .collect();
            Worker {
                id: slab.worker,
                class: slab.class,
                start: slab.start,
                bc: local_boundaries(&problem.boundary, slab.worker, n),
                source,
                volumes,
                u_n: state.interior(),
                state,
                geo: slab_geo,
                residuals: Vec::with_capacity(settings.tableau.s),
                dt: 0.0,
                time: 0.0,
                inbox,
                outbox: Vec::new(),
                received: Vec::new(),
                received_dt: Vec::new(),
                outgoing: plan.iter().filter(|t| t.from == slab.worker).cloned().collect(),
                incoming: plan.iter().filter(|t| t.to == slab.worker).cloned().collect(),
                filled: vec![None; plan.iter().filter(|t| t.to == slab.worker).count()],
                records: Vec::new(),
                loop_start: None,
                loop_end: None,
                barriers_before: 0,
                barriers_after: 0,
            }
        })
        .collect();

    let shared = Shared {
        problem,
        settings,
        barrier: StageBarrier::new(n, settings.timeout),
        senders,
        workers: n,
    };

    let results: Vec<Result<(), DecompError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = workers
            .iter_mut()
            .map(|w| {
                let sh = &shared;
                scope.spawn(move || {
                    let current = Cell::new(Stage::Interior);
                    match catch_unwind(AssertUnwindSafe(|| w.run(sh, &current))) {
                        Ok(Ok(())) => Ok(()),
                        Ok(Err(e)) => {
                            sh.barrier.abort();
                            Err(e)
                        }
                        Err(p) => {
                            sh.barrier.abort();
                            Err(DecompError::WorkerPanic {
                                worker: w.id,
                                stage: current.get(),
                                message: panic_message(p.as_ref()),
                            })
                        }
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or(Err(DecompError::Aborted))).collect()
    });
    let mut first_abort = None;
    for r in results {
        match r {
            Ok(()) => {}
            Err(DecompError::Aborted) => first_abort = Some(DecompError::Aborted),
            Err(e) => return Err(e),
        }
    }
    if let Some(e) = first_abort {
        return Err(e);
    }

    let blocks: Vec<BlockState> = workers.iter().map(|w| w.state.clone()).collect();
    let solution = gather_interior(&blocks, &partition);
    let mut records: Vec<StageRecord> = workers.iter_mut().flat_map(|w| std::mem::take(&mut w.records)).collect();
    records.sort_by_key(|r| (r.step, r.substage, r.stage, r.worker));
    if settings.clock == ClockKind::ThreadCpu {
        // each worker's virtual wait is the stage's slowest time minus its own
        let mut waits = Vec::new();
        let mut i = 0;
        while i < records.len() {
            let key = (records[i].step, records[i].substage, records[i].stage);
            let end = records[i..]
                .iter()
                .position(|r| (r.step, r.substage, r.stage) != key)
                .map_or(records.len(), |p| i + p);
            let max = records[i..end].iter().map(|r| r.seconds).fold(0.0, f64::max);
            for r in &records[i..end] {
                waits.push(StageRecord {
                    stage: Stage::Barrier,
                    seconds: max - r.seconds,
                    ..*r
                });
            }
            i = end;
        }
        records.extend(waits);
        records.sort_by_key(|r| (r.step, r.substage, r.stage, r.worker));
    }
    let timings = StageTimings { workers: n, records };
    let start = workers.iter().filter_map(|w| w.loop_start).min();
    let end = workers.iter().filter_map(|w| w.loop_end).max();
    let elapsed_s = match (start, end) {
        (Some(a), Some(b)) => b.duration_since(a).as_secs_f64(),
        _ => 0.0,
    };
    let wall_s = match settings.clock {
        ClockKind::ThreadCpu => timings.critical_path_seconds(),
        ClockKind::Wall => elapsed_s,
    };
    Ok(HeteroRun {
        partition,
        solution,
        wall_s,
        elapsed_s,
        steps: settings.steps,
        substeps: settings.steps * settings.tableau.s,
        barriers: workers[0].barriers_after - workers[0].barriers_before,
        time: workers[0].time,
        timings,
    })
}

/// Per-cell seconds (thread-CPU clock) of the interior stage on `problem`'s
/// full grid with `units` of extra work per cell; the kernel that
/// slowdown calibration times.
pub fn sample_interior_cost(problem: &FlowProblem, units: u64) -> Result<f64, SolverError> {
    let mut state = problem.initial.clone();
    apply_boundary(&mut state, &problem.geometry, &problem.boundary, &problem.gas)?;
    let ctx = ResidualContext {
        geo: &problem.geometry,
        gas: problem.gas,
        muscl: problem.muscl,
        mode: problem.mode,
        source: problem.source.as_deref(),
    };
    let cells = (problem.ni() * problem.nj()) as u64;
    let sw = Stopwatch::new(ClockKind::ThreadCpu);
    let (r, t) = sw.time(|| {
        let r = interior_residual(&state, &ctx, problem.limiter);
        burn(units * cells);
        r
    });
    r?;
    Ok(t / cells as f64)
}

/// Per-boundary-cell seconds of the boundary stage with `units` of extra
/// work per cell.
pub fn sample_boundary_cost(problem: &FlowProblem, units: u64) -> Result<f64, SolverError> {
    let mut state = problem.initial.clone();
    let cells = physical_boundary_cells(&problem.boundary, problem.ni(), problem.nj()) as u64;
    let sw = Stopwatch::new(ClockKind::ThreadCpu);
    let reps = 20;
    let (r, t) = sw.time(|| {
        for _ in 0..reps {
            apply_boundary(&mut state, &problem.geometry, &problem.boundary, &problem.gas)?;
            burn(units * cells);
        }
        Ok::<(), SolverError>(())
    });
    r?;
    Ok(t / (reps * cells) as f64)
}
