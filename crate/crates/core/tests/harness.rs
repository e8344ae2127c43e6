use std::fs;
use std::path::Path;

use hfv_core::harness::{calibrate, predict_files, run, sweep, verify, CaseConfig, Suite};
use hfv_core::metrics::read_records;

fn mms_config(dir: &Path) -> CaseConfig {
    let mut c: CaseConfig = "[case]\nkind = cartesian_mms\nni = 8\nnj = 8\nsteps = 5\n".parse().unwrap();
    c.output_dir = dir.to_path_buf();
    c
}

fn ramp_pool(dir: &Path) -> CaseConfig {
    let text = "
[case]
ni = 24
nj = 8
steps = 4

[workers]
G = 1
C = 2
r_gc = 2
W = 2
sweep = 4, 1, 2
";
    let mut c: CaseConfig = text.parse().unwrap();
    c.output_dir = dir.to_path_buf();
    c
}

#[test]
fn run_writes_three_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(&mms_config(dir.path())).unwrap();
    for p in [&a.records_path, &a.solution_path, &a.timings_path] {
        assert!(p.exists(), "{}", p.display());
    }
    let recs = read_records(fs::File::open(&a.records_path).unwrap()).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!((recs[0].ni, recs[0].nj, recs[0].g, recs[0].c), (8, 8, 1, 0));
    assert_eq!(recs[0].substeps, 10);
    assert!(recs[0].ssspnt > 0.0);
    let sol = fs::read_to_string(&a.solution_path).unwrap();
    assert_eq!(sol.lines().count(), 1 + 64);
    assert!(sol.starts_with("i,j,x,y,rho,u,v,p\n"));
}

#[test]
fn solution_output_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut ca = ramp_pool(a.path());
    let mut cb = ramp_pool(b.path());
    // slowdown emulation only burns time, so skip it here
    ca.workers.r_gc = 1.0;
    cb.workers.r_gc = 1.0;
    let ra = run(&ca).unwrap();
    let rb = run(&cb).unwrap();
    assert_eq!(fs::read(&ra.solution_path).unwrap(), fs::read(&rb.solution_path).unwrap());
}

#[test]
fn sweep_csv_reads_back_as_records() {
    let dir = tempfile::tempdir().unwrap();
    let report = sweep(&ramp_pool(dir.path())).unwrap();
    let ws: Vec<f64> = report.rows.iter().map(|r| r.record.w).collect();
    assert_eq!(ws, vec![1.0, 2.0, 4.0]);
    assert!(report.rows.iter().all(|r| r.error.is_none()));
    let best = report.best_record().unwrap();
    assert!(report.rows.iter().all(|r| r.record.ssspnt <= best.ssspnt));

    let text = fs::read_to_string(&report.path).unwrap();
    assert!(text.lines().next().unwrap().ends_with(",status,best"));
    assert_eq!(text.lines().filter(|l| l.ends_with(",true")).count(), 1);
    let back = read_records(text.as_bytes()).unwrap();
    assert_eq!(back.len(), 3);
    for (a, b) in back.iter().zip(&report.rows) {
        assert_eq!(a, &b.record);
    }
}

#[test]
fn calibrate_then_predict() {
    let dir = tempfile::tempdir().unwrap();
    let c = ramp_pool(dir.path());
    let (cal, runs) = calibrate(&c).unwrap();
    assert_eq!(runs.len(), 3);
    assert!(cal.params.t_i > 0.0);
    assert!(cal.params.r_gc > 1.0);
    let (report, path) = predict_files(
        &dir.path().join("calibration_runs.csv"),
        &dir.path().join("calibration.csv"),
        dir.path(),
    )
    .unwrap();
    assert!(path.exists());
    assert_eq!(report.rows.len(), 3);
    assert!(report.rows.iter().all(|r| r.predicted_s > 0.0));
}

#[test]
fn sweep_without_slow_workers_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ramp_pool(dir.path());
    c.workers.c = 0;
    assert_eq!(sweep(&c).unwrap_err().exit_code(), 2);
}

#[test]
fn quick_suites_pass() {
    let dir = tempfile::tempdir().unwrap();
    let c = CaseConfig {
        output_dir: dir.path().to_path_buf(),
        ..CaseConfig::default()
    };
    for suite in [Suite::Couette, Suite::Decomp] {
        let out = verify(suite, &c).unwrap();
        assert!(out.passed, "{out}");
    }
}

#[test]
fn single_ratio_sweep_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ramp_pool(dir.path());
    c.workers.sweep = vec![1.0];
    c.workers.repeats = 2;
    let report = sweep(&c).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.best, Some(0));
    let text = fs::read_to_string(&report.path).unwrap();
    assert_eq!(text.lines().count(), 2);
}
