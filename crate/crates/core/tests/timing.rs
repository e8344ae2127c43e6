//! Measured-timing properties of the emulated heterogeneous pool. These run
//! real timed kernels, so they compare medians or minima of repeated runs.

use std::sync::{Mutex, MutexGuard};

use hfv_core::decomp::exec::sample_interior_cost;
use hfv_core::decomp::WorkerSpec;
use hfv_core::harness::{calibrate_slowdowns, execute, predict_report, sweep, CaseConfig, Slowdowns};
use hfv_core::metrics::RunRecord;
use hfv_core::perf_model::calibrate;

// timed tests share one core; run them one at a time
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn config(dir: &std::path::Path, sweep: &str) -> CaseConfig {
    let text = format!(
        "[case]\nni = 480\nnj = 40\nsteps = 10\n[workers]\nG = 1\nC = 4\nr_gc = 8\nW = 8\nrepeats = 3\nsweep = {sweep}\n"
    );
    let mut c: CaseConfig = text.parse().unwrap();
    c.output_dir = dir.to_path_buf();
    c
}

fn min_of(n: usize, mut f: impl FnMut() -> f64) -> f64 {
    (0..n).map(|_| f()).fold(f64::INFINITY, f64::min)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn emulated_slowdown_hits_target_and_scales_linearly() {
    let _guard = serial();
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "8");
    let problem = c.problem().unwrap();
    let slow = calibrate_slowdowns(&problem, 8.0, 0.2).unwrap();
    let units = slow.interior.units_per_cell;

    let base = min_of(5, || sample_interior_cost(&problem, 0).unwrap());
    let once = min_of(5, || sample_interior_cost(&problem, units).unwrap());
    let twice = min_of(5, || sample_interior_cost(&problem, 2 * units).unwrap());
    let ratio = once / base;
    assert!((6.4..=9.6).contains(&ratio), "measured slowdown {ratio}");
    let growth = (twice - base) / (once - base);
    assert!((growth - 2.0).abs() <= 0.25 * 2.0, "doubling work grew the added time by {growth}");
}

#[test]
fn sweep_rises_then_falls_and_large_ratio_nears_pure_fast() {
    let _guard = serial();
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "1, 2, 4, 8, 16, 32");
    let report = sweep(&c).unwrap();
    let s: Vec<f64> = report.rows.iter().map(|r| r.record.ssspnt).collect();
    let best = report.best.unwrap();
    assert!(best > 0 && best + 1 < s.len(), "no interior maximum in {s:?}");
    assert!(s[0] < s[best] && s[s.len() - 1] < s[best], "{s:?}");

    // the slow workers' contribution becomes negligible at large W
    let problem = c.problem().unwrap();
    let mut once = c.clone();
    once.workers.repeats = 1;
    let fast = WorkerSpec::new(1, 0, 8.0, 1.0).unwrap();
    let lopsided = WorkerSpec::new(1, 4, 8.0, 256.0).unwrap();
    let ratios: Vec<f64> = (0..7)
        .map(|_| {
            let a = execute(&once, &problem, &fast, &report.slowdowns).unwrap().0;
            let b = execute(&once, &problem, &lopsided, &report.slowdowns).unwrap().0;
            b.ssspnt / a.ssspnt
        })
        .collect();
    let r = median(ratios);
    assert!((r - 1.0).abs() <= 0.10, "W = 256 over pure fast: {r}");
}

#[test]
fn model_predicts_balanced_desk_runs() {
    let _guard = serial();
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "8");
    let problem = c.problem().unwrap();
    let slow = calibrate_slowdowns(&problem, 8.0, 0.2).unwrap();
    let pools = [(0, 1), (1, 0), (1, 1), (1, 2), (1, 4)];
    let records: Vec<RunRecord> = pools
        .iter()
        .map(|&(g, n)| {
            let spec = WorkerSpec::new(g, n, 8.0, 8.0).unwrap();
            let s = if n == 0 { Slowdowns::none() } else { slow };
            execute(&c, &problem, &spec, &s).unwrap().0
        })
        .collect();
    let cal = calibrate(&records).unwrap();
    let report = predict_report(&records, &cal).unwrap();
    for r in &report.rows {
        println!("G={} C={}: measured {:.4e} predicted {:.4e} ({:+.1}%)", r.g, r.c, r.measured_s, r.predicted_s, 100.0 * r.rel_error);
    }
    assert!(report.mean_error <= 0.20, "mean relative error {}", report.mean_error);
}
