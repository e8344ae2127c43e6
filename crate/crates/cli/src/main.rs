use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hfv_core::harness::{self, CaseConfig, ConfigError, HarnessError, Suite, OUT_DIR_ENV};

/// Heterogeneous-worker finite-volume solver.
#[derive(Parser)]
#[command(name = "hfv", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// March one configured case and write records, solution and timings.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// One run per workload ratio in `[workers] sweep`.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Reference runs and fitted model parameters.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare measured runs with the calibrated model.
    Predict {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        calib: PathBuf,
    },
    /// Run a verification suite: mms, shock, couette, decomp or all.
    Verify {
        #[arg(long)]
        suite: String,
        /// Defaults apply without a config.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<CaseConfig, HarnessError> {
    Ok(CaseConfig::from_path(path)?)
}

fn show_written(paths: &[&Path]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

/// Ok(false) means the command ran but reported a failure.
fn execute(cli: Cli) -> Result<bool, HarnessError> {
    match cli.command {
        Command::Run { config } => {
            let a = harness::run(&load(&config)?)?;
            let r = &a.record;
            println!(
                "{} {}x{} G={} C={} W={}: {} steps, wall {:.6} s, ssspnt {:.6}",
                r.case, r.ni, r.nj, r.g, r.c, r.w, r.steps, r.wall_s, r.ssspnt
            );
            show_written(&[&a.records_path, &a.solution_path, &a.timings_path]);
        }
        Command::Sweep { config } => {
            let report = harness::sweep(&load(&config)?)?;
            println!("W,ssspnt,wall_s,status");
            for (n, row) in report.rows.iter().enumerate() {
                let mark = if report.best == Some(n) { " <- best" } else { "" };
                match &row.error {
                    None => println!("{},{:.6},{:.6},ok{mark}", row.record.w, row.record.ssspnt, row.record.wall_s),
                    Some(e) => println!("{},,,failed: {e}", row.record.w),
                }
            }
            show_written(&[&report.path]);
        }
        Command::Calibrate { config } => {
            let (cal, _) = harness::calibrate(&load(&config)?)?;
            for e in &cal.entries {
                print!("{} = {:.6e} (from {})", e.param, e.value, e.source_run);
                if e.warning.is_empty() {
                    println!();
                } else {
                    println!("  warning: {}", e.warning);
                }
            }
        }
        Command::Predict { records, calib } => {
            let out = match std::env::var_os(OUT_DIR_ENV) {
                Some(d) => PathBuf::from(d),
                None => records.parent().map(Path::to_path_buf).unwrap_or_default(),
            };
            let (report, path) = harness::predict_files(&records, &calib, &out)?;
            for r in &report.rows {
                println!(
                    "{} {}x{} G={} C={} W={}: measured {:.4e} s, predicted {:.4e} s, error {:+.1}%{}",
                    r.case,
                    r.ni,
                    r.nj,
                    r.g,
                    r.c,
                    r.w,
                    r.measured_s,
                    r.predicted_s,
                    100.0 * r.rel_error,
                    if r.underestimates { " (underestimates overhead)" } else { "" }
                );
            }
            println!("max error {:.1}%, mean error {:.1}%", 100.0 * report.max_error, 100.0 * report.mean_error);
            show_written(&[&path]);
        }
        Command::Verify { suite, config } => {
            let suites = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![suite.parse::<Suite>().map_err(ConfigError::Inconsistent)?]
            };
            let config = match config {
                Some(p) => load(&p)?,
                None => CaseConfig::default(),
            };
            let mut all = true;
            for s in suites {
                let out = harness::verify(s, &config)?;
                println!("{out}");
                for (k, v) in &out.details {
                    println!("  {k} = {v}");
                }
                all &= out.passed;
            }
            return Ok(all);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
