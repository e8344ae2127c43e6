//! Case configuration: `[section]` headers with `key = value` lines.
//!
//! Every key is optional and has a default, but unknown sections and keys
//! are rejected so that typos never pass silently.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use thiserror::Error;

use crate::case::{self, CaseKind, FlowProblem, LimiterKind, RampGeometry};
use crate::decomp::clock::ClockKind;
use crate::numerics::mms::ManufacturedSolution;
use crate::numerics::{BoundaryKind, BoundarySpec, FlowMode};
use crate::oracle::CouetteFlow;
use crate::state::{GasModel, Primitive};
use crate::time_integration::Scheme;

/// Environment variable that overrides `[output] dir`.
pub const OUT_DIR_ENV: &str = "HFV_OUT_DIR";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("key '{0}' must be inside a section")]
    Sectionless(String),
    #[error("unknown key '{key}' in [{section}]")]
    UnknownKey { section: String, key: String },
    #[error("[{section}] {key} = '{value}': {reason}")]
    InvalidValue {
        section: String,
        key: String,
        value: String,
        reason: String,
    },
    #[error("{0}")]
    Inconsistent(String),
}

/// Physical boundary kinds nameable in a config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryName {
    Inflow,
    Outflow,
    SlipWall,
    NoSlipWall,
}

impl FromStr for BoundaryName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inflow" => Ok(BoundaryName::Inflow),
            "outflow" => Ok(BoundaryName::Outflow),
            "slip_wall" => Ok(BoundaryName::SlipWall),
            "no_slip_wall" => Ok(BoundaryName::NoSlipWall),
            other => Err(format!("unknown boundary '{other}' (expected inflow, outflow, slip_wall or no_slip_wall)")),
        }
    }
}

impl BoundaryName {
    fn kind(self, freestream: Primitive) -> BoundaryKind {
        match self {
            BoundaryName::Inflow => BoundaryKind::SupersonicInflow(freestream),
            BoundaryName::Outflow => BoundaryKind::SupersonicOutflow,
            BoundaryName::SlipWall => BoundaryKind::SlipWall,
            BoundaryName::NoSlipWall => BoundaryKind::NoSlipAdiabaticWall,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InflowConfig {
    pub mach: f64,
    pub pressure: f64,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouetteConfig {
    pub wall_speed: f64,
    pub wall_temperature: f64,
    pub pressure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerConfig {
    pub g: usize,
    pub c: usize,
    pub r_gc: f64,
    pub w: f64,
    pub sweep: Vec<f64>,
    pub clock: ClockKind,
    /// Accepted relative miss of the emulated slowdown.
    pub tolerance: f64,
    pub timeout_s: f64,
    /// Repetitions per timed run; the fastest is kept.
    pub repeats: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub grids: Vec<usize>,
    pub shock_steps: usize,
    pub decomp_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseConfig {
    pub kind: CaseKind,
    pub ni: usize,
    pub nj: usize,
    pub mode: FlowMode,
    pub scheme: Scheme,
    pub limiter: LimiterKind,
    pub cfl: f64,
    pub steps: usize,
    pub gas: GasModel,
    pub ramp: RampGeometry,
    /// Channel length for Couette flow.
    pub length: f64,
    pub inflow: InflowConfig,
    pub couette: CouetteConfig,
    pub left: BoundaryName,
    pub right: BoundaryName,
    pub bottom: BoundaryName,
    pub top: BoundaryName,
    pub workers: WorkerConfig,
    pub output_dir: PathBuf,
    pub verify: VerifyConfig,
}

impl Default for CaseConfig {
    fn default() -> Self {
        Self {
            kind: CaseKind::RampInlet,
            ni: 120,
            nj: 40,
            mode: FlowMode::Euler,
            scheme: Scheme::Rk2,
            limiter: LimiterKind::VanAlbada,
            cfl: 0.5,
            steps: 100,
            gas: GasModel::default(),
            ramp: RampGeometry::default(),
            length: 1.0,
            inflow: InflowConfig {
                mach: 4.0,
                pressure: 12270.0,
                temperature: 217.0,
            },
            couette: CouetteConfig {
                wall_speed: 10.0,
                wall_temperature: 300.0,
                pressure: 101325.0,
            },
            left: BoundaryName::Inflow,
            right: BoundaryName::Outflow,
            bottom: BoundaryName::SlipWall,
            top: BoundaryName::Outflow,
            workers: WorkerConfig {
                g: 1,
                c: 0,
                r_gc: 1.0,
                w: 1.0,
                sweep: Vec::new(),
                clock: ClockKind::ThreadCpu,
                tolerance: 0.2,
                timeout_s: 120.0,
                repeats: 1,
            },
            output_dir: PathBuf::from("out"),
            verify: VerifyConfig {
                grids: vec![20, 40, 80],
                shock_steps: 1500,
                decomp_steps: 50,
            },
        }
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("case", &["kind", "ni", "nj", "solver", "scheme", "limiter", "cfl", "steps"]),
    ("gas", &["gamma", "r_gas", "mu", "prandtl"]),
    ("geometry", &["ramp_angle", "inlet_length", "ramp_length", "height", "length"]),
    ("inflow", &["mach", "pressure", "temperature"]),
    ("couette", &["wall_speed", "wall_temperature", "pressure"]),
    ("boundary", &["left", "right", "bottom", "top"]),
    ("workers", &["G", "C", "r_gc", "W", "sweep", "clock", "tolerance", "timeout_s", "repeats"]),
    ("output", &["dir"]),
    ("verify", &["grids", "shock_steps", "decomp_steps"]),
];

struct Table(BTreeMap<(String, String), String>);

impl Table {
    fn take<T: FromStr>(&self, section: &str, key: &str, into: &mut T) -> Result<(), ConfigError>
    where
        T::Err: ToString,
    {
        if let Some(v) = self.0.get(&(section.to_string(), key.to_string())) {
            *into = v.parse().map_err(|e: T::Err| ConfigError::InvalidValue {
                section: section.into(),
                key: key.into(),
                value: v.clone(),
                reason: e.to_string(),
            })?;
        }
        Ok(())
    }

    fn list<T: FromStr>(&self, section: &str, key: &str, into: &mut Vec<T>) -> Result<(), ConfigError>
    where
        T::Err: ToString,
    {
        if let Some(v) = self.0.get(&(section.to_string(), key.to_string())) {
            *into = v
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse().map_err(|e: T::Err| ConfigError::InvalidValue {
                        section: section.into(),
                        key: key.into(),
                        value: v.clone(),
                        reason: e.to_string(),
                    })
                })
                .collect::<Result<_, _>>()?;
        }
        Ok(())
    }

    fn has(&self, section: &str) -> bool {
        self.0.keys().any(|(s, _)| s == section)
    }
}

fn check<T: Copy + PartialOrd + std::fmt::Display>(section: &str, key: &str, value: T, ok: bool, reason: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::InvalidValue {
            section: section.into(),
            key: key.into(),
            value: value.to_string(),
            reason: reason.into(),
        })
    }
}

impl CaseConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        text.parse()
    }

    /// Output directory, with the environment override applied.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.output_dir.clone(),
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        check("case", "ni", self.ni, self.ni >= 1, "must be at least 1")?;
        check("case", "nj", self.nj, self.nj >= 1, "must be at least 1")?;
        check("case", "cfl", self.cfl, self.cfl > 0.0 && self.cfl.is_finite(), "must be positive")?;
        check("case", "steps", self.steps, self.steps >= 1, "must be at least 1")?;
        let w = &self.workers;
        check("workers", "G", w.g + w.c, w.g + w.c >= 1, "G and C cannot both be zero")?;
        check("workers", "r_gc", w.r_gc, w.r_gc >= 1.0 && w.r_gc.is_finite(), "must be at least 1")?;
        check("workers", "W", w.w, w.w > 0.0 && w.w.is_finite(), "must be positive")?;
        check("workers", "tolerance", w.tolerance, w.tolerance > 0.0, "must be positive")?;
        check("workers", "timeout_s", w.timeout_s, w.timeout_s > 0.0, "must be positive")?;
        check("workers", "repeats", w.repeats, w.repeats >= 1, "must be at least 1")?;
        for &x in &w.sweep {
            check("workers", "sweep", x, x > 0.0 && x.is_finite(), "every ratio must be positive")?;
        }
        check("verify", "grids", self.verify.grids.len(), self.verify.grids.len() >= 2, "needs at least two grids")?;
        match (self.kind, self.mode) {
            (CaseKind::CartesianMms, FlowMode::NavierStokes) => {
                return Err(ConfigError::Inconsistent("cartesian_mms has an inviscid source only; use solver = euler".into()))
            }
            (CaseKind::Couette, FlowMode::Euler) => {
                return Err(ConfigError::Inconsistent("couette needs solver = ns".into()))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn freestream(&self) -> Primitive {
        self.gas.freestream(self.inflow.mach, self.inflow.pressure, self.inflow.temperature)
    }

    /// Build the flow problem the config describes.
    pub fn problem(&self) -> Result<FlowProblem, crate::SolverError> {
        let mut problem = match self.kind {
            CaseKind::CartesianMms => case::cartesian_mms(self.ni, self.nj, self.gas, ManufacturedSolution::default())?,
            CaseKind::RampInlet => {
                let free = self.freestream();
                let bc = BoundarySpec {
                    left: self.left.kind(free),
                    right: self.right.kind(free),
                    bottom: self.bottom.kind(free),
                    top: self.top.kind(free),
                };
                case::ramp_inlet(self.ni, self.nj, self.ramp, self.gas, free, self.mode, bc)?
            }
            CaseKind::SodTube => case::sod_tube(self.ni, self.nj, self.gas)?,
            CaseKind::Couette => case::couette(
                self.ni,
                self.nj,
                self.length,
                CouetteFlow {
                    gas: self.gas,
                    height: self.ramp.height,
                    wall_speed: self.couette.wall_speed,
                    wall_temperature: self.couette.wall_temperature,
                    pressure: self.couette.pressure,
                },
            )?,
        };
        problem.limiter = self.limiter;
        problem.mode = self.mode;
        Ok(problem)
    }
}

impl FromStr for CaseConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let ini = Ini::load_from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let mut table = BTreeMap::new();
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(ConfigError::Sectionless(k.to_string()));
                }
                continue;
            };
            let Some((_, keys)) = KEYS.iter().find(|(s, _)| *s == section) else {
                return Err(ConfigError::UnknownSection(section.to_string()));
            };
            for (k, v) in props.iter() {
                if !keys.contains(&k) {
                    return Err(ConfigError::UnknownKey {
                        section: section.to_string(),
                        key: k.to_string(),
                    });
                }
                table.insert((section.to_string(), k.to_string()), v.trim().to_string());
            }
        }
        let t = Table(table);

        let mut c = CaseConfig::default();
        t.take("case", "kind", &mut c.kind)?;
        t.take("case", "ni", &mut c.ni)?;
        t.take("case", "nj", &mut c.nj)?;
        t.take("case", "solver", &mut c.mode)?;
        t.take("case", "scheme", &mut c.scheme)?;
        t.take("case", "limiter", &mut c.limiter)?;
        t.take("case", "cfl", &mut c.cfl)?;
        t.take("case", "steps", &mut c.steps)?;

        t.take("gas", "gamma", &mut c.gas.gamma)?;
        t.take("gas", "r_gas", &mut c.gas.r_gas)?;
        t.take("gas", "mu", &mut c.gas.mu)?;
        t.take("gas", "prandtl", &mut c.gas.prandtl)?;
        c.gas = c.gas.validate().map_err(|e| ConfigError::Inconsistent(format!("[gas] {e}")))?;

        t.take("geometry", "ramp_angle", &mut c.ramp.angle_deg)?;
        t.take("geometry", "inlet_length", &mut c.ramp.inlet_length)?;
        t.take("geometry", "ramp_length", &mut c.ramp.ramp_length)?;
        t.take("geometry", "height", &mut c.ramp.height)?;
        t.take("geometry", "length", &mut c.length)?;

        t.take("inflow", "mach", &mut c.inflow.mach)?;
        t.take("inflow", "pressure", &mut c.inflow.pressure)?;
        t.take("inflow", "temperature", &mut c.inflow.temperature)?;

        t.take("couette", "wall_speed", &mut c.couette.wall_speed)?;
        t.take("couette", "wall_temperature", &mut c.couette.wall_temperature)?;
        t.take("couette", "pressure", &mut c.couette.pressure)?;

        if c.mode == FlowMode::NavierStokes {
            c.bottom = BoundaryName::NoSlipWall;
        }
        if t.has("boundary") && c.kind != CaseKind::RampInlet {
            return Err(ConfigError::Inconsistent(format!(
                "[boundary] applies only to ramp_inlet; {} fixes its own boundaries",
                c.kind
            )));
        }
        t.take("boundary", "left", &mut c.left)?;
        t.take("boundary", "right", &mut c.right)?;
        t.take("boundary", "bottom", &mut c.bottom)?;
        t.take("boundary", "top", &mut c.top)?;

        t.take("workers", "G", &mut c.workers.g)?;
        t.take("workers", "C", &mut c.workers.c)?;
        t.take("workers", "r_gc", &mut c.workers.r_gc)?;
        t.take("workers", "W", &mut c.workers.w)?;
        t.list("workers", "sweep", &mut c.workers.sweep)?;
        t.take("workers", "clock", &mut c.workers.clock)?;
        t.take("workers", "tolerance", &mut c.workers.tolerance)?;
        t.take("workers", "timeout_s", &mut c.workers.timeout_s)?;
        t.take("workers", "repeats", &mut c.workers.repeats)?;

        let mut dir = String::new();
        t.take("output", "dir", &mut dir)?;
        if !dir.is_empty() {
            c.output_dir = PathBuf::from(dir);
        }

        t.list("verify", "grids", &mut c.verify.grids)?;
        t.take("verify", "shock_steps", &mut c.verify.shock_steps)?;
        t.take("verify", "decomp_steps", &mut c.verify.decomp_steps)?;

        c.validate()?;
        Ok(c)
    }
}
