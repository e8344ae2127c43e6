//! Per-worker stage timings of a run and their CSV form.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Interior,
    Boundary,
    Pack,
    Exchange,
    Unpack,
    Barrier,
}

impl Stage {
    /// The five synchronised stages of a substage, in order.
    pub const WORKFLOW: [Stage; 5] = [Stage::Interior, Stage::Boundary, Stage::Pack, Stage::Exchange, Stage::Unpack];
    pub const ALL: [Stage; 6] = [
        Stage::Interior,
        Stage::Boundary,
        Stage::Pack,
        Stage::Exchange,
        Stage::Unpack,
        Stage::Barrier,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Interior => "interior",
            Stage::Boundary => "boundary",
            Stage::Pack => "pack",
            Stage::Exchange => "exchange",
            Stage::Unpack => "unpack",
            Stage::Barrier => "barrier",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .iter()
            .copied()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown stage '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageRecord {
    pub step: usize,
    pub substage: usize,
    pub worker: usize,
    pub stage: Stage,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageTimings {
    pub workers: usize,
    pub records: Vec<StageRecord>,
}

pub const TIMINGS_HEADER: &str = "step,substage,worker,stage,seconds";

impl StageTimings {
    /// Total seconds per stage for one worker, indexed by `Stage::index`.
    pub fn worker_totals(&self, worker: usize) -> [f64; 6] {
        let mut out = [0.0; 6];
        for r in self.records.iter().filter(|r| r.worker == worker) {
            out[r.stage.index()] += r.seconds;
        }
        out
    }

    /// Sum over synchronised stages of the slowest worker's time, split by
    /// stage. The barrier entry is the mean per-worker waiting time.
    pub fn critical_path(&self) -> [f64; 6] {
        let mut out = [0.0; 6];
        let mut current: Option<(usize, usize, Stage)> = None;
        let mut stage_max = 0.0f64;
        for r in self.records.iter().filter(|r| r.stage != Stage::Barrier) {
            let key = (r.step, r.substage, r.stage);
            if current != Some(key) {
                if let Some((_, _, st)) = current {
                    out[st.index()] += stage_max;
                }
                current = Some(key);
                stage_max = 0.0;
            }
            stage_max = stage_max.max(r.seconds);
        }
        if let Some((_, _, st)) = current {
            out[st.index()] += stage_max;
        }
        let waits: f64 = self.records.iter().filter(|r| r.stage == Stage::Barrier).map(|r| r.seconds).sum();
        out[Stage::Barrier.index()] = waits / self.workers.max(1) as f64;
        out
    }

    /// Sum of the per-stage maxima: the elapsed time of a synchronised run in
    /// which every worker has its own core.
    pub fn critical_path_seconds(&self) -> f64 {
        self.critical_path()[..5].iter().sum()
    }

    pub fn substeps(&self) -> usize {
        let mut keys: Vec<(usize, usize)> = self.records.iter().map(|r| (r.step, r.substage)).collect();
        keys.dedup();
        keys.sort_unstable();
        keys.dedup();
        keys.len()
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{TIMINGS_HEADER}")?;
        for r in &self.records {
            writeln!(w, "{},{},{},{},{:.9e}", r.step, r.substage, r.worker, r.stage, r.seconds)?;
        }
        Ok(())
    }

    pub fn read_csv(r: impl BufRead) -> Result<Self, String> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == TIMINGS_HEADER => {}
            _ => return Err(format!("missing header '{TIMINGS_HEADER}'")),
        }
        let mut records = Vec::new();
        let mut workers = 0;
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(format!("line {}: expected 5 fields", n + 2));
            }
            let bad = |what: &str| format!("line {}: bad {what}", n + 2);
            let rec = StageRecord {
                step: f[0].parse().map_err(|_| bad("step"))?,
                substage: f[1].parse().map_err(|_| bad("substage"))?,
                worker: f[2].parse().map_err(|_| bad("worker"))?,
                stage: f[3].parse()?,
                seconds: f[4].parse().map_err(|_| bad("seconds"))?,
            };
            workers = workers.max(rec.worker + 1);
            records.push(rec);
        }
        Ok(Self { workers, records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(step: usize, worker: usize, stage: Stage, seconds: f64) -> StageRecord {
        StageRecord {
            step,
            substage: 0,
            worker,
            stage,
            seconds,
        }
    }

    #[test]
    fn critical_path_takes_stage_maxima() {
        let t = StageTimings {
            workers: 2,
            records: vec![
                rec(0, 0, Stage::Interior, 3.0),
                rec(0, 1, Stage::Interior, 1.0),
                rec(0, 0, Stage::Boundary, 0.5),
                rec(0, 1, Stage::Boundary, 2.0),
                rec(0, 0, Stage::Barrier, 1.5),
                rec(0, 1, Stage::Barrier, 2.0),
            ],
        };
        let cp = t.critical_path();
        assert_eq!(cp[Stage::Interior.index()], 3.0);
        assert_eq!(cp[Stage::Boundary.index()], 2.0);
        assert_eq!(cp[Stage::Barrier.index()], 1.75);
        assert_eq!(t.critical_path_seconds(), 5.0);
        // the per-substep total is at least any worker's own sum
        for w in 0..2 {
            assert!(t.critical_path_seconds() >= t.worker_totals(w)[..5].iter().sum::<f64>());
        }
    }

    #[test]
    fn csv_round_trip() {
        let t = StageTimings {
            workers: 3,
            records: vec![rec(0, 2, Stage::Exchange, 1.25e-5), rec(1, 0, Stage::Barrier, 0.0)],
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = StageTimings::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.records, t.records);
    }
}
