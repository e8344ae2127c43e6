//! Time sources for stage timing.

use std::str::FromStr;
use std::time::Instant;

/// `ThreadCpu` measures only the calling thread's own work, so workers that
/// share cores still see their solo cost; `Wall` is elapsed real time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockKind {
    ThreadCpu,
    Wall,
}

impl FromStr for ClockKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "thread_cpu" => Ok(ClockKind::ThreadCpu),
            "wall" => Ok(ClockKind::Wall),
            other => Err(format!("unknown clock '{other}' (expected thread_cpu or wall)")),
        }
    }
}

impl ClockKind {
    pub fn name(self) -> &'static str {
        match self {
            ClockKind::ThreadCpu => "thread_cpu",
            ClockKind::Wall => "wall",
        }
    }
}

/// CPU time consumed by the calling thread, in seconds.
pub fn thread_cpu_seconds() -> f64 {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid out-pointer and the clock id is a constant.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    assert_eq!(rc, 0, "CLOCK_THREAD_CPUTIME_ID unavailable");
    ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9
}

/// A stopwatch reading one clock.
#[derive(Debug, Clone, Copy)]
pub struct Stopwatch {
    kind: ClockKind,
    origin: Instant,
}

impl Stopwatch {
    pub fn new(kind: ClockKind) -> Self {
        Self {
            kind,
            origin: Instant::now(),
        }
    }

    pub fn now(&self) -> f64 {
        match self.kind {
            ClockKind::ThreadCpu => thread_cpu_seconds(),
            ClockKind::Wall => self.origin.elapsed().as_secs_f64(),
        }
    }

    /// Run `f` and return its result with the elapsed time.
    pub fn time<T>(&self, f: impl FnOnce() -> T) -> (T, f64) {
        let t0 = self.now();
        let out = f();
        (out, (self.now() - t0).max(0.0))
    }
}
