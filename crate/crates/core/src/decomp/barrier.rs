//! A reusable barrier that can be aborted and that gives up after a timeout.

use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierError {
    Aborted,
    Timeout,
}

#[derive(Debug)]
struct Inner {
    arrived: usize,
    generation: u64,
    aborted: bool,
}

#[derive(Debug)]
pub struct StageBarrier {
    parties: usize,
    timeout: Duration,
    inner: Mutex<Inner>,
    cv: Condvar,
}

impl StageBarrier {
    pub fn new(parties: usize, timeout: Duration) -> Self {
        assert!(parties >= 1);
        Self {
            parties,
            timeout,
            inner: Mutex::new(Inner {
                arrived: 0,
                generation: 0,
                aborted: false,
            }),
            cv: Condvar::new(),
        }
    }

    /// Block until all parties arrive.
    pub fn wait(&self) -> Result<(), BarrierError> {
        let mut g = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        if g.aborted {
            return Err(BarrierError::Aborted);
        }
        let gen = g.generation;
        g.arrived += 1;
        if g.arrived == self.parties {
            g.arrived = 0;
            g.generation += 1;
            self.cv.notify_all();
            return Ok(());
        }
        let deadline = Instant::now() + self.timeout;
        loop {
            let now = Instant::now();
            if now >= deadline {
                g.aborted = true;
                self.cv.notify_all();
                return Err(BarrierError::Timeout);
            }
            let (next, _) = self
                .cv
                .wait_timeout(g, deadline - now)
                .unwrap_or_else(|e| e.into_inner());
            g = next;
            if g.generation != gen {
                return Ok(());
            }
            if g.aborted {
                return Err(BarrierError::Aborted);
            }
        }
    }

    /// Release every waiter with `Aborted`, now and for all later waits.
    pub fn abort(&self) {
        let mut g = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        g.aborted = true;
        self.cv.notify_all();
    }

    pub fn is_aborted(&self) -> bool {
        self.inner.lock().unwrap_or_else(|e| e.into_inner()).aborted
    }

    /// Number of completed barrier generations.
    pub fn generations(&self) -> u64 {
        self.inner.lock().unwrap_or_else(|e| e.into_inner()).generation
    }
}
