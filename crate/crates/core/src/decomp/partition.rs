use super::DecompError;

/// Fast and slow worker counts, their speed ratio, and the workload ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkerSpec {
    /// `G`
    pub fast: usize,
    /// `C`
    pub slow: usize,
    pub r_gc: f64,
    /// Cells per fast worker for each cell given to a slow worker.
    pub w: f64,
}

impl WorkerSpec {
    pub fn new(fast: usize, slow: usize, r_gc: f64, w: f64) -> Result<Self, DecompError> {
        let s = Self { fast, slow, r_gc, w };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), DecompError> {
        if self.fast + self.slow == 0 {
            return Err(DecompError::InvalidSpec("need at least one worker".into()));
        }
        if !(self.r_gc >= 1.0) || !self.r_gc.is_finite() {
            return Err(DecompError::InvalidSpec(format!("r_gc must be >= 1, got {}", self.r_gc)));
        }
        if !(self.w > 0.0) || !self.w.is_finite() {
            return Err(DecompError::InvalidSpec(format!("W must be > 0, got {}", self.w)));
        }
        Ok(())
    }

    pub fn workers(&self) -> usize {
        self.fast + self.slow
    }

    pub fn class_of(&self, worker: usize) -> WorkerClass {
        if worker < self.fast {
            WorkerClass::Fast
        } else {
            WorkerClass::Slow
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkerClass {
    Fast,
    Slow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slab {
    pub worker: usize,
    pub class: WorkerClass,
    /// First interior column.
    pub start: usize,
    pub width: usize,
}

/// Contiguous slabs ordered left to right: fast workers first, then slow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub slabs: Vec<Slab>,
}

impl Partition {
    pub fn widths(&self) -> Vec<usize> {
        self.slabs.iter().map(|s| s.width).collect()
    }

    pub fn n_l(&self) -> usize {
        self.slabs.iter().map(|s| s.width).sum()
    }

    pub fn len(&self) -> usize {
        self.slabs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slabs.is_empty()
    }

    /// Slabs of explicit widths; worker classes follow `spec`.
    pub fn from_widths(widths: &[usize], spec: &WorkerSpec) -> Result<Self, DecompError> {
        if widths.len() != spec.workers() || widths.contains(&0) {
            return Err(DecompError::InvalidSpec(format!(
                "{} widths for {} workers, all must be >= 1",
                widths.len(),
                spec.workers()
            )));
        }
        let mut start = 0;
        let slabs = widths
            .iter()
            .enumerate()
            .map(|(worker, &width)| {
                let s = Slab {
                    worker,
                    class: spec.class_of(worker),
                    start,
                    width,
                };
                start += width;
                s
            })
            .collect();
        Ok(Self { slabs })
    }
}

/// Widths proportional to `W` (fast) and 1 (slow), integerised by largest
/// remainder with ties going to the leftmost slab.
pub fn partition_weighted(n_l: usize, spec: &WorkerSpec) -> Result<Partition, DecompError> {
    spec.validate()?;
    let n = spec.workers();
    if n_l < n {
        return Err(DecompError::TooFewColumns { n_l, workers: n });
    }
    let weights: Vec<f64> = (0..n)
        .map(|k| match spec.class_of(k) {
            WorkerClass::Fast => spec.w,
            WorkerClass::Slow => 1.0,
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let ideal: Vec<f64> = weights.iter().map(|w| n_l as f64 * w / total).collect();
    let mut widths: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
    let mut left = n_l - widths.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps leftmost-first among equal remainders
    order.sort_by(|&a, &b| {
        let ra = ideal[a] - ideal[a].floor();
        let rb = ideal[b] - ideal[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal)
    });
    for &k in order.iter().cycle() {
        if left == 0 {
            break;
        }
        widths[k] += 1;
        left -= 1;
    }
    while let Some(empty) = widths.iter().position(|&w| w == 0) {
        let widest = (0..n).fold(0, |best, k| if widths[k] > widths[best] { k } else { best });
        widths[widest] -= 1;
        widths[empty] += 1;
    }
    Partition::from_widths(&widths, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wide_fast_slab_with_even_slow_remainder() {
        let spec = WorkerSpec::new(1, 8, 40.0, 40.0).unwrap();
        let p = partition_weighted(96, &spec).unwrap();
        assert_eq!(p.widths(), vec![80, 2, 2, 2, 2, 2, 2, 2, 2]);
        assert_eq!(p.slabs[0].class, WorkerClass::Fast);
        assert_eq!(p.slabs[1].start, 80);
    }

    #[test]
    fn single_worker_takes_everything() {
        let spec = WorkerSpec::new(1, 0, 8.0, 3.0).unwrap();
        assert_eq!(partition_weighted(57, &spec).unwrap().widths(), vec![57]);
    }

    #[test]
    fn unit_weights_split_evenly() {
        let spec = WorkerSpec::new(2, 4, 8.0, 1.0).unwrap();
        assert_eq!(partition_weighted(120, &spec).unwrap().widths(), vec![20; 6]);
    }

    #[test]
    fn leftmost_gets_the_remainder() {
        let spec = WorkerSpec::new(0, 3, 1.0, 1.0).unwrap();
        assert_eq!(partition_weighted(10, &spec).unwrap().widths(), vec![4, 3, 3]);
    }

    #[test]
    fn huge_ratio_still_gives_every_worker_a_column() {
        let spec = WorkerSpec::new(1, 4, 8.0, 1000.0).unwrap();
        let p = partition_weighted(20, &spec).unwrap();
        assert_eq!(p.widths(), vec![16, 1, 1, 1, 1]);
    }

    #[test]
    fn errors() {
        let spec = WorkerSpec::new(1, 4, 8.0, 8.0).unwrap();
        assert!(matches!(partition_weighted(4, &spec), Err(DecompError::TooFewColumns { .. })));
        assert!(WorkerSpec::new(0, 0, 1.0, 1.0).is_err());
        assert!(WorkerSpec::new(1, 1, 0.5, 1.0).is_err());
        assert!(WorkerSpec::new(1, 1, 2.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn partitions_are_valid(g in 0usize..4, c in 0usize..9, w in 0.1f64..64.0, extra in 0usize..300) {
            prop_assume!(g + c >= 1);
            let spec = WorkerSpec::new(g, c, 8.0, w).unwrap();
            let n_l = g + c + extra;
            let p = partition_weighted(n_l, &spec).unwrap();
            prop_assert_eq!(p.n_l(), n_l);
            let mut start = 0;
            for s in &p.slabs {
                prop_assert!(s.width >= 1);
                prop_assert_eq!(s.start, start);
                start += s.width;
            }
            prop_assert_eq!(p, partition_weighted(n_l, &spec).unwrap());
        }
    }
}
