//! Emulated slow workers: calibrated redundant arithmetic per cell.

use std::hint::black_box;

use super::DecompError;

/// `units` dependent fused multiply-adds that the optimiser cannot remove.
#[inline(never)]
pub fn burn(units: u64) {
    let mut x = black_box(1.0f64);
    let a = black_box(0.999_999_9f64);
    let b = black_box(1e-7f64);
    for _ in 0..units {
        x = x.mul_add(a, b);
    }
    black_box(x);
}

/// Extra work per cell that makes a slow worker's per-cell time `ratio`
/// times a fast worker's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowdownCalibration {
    pub target: f64,
    pub units_per_cell: u64,
    /// Measured slow/fast per-cell time ratio at `units_per_cell`.
    pub measured: f64,
    /// Fast per-cell time of the sample kernel (s).
    pub fast_cell_seconds: f64,
}

impl SlowdownCalibration {
    pub fn none() -> Self {
        Self {
            target: 1.0,
            units_per_cell: 0,
            measured: 1.0,
            fast_cell_seconds: 0.0,
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

/// Find the added units per cell so that `sample(units)` (per-cell seconds
/// of the kernel plus that much burn) is `target` times `sample(0)`.
/// Accepts measurements within `tolerance` (relative) of the target.
pub fn calibrate_slowdown<F>(target: f64, tolerance: f64, mut sample: F) -> Result<SlowdownCalibration, DecompError>
where
    F: FnMut(u64) -> f64,
{
    if !(target >= 1.0) || !target.is_finite() {
        return Err(DecompError::InvalidSpec(format!("r_gc must be >= 1, got {target}")));
    }
    let repeats = 5;
    let mut measure = |units: u64| median((0..repeats).map(|_| sample(units)).collect());
    let base = measure(0);
    if target == 1.0 {
        return Ok(SlowdownCalibration {
            target,
            units_per_cell: 0,
            measured: 1.0,
            fast_cell_seconds: base,
        });
    }
    let probe: u64 = 1 << 20;
    let unit_cost = median(
        (0..repeats)
            .map(|_| {
                let t0 = super::clock::thread_cpu_seconds();
                burn(probe);
                (super::clock::thread_cpu_seconds() - t0) / probe as f64
            })
            .collect(),
    )
    .max(1e-12);
    let mut units = (((target - 1.0) * base / unit_cost).round() as u64).max(1);
    let mut measured = f64::NAN;
    for _ in 0..6 {
        measured = measure(units) / base;
        if (measured / target - 1.0).abs() <= tolerance * 0.5 {
            break;
        }
        let scale = (target - 1.0) / (measured - 1.0).max(1e-3);
        units = ((units as f64 * scale).round() as u64).max(1);
    }
    if (measured / target - 1.0).abs() > tolerance {
        return Err(DecompError::Calibration { target, measured });
    }
    Ok(SlowdownCalibration {
        target,
        units_per_cell: units,
        measured,
        fast_cell_seconds: base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ratio_adds_nothing() {
        let c = calibrate_slowdown(1.0, 0.2, |_| 1e-6).unwrap();
        assert_eq!(c.units_per_cell, 0);
    }

    #[test]
    fn rejects_sub_unit_ratio() {
        assert!(calibrate_slowdown(0.5, 0.2, |_| 1e-6).is_err());
    }

    #[test]
    fn converges_on_a_synthetic_linear_kernel() {
        // a fake clock: per-cell time is 1 us plus 2 ns per unit
        let c = calibrate_slowdown(8.0, 0.2, |u| 1e-6 + 2e-9 * u as f64).unwrap();
        assert!((c.measured - 8.0).abs() < 0.8, "{c:?}");
    }

    #[test]
    fn impossible_kernel_reports_measurement() {
        // extra work has no effect
        let err = calibrate_slowdown(8.0, 0.2, |_| 1e-6).unwrap_err();
        assert!(matches!(err, DecompError::Calibration { measured, .. } if (measured - 1.0).abs() < 1e-12));
    }
}
