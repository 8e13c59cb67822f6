//! Central finite differences, used as the oracle for every analytic gradient.

use crate::error::{Error, Result};
use crate::image::{validate_pair, ImageGrid};

/// Step used when none is given. Sized for intensities on a `[0, 255]` scale.
pub const DEFAULT_STEP: f64 = 1e-3;

/// `(f(x + step e_k) - f(x - step e_k)) / (2 step)` for every data entry `k`.
pub fn finite_diff_grad<F>(f: F, x: &ImageGrid, step: f64) -> Result<ImageGrid>
where
    F: Fn(&ImageGrid) -> Result<f64>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let mut probe = x.data().to_vec();
    let mut grad = Vec::with_capacity(probe.len());
    for k in 0..probe.len() {
        let orig = probe[k];
        probe[k] = orig + step;
        let up = f(&x.with_data(probe.clone())?)?;
        probe[k] = orig - step;
        let down = f(&x.with_data(probe.clone())?)?;
        probe[k] = orig;
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFiniteData { index: k });
        }
        grad.push((up - down) / (2.0 * step));
    }
    x.with_data(grad)
}

/// Outcome of [`compare_grads`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub passed: bool,
    /// Entries outside tolerance.
    pub failures: usize,
    /// `(row, col, channel)` of the entry with the largest error relative
    /// to its tolerance.
    pub worst_location: (usize, usize, usize),
    pub worst_abs_error: f64,
    /// `|a - n| / max(|a|, |n|)` at the worst entry (0 when both are 0).
    pub worst_rel_error: f64,
}

/// Entry `k` passes iff `|a - n| <= max(abs_floor, rel_tol * max(|a|, |n|))`.
pub fn compare_grads(analytic: &ImageGrid, numeric: &ImageGrid, rel_tol: f64, abs_floor: f64) -> Result<GradCheckReport> {
    validate_pair(analytic, numeric)?;
    let mut failures = 0;
    let mut worst = (0usize, 0.0f64, 0.0f64, f64::NEG_INFINITY);
    for (k, (&a, &n)) in analytic.data().iter().zip(numeric.data()).enumerate() {
        let err = (a - n).abs();
        let scale = a.abs().max(n.abs());
        let allowed = abs_floor.max(rel_tol * scale);
        if err > allowed {
            failures += 1;
        }
        let badness = if allowed > 0.0 { err / allowed } else if err > 0.0 { f64::INFINITY } else { 0.0 };
        if badness > worst.3 {
            let rel = if scale > 0.0 { err / scale } else { 0.0 };
            worst = (k, err, rel, badness);
        }
    }
    let channels = analytic.channels();
    let pixel = worst.0 / channels;
    Ok(GradCheckReport {
        passed: failures == 0,
        failures,
        worst_location: (pixel / analytic.width(), pixel % analytic.width(), worst.0 % channels),
        worst_abs_error: worst.1,
        worst_rel_error: worst.2,
    })
}
