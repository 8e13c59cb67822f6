//! Discrete forward diffusion and entropy-based noise matching.
//!
//! Only the forward process is modelled: `x_t = sqrt(1 - beta_t) x_{t-1} +
//! sqrt(beta_t) z` step by step, or in one jump from `x_0` via the cumulative
//! signal retention `alpha_bar_t`. The noise-matching objective compares a
//! predicted noise field against the realized one with the spatial KL
//! instead of a squared error.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::image::{validate_pair, ImageGrid};
use crate::kde::KdeJointConfig;
use crate::losses::{spatial_kl, LossReport, DEFAULT_EPS};

/// Variance schedule `beta_1..beta_T` with derived `alpha_t = 1 - beta_t`
/// and `alpha_bar_t = prod_{s <= t} alpha_s`. Timesteps are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    betas: Vec<f64>,
    alphas: Vec<f64>,
    alpha_bars: Vec<f64>,
}

impl NoiseSchedule {
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::InvalidSchedule("schedule needs at least one step".into()));
        }
        if let Some(b) = betas.iter().find(|&&b| !(b > 0.0 && b < 1.0)) {
            return Err(Error::InvalidSchedule(format!("beta {b} outside (0, 1)")));
        }
        let alphas: Vec<f64> = betas.iter().map(|b| 1.0 - b).collect();
        let alpha_bars = alphas
            .iter()
            .scan(1.0, |acc, a| {
                *acc *= a;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            betas,
            alphas,
            alpha_bars,
        })
    }

    pub fn steps(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn alpha_bars(&self) -> &[f64] {
        &self.alpha_bars
    }

    pub fn beta(&self, t: usize) -> Result<f64> {
        self.check(t)?;
        Ok(self.betas[t - 1])
    }

    pub fn alpha_bar(&self, t: usize) -> Result<f64> {
        self.check(t)?;
        Ok(self.alpha_bars[t - 1])
    }

    fn check(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.steps() {
            return Err(Error::InvalidTimestep { t, steps: self.steps() });
        }
        Ok(())
    }
}

/// `steps` betas spaced linearly from `beta_start` to `beta_end` inclusive.
pub fn make_linear_schedule(steps: usize, beta_start: f64, beta_end: f64) -> Result<NoiseSchedule> {
    if steps == 0 {
        return Err(Error::InvalidSchedule("schedule needs at least one step".into()));
    }
    if !(0.0 < beta_start && beta_start <= beta_end && beta_end < 1.0) {
        return Err(Error::InvalidSchedule(format!(
            "need 0 < beta_start <= beta_end < 1, got {beta_start}, {beta_end}"
        )));
    }
    let betas = if steps == 1 {
        vec![beta_start]
    } else {
        let span = beta_end - beta_start;
        (0..steps)
            .map(|k| beta_start + span * k as f64 / (steps - 1) as f64)
            .collect()
    };
    NoiseSchedule::new(betas)
}

// Stream ids keep step noise and marginal noise from sharing draws.
const STEP_STREAM: u64 = 0;
const MARGINAL_STREAM: u64 = 1 << 32;

/// Standard normal field shaped like `like`, from `(seed, stream)`.
fn gaussian_field(like: &ImageGrid, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..like.len()).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// One forward step `x_{t-1} -> x_t`.
pub fn forward_step(x_prev: &ImageGrid, t: usize, schedule: &NoiseSchedule, seed: u64) -> Result<ImageGrid> {
    let beta = schedule.beta(t)?;
    let z = gaussian_field(x_prev, seed, STEP_STREAM + t as u64);
    let (keep, spread) = ((1.0 - beta).sqrt(), beta.sqrt());
    x_prev.with_data(x_prev.data().iter().zip(&z).map(|(x, z)| keep * x + spread * z).collect())
}

/// Samples `x_t` directly from `x_0`; also returns the noise `z` used.
pub fn marginal_sample(x0: &ImageGrid, t: usize, schedule: &NoiseSchedule, seed: u64) -> Result<(ImageGrid, ImageGrid)> {
    let alpha_bar = schedule.alpha_bar(t)?;
    let z = gaussian_field(x0, seed, MARGINAL_STREAM + t as u64);
    let (keep, spread) = (alpha_bar.sqrt(), (1.0 - alpha_bar).sqrt());
    let xt = x0.with_data(x0.data().iter().zip(&z).map(|(x, z)| keep * x + spread * z).collect())?;
    let noise = x0.with_data(z)?;
    Ok((xt, noise))
}

/// Spatial KL from the realized noise to the predicted noise.
pub fn entropy_noise_matching(pred_noise: &ImageGrid, true_noise: &ImageGrid, cfg: &KdeJointConfig) -> Result<LossReport> {
    spatial_kl(true_noise, pred_noise, cfg, DEFAULT_EPS)
}

/// Mean squared error, the usual noise-matching baseline.
pub fn mse(a: &ImageGrid, b: &ImageGrid) -> Result<f64> {
    validate_pair(a, b)?;
    Ok(a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_schedules() {
        let s = make_linear_schedule(1, 0.1, 0.1).unwrap();
        assert_eq!(s.betas(), &[0.1]);
        assert!((s.alpha_bars()[0] - 0.9).abs() < 1e-15);
        let s = make_linear_schedule(2, 0.1, 0.1).unwrap();
        assert!((s.alpha_bar(2).unwrap() - 0.81).abs() < 1e-15);
        let s = make_linear_schedule(3, 0.1, 0.3).unwrap();
        for (a, b) in s.betas().iter().zip([0.1, 0.2, 0.3]) {
            assert!((a - b).abs() < 1e-15);
        }
        // 0.9, 0.9 * 0.8, 0.9 * 0.8 * 0.7
        for (a, b) in s.alpha_bars().iter().zip([0.9, 0.72, 0.504]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(matches!(make_linear_schedule(0, 0.1, 0.2), Err(Error::InvalidSchedule(_))));
        assert!(matches!(make_linear_schedule(3, 0.3, 0.1), Err(Error::InvalidSchedule(_))));
        assert!(matches!(make_linear_schedule(3, 0.0, 0.1), Err(Error::InvalidSchedule(_))));
        assert!(matches!(make_linear_schedule(3, 0.1, 1.0), Err(Error::InvalidSchedule(_))));
        let s = make_linear_schedule(3, 0.1, 0.3).unwrap();
        assert_eq!(s.beta(0), Err(Error::InvalidTimestep { t: 0, steps: 3 }));
        assert!(s.alpha_bar(4).is_err());
    }

    #[test]
    fn alpha_bar_recursion_is_exact() {
        let s = make_linear_schedule(100, 1e-4, 0.02).unwrap();
        for t in 1..s.steps() {
            assert_eq!(s.alpha_bars()[t], s.alpha_bars()[t - 1] * s.alphas()[t]);
            assert!(s.alpha_bars()[t] < s.alpha_bars()[t - 1]);
        }
    }

    #[test]
    fn tiny_beta_is_near_identity() {
        let s = NoiseSchedule::new(vec![1e-8]).unwrap();
        let x = ImageGrid::from_fn(16, 16, (0.0, 1.0), |r, c| ((r * 16 + c) as f64) / 255.0).unwrap();
        let y = forward_step(&x, 1, &s, 9).unwrap();
        assert!(x.data().iter().zip(y.data()).all(|(a, b)| (a - b).abs() < 1e-3));
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = make_linear_schedule(4, 0.1, 0.2).unwrap();
        let x = ImageGrid::filled(8, 8, 0.5, (0.0, 1.0)).unwrap();
        assert_eq!(forward_step(&x, 2, &s, 5).unwrap(), forward_step(&x, 2, &s, 5).unwrap());
        assert_ne!(forward_step(&x, 2, &s, 5).unwrap(), forward_step(&x, 2, &s, 6).unwrap());
        assert_eq!(marginal_sample(&x, 3, &s, 1).unwrap(), marginal_sample(&x, 3, &s, 1).unwrap());
        assert!(forward_step(&x, 5, &s, 0).is_err());
    }

    #[test]
    fn step_moments_from_zero() {
        let s = NoiseSchedule::new(vec![0.25]).unwrap();
        let x = ImageGrid::filled(250, 400, 0.0, (-4.0, 4.0)).unwrap();
        let y = forward_step(&x, 1, &s, 123).unwrap();
        let n = y.len() as f64;
        let mean = y.data().iter().sum::<f64>() / n;
        let var = y.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 3.0 * (0.25f64 / n).sqrt());
        assert!((var - 0.25).abs() < 0.05 * 0.25);
    }

    #[test]
    fn noise_matching_orders_predictions() {
        let s = make_linear_schedule(10, 0.05, 0.2).unwrap();
        let x0 = ImageGrid::from_fn(44, 44, (-4.0, 4.0), |r, c| if (r / 4 + c / 4) % 2 == 0 { 1.0 } else { -1.0 }).unwrap();
        let (_, z) = marginal_sample(&x0, 5, &s, 3).unwrap();
        let cfg = KdeJointConfig::noise();
        let exact = entropy_noise_matching(&z, &z, &cfg).unwrap().value;
        let scaled = entropy_noise_matching(&z.map(|v| 0.9 * v).unwrap(), &z, &cfg).unwrap().value;
        let zero = entropy_noise_matching(&z.map(|_| 0.0).unwrap(), &z, &cfg).unwrap().value;
        assert!(exact.abs() <= 1e-12);
        assert!(zero > scaled && scaled > 0.0);
        assert_eq!(mse(&z, &z).unwrap(), 0.0);
    }
}
