//! Direct distribution matching: plain gradient descent on an image so that
//! its local joint statistics approach those of a target.

use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::kde::KdeJointConfig;
use crate::losses::{evaluate, shuffle_averaged_loss, LossKind, LossReport, DEFAULT_EPS};

#[derive(Debug, Clone, PartialEq)]
pub struct MatchConfig {
    pub kde: KdeJointConfig,
    pub loss: LossKind,
    pub iters: usize,
    pub learning_rate: f64,
    /// Random stencils averaged per step; 0 uses `kde.weights` as is.
    pub shuffles: usize,
    /// Step `k` draws its stencils from `seed + k`.
    pub seed: u64,
    pub eps: f64,
}

impl MatchConfig {
    pub fn new(kde: KdeJointConfig, iters: usize, learning_rate: f64) -> Self {
        Self {
            kde,
            loss: LossKind::Kl,
            iters,
            learning_rate,
            shuffles: 0,
            seed: 0,
            eps: DEFAULT_EPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchOutcome {
    pub image: ImageGrid,
    /// Loss before each of the `iters` steps, then the loss of the final image:
    /// `iters + 1` entries.
    pub losses: Vec<f64>,
}

fn loss_at(target: &ImageGrid, x: &ImageGrid, cfg: &MatchConfig, step: usize, with_gradient: bool) -> Result<LossReport> {
    if cfg.shuffles == 0 {
        evaluate(cfg.loss, target, x, &cfg.kde, cfg.eps, with_gradient)
    } else {
        let seed = cfg.seed.wrapping_add(step as u64);
        shuffle_averaged_loss(target, x, &cfg.kde, cfg.shuffles, seed, cfg.loss, cfg.eps, with_gradient)
    }
}

/// Runs `cfg.iters` steps of `x <- x - lr * grad` starting from `init`.
pub fn gradient_descent(target: &ImageGrid, init: &ImageGrid, cfg: &MatchConfig) -> Result<MatchOutcome> {
    if cfg.iters == 0 {
        return Err(Error::InvalidArgument("iters must be at least 1".into()));
    }
    if !(cfg.learning_rate > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "learning rate must be positive, got {}",
            cfg.learning_rate
        )));
    }
    cfg.kde.ensure_differentiable()?;
    let mut x = init.clone();
    let mut losses = Vec::with_capacity(cfg.iters + 1);
    for step in 0..cfg.iters {
        let report = loss_at(target, &x, cfg, step, true)?;
        losses.push(report.value);
        let grad = report.gradient.expect("gradient requested");
        let next = x
            .data()
            .iter()
            .zip(grad.data())
            .map(|(v, g)| v - cfg.learning_rate * g)
            .collect();
        x = x.with_data(next)?;
    }
    losses.push(loss_at(target, &x, cfg, cfg.iters, false)?.value);
    Ok(MatchOutcome { image: x, losses })
}
