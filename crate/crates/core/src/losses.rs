//! Distribution-matching losses between the joint PMFs of a target and a
//! prediction, with analytic gradients with respect to the prediction.
//!
//! Per region (the whole image, or each window), `P` is estimated from the
//! target and `Q` from the prediction, then compared:
//!
//! * spatial KL: `sum p * ln((p + eps) / (q + eps))`, terms with `p = 0` dropped
//! * cross-entropy: `-sum p * ln(q + eps)`
//! * Hellinger: `1/2 * sum (sqrt(p) - sqrt(q))^2`
//!
//! Region values are averaged; channels are treated independently and
//! averaged too.
//!
//! # Gradient
//!
//! With `g = dL/dq` per cell and `q = raw / Z`, the derivative with respect to
//! an unnormalized cell is `(g_b - sum_c g_c q_c) / Z`. That projection term
//! is easy to forget and without it the gradient is wrong whenever the total
//! kernel mass moves. From the raw cells the chain continues through
//! `K1'` at each pixel's own value and through `K2'` at the neighbor mean of
//! every pixel it is a neighbor of, scaled by its stencil weight. The target
//! PMF is held constant.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{validate_pair, ImageGrid};
use crate::kde::{accumulate_joint, joint_prefactor, normalize_in_place, KdeJointConfig, PlaneSamples};
use crate::stencil::shuffled_weights;
use crate::window::reflect_index;

/// Default smoothing added inside the KL and cross-entropy logarithms.
pub const DEFAULT_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Kl,
    CrossEntropy,
    Hellinger,
}

impl LossKind {
    pub fn name(&self) -> &'static str {
        match self {
            LossKind::Kl => "kl",
            LossKind::CrossEntropy => "ce",
            LossKind::Hellinger => "hellinger",
        }
    }

    /// Loss between two PMFs given as flat cell arrays.
    pub fn divergence(&self, p: &[f64], q: &[f64], eps: f64) -> f64 {
        debug_assert_eq!(p.len(), q.len());
        let pairs = p.iter().zip(q);
        match self {
            LossKind::Kl => pairs
                .filter(|(&p, _)| p > 0.0)
                .map(|(&p, &q)| p * ((p + eps).ln() - (q + eps).ln()))
                .sum(),
            LossKind::CrossEntropy => -pairs
                .filter(|(&p, _)| p > 0.0)
                .map(|(&p, &q)| p * (q + eps).ln())
                .sum::<f64>(),
            LossKind::Hellinger => 0.5 * pairs.map(|(&p, &q)| (p.sqrt() - q.sqrt()).powi(2)).sum::<f64>(),
        }
    }

    /// `dL/dq` per cell.
    ///
    /// For Hellinger the derivative is unbounded where `q = 0 < p`; those
    /// cells get 0, which is exact whenever no pixel's kernel reaches them.
    fn q_gradient(&self, p: &[f64], q: &[f64], eps: f64) -> Vec<f64> {
        let pairs = p.iter().zip(q);
        match self {
            LossKind::Kl | LossKind::CrossEntropy => pairs
                .map(|(&p, &q)| if p > 0.0 { -p / (q + eps) } else { 0.0 })
                .collect(),
            LossKind::Hellinger => pairs
                .map(|(&p, &q)| if q > 0.0 { 0.5 * (1.0 - (p / q).sqrt()) } else { 0.0 })
                .collect(),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kl" => Ok(LossKind::Kl),
            "ce" | "cross-entropy" | "cross_entropy" => Ok(LossKind::CrossEntropy),
            "hellinger" => Ok(LossKind::Hellinger),
            other => Err(Error::InvalidArgument(format!("unknown loss `{other}`"))),
        }
    }
}

/// Result of a loss evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    /// Mean over regions (and channels).
    pub value: f64,
    /// Per-window values for windowed scopes, keyed by window origin.
    pub per_window: Option<Vec<((usize, usize), f64)>>,
    /// `dvalue / dpred`, same shape as the prediction.
    pub gradient: Option<ImageGrid>,
}

/// Entropy with the same smoothing the KL and cross-entropy use:
/// `-sum p ln(p + eps)`. With it, `CE = H + KL` holds exactly.
pub fn smoothed_entropy(p: &[f64], eps: f64) -> f64 {
    -p.iter().filter(|&&p| p > 0.0).map(|&p| p * (p + eps).ln()).sum::<f64>()
}

struct RegionTerm {
    value: f64,
    grad: Vec<(usize, f64)>,
}

#[allow(clippy::too_many_arguments)]
fn region_term(
    kind: LossKind,
    target: &PlaneSamples,
    pred: &PlaneSamples,
    region: &[usize],
    (height, width): (usize, usize),
    cfg: &KdeJointConfig,
    eps: f64,
    with_gradient: bool,
) -> Result<RegionTerm> {
    let mut p = accumulate_joint(target, region, cfg);
    let mut q = accumulate_joint(pred, region, cfg);
    let total = if cfg.normalize {
        normalize_in_place(&mut p)?;
        normalize_in_place(&mut q)?
    } else {
        if p.iter().sum::<f64>() <= 0.0 || q.iter().sum::<f64>() <= 0.0 {
            return Err(Error::DegeneratePmf);
        }
        1.0
    };
    let value = kind.divergence(&p, &q, eps);
    if !with_gradient {
        return Ok(RegionTerm {
            value,
            grad: Vec::new(),
        });
    }

    let mut g = kind.q_gradient(&p, &q, eps);
    if cfg.normalize {
        // `mass` is 1 up to rounding; scaling by it makes a constant `g`
        // project to exactly zero.
        let mass: f64 = q.iter().sum();
        let coupling: f64 = g.iter().zip(&q).map(|(g, q)| g * q).sum();
        g.iter_mut().for_each(|v| *v = (*v * mass - coupling) / total);
    }

    let b = cfg.bins.bin_count();
    let scale = joint_prefactor(cfg, region.len());
    let (mut r1, mut d1, mut r2, mut d2) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut grad = Vec::with_capacity(region.len() * 9);
    for &px in region {
        cfg.kernel1.respond(pred.values[px], &cfg.bins, &mut r1, Some(&mut d1));
        cfg.kernel2.respond(pred.means[px], &cfg.bins, &mut r2, Some(&mut d2));
        let (mut d_value, mut d_mean) = (0.0, 0.0);
        for (&(i, k1), &dk1) in r1.iter().zip(&d1) {
            let row = &g[i * b..(i + 1) * b];
            let (mut with_k2, mut with_dk2) = (0.0, 0.0);
            for (&(j, k2), &dk2) in r2.iter().zip(&d2) {
                with_k2 += row[j] * k2;
                with_dk2 += row[j] * dk2;
            }
            d_value += dk1 * with_k2;
            d_mean += k1 * with_dk2;
        }
        grad.push((px, scale * d_value * pred.value_slopes[px]));
        let d_mean = scale * d_mean * pred.mean_slopes[px];
        if d_mean != 0.0 {
            let (r, c) = ((px / width) as isize, (px % width) as isize);
            for (dr, dc, wk) in cfg.weights.neighbors() {
                if wk != 0.0 {
                    let nb = reflect_index(r + dr, height) * width + reflect_index(c + dc, width);
                    grad.push((nb, d_mean * wk));
                }
            }
        }
    }
    Ok(RegionTerm { value, grad })
}

/// Evaluates `kind` between target and prediction, optionally with the
/// gradient with respect to the prediction.
pub fn evaluate(
    kind: LossKind,
    target: &ImageGrid,
    pred: &ImageGrid,
    cfg: &KdeJointConfig,
    eps: f64,
    with_gradient: bool,
) -> Result<LossReport> {
    validate_pair(target, pred)?;
    crate::histograms::ensure_min_size(pred)?;
    if !(eps > 0.0) && kind != LossKind::Hellinger {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if with_gradient {
        cfg.ensure_differentiable()?;
    }
    let (height, width) = (pred.height(), pred.width());
    let regions = cfg.scope.regions(height, width)?;
    let channels = pred.channels();

    let mut window_sums = vec![0.0; regions.len()];
    let mut planes = Vec::with_capacity(channels);
    for ch in 0..channels {
        let t = PlaneSamples::new(target.channel(ch).data(), height, width, cfg);
        let p = PlaneSamples::new(pred.channel(ch).data(), height, width, cfg);
        let terms: Vec<RegionTerm> = regions
            .par_iter()
            .map(|(_, region)| region_term(kind, &t, &p, region, (height, width), cfg, eps, with_gradient))
            .collect::<Result<_>>()?;
        let mut plane = vec![0.0; height * width];
        for (k, term) in terms.iter().enumerate() {
            window_sums[k] += term.value;
            for &(px, v) in &term.grad {
                plane[px] += v;
            }
        }
        let norm = (regions.len() * channels) as f64;
        plane.iter_mut().for_each(|v| *v /= norm);
        planes.push(plane);
    }

    let per_window: Vec<((usize, usize), f64)> = regions
        .iter()
        .zip(&window_sums)
        .map(|((origin, _), s)| (*origin, s / channels as f64))
        .collect();
    let value = per_window.iter().map(|(_, v)| v).sum::<f64>() / per_window.len() as f64;
    let gradient = if with_gradient {
        let grad = ImageGrid::from_channels(&pred.zeros_like(), &planes);
        grad.ensure_finite()?;
        Some(grad)
    } else {
        None
    };
    Ok(LossReport {
        value,
        per_window: matches!(cfg.scope, crate::window::Scope::Windowed(_)).then_some(per_window),
        gradient,
    })
}

/// Spatial relative entropy `KL(P || Q)`, `P` from the target.
pub fn spatial_kl(target: &ImageGrid, pred: &ImageGrid, cfg: &KdeJointConfig, eps: f64) -> Result<LossReport> {
    evaluate(LossKind::Kl, target, pred, cfg, eps, false)
}

/// [`spatial_kl`] together with its gradient with respect to `pred`.
pub fn spatial_kl_grad(target: &ImageGrid, pred: &ImageGrid, cfg: &KdeJointConfig, eps: f64) -> Result<LossReport> {
    evaluate(LossKind::Kl, target, pred, cfg, eps, true)
}

pub fn spatial_cross_entropy(target: &ImageGrid, pred: &ImageGrid, cfg: &KdeJointConfig, eps: f64) -> Result<LossReport> {
    evaluate(LossKind::CrossEntropy, target, pred, cfg, eps, false)
}

/// Squared Hellinger distance, in `[0, 1]` and symmetric.
pub fn spatial_hellinger(target: &ImageGrid, pred: &ImageGrid, cfg: &KdeJointConfig) -> Result<LossReport> {
    evaluate(LossKind::Hellinger, target, pred, cfg, DEFAULT_EPS, false)
}

/// Mean of `kind` over `count` randomly reweighted neighbor stencils drawn
/// from `seed` (see [`shuffled_weights`]).
#[allow(clippy::too_many_arguments)]
pub fn shuffle_averaged_loss(
    target: &ImageGrid,
    pred: &ImageGrid,
    cfg: &KdeJointConfig,
    count: usize,
    seed: u64,
    kind: LossKind,
    eps: f64,
    with_gradient: bool,
) -> Result<LossReport> {
    let stencils = shuffled_weights(&cfg.weights, count, seed)?;
    let reports = stencils
        .into_iter()
        .map(|w| evaluate(kind, target, pred, &cfg.clone().with_weights(w), eps, with_gradient))
        .collect::<Result<Vec<_>>>()?;
    let n = reports.len() as f64;
    let value = reports.iter().map(|r| r.value).sum::<f64>() / n;
    let per_window = reports[0].per_window.as_ref().map(|first| {
        first
            .iter()
            .enumerate()
            .map(|(k, (origin, _))| {
                let s: f64 = reports.iter().map(|r| r.per_window.as_ref().unwrap()[k].1).sum();
                (*origin, s / n)
            })
            .collect()
    });
    let gradient = if with_gradient {
        let mut acc = vec![0.0; pred.len()];
        for r in &reports {
            for (a, g) in acc.iter_mut().zip(r.gradient.as_ref().unwrap().data()) {
                *a += g;
            }
        }
        acc.iter_mut().for_each(|v| *v /= n);
        Some(pred.zeros_like().with_data(acc)?)
    } else {
        None
    };
    Ok(LossReport {
        value,
        per_window,
        gradient,
    })
}
