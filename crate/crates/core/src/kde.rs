//! Kernel density estimates of the intensity and spatial-tuple PMFs.
//!
//! The 1D estimate sums a kernel bump per pixel, evaluated at every bin
//! center:
//!
//! ```text
//! raw_i = 1 / (N h) * sum_x K((x - c_i) / h)
//! ```
//!
//! The joint estimate pairs each pixel value `x` with its weighted neighbor
//! mean `m` and takes a product of two kernels:
//!
//! ```text
//! raw_ij = 2 / (N h) * sum_x K1((x - c_i) / h) * K2((m - c_j) / h)
//! ```
//!
//! Both are renormalized to sum to one unless raw output is requested. Values
//! outside the bin grid are clamped to the outermost bin center first.
//!
//! The joint accumulation is separable: per pixel only the handful of bins
//! inside each kernel's truncation support are nonzero, so the work is an
//! outer product of two short vectors rather than a scan over all `B^2` cells.

use rayon::prelude::*;

use crate::bins::BinGrid;
use crate::error::{Error, Result};
use crate::histograms::{ensure_min_size, ensure_single_channel, neighbor_mean_plane};
use crate::image::ImageGrid;
use crate::kernel::KernelSpec;
use crate::pmf::{JointPmf, Pmf1D};
use crate::stencil::NeighborWeights;
use crate::window::{Scope, WindowConfig};

/// Everything needed to turn an image into joint PMFs.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeJointConfig {
    /// Kernel on the pixel-value axis.
    pub kernel1: KernelSpec,
    /// Kernel on the neighbor-mean axis.
    pub kernel2: KernelSpec,
    pub bins: BinGrid,
    pub weights: NeighborWeights,
    pub scope: Scope,
    /// Divide by the grid total so the result sums to one.
    pub normalize: bool,
}

impl KdeJointConfig {
    /// Same kernel on both axes, uniform stencil, normalized.
    pub fn new(kernel: KernelSpec, bins: BinGrid, scope: Scope) -> Self {
        Self {
            kernel1: kernel,
            kernel2: kernel,
            bins,
            weights: NeighborWeights::uniform(),
            scope,
            normalize: true,
        }
    }

    /// 8-bit images: 256 integer bins, gaussian `h = 1`, 11x11 windows at stride 11.
    pub fn eight_bit() -> Self {
        Self::new(
            KernelSpec::gaussian(1.0).expect("valid kernel"),
            BinGrid::eight_bit(),
            Scope::Windowed(WindowConfig::default()),
        )
    }

    /// Standard-normal noise fields: 64 bins over `[-4, 4]`, gaussian with a
    /// bandwidth of one bin width, 11x11 windows at stride 11.
    pub fn noise() -> Self {
        let bins = BinGrid::noise();
        Self::new(
            KernelSpec::gaussian(bins.spacing()).expect("valid kernel"),
            bins,
            Scope::Windowed(WindowConfig::default()),
        )
    }

    pub fn with_scope(mut self, scope: Scope) -> Self {
        self.scope = scope;
        self
    }

    pub fn with_weights(mut self, weights: NeighborWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub(crate) fn ensure_differentiable(&self) -> Result<()> {
        self.kernel1.ensure_differentiable()?;
        self.kernel2.ensure_differentiable()
    }
}

/// Per-pixel inputs to the joint estimate for one image plane: clamped
/// values and clamped neighbor means, with the clamp derivatives.
pub(crate) struct PlaneSamples {
    pub values: Vec<f64>,
    pub value_slopes: Vec<f64>,
    pub means: Vec<f64>,
    pub mean_slopes: Vec<f64>,
}

impl PlaneSamples {
    pub(crate) fn new(plane: &[f64], height: usize, width: usize, cfg: &KdeJointConfig) -> Self {
        let raw_means = neighbor_mean_plane(plane, height, width, &cfg.weights);
        let (values, value_slopes) = plane.iter().map(|&x| cfg.bins.clamp_to_centers(x)).unzip();
        let (means, mean_slopes) = raw_means.iter().map(|&m| cfg.bins.clamp_to_centers(m)).unzip();
        Self {
            values,
            value_slopes,
            means,
            mean_slopes,
        }
    }
}

pub(crate) fn joint_prefactor(cfg: &KdeJointConfig, n: usize) -> f64 {
    2.0 / (n as f64 * cfg.kernel1.bandwidth())
}

/// Unnormalized joint estimate over the pixels `region`.
pub(crate) fn accumulate_joint(samples: &PlaneSamples, region: &[usize], cfg: &KdeJointConfig) -> Vec<f64> {
    let b = cfg.bins.bin_count();
    let mut raw = vec![0.0; b * b];
    let mut r1 = Vec::new();
    let mut r2 = Vec::new();
    for &p in region {
        cfg.kernel1.respond(samples.values[p], &cfg.bins, &mut r1, None);
        cfg.kernel2.respond(samples.means[p], &cfg.bins, &mut r2, None);
        for &(i, k1) in &r1 {
            let row = &mut raw[i * b..(i + 1) * b];
            for &(j, k2) in &r2 {
                row[j] += k1 * k2;
            }
        }
    }
    let scale = joint_prefactor(cfg, region.len());
    raw.iter_mut().for_each(|v| *v *= scale);
    raw
}

pub(crate) fn normalize_in_place(raw: &mut [f64]) -> Result<f64> {
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegeneratePmf);
    }
    raw.iter_mut().for_each(|v| *v /= total);
    Ok(total)
}

/// 1D KDE of the pixel intensities.
pub fn kde_pmf_1d(img: &ImageGrid, k: &KernelSpec, bins: &BinGrid, normalize: bool) -> Result<Pmf1D> {
    ensure_single_channel(img)?;
    let mut raw = vec![0.0; bins.bin_count()];
    let mut resp = Vec::new();
    for &x in img.data() {
        let (x, _) = bins.clamp_to_centers(x);
        k.respond(x, bins, &mut resp, None);
        for &(b, v) in &resp {
            raw[b] += v;
        }
    }
    let scale = 1.0 / (img.pixel_count() as f64 * k.bandwidth());
    raw.iter_mut().for_each(|v| *v *= scale);
    if normalize {
        normalize_in_place(&mut raw)?;
    } else if raw.iter().sum::<f64>() <= 0.0 {
        return Err(Error::DegeneratePmf);
    }
    Ok(Pmf1D::from_raw(raw, *bins))
}

fn finish_joint(mut raw: Vec<f64>, cfg: &KdeJointConfig) -> Result<JointPmf> {
    if cfg.normalize {
        normalize_in_place(&mut raw)?;
    } else if raw.iter().sum::<f64>() <= 0.0 {
        return Err(Error::DegeneratePmf);
    }
    Ok(JointPmf::from_raw(raw, cfg.bins))
}

/// Joint KDE of `(pixel, neighbor mean)` over the whole image.
///
/// `cfg.scope` is ignored here; see [`windowed_joint_pmfs`] for local PMFs.
pub fn kde_joint_pmf(img: &ImageGrid, cfg: &KdeJointConfig) -> Result<JointPmf> {
    ensure_single_channel(img)?;
    ensure_min_size(img)?;
    let samples = PlaneSamples::new(img.data(), img.height(), img.width(), cfg);
    let region: Vec<usize> = (0..img.pixel_count()).collect();
    finish_joint(accumulate_joint(&samples, &region, cfg), cfg)
}

/// One joint PMF per window of `cfg.scope`, keyed by window origin.
///
/// Neighbor means are taken from the full image, so pixels on a window edge
/// still see their true neighbors. Each window normalizes by its own pixel
/// count. A global scope yields a single entry at origin `(0, 0)`.
pub fn windowed_joint_pmfs(img: &ImageGrid, cfg: &KdeJointConfig) -> Result<Vec<((usize, usize), JointPmf)>> {
    ensure_single_channel(img)?;
    ensure_min_size(img)?;
    let samples = PlaneSamples::new(img.data(), img.height(), img.width(), cfg);
    let regions = cfg.scope.regions(img.height(), img.width())?;
    regions
        .par_iter()
        .map(|(origin, pixels)| Ok((*origin, finish_joint(accumulate_joint(&samples, pixels, cfg), cfg)?)))
        .collect()
}
