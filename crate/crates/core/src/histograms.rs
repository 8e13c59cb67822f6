//! Hard counting histograms and their entropies.
//!
//! These are the exact, non-differentiable statistics: a pixel contributes a
//! unit count to the bin that contains it, and a spatial tuple pairs a pixel's
//! bin with the bin of its rounded neighbor mean. The KDE estimators in
//! [`crate::kde`] reduce to these under a box kernel of bandwidth one.

use crate::bins::BinGrid;
use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::pmf::{JointPmf, Pmf1D};
use crate::stencil::NeighborWeights;
use crate::window::reflect_index;

pub(crate) fn ensure_min_size(img: &ImageGrid) -> Result<()> {
    if img.height() < 3 || img.width() < 3 {
        return Err(Error::ImageTooSmall {
            height: img.height(),
            width: img.width(),
            min: 3,
        });
    }
    Ok(())
}

pub(crate) fn ensure_single_channel(img: &ImageGrid) -> Result<()> {
    if img.channels() != 1 {
        return Err(Error::InvalidArgument(format!(
            "expected a single-channel image, got {} channels",
            img.channels()
        )));
    }
    Ok(())
}

/// Weighted 8-neighbor mean of one row-major plane, reflecting at the border.
pub(crate) fn neighbor_mean_plane(plane: &[f64], height: usize, width: usize, w: &NeighborWeights) -> Vec<f64> {
    let mut out = vec![0.0; plane.len()];
    for r in 0..height {
        for c in 0..width {
            let mut acc = 0.0;
            for (dr, dc, wk) in w.neighbors() {
                let rr = reflect_index(r as isize + dr, height);
                let cc = reflect_index(c as isize + dc, width);
                acc += wk * plane[rr * width + cc];
            }
            out[r * width + c] = acc;
        }
    }
    out
}

/// Weighted mean of every pixel's 8 neighbors, with reflect padding.
///
/// With `rounding` set, each mean is snapped to the center of the bin that
/// contains it (the hard path). Without it the means stay continuous.
pub fn neighbor_mean(img: &ImageGrid, w: &NeighborWeights, rounding: Option<&BinGrid>) -> Result<ImageGrid> {
    ensure_min_size(img)?;
    let planes: Vec<Vec<f64>> = (0..img.channels())
        .map(|c| {
            let mut m = neighbor_mean_plane(img.channel(c).data(), img.height(), img.width(), w);
            if let Some(bins) = rounding {
                m.iter_mut().for_each(|v| *v = bins.round_to_center(*v));
            }
            m
        })
        .collect();
    Ok(ImageGrid::from_channels(img, &planes))
}

/// Relative frequency of each intensity bin.
pub fn hard_pmf_1d(img: &ImageGrid, bins: &BinGrid) -> Result<Pmf1D> {
    ensure_single_channel(img)?;
    let mut counts = vec![0usize; bins.bin_count()];
    for &x in img.data() {
        counts[bins.bin_index(x)] += 1;
    }
    let n = img.pixel_count() as f64;
    Ok(Pmf1D::from_raw(counts.into_iter().map(|k| k as f64 / n).collect(), *bins))
}

/// Relative frequency of `(pixel bin, rounded neighbor-mean bin)` tuples.
pub fn hard_joint_pmf(img: &ImageGrid, w: &NeighborWeights, bins: &BinGrid) -> Result<JointPmf> {
    ensure_single_channel(img)?;
    ensure_min_size(img)?;
    let b = bins.bin_count();
    let means = neighbor_mean_plane(img.data(), img.height(), img.width(), w);
    let mut counts = vec![0usize; b * b];
    for (&x, &m) in img.data().iter().zip(&means) {
        counts[bins.bin_index(x) * b + bins.bin_index(m)] += 1;
    }
    let n = img.pixel_count() as f64;
    Ok(JointPmf::from_raw(counts.into_iter().map(|k| k as f64 / n).collect(), *bins))
}

fn entropy_of(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Shannon entropy in nats, with `0 log 0 = 0`.
pub fn shannon_entropy(p: &Pmf1D) -> f64 {
    entropy_of(p.probs())
}

/// Entropy of the joint tuple distribution, in nats.
pub fn spatial_entropy(p: &JointPmf) -> f64 {
    entropy_of(p.probs())
}
