//! Probability mass functions over a bin grid.

use crate::bins::BinGrid;

/// PMF over the `B` bins of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf1D {
    probs: Vec<f64>,
    bins: BinGrid,
}

impl Pmf1D {
    pub(crate) fn from_raw(probs: Vec<f64>, bins: BinGrid) -> Self {
        debug_assert_eq!(probs.len(), bins.bin_count());
        Self { probs, bins }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn bins(&self) -> &BinGrid {
        &self.bins
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn argmax(&self) -> usize {
        argmax(&self.probs)
    }
}

/// Joint PMF over `(pixel bin i, neighbor-mean bin j)` tuples, stored
/// row-major as a `B x B` grid indexed `[i * B + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    probs: Vec<f64>,
    bins: BinGrid,
}

impl JointPmf {
    pub(crate) fn from_raw(probs: Vec<f64>, bins: BinGrid) -> Self {
        debug_assert_eq!(probs.len(), bins.bin_count() * bins.bin_count());
        Self { probs, bins }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn bins(&self) -> &BinGrid {
        &self.bins
    }

    pub fn bin_count(&self) -> usize {
        self.bins.bin_count()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.bins.bin_count() + j]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Marginal over the neighbor axis, i.e. the 1D pixel-value PMF.
    pub fn marginal(&self) -> Pmf1D {
        let b = self.bin_count();
        let probs = self.probs.chunks(b).map(|row| row.iter().sum()).collect();
        Pmf1D::from_raw(probs, self.bins)
    }

    /// `(i, j)` of the largest cell.
    pub fn argmax(&self) -> (usize, usize) {
        let k = argmax(&self.probs);
        (k / self.bin_count(), k % self.bin_count())
    }
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
        .0
}
