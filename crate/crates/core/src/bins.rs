//! Uniform bin grids mapping real intensities to histogram cells.

use crate::error::{Error, Result};

/// `bin_count` uniform bins over `[vmin, vmax)`.
///
/// Bin `b` has center `vmin + (b + 0.5) * spacing`. The integer preset
/// ([`BinGrid::integer`]) puts centers exactly on `0, 1, ..., L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinGrid {
    bin_count: usize,
    vmin: f64,
    vmax: f64,
    spacing: f64,
}

impl BinGrid {
    pub fn new(bin_count: usize, vmin: f64, vmax: f64) -> Result<Self> {
        if !(vmin < vmax) || !vmin.is_finite() || !vmax.is_finite() {
            return Err(Error::InvalidRange { vmin, vmax });
        }
        if bin_count < 2 {
            return Err(Error::InvalidBinCount(bin_count));
        }
        Ok(Self {
            bin_count,
            vmin,
            vmax,
            spacing: (vmax - vmin) / bin_count as f64,
        })
    }

    /// Integer intensities `0..=max_level`, one bin per level.
    pub fn integer(max_level: usize) -> Result<Self> {
        Self::new(max_level + 1, -0.5, max_level as f64 + 0.5)
    }

    /// The 256-level 8-bit preset.
    pub fn eight_bit() -> Self {
        Self::integer(255).expect("valid preset")
    }

    /// 64 bins over `[-4, 4]`, used for standard-normal noise fields.
    pub fn noise() -> Self {
        Self::new(64, -4.0, 4.0).expect("valid preset")
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn vmin(&self) -> f64 {
        self.vmin
    }

    pub fn vmax(&self) -> f64 {
        self.vmax
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn center(&self, bin: usize) -> f64 {
        self.vmin + (bin as f64 + 0.5) * self.spacing
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.bin_count).map(|b| self.center(b)).collect()
    }

    pub fn first_center(&self) -> f64 {
        self.center(0)
    }

    pub fn last_center(&self) -> f64 {
        self.center(self.bin_count - 1)
    }

    /// Index of the bin containing `x`: `floor((x - vmin) / spacing)` clamped
    /// to `[0, B - 1]`. A value on an edge between two bins lands in the upper one.
    pub fn bin_index(&self, x: f64) -> usize {
        let k = ((x - self.vmin) / self.spacing).floor();
        if k <= 0.0 {
            0
        } else if k >= (self.bin_count - 1) as f64 {
            self.bin_count - 1
        } else {
            k as usize
        }
    }

    /// Center of the bin containing `x`.
    pub fn round_to_center(&self, x: f64) -> f64 {
        self.center(self.bin_index(x))
    }

    /// Clamps `x` to the span of bin centers. Returns the clamped value and
    /// its derivative with respect to `x` (1 inside, 0 where clamped).
    pub(crate) fn clamp_to_centers(&self, x: f64) -> (f64, f64) {
        let lo = self.first_center();
        let hi = self.last_center();
        if x < lo {
            (lo, 0.0)
        } else if x > hi {
            (hi, 0.0)
        } else {
            (x, 1.0)
        }
    }
}
