//! The image container every PMF and gradient is taken over.

use crate::error::{Error, Result};

/// A dense `height x width x channels` grid of real intensities.
///
/// Data is stored row-major with channels interleaved, so the value of
/// channel `c` at `(row, col)` lives at `(row * width + col) * channels + c`.
///
/// `value_range` is metadata describing the nominal intensity range. Values
/// are allowed to stray outside it (optimisation iterates do); binning clamps.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
    value_range: (f64, f64),
}

impl ImageGrid {
    pub fn new(
        height: usize,
        width: usize,
        channels: usize,
        data: Vec<f64>,
        value_range: (f64, f64),
    ) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 || data.len() != height * width * channels {
            return Err(Error::InvalidShape {
                height,
                width,
                channels,
                len: data.len(),
            });
        }
        let (vmin, vmax) = value_range;
        if !(vmin < vmax) || !vmin.is_finite() || !vmax.is_finite() {
            return Err(Error::InvalidRange { vmin, vmax });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteData { index });
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
            value_range,
        })
    }

    /// Single-channel grid.
    pub fn gray(height: usize, width: usize, data: Vec<f64>, value_range: (f64, f64)) -> Result<Self> {
        Self::new(height, width, 1, data, value_range)
    }

    /// Single-channel grid on the 8-bit range `[0, 255]`.
    pub fn gray8(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        Self::gray(height, width, data, (0.0, 255.0))
    }

    pub fn filled(height: usize, width: usize, value: f64, value_range: (f64, f64)) -> Result<Self> {
        Self::gray(height, width, vec![value; height * width], value_range)
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        value_range: (f64, f64),
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::gray(height, width, data, value_range)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn value_range(&self) -> (f64, f64) {
        self.value_range
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn index(&self, row: usize, col: usize, channel: usize) -> usize {
        (row * self.width + col) * self.channels + channel
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[self.index(row, col, channel)]
    }

    /// Copy of one channel as a single-channel grid.
    pub fn channel(&self, channel: usize) -> ImageGrid {
        assert!(channel < self.channels, "channel {channel} out of range");
        let data = self
            .data
            .iter()
            .skip(channel)
            .step_by(self.channels)
            .copied()
            .collect();
        ImageGrid {
            height: self.height,
            width: self.width,
            channels: 1,
            data,
            value_range: self.value_range,
        }
    }

    /// Same shape and range with new data. Fails on length mismatch or
    /// non-finite values.
    pub fn with_data(&self, data: Vec<f64>) -> Result<ImageGrid> {
        ImageGrid::new(self.height, self.width, self.channels, data, self.value_range)
    }

    pub fn with_value_range(mut self, value_range: (f64, f64)) -> Result<ImageGrid> {
        let (vmin, vmax) = value_range;
        if !(vmin < vmax) {
            return Err(Error::InvalidRange { vmin, vmax });
        }
        self.value_range = value_range;
        Ok(self)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ImageGrid> {
        self.with_data(self.data.iter().map(|&v| f(v)).collect())
    }

    /// Same shape, all zeros. Used as a gradient buffer.
    pub(crate) fn zeros_like(&self) -> ImageGrid {
        ImageGrid {
            data: vec![0.0; self.data.len()],
            ..self.clone()
        }
    }

    #[cfg(test)]
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub(crate) fn from_channels(template: &ImageGrid, planes: &[Vec<f64>]) -> ImageGrid {
        debug_assert_eq!(planes.len(), template.channels);
        let mut data = vec![0.0; template.data.len()];
        for (c, plane) in planes.iter().enumerate() {
            for (p, &v) in plane.iter().enumerate() {
                data[p * template.channels + c] = v;
            }
        }
        ImageGrid {
            data,
            ..template.clone()
        }
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFiniteData { index }),
            None => Ok(()),
        }
    }
}

/// Checks that two grids can be compared: same height, width, channel count
/// and value range, and finite data on both sides.
pub fn validate_pair(a: &ImageGrid, b: &ImageGrid) -> Result<()> {
    a.ensure_finite()?;
    b.ensure_finite()?;
    let mismatch = |field, left: &dyn std::fmt::Debug, right: &dyn std::fmt::Debug| {
        Err(Error::DimensionMismatch {
            field,
            left: format!("{left:?}"),
            right: format!("{right:?}"),
        })
    };
    if a.height != b.height {
        return mismatch("height", &a.height, &b.height);
    }
    if a.width != b.width {
        return mismatch("width", &a.width, &b.width);
    }
    if a.channels != b.channels {
        return mismatch("channels", &a.channels, &b.channels);
    }
    if a.value_range != b.value_range {
        return mismatch("value_range", &a.value_range, &b.value_range);
    }
    Ok(())
}
