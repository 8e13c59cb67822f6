//! Sliding-window tiling for local statistics.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    /// Windows lie fully inside the image.
    None,
    /// Windows start at every stride step inside the image; samples past the
    /// border are mirrored back in.
    Reflect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowConfig {
    pub window: usize,
    pub stride: usize,
    pub padding: Padding,
}

impl WindowConfig {
    pub fn new(window: usize, stride: usize, padding: Padding) -> Result<Self> {
        if window < 3 || window.is_multiple_of(2) {
            return Err(Error::InvalidWindow(format!("window must be odd and >= 3, got {window}")));
        }
        if stride == 0 {
            return Err(Error::InvalidWindow("stride must be at least 1".into()));
        }
        Ok(Self {
            window,
            stride,
            padding,
        })
    }

    /// Checks the window against an image of the given size.
    pub fn check_fits(&self, height: usize, width: usize) -> Result<()> {
        if self.padding == Padding::None && self.window > height.min(width) {
            return Err(Error::ImageTooSmall {
                height,
                width,
                min: self.window,
            });
        }
        Ok(())
    }

    fn starts(&self, extent: usize) -> Vec<usize> {
        match self.padding {
            Padding::None => (0..=extent - self.window).step_by(self.stride).collect(),
            Padding::Reflect => (0..extent).step_by(self.stride).collect(),
        }
    }

    /// Window origins `(row, col)` in row-major order.
    pub fn origins(&self, height: usize, width: usize) -> Result<Vec<(usize, usize)>> {
        self.check_fits(height, width)?;
        let rows = self.starts(height);
        let cols = self.starts(width);
        Ok(rows
            .iter()
            .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
            .collect())
    }

    /// Flat pixel indices covered by the window at `origin`, row-major.
    pub fn pixels(&self, origin: (usize, usize), height: usize, width: usize) -> Vec<usize> {
        let (r0, c0) = origin;
        let mut out = Vec::with_capacity(self.window * self.window);
        for dr in 0..self.window {
            let r = reflect_index((r0 + dr) as isize, height);
            for dc in 0..self.window {
                let c = reflect_index((c0 + dc) as isize, width);
                out.push(r * width + c);
            }
        }
        out
    }
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            window: 11,
            stride: 11,
            padding: Padding::None,
        }
    }
}

/// Whether statistics are gathered over the whole image or per window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Global,
    Windowed(WindowConfig),
}

/// A window origin with the pixel indices it covers.
pub(crate) type Region = ((usize, usize), Vec<usize>);

impl Scope {
    /// `(origin, pixel indices)` for every region in this scope.
    pub(crate) fn regions(&self, height: usize, width: usize) -> Result<Vec<Region>> {
        match self {
            Scope::Global => Ok(vec![((0, 0), (0..height * width).collect())]),
            Scope::Windowed(cfg) => Ok(cfg
                .origins(height, width)?
                .into_iter()
                .map(|o| (o, cfg.pixels(o, height, width)))
                .collect()),
        }
    }
}

/// Mirror index without edge repeat: `-1 -> 1`, `n -> n - 2`.
pub(crate) fn reflect_index(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - m }) as usize
}
