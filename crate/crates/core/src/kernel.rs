//! Smoothing kernels that replace the counting indicator of a hard histogram.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::bins::BinGrid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// `1/2 * 1{|t| < 1}`, the hard indicator itself.
    Box,
    /// Standard normal density.
    Gaussian,
    /// Derivative of the logistic function, `s(t) * (1 - s(t))`.
    SigmoidDerivative,
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Box => "box",
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::SigmoidDerivative => "sigmoid",
        }
    }

    /// Truncation radius (in units of the bandwidth) used when none is given.
    pub fn default_truncation(&self) -> f64 {
        match self {
            KernelFamily::Box => 1.0,
            KernelFamily::Gaussian => 4.0,
            KernelFamily::SigmoidDerivative => 8.0,
        }
    }

    pub fn is_differentiable(&self) -> bool {
        !matches!(self, KernelFamily::Box)
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "box" => Ok(KernelFamily::Box),
            "gaussian" => Ok(KernelFamily::Gaussian),
            "sigmoid" | "sigmoid_derivative" => Ok(KernelFamily::SigmoidDerivative),
            other => Err(Error::InvalidKernel(format!("unknown kernel family `{other}`"))),
        }
    }
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// A kernel family together with its bandwidth `h` and truncation radius `r`.
///
/// The kernel is evaluated on the scaled offset `t = (x - center) / h` and is
/// zero for `|t| > r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    bandwidth: f64,
    truncation_radius: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, bandwidth: f64, truncation_radius: f64) -> Result<Self> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::InvalidKernel(format!("bandwidth must be positive, got {bandwidth}")));
        }
        if !(truncation_radius > 0.0) {
            return Err(Error::InvalidKernel(format!(
                "truncation radius must be positive, got {truncation_radius}"
            )));
        }
        Ok(Self {
            family,
            bandwidth,
            truncation_radius,
        })
    }

    /// Kernel with the family's default truncation radius.
    pub fn with_bandwidth(family: KernelFamily, bandwidth: f64) -> Result<Self> {
        Self::new(family, bandwidth, family.default_truncation())
    }

    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        Self::with_bandwidth(KernelFamily::Gaussian, bandwidth)
    }

    pub fn box_kernel(bandwidth: f64) -> Result<Self> {
        Self::with_bandwidth(KernelFamily::Box, bandwidth)
    }

    pub fn sigmoid_derivative(bandwidth: f64) -> Result<Self> {
        Self::with_bandwidth(KernelFamily::SigmoidDerivative, bandwidth)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    /// `K(t)`, zero outside the truncation radius.
    pub fn value(&self, t: f64) -> f64 {
        if t.abs() > self.truncation_radius {
            return 0.0;
        }
        match self.family {
            KernelFamily::Box => {
                if t.abs() < 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
            KernelFamily::Gaussian => (-0.5 * t * t).exp() / (2.0 * PI).sqrt(),
            KernelFamily::SigmoidDerivative => {
                let s = logistic(t);
                s * (1.0 - s)
            }
        }
    }

    /// `dK/dt`, zero outside the truncation radius.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        if t.abs() > self.truncation_radius {
            return match self.family {
                KernelFamily::Box => Err(Error::NonDifferentiableKernel("box")),
                _ => Ok(0.0),
            };
        }
        match self.family {
            KernelFamily::Box => Err(Error::NonDifferentiableKernel("box")),
            KernelFamily::Gaussian => Ok(-t * self.value(t)),
            KernelFamily::SigmoidDerivative => {
                let s = logistic(t);
                Ok(s * (1.0 - s) * (1.0 - 2.0 * s))
            }
        }
    }

    pub(crate) fn ensure_differentiable(&self) -> Result<()> {
        if self.family.is_differentiable() {
            Ok(())
        } else {
            Err(Error::NonDifferentiableKernel(self.family.name()))
        }
    }

    /// Nonzero kernel responses of value `x` against the bin centers.
    ///
    /// Fills `out` with `(bin, K((x - c_bin) / h))` for every bin inside the
    /// truncation support, and, when `deriv` is given, the matching
    /// `dK/dx = K'(t) / h` values.
    pub(crate) fn respond(
        &self,
        x: f64,
        bins: &BinGrid,
        out: &mut Vec<(usize, f64)>,
        mut deriv: Option<&mut Vec<f64>>,
    ) {
        out.clear();
        if let Some(d) = deriv.as_deref_mut() {
            d.clear();
        }
        let h = self.bandwidth;
        let reach = self.truncation_radius * h;
        let first = bins.first_center();
        let step = bins.spacing();
        let last = bins.bin_count() as f64 - 1.0;
        // One bin of slack either side; `value` applies the exact cut.
        let lo = (((x - reach - first) / step).floor() - 1.0).clamp(0.0, last) as usize;
        let hi = (((x + reach - first) / step).ceil() + 1.0).clamp(0.0, last) as usize;
        for b in lo..=hi {
            let t = (x - bins.center(b)) / h;
            let k = self.value(t);
            if k > 0.0 {
                out.push((b, k));
                if let Some(d) = deriv.as_deref_mut() {
                    // Box never reaches here with `deriv` set.
                    d.push(self.derivative(t).unwrap_or(0.0) / h);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let b = KernelSpec::box_kernel(1.0).unwrap();
        let g = KernelSpec::gaussian(1.0).unwrap();
        assert_eq!(b.value(0.0), 0.5);
        assert_eq!(b.value(1.0), 0.0);
        assert!((g.value(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        // exp(-1/2) / sqrt(2 pi), evaluated independently.
        assert!((g.value(1.0) - 0.241_970_724_519_143_37).abs() < 1e-15);
        assert_eq!(g.derivative(0.0).unwrap(), 0.0);
        assert!((g.derivative(1.0).unwrap() + 0.241_970_724_519_143_37).abs() < 1e-15);
        assert_eq!(b.derivative(0.3), Err(Error::NonDifferentiableKernel("box")));
        let s = KernelSpec::sigmoid_derivative(1.0).unwrap();
        assert_eq!(s.value(0.0), 0.25);
        assert_eq!(s.derivative(0.0).unwrap(), 0.0);
    }

    #[test]
    fn truncation_zeroes_tails() {
        let g = KernelSpec::gaussian(1.0).unwrap();
        assert!(g.value(4.0) > 0.0);
        assert_eq!(g.value(4.0001), 0.0);
        assert_eq!(g.derivative(-5.0).unwrap(), 0.0);
    }

    #[test]
    fn kernels_integrate_to_one() {
        for family in [KernelFamily::Box, KernelFamily::Gaussian, KernelFamily::SigmoidDerivative] {
            let k = KernelSpec::new(family, 1.0, 60.0).unwrap();
            let dt = 1e-3;
            let total: f64 = (-60_000..60_000).map(|i| k.value((i as f64 + 0.5) * dt) * dt).sum();
            assert!((total - 1.0).abs() < 1e-6, "{family}: {total}");
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for k in [KernelSpec::gaussian(1.0).unwrap(), KernelSpec::sigmoid_derivative(1.0).unwrap()] {
            for &t in &[-3.1, -0.7, 0.2, 1.5, 2.9] {
                let d = 1e-6;
                let fd = (k.value(t + d) - k.value(t - d)) / (2.0 * d);
                assert!((k.derivative(t).unwrap() - fd).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn respond_matches_dense_scan() {
        let bins = BinGrid::new(40, -2.0, 6.0).unwrap();
        let k = KernelSpec::gaussian(0.37).unwrap();
        let mut out = Vec::new();
        for &x in &[-2.5, -1.9, 0.0, 1.234, 5.9, 7.0] {
            k.respond(x, &bins, &mut out, None);
            let dense: Vec<(usize, f64)> = (0..bins.bin_count())
                .map(|b| (b, k.value((x - bins.center(b)) / 0.37)))
                .filter(|&(_, v)| v > 0.0)
                .collect();
            assert_eq!(out, dense);
        }
    }

    #[test]
    fn parse_family() {
        assert_eq!("sigmoid".parse::<KernelFamily>().unwrap(), KernelFamily::SigmoidDerivative);
        assert!("triangle".parse::<KernelFamily>().is_err());
    }
}
