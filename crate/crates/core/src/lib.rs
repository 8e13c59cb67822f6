//! Differentiable spatial entropy for images.
//!
//! A spatial histogram counts `(pixel value, neighbor mean)` tuples. Replacing
//! the counting indicator with a smooth kernel turns it into a kernel density
//! estimate whose cells are differentiable functions of the pixels, so
//! divergences between the spatial statistics of two images can be minimized
//! by gradient descent.
//!
//! * [`histograms`]: exact counting PMFs and entropies.
//! * [`kde`]: kernel estimates of the same PMFs, global or per window.
//! * [`losses`]: spatial KL, cross-entropy and Hellinger, with gradients.
//! * [`gradcheck`]: finite-difference oracle for those gradients.
//! * [`diffusion`]: forward diffusion and entropy-based noise matching.
//! * [`matching`]: gradient descent on an image toward a target's statistics.
//!
//! ```
//! use spatial_entropy::{ImageGrid, KdeJointConfig, Scope};
//! use spatial_entropy::losses::{spatial_kl_grad, DEFAULT_EPS};
//!
//! let target = ImageGrid::from_fn(16, 16, (0.0, 255.0), |r, c| (8 * r + 4 * c) as f64)?;
//! let pred = ImageGrid::filled(16, 16, 128.0, (0.0, 255.0))?;
//! let cfg = KdeJointConfig::eight_bit().with_scope(Scope::Global);
//! let report = spatial_kl_grad(&target, &pred, &cfg, DEFAULT_EPS)?;
//! assert!(report.value > 0.0);
//! assert_eq!(report.gradient.unwrap().len(), 256);
//! # Ok::<(), spatial_entropy::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bins;
pub mod diffusion;
pub mod error;
pub mod gradcheck;
pub mod histograms;
pub mod image;
pub mod kde;
pub mod kernel;
pub mod losses;
pub mod matching;
pub mod pmf;
pub mod stencil;
pub mod window;

pub use bins::BinGrid;
pub use error::{Error, Result};
pub use image::{validate_pair, ImageGrid};
pub use kde::KdeJointConfig;
pub use kernel::{KernelFamily, KernelSpec};
pub use losses::{LossKind, LossReport};
pub use pmf::{JointPmf, Pmf1D};
pub use stencil::{shuffled_weights, NeighborWeights};
pub use window::{Padding, Scope, WindowConfig};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/bins-and-kernels.md")]
    mod bins_and_kernels {}
    #[doc = include_str!("../../../book/src/histograms.md")]
    mod histograms {}
    #[doc = include_str!("../../../book/src/kde.md")]
    mod kde {}
    #[doc = include_str!("../../../book/src/losses.md")]
    mod losses {}
    #[doc = include_str!("../../../book/src/gradients.md")]
    mod gradients {}
    #[doc = include_str!("../../../book/src/matching.md")]
    mod matching {}
    #[doc = include_str!("../../../book/src/diffusion.md")]
    mod diffusion {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
