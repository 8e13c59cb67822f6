//! 3x3 neighbor-weight stencils and the random reweighting augmentation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Row/column offsets of the 8 neighbors, in stencil (row-major) order with
/// the center skipped.
pub(crate) const NEIGHBOR_OFFSETS: [(isize, isize, usize); 8] = [
    (-1, -1, 0),
    (-1, 0, 1),
    (-1, 1, 2),
    (0, -1, 3),
    (0, 1, 5),
    (1, -1, 6),
    (1, 0, 7),
    (1, 1, 8),
];

/// A 3x3 stencil over a pixel's neighbors: zero center, non-negative entries
/// summing to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborWeights {
    weights: [f64; 9],
    seed: Option<u64>,
}

impl NeighborWeights {
    /// Validates a row-major 3x3 stencil.
    pub fn new(weights: [f64; 9]) -> Result<Self> {
        if weights[4] != 0.0 {
            return Err(Error::InvalidWeights("center weight must be zero".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidWeights("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { weights, seed: None })
    }

    /// Each of the 8 neighbors weighted `1/8`.
    pub fn uniform() -> Self {
        let mut weights = [0.125; 9];
        weights[4] = 0.0;
        Self { weights, seed: None }
    }

    pub fn weights(&self) -> &[f64; 9] {
        &self.weights
    }

    /// Seed that produced this stencil, for shuffled stencils.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub(crate) fn neighbors(&self) -> impl Iterator<Item = (isize, isize, f64)> + '_ {
        NEIGHBOR_OFFSETS
            .iter()
            .map(move |&(dr, dc, k)| (dr, dc, self.weights[k]))
    }
}

impl Default for NeighborWeights {
    fn default() -> Self {
        Self::uniform()
    }
}

/// Draws `count` random stencils for neighborhood augmentation.
///
/// Each stencil multiplies the base neighbor weights by i.i.d. `U(0, 1)`
/// draws and renormalizes, so a uniform base yields plain uniform random
/// weights. The output depends only on `(base, count, seed)`.
pub fn shuffled_weights(base: &NeighborWeights, count: usize, seed: u64) -> Result<Vec<NeighborWeights>> {
    if count == 0 {
        return Err(Error::InvalidArgument("shuffle count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut weights = [0.0; 9];
        for &(_, _, k) in &NEIGHBOR_OFFSETS {
            weights[k] = base.weights[k] * rng.random::<f64>();
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            continue;
        }
        weights.iter_mut().for_each(|w| *w /= total);
        out.push(NeighborWeights {
            weights,
            seed: Some(seed),
        });
    }
    Ok(out)
}
