//! Seeded generators for exactly low-rank Tucker tensors.

use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result};
use crate::hosvd::{leading_left_vectors, TuckerModel};
use crate::tensor::{DenseMatrix, DenseTensor, Elementwise};

/// Column family for the generated factor matrices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorShape {
    /// Orthonormalized standard-normal columns.
    Random,
    /// The lowest-frequency sine vectors `√(2/(I+1))·sin(πk(j+1)/(I+1))`, `k = 1..=r`.
    #[default]
    Smooth,
}

/// Parameters of a synthetic Tucker tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    /// Fraction of nonzero core entries; at least one entry is kept.
    pub density: f64,
    /// Nonzero core magnitudes are drawn uniformly from `[scale, 2·scale)` with random sign.
    pub scale: f64,
    pub factors: FactorShape,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(dims: &[usize], ranks: &[usize], seed: u64) -> Self {
        Self {
            dims: dims.to_vec(),
            ranks: ranks.to_vec(),
            density: 0.1,
            scale: 1000.0,
            factors: FactorShape::Smooth,
            seed,
        }
    }

    pub fn generate(&self) -> Result<TuckerModel> {
        let order = self.dims.len();
        if self.ranks.len() != order {
            return Err(arg_err!("{} ranks for order {}", self.ranks.len(), order));
        }
        for (n, (&r, &d)) in self.ranks.iter().zip(&self.dims).enumerate() {
            if r == 0 || r > d {
                return Err(arg_err!("rank {} out of range 1..={} on mode {}", r, d, n));
            }
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(arg_err!("density {} outside (0, 1]", self.density));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(arg_err!("scale must be positive, got {}", self.scale));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut core = DenseTensor::zeros(&self.ranks)?;
        let len = core.len();
        let nnz = (libm::round(self.density * len as f64) as usize).clamp(1, len);
        for o in index::sample(&mut rng, len, nnz) {
            let magnitude = self.scale * (1.0 + rng.random::<f64>());
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            core.values_mut()[o] = sign * magnitude;
        }
        let mut factors = Vec::with_capacity(order);
        for (&d, &r) in self.dims.iter().zip(&self.ranks) {
            factors.push(match self.factors {
                FactorShape::Random => {
                    let g = DenseMatrix::from_fn(d, r, |_, _| rng.sample(StandardNormal));
                    leading_left_vectors(&g, r)?
                }
                FactorShape::Smooth => sine_basis(d, r),
            });
        }
        Ok(TuckerModel { core, factors })
    }
}

fn sine_basis(n: usize, r: usize) -> DenseMatrix {
    let h = (n + 1) as f64;
    let norm = libm::sqrt(2.0 / h);
    DenseMatrix::from_fn(n, r, |j, k| {
        norm * libm::sin(core::f64::consts::PI * (k + 1) as f64 * (j + 1) as f64 / h)
    })
}
