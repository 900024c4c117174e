//! Weight characteristics, exponent bookkeeping and test weight generators.
//!
//! Characteristics are suprema over a [`CubeFamily`](crate::grid::CubeFamily)
//! and come back as [`ConstantEstimate`](crate::grid::ConstantEstimate)s that
//! keep the maximizing cube.

mod characteristics;
mod exponents;
mod generators;

use alloc::vec::Vec;

pub use characteristics::{
    a1_constant, ainf_constant, apr_constant, apr_r1_constant, apvec_constant,
    composite_class_check, hat_ar_construct, hat_arq_construct, restricted_one_weight_constant,
    weak_holder_constant, CompositeClassReport,
};
pub use exponents::ExponentSystem;
pub(crate) use characteristics::{normalized_weak, A1Integrand, AprIntegrand};
pub use generators::{cube_at, generate, generate_vector, WeightKind};

use crate::error::Result;
use crate::grid::{same_grid, Grid, Weight};

/// `(w₁, …, w_m)` on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<Weight>,
}

impl WeightVector {
    pub fn new(weights: Vec<Weight>) -> Result<Self> {
        let Some(first) = weights.first() else {
            return Err(crate::error::param("empty weight vector"));
        };
        let grid = *first.grid();
        for w in &weights {
            same_grid(&grid, w.grid())?;
        }
        Ok(WeightVector { weights })
    }

    pub fn ones(grid: Grid, m: usize) -> Self {
        WeightVector { weights: (0..m).map(|_| Weight::ones(grid)).collect() }
    }

    pub fn grid(&self) -> &Grid {
        self.weights[0].grid()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<Weight> {
        self.weights
    }

    /// `w = ∏ wᵢ^{p/pᵢ}`.
    pub fn composite(&self, sys: &ExponentSystem) -> Result<Weight> {
        sys.composite(&self.weights)
    }

    /// `μ = (∏_{i<m} wᵢ^{1/pᵢ})^ϱ`.
    pub fn mu(&self, sys: &ExponentSystem) -> Result<Weight> {
        sys.mu(&self.weights)
    }

    /// Each weight multiplied by its own constant.
    pub fn scaled(&self, c: &[f64]) -> Result<Self> {
        if c.len() != self.len() {
            return Err(crate::Error::LengthMismatch { expected: self.len(), got: c.len() });
        }
        let weights = self.weights.iter().zip(c).map(|(w, &ci)| w.scale(ci)).collect::<Result<_>>()?;
        Ok(WeightVector { weights })
    }
}
