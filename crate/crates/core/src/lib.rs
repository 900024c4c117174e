//! Discrete laboratory for multilinear restricted weak-type weighted
//! inequalities.
//!
//! Everything here works on uniform dyadic grids over the unit cube in one or
//! two dimensions. Functions are cell-wise constant, so Lorentz quasi-norms,
//! maximal functions and weight characteristics reduce to finite sums and
//! finite suprema that can be evaluated exactly (up to floating point).
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the experiment
//! runner and the command line live in the `extrapolab` companion crate.
//!
//! Module map:
//!
//! - [`grid`]: grids, grid functions, weights, dyadic and shifted cube
//!   families, integration and level sets.
//! - [`lorentz`]: weak and Lorentz quasi-norms, restricted norms on cubes and
//!   the dyadic band decomposition of weak norms.
//! - [`maximal`]: weighted, plain and multilinear maximal operators and the
//!   Rubio de Francia iteration.
//! - [`weights`]: exponent bookkeeping, weight characteristics and weight
//!   generators.
//! - [`extrapolation`]: executable versions of the off-diagonal extrapolation
//!   argument, the structure theorem for restricted vector weights and the
//!   endpoint checks.
//! - [`applications`]: the bilinear operator `N`, its square root `T`, layer
//!   decompositions and the one-variable operator `N*`.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod applications;
pub mod error;
pub mod extrapolation;
pub mod grid;
pub mod lorentz;
pub mod maximal;
mod math;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{
    CellBox, ConstantEstimate, CubeFamily, DyadicCube, FamilySpec, Grid, GridFunction, Weight,
};
pub use lorentz::LorentzIndex;
pub use maximal::MaximalConfig;
pub use weights::{ExponentSystem, WeightKind, WeightVector};
