//! Coherent states of the Klein-Gordon field in dimensionless units.
//!
//! Momenta are measured in `mc`, lengths in Compton wavelengths `ħ/mc`,
//! times in `ħ/mc²` and energies in `mc²`.
//!
//! * [`freefield`]: charged packets in 1+1 dimensions.
//! * [`neutral`]: real fields built from charge-parity pairs.
//! * [`magnetic`]: packets in a constant uniform magnetic field, summed over
//!   Landau levels.
//! * [`classical`]: the classical trajectories used to scale every output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod cli;
pub mod error;
pub mod freefield;
pub mod magnetic;
pub mod neutral;
pub mod output;
pub mod quadrature;
pub mod reference;
pub mod specfun;
pub mod validate;

pub use error::{Error, Result};
pub use num_complex::Complex64;
