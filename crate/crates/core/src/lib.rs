//! Existence, fold detection and spectral stability of stationary fronts in
//! singularly perturbed, bi-stable two-component reaction-diffusion systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: parameters, nonlinearities `H`, `G` and the JSON descriptor.
//! * [`fast_field`]: closed-form fast front and fast-field quadratures.
//! * [`existence`]: front branches, folds, composite and refined profiles.
//! * [`essential_spectrum`]: dispersion relation and regime classification.
//! * [`evans`]: Evans function, transmission functions, eigenvalue oracle.
//! * [`pde_sim`]: direct time integration of the PDE.

// `!(x > 0.0)` is used on purpose so that NaN fails validation; dense
// kernels index several arrays with one loop counter.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod essential_spectrum;
pub mod evans;
pub mod existence;
pub mod fast_field;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod pde_sim;
pub mod quadrature;

pub use error::{Error, Result};
pub use model::{Model, ModelParams, ReactionSpec, Regime};
