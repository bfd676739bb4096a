//! Single-phase estimation in a three-arm interferometer whose two reference
//! arms carry correlated phase noise.
//!
//! The crate is organized bottom-up:
//!
//! * [`qmath`]: small dense Hermitian numerics (spectra, entropies, norms, pinching).
//! * [`channel`]: the qutrit dephasing channel `(eta, kappa)`, its complete-positivity
//!   region, and the phase-kick / bivariate-Gaussian noise ensembles that realize it.
//! * [`metrology`]: phase encoding, SLD, quantum and classical Fisher information,
//!   probe optimization and asymmetry monotones.
//! * [`interferometer`]: click probabilities, visibility, optimal projectors, count
//!   simulation, the locally unbiased estimator and bootstrap precision.
//! * [`entanglement`]: maximally correlated two-qutrit states and their distillable
//!   entanglement.
//! * [`classical`]: coherent-light operation with Gaussian phase noise.
//! * [`cli`]: the `qasym` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod classical;
pub mod cli;
pub mod entanglement;
mod error;
pub mod interferometer;
pub mod metrology;
pub mod qmath;
pub mod quadrature;
pub mod rng;
pub mod tolerance;

pub use error::{Error, Result};
