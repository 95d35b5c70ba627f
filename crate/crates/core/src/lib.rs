//! Analytic eigensystem and radiative observables of a linear chain of
//! nearest-neighbour dipole-coupled two-level atoms.
//!
//! All energies and rates are dimensionless multiples of the single-atom
//! decay rate γ, with ħ = 1.
//!
//! * [`model`] — chain parameters, eigenstate labels, coefficients, spectrum
//!   and reflection parity.
//! * [`oracle`] — dense sector Hamiltonian and brute-force diagonalization
//!   used to validate the analytic eigensystem.
//! * [`radiation`] — one-photon structure factor in its three equivalent
//!   forms, and single-excited-atom radiation patterns.
//! * [`decay`] — total decay rates, the cross-damping kernel, subradiant
//!   census and ka scans.
//! * [`cli`] — run configuration and artifact writers behind the binary.

// `!(a <= b)` guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod decay;
mod error;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod radiation;

pub use error::{Error, Result};
pub use model::{BasisKet, ChainConfig, EigenAmplitude, EigenLabel};
