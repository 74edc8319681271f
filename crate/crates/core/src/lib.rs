//! Numerical laboratory for random breather Schrödinger operators
//! `H_ω = −Δ + Vper + Σ_k u(λ_k, · − k)` on finite boxes.
//!
//! * [`potential`]: lattice, single-site families, coupling laws, realizations.
//! * [`operators`]: finite-difference assembly under Dirichlet, Neumann,
//!   periodic and Mezincescu boundary conditions.
//! * [`eigensolve`]: low spectrum, dense oracle, eigenvalue counting.
//! * [`bounds`]: eigenvalue inequalities and concentration bounds, with
//!   certification against dense oracles.
//! * [`spectral_stats`]: Monte Carlo tail probabilities, IDS curves and the
//!   resolvent-decay diagnostics.
//! * [`harness`]: configuration, reproducible campaigns, records and CLI.

pub mod bounds;
pub mod eigensolve;
pub mod error;
pub mod harness;
pub mod operators;
pub mod potential;
pub mod seed;
pub mod sparse;
pub mod spectral_stats;

pub use error::{Error, Result};
