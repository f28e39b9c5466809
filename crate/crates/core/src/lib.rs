//! Finite-element solver for diffusional phase transformations in binary
//! and ternary (vacancy-mediated) alloy systems.
//!
//! The method discretizes a time-incremental Lagrangian in mixed form: the
//! mole fractions, fluxes and chemical affinities are independent unknowns
//! on continuous quadratic elements, and each backward step solves the
//! stationarity conditions of the summed density. Because no differential
//! operator acts on the affinity, the convex-hull free energy (with or
//! without gradient regularization) is handled by the same scheme as the
//! classical double-well model.

pub mod energy;
pub mod error;
pub mod lagrangian;
pub mod mesh_fem;
pub mod scenario;
pub mod solver;
pub mod thermo;

pub use error::{Error, Result};
