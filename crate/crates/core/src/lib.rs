//! Galerkin discretization of the logarithmic Laplacian `L = log(-Δ)` on
//! cell-indicator bases, with the exterior-value Dirichlet problem,
//! Dirichlet-to-Neumann maps and monotonicity-based reconstruction of
//! potentials.
//!
//! The usual pipeline:
//!
//! 1. build a [`grid::Grid`] and a [`grid::RegionSet`] (Ω, measurement windows, blocks);
//! 2. assemble `K = B₀` with [`assembly::assemble_log_form`] and a potential
//!    matrix with [`assembly::assemble_potential`];
//! 3. solve with [`solver::solve_dirichlet`] or form DN matrices with
//!    [`dnmap::assemble_dn_map`];
//! 4. run the inverse-problem tools in [`inversion`] and the checks in [`spectral`].

pub mod assembly;
pub mod config;
pub mod constants;
pub mod dnmap;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod inversion;
pub mod quadrature;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod testing;
