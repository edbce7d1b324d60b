//! Solver core for the Cahn–Hilliard system with an Allen–Cahn type dynamic
//! boundary condition, discretized on a periodic slab.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration and
//! the command-line driver live in the `cahnbc` crate.
//!
//! Module map:
//!
//! * [`graphs`]: maximal monotone graphs, resolvents, Yosida approximations,
//!   Moreau envelopes and the domination checks between bulk and boundary
//!   graphs.
//! * [`geometry`]: the slab grid, its conservative finite-difference
//!   operators, the inverse Neumann Laplacian and discrete norms.
//! * [`linalg`]: sparse matrices, banded LU and conjugate gradients.
//! * [`stepper`]: backward Euler with convex splitting, solved by Newton.
//! * [`diagnostics`]: mass, free energy, dissipation balance and the
//!   monitor family bounded by the a priori estimates.
//! * [`experiments`]: kappa and epsilon sweeps, paired-run continuous
//!   dependence, manufactured-solution order checks.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod diagnostics;
pub mod experiments;
pub mod geometry;
pub mod graphs;
pub mod initial;
pub mod linalg;
pub mod stepper;

mod math;

pub use geometry::{BoundaryField, Field, SlabGrid};
pub use graphs::{GraphKind, MonotoneGraph, Perturbation, PotentialPair};
pub use stepper::{RunConfig, Splitting, State};

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("value {value} lies outside the domain of the graph")]
    Domain { value: f64 },
    #[error("resolvent iteration did not converge (r = {r}, eps = {eps})")]
    Convergence { r: f64, eps: f64 },
    #[error("input is not mean-free: |mean| = {mean:e} exceeds {tol:e}")]
    Mean { mean: f64, tol: f64 },
    #[error("linear solver failure: {0}")]
    Solver(String),
    #[error("Newton iteration diverged at t = {t} (residual {residual:e})")]
    NewtonDivergence { t: f64, residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
