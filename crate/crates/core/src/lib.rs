//! Negative entanglement measure (NEM) of separable bipartite states.
//!
//! The crate is layered bottom-up:
//!
//! - [`qcore`]: dense complex linear algebra and density-matrix plumbing.
//! - [`measures`]: spin flip, Λ, concurrence, the Wootters decomposition,
//!   I-concurrence, isotropic states and the partial-transpose witness.
//! - [`nem`]: the measure itself (closed forms, optimal mixers, and a direct
//!   variational minimizer of the defining infimum).
//! - [`ising`]: transverse-field Ising correlators, two-site reduced states,
//!   exact diagonalization, and NEM sweeps across the critical point.

pub mod error;
pub mod ising;
pub mod measures;
pub mod nem;
pub mod optim;
pub mod qcore;
pub mod sampling;

pub use error::{Error, Result};
