//! Observational entropy and its Petz-Rényi (α) generalization over POVM
//! coarse-grainings of finite-dimensional quantum states.
//!
//! The crate is organized bottom-up:
//!
//! - [`operator`]: validated Hermitian / PSD / density matrices, spectral
//!   decompositions, matrix powers with an explicit support convention,
//!   tensor products, partial traces and exact unitary propagation.
//! - [`divergence`]: KL, von Neumann, Rényi, Umegaki and Petz-Rényi
//!   functionals, plus Rényi mutual information.
//! - [`coarse`]: coarse-grainings (POVMs), the quantum-to-classical channel,
//!   OE / α-OE, the α-derivative, sequential composition and refinements.
//! - [`state`]: post-measurement, conditional and coarse-grained states.
//! - [`thermo`]: energy windows, Gibbs states, effective temperatures, closed
//!   and open driven simulations, free energies.
//! - [`verify`]: seeded randomized property suites producing deterministic
//!   reports.
//!
//! All logarithms are natural (entropies in nats). Units: ħ = k_B = 1.

#![forbid(unsafe_code)]

pub mod coarse;
pub mod divergence;
pub mod error;
pub mod io;
pub mod operator;
pub mod par;
pub mod random;
pub mod state;
pub mod thermo;
pub mod tolerance;
pub mod verify;

pub use coarse::CoarseGraining;
pub use divergence::Divergence;
pub use error::{Error, Result};
pub use operator::{CMatrix, DensityOperator, HermitianOperator, Operator, PsdOperator};
pub use tolerance::Tolerances;

/// Distance from α = 1 below which α-dependent quantities are evaluated by
/// their α → 1 limit.
pub const ALPHA_ONE_WINDOW: f64 = 1e-6;
