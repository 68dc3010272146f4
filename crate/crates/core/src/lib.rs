//! Finite-energy GKP qubit graph states tracked as coherent superpositions
//! of Gaussian-displaced ideal graph states.
//!
//! The crate is organised in layers:
//!
//! - [`gaussian`]: affine-symplectic maps and conditioning of the shared
//!   displacement covariance, generic over `f64` and the exact field Q(√2).
//! - [`gkp`]: single-mode states, closed-form wavefunctions and comb
//!   outcome statistics.
//! - [`ideal`]: stabilizer tableau for the ideal qubit layer.
//! - [`graph`]: the branch-superposition state container and its gates.
//! - [`protocols`]: Steane error correction, fusions and error statistics.
//! - [`oracle`]: brute-force quadrature-grid wavefunctions for validation.
//! - [`runner`]: JSON protocol scripts, sweeps and CSV/JSON emission.

pub mod error;
pub mod gaussian;
pub mod gkp;
pub mod graph;
pub mod ideal;
pub mod oracle;
pub mod protocols;
pub mod runner;
pub mod scalar;

pub use error::{Error, Result};
