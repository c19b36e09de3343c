//! Orthogonal least squares recovery with coherence-based guarantees.
//!
//! Modules, bottom up:
//!
//! * [`matcore`]: dense matrices, projections, least squares, mixed norms;
//! * [`coherence`]: `μ`, block-coherence `μ_B`, sub-coherence `ν`;
//! * [`solvers`]: OLS, MOLS and BOLS;
//! * [`guarantees`]: recovery conditions, sparsity thresholds, noisy floors;
//! * [`bench`]: seeded Monte Carlo sweeps and their CSV output;
//! * [`io`]: the plain-text matrix format.

pub mod bench;
pub mod coherence;
pub mod error;
pub mod guarantees;
pub mod io;
pub mod matcore;
pub mod solvers;

pub use coherence::{CoherenceProfile, MeasurementMatrix};
pub use error::{Error, Result};
pub use matcore::{DenseMatrix, IndexSet, Projector};
pub use solvers::{Algorithm, HaltReason, RecoveryResult, SolverConfig};
