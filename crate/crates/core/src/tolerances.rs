//! Numerical thresholds used across the crate.
//!
//! The identity-level checks sit ~100x above f64 accumulation at the matrix
//! sizes this library works with (dim <= a few hundred); discretization-bound
//! checks are looser and stated per operation.

/// Elementwise Hermiticity requirement, M = M†.
pub const HERMITICITY: f64 = 1e-12;

/// U†U = I for constructed unitaries.
pub const UNITARITY: f64 = 1e-10;

/// State-norm preservation across a library operation or full trajectory.
pub const NORM: f64 = 1e-10;

/// Matching of two eigenvalues counted as one degenerate level.
pub const DEGENERACY: f64 = 1e-10;

/// Agreement between the eigendecomposition and series routes of expm.
pub const EXPM_CROSS_CHECK: f64 = 1e-9;

/// Unitarity of discretization-limited holonomies.
pub const HOLONOMY_UNITARITY: f64 = 1e-8;

/// Default leakage bound for subspace-confined evolution.
pub const LEAKAGE: f64 = 1e-3;

/// Cyclicity requirement |<psi(0)|psi(T)>| for phase extraction.
pub const CYCLIC_OVERLAP: f64 = 0.99;
