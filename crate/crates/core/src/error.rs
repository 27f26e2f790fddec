use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid spin j = {0}: 2j must be a non-negative integer and j >= 1/2")]
    InvalidSpin(f64),
    #[error("m = {m} is not a magnetic number of the j = {j} multiplet")]
    MOutOfRange { m: f64, j: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not Hermitian (max |M - M†| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("non-finite matrix entry encountered")]
    NonFinite,
    #[error("eigensolver failed to converge after {0} sweeps")]
    EigenNoConvergence(usize),
    #[error("state norm is {norm}, expected 1")]
    NotNormalized { norm: f64 },
    #[error("loop path must contain at least {min} segments, got {got}")]
    PathTooShort { min: usize, got: usize },
    #[error("loop path is not closed: first and last samples differ")]
    OpenLoop,
    #[error("unsupported degenerate subspace of dimension {0} (only 1 and 2 are handled)")]
    UnsupportedSubspace(usize),
    #[error("subspace is not degenerate: |E_{{m}} - E_{{m+1}}| = {gap:.3e}")]
    DegeneracyViolated { gap: f64 },
    #[error("sin(theta0) = 0: the rectangle width pi/(rho sin theta0) is undefined")]
    SingularRectangle,
    #[error("rectangle grid/loop discretization too coarse: {0}")]
    BadDiscretization(String),
    #[error("evolution is not cyclic: |<psi(0)|psi(T)>| = {overlap:.6}")]
    NonCyclic { overlap: f64 },
    #[error("schedule rejected: {0}")]
    InvalidSchedule(String),
    #[error("leakage {leakage:.3e} out of the followed subspace exceeds threshold {threshold:.3e}")]
    LeakageExceeded { leakage: f64, threshold: f64 },
    #[error("alpha0 = 0 is outside the generator-series domain")]
    ZeroAlpha,
    #[error("degenerate Hamiltonian: denominator alpha0 + beta0 (m + m') = {value:.3e} vanishes")]
    DegenerateDenominator { value: f64 },
    #[error("finite-difference step {0} outside [1e-6, 1e-3]")]
    BadStep(f64),
    #[error("{0}")]
    InvalidArgument(String),
}
