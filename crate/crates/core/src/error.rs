//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not Hermitian (max |A - A^dag| = {0:.3e})")]
    NotHermitian(f64),

    #[error("negative spectrum: eigenvalue {0:.3e} below clamp tolerance")]
    NegativeSpectrum(f64),

    #[error("Krylov propagator did not converge (residual {residual:.3e} after {iterations} iterations)")]
    ConvergenceFailure { residual: f64, iterations: usize },

    #[error("truncation leak: population {population:.3e} in the top two Fock levels at t = {t}")]
    TruncationLeak { t: f64, population: f64 },

    #[error("density matrix positivity violated at t = {t}: min eigenvalue {min_eigenvalue:.3e}")]
    PositivityViolation { t: f64, min_eigenvalue: f64 },

    #[error("trace drift {0:.3e} exceeds tolerance")]
    TraceDrift(f64),

    #[error("degenerate gap {gap:.3e} with coupling element {coupling:.3e} in adiabaticity metric")]
    DegenerateGap { gap: f64, coupling: f64 },

    #[error("insufficient trajectory sampling: {0}")]
    InsufficientSampling(String),

    #[error("path passes through the origin (min radius {0:.3e})")]
    PathThroughOrigin(f64),

    #[error("path segment subtends {0:.4} rad at the origin; refine the path")]
    SegmentTooCoarse(f64),

    #[error("spin eigenstate undefined at the origin (r = {0:.3e})")]
    AtSingularity(f64),

    #[error("zero detuning: the off-resonant envelope requires delta != 0")]
    ZeroDetuning,

    #[error("empty distribution: grid integral is not positive")]
    EmptyDistribution,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("insufficient k-space coverage: k_max * L = {0:.3} < pi")]
    InsufficientCoverage(f64),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
