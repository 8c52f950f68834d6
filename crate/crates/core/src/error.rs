use thiserror::Error;

/// Errors raised by state validation, the measures, and the Ising pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("subsystem dimensions {da}x{db} do not match matrix dimension {n}")]
    DimensionMismatch { da: usize, db: usize, n: usize },

    #[error("expected a {expected}-dimensional operand, got {found}")]
    WrongDimension { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("negative eigenvalue {0:.3e} below clamp window")]
    NegativeEigenvalue(f64),

    #[error("state vector is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("state is entangled (Lambda = {0:.6e}); separability required")]
    EntangledInput(f64),

    #[error("spin-flip spectrum cross-check failed (deviation {0:.3e})")]
    CrossCheck(f64),

    #[error("Wootters decomposition residual {0:.3e} exceeds tolerance")]
    GramResidual(f64),

    #[error("fidelity F = {f} exceeds the separable bound 1/d for d = {d}")]
    FOutOfRange { f: f64, d: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no feasible entangling mixture found (try a larger t_max)")]
    NoFeasiblePoint,

    #[error("quadrature did not converge (error estimate {0:.3e})")]
    Quadrature(f64),

    #[error("mixture at t = {t:.3e} is not certified entangled (min partial-transpose eigenvalue {min_eig:.3e})")]
    CertificateFailure { t: f64, min_eig: f64 },

    #[error("two-site state at lambda = {lambda}, r = {r} is entangled (concurrence {concurrence:.3e})")]
    EntangledRdm { lambda: f64, r: usize, concurrence: f64 },

    #[error("exact diagonalization limited to {max} sites, got {n}")]
    DimensionCap { n: usize, max: usize },

    #[error("eigensolver failed to converge")]
    Eigensolver,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
