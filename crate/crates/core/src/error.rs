//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // space catalog
    #[error("unknown space kind `{0}`")]
    UnknownKind(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("point outside chart domain: {0}")]
    PointOutsideChart(String),
    #[error("quadrature truncation insufficient: estimated tail ratio {0:.3e} exceeds tolerance")]
    TruncationInsufficient(f64),

    // assembly
    #[error("basis {basis} is incompatible with space {space}")]
    IncompatibleBasis { basis: String, space: String },
    #[error("gram matrix ill-conditioned: min/max eigenvalue ratio {0:.3e}")]
    GramIllConditioned(f64),
    #[error("insufficient smoothness: {0}")]
    InsufficientSmoothness(String),
    #[error("Gauss-Bonnet violated: area {area:.12} differs from 4*pi beyond tolerance")]
    GaussBonnetViolated { area: f64 },
    #[error("Poisson solve failed: {0}")]
    PoissonSolveFailed(String),

    // eigensolve
    #[error("eigensolver failed to converge: {0}")]
    ConvergenceFailure(String),
    #[error("gram matrix not positive definite")]
    GramNotPD,
    #[error("all computed eigenvalues lie below the zero tolerance; increase the eigenvalue count")]
    AllZero,
    #[error("eigenvector does not belong to the first nonzero cluster")]
    NotFirstCluster,

    // identities
    #[error("symbolic derivatives unavailable: {0}")]
    SymbolicDerivativeUnavailable(String),
    #[error("integrand not integrable against the weighted measure: {0}")]
    NonIntegrable(String),
    #[error("space is not a gradient shrinking soliton catalog entry")]
    NotASoliton,
    #[error("normalization violated: integral of u^2 d-mu = {0:.12}, expected 1")]
    NormalizationViolated(f64),

    // holomorphic
    #[error("function is not a 1-eigenfunction: eigen residual {0:.3e}")]
    NotOneEigenfunction(f64),
    #[error("Ricci potential unavailable for this space")]
    PotentialUnavailable,

    // toric
    #[error("malformed polytope file: {0}")]
    MalformedFile(String),
    #[error("degenerate polytope: {0}")]
    DegeneratePolytope(String),

    // cli
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("report contains no spectrum data")]
    NoSpectrumData,

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
