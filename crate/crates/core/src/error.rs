use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported spatial dimension {0}: only n = 1 and n = 2 are implemented")]
    UnsupportedDimension(usize),

    #[error("order s = {s} outside the admissible interval (0, {upper})")]
    InvalidOrder { s: f64, upper: f64 },

    #[error("the symbol 2 log|xi| is singular at xi = 0")]
    SingularSymbol,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("cell size h = {h} must be below 1/2; refine the grid (more cells per axis)")]
    CellTooLarge { h: f64 },

    #[error("invalid regions: {0}")]
    InvalidRegions(String),

    #[error("invalid cell field: {0}")]
    InvalidField(String),

    #[error("invalid quadrature specification: {0}")]
    InvalidQuadrature(String),

    #[error(
        "quadrature did not converge for cell pair ({i}, {j}): panel estimate change {change:.3e} \
         above tolerance at maximum subdivision depth"
    )]
    QuadratureNonConvergence { i: usize, j: usize, change: f64 },

    #[error(
        "Fourier truncation bound {bound:.3e} exceeds tolerance {tolerance:.3e}; \
         increase the truncation radius (currently {radius})"
    )]
    FourierTail { bound: f64, tolerance: f64, radius: f64 },

    #[error("Fourier normalization check failed: Parseval mass discrepancy {0:.3e}")]
    FourierNormalization(f64),

    #[error(
        "Omega block of L + q is not positive definite (min eigenvalue {min_eigenvalue:.6e}, \
         inertia +{positive}/-{negative}/0:{zero}); the eigenvalue condition \
         lambda_1(Omega) + q(x) >= lambda_0 > 0 is violated"
    )]
    NotCoercive {
        min_eigenvalue: f64,
        positive: usize,
        negative: usize,
        zero: usize,
    },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("DN matrices are not comparable: {0}")]
    MismatchedRegions(String),

    #[error("least-squares operator is rank deficient at alpha = 0 (smallest singular value {0:.3e})")]
    RankDeficient(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigen-solver failure: {0}")]
    EigenSolver(String),
}
