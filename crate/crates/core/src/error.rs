use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("integration blew up at t = {time}")]
    IntegrationBlowup { time: f64 },
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("system is not controllable (rank {rank} < {dim})")]
    NotControllable { rank: usize, dim: usize },
    #[error("Gramian is singular (smallest eigenvalue {c_t:e})")]
    SingularGramian { c_t: f64 },
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("matrix is not Hurwitz (max real part {max_real})")]
    NotHurwitz { max_real: f64 },
    #[error("leading coefficient must be positive; normalize first")]
    NormalizeFirst,
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("pole placement residual {residual:e} exceeds tolerance {tol:e}")]
    PlacementVerification { residual: f64, tol: f64 },
    #[error("point is not an equilibrium (|f| = {residual:e})")]
    NotEquilibrium { residual: f64 },
    #[error("weight matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("ill-posed problem: {reason} (min singular value {min_singular:e})")]
    IllPosed { reason: String, min_singular: f64 },
    #[error("biorthogonal family of size {requested} is too ill-conditioned; largest feasible size is {feasible}")]
    KTooLarge { requested: usize, feasible: usize },
    #[error("time {t} outside [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("shooting failed: {reason} (residual {residual:e})")]
    ShootingFailed { reason: String, residual: f64, history: Vec<f64> },
}
