use thiserror::Error;

pub type Result<T> = std::result::Result<T, NskError>;

#[derive(Debug, Error)]
pub enum NskError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("sample count mismatch: grid holds {expected} points, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("multiplier is not finite at xi = {xi:?}")]
    NonFiniteSymbol { xi: Vec<f64> },

    #[error("dyadic partition: {0}")]
    Partition(String),

    #[error("invalid fluid parameters: {0}")]
    InvalidParams(String),

    #[error("eigenvalues are undefined at xi = 0")]
    ZeroFrequency,

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("vacuum margin violated: min(rho/rho*) = {min} <= {margin}")]
    Vacuum { min: f64, margin: f64 },

    #[error("non-finite coefficients at t = {time} (blow-up)")]
    BlowUp { time: f64 },

    #[error("initial data fails the smallness gate: X_p0 = {value:.3e} > {threshold:.3e}")]
    Smallness { value: f64, threshold: f64 },

    #[error("field is not supported in dyadic shell {shell}")]
    NotShellSupported { shell: i32 },

    #[error("exponent out of range: {0}")]
    ExponentRange(String),

    #[error("rate fit: {0}")]
    Fit(String),

    #[error("series: {0}")]
    Series(String),

    #[error("integrator config: {0}")]
    Integrator(String),

    #[error("config errors:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl NskError {
    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            NskError::Config(_)
            | NskError::InvalidGrid(_)
            | NskError::InvalidParams(_)
            | NskError::ExponentRange(_)
            | NskError::Integrator(_)
            | NskError::Smallness { .. }
            | NskError::Snapshot(_)
            | NskError::Partition(_) => 2,
            NskError::Vacuum { .. } | NskError::BlowUp { .. } => 3,
            _ => 1,
        }
    }
}
