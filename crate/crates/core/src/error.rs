use thiserror::Error;

/// Errors shared across the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    /// A synthesis grid that cannot hold the requested band-limit.
    #[error("grid of {grid_size} points aliases a field with {n_modes} modes (need >= {required})")]
    GridTooSmall {
        grid_size: usize,
        n_modes: usize,
        required: usize,
    },

    /// The tilted measure only exists while `12 beta a_beta < 1`.
    #[error("tilted measure ill-defined: 12*beta*a_beta = {value} >= 1 (beta too large for the tilt)")]
    IllDefinedMeasure { value: f64 },

    /// Every sample fell outside the L^2 cutoff.
    #[error("degenerate ensemble: cutoff excluded all {n} samples (K too small or beta too large)")]
    DegenerateEnsemble { n: usize },

    #[error("dimension mismatch: {left} vs {right} ({context})")]
    DimensionMismatch {
        left: usize,
        right: usize,
        context: &'static str,
    },

    /// A stated precondition of an estimate or bound does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Config validation failure, naming the violated constraint.
    #[error("invalid config: field `{field}` violates `{constraint}`")]
    Validation { field: &'static str, constraint: String },

    /// The KdV integrator detected loss of L^2 conservation.
    #[error("blow-up detected: relative drift of int u^2 is {drift:.3e} at t = {t}")]
    BlowUp { drift: f64, t: f64 },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
