use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {dim} exceeds the 16-dimensional (4-qubit) limit")]
    DimensionOverflow { dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid qubit index set: {0}")]
    InvalidQubits(String),

    #[error("matrix is not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("state vector is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("Bloch vector has length {norm} > 1")]
    OutsideBlochBall { norm: f64 },

    #[error("matrix is not unitary (max |U^dag U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("rotation axis is not a unit vector (length {norm})")]
    NonUnitAxis { norm: f64 },

    #[error("theta = {theta} is outside the admissible range {range} for channel {channel}")]
    ThetaOutOfRange {
        channel: String,
        theta: f64,
        range: &'static str,
    },

    #[error("intrusion parameter f = {0} is outside [0, 1]")]
    IntrusionOutOfRange(f64),

    #[error("Bell coefficients must be nonnegative and sum to 1: {0}")]
    InvalidBellCoeffs(String),

    #[error("number of steps must be at least 1")]
    NoSteps,

    #[error("protocol aborted, all pairs discarded (coincidence probability {probability:e})")]
    Aborted { probability: f64 },

    #[error("target unreachable: noiseless 1-F = {noiseless:e} already exceeds target {target:e}")]
    TargetUnreachable { noiseless: f64, target: f64 },

    #[error("root not bracketed: 1-F = {at_max:e} at theta_max = {theta_max} is below target {target:e}")]
    NotBracketed { at_max: f64, theta_max: f64, target: f64 },

    #[error("1-F is not monotone in theta below the target crossing (near theta = {theta})")]
    NonMonotone { theta: f64 },

    #[error("unknown channel name {0:?}")]
    UnknownChannel(String),

    #[error("unknown wire name {0:?}")]
    UnknownWire(String),

    #[error("invalid theta grid: {0}")]
    InvalidGrid(String),

    #[error("CSV output failed: {0}")]
    Csv(String),
}

impl Error {
    /// True for failures of the numerics (aborted runs, root finding) as
    /// opposed to invalid inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Aborted { .. }
                | Error::TargetUnreachable { .. }
                | Error::NotBracketed { .. }
                | Error::NonMonotone { .. }
        )
    }
}
