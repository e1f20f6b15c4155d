use thiserror::Error;

pub type Result<T, E = OttoError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OttoError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Kraus operators are not complete: max |sum K^dag K - I| = {deviation:.3e}")]
    CompletenessViolation { deviation: f64 },

    #[error("non-unique steady state: {count} eigenvalues within {tolerance:e} of 1")]
    NonUniqueSteadyState { count: usize, tolerance: f64 },

    #[error("power iteration did not converge after {iterations} doublings (last change {change:.3e})")]
    PowerIterationDiverged { iterations: usize, change: f64 },

    #[error("fixed point residual {residual:.3e} exceeds tolerance")]
    FixedPointResidual { residual: f64 },

    #[error("map is not completely positive: min Choi eigenvalue {min_eigenvalue:.3e}")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("map is not trace preserving: deviation {deviation:.3e}")]
    NotTracePreserving { deviation: f64 },

    #[error("operator is not unitary: |U^dag U - I| = {deviation:.3e}")]
    NonUnitary { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("scheme {scheme} takes {expected} pointer widths, got {got}")]
    WidthCount {
        scheme: String,
        expected: usize,
        got: usize,
    },

    #[error("no measurement record exists for {0}")]
    NoMeasurementRecord(String),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("moment order ({n}, {m}) unsupported, n + m must be at most 4")]
    UnsupportedMomentOrder { n: usize, m: usize },

    #[error("reference state is singular (smallest eigenvalue {min_eigenvalue:e})")]
    SingularReference { min_eigenvalue: f64 },

    #[error("mixture weights sum to {sum}, expected 1")]
    WeightSum { sum: f64 },

    #[error("merged weight keeps an imaginary part {imag:e}")]
    ComplexWeight { imag: f64 },

    #[error("infinite pointer width gives an improper distribution")]
    ImproperDistribution,
}
