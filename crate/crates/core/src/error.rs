use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NonHermitian { asymmetry: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("not a density operator: {reason}")]
    NotDensityOperator { reason: String },

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("invalid probability distribution: {reason}")]
    InvalidDistribution { reason: String },

    #[error("argument {value} outside the range [0, 1]")]
    OutOfRange { value: f64 },

    #[error("dimension {dim} too small (need at least {min})")]
    DimensionTooSmall { dim: usize, min: usize },

    #[error("Kraus family is not left-normalized (residual {residual:.3e}, tolerance {tol:.1e})")]
    NotNormalized { residual: f64, tol: f64 },

    #[error("invalid Kraus family: {reason}")]
    InvalidKraus { reason: String },

    #[error("boundary vector {which} has norm {norm} (expected 1)")]
    BoundaryNotNormalized { which: &'static str, norm: f64 },

    #[error("invalid chain geometry: {reason}")]
    InvalidGeometry { reason: String },

    #[error("eigenvalue computation did not converge")]
    NonConvergent,

    #[error("symbol {symbol} out of range for local dimension {d}")]
    SymbolOutOfRange { symbol: usize, d: usize },

    #[error("measurement string must not be empty")]
    EmptyString,

    #[error("measurement string has zero probability")]
    ZeroProbabilityString,

    #[error("measurement path has zero probability")]
    ZeroProbabilityPath,

    #[error("enumeration of {requested} strings exceeds the guard of {guard}")]
    EnumerationTooLarge { requested: u128, guard: u64 },

    #[error("normalization K^2 = {k2:.3e} is too small")]
    VanishingNormalization { k2: f64 },

    #[error("distribution length {found} does not match geometry total {expected}")]
    GeometryMismatch { expected: usize, found: usize },

    #[error("site range {j}..={k} invalid for chain of length {len}")]
    RangeError { j: usize, k: usize, len: usize },

    #[error("window parameter ell = {ell} outside 1..={max}")]
    EllOutOfRange { ell: usize, max: usize },

    #[error("marginal over sites {j}..={k} has a non-positive entry")]
    NonPositiveMarginal { j: usize, k: usize },

    #[error("F^dagger F exceeds the identity (largest eigenvalue {max_eigenvalue})")]
    FNotContractive { max_eigenvalue: f64 },

    #[error("decay series has no positive values")]
    AllZeroSeries,

    #[error("decay series has {found} positive values (need at least {needed})")]
    TooFewPoints { found: usize, needed: usize },

    #[error("dimension {dim} is even (construction needs odd D >= 3)")]
    EvenDimension { dim: usize },

    #[error("unitary completion failed (residual {residual:.3e})")]
    CompletionFailed { residual: f64 },

    #[error("subspace search exceeded its budget of {budget} nodes")]
    SearchBudgetExceeded { budget: usize },

    #[error("numerical contract violated: {what}")]
    ContractViolation { what: String },
}

pub type Result<T> = std::result::Result<T, Error>;
