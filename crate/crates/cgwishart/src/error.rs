//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by graph validation, completion, special functions, exact
/// normalizing constants, sampling, diagnostics, and the harness.
///
/// All indices in messages are 1-based, matching the serialized formats.
#[derive(Debug, Error)]
pub enum Error {
    // ---- colored graph validation ----
    /// Two color classes share an element.
    #[error("color classes overlap: {kind} {element} appears in more than one class")]
    OverlappingClasses { kind: &'static str, element: String },
    /// A vertex or edge is not covered by any color class.
    #[error("{kind} {element} is not covered by any color class")]
    UncoveredElement { kind: &'static str, element: String },
    /// An edge joins a vertex to itself.
    #[error("edge ({0}, {0}) is a self loop")]
    SelfLoop(usize),
    /// The same edge is listed twice.
    #[error("edge ({0}, {1}) is listed more than once")]
    DuplicateEdge(usize, usize),
    /// The graph is not a tree where one is required.
    #[error("graph is not a tree: {0}")]
    NotATree(String),

    // ---- Cholesky completion ----
    /// Dimensions of related objects disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// A completed diagonal entry has a nonpositive radicand, so the partial
    /// matrix admits no positive definite completion.
    #[error("no positive completion: diagonal entry {index} has nonpositive radicand")]
    NonpositiveDiagonal { index: usize },

    // ---- special functions ----
    /// The requested function order is outside the supported range.
    #[error("unsupported order {0}")]
    UnsupportedOrder(f64),
    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    /// A series was evaluated outside its domain of convergence.
    #[error("series diverges at argument {0}")]
    SeriesDiverged(f64),
    /// A series did not converge within the configured term cap.
    #[error("series did not converge within {0} terms")]
    TermCapExceeded(usize),

    // ---- exact normalizing constants ----
    /// The supplied graph or scale matrix does not match the requested
    /// closed-form family pattern.
    #[error("pattern mismatch for family {family}: {reason}")]
    PatternMismatch { family: &'static str, reason: String },
    /// The scale matrix lies outside the dual cone; the normalizing constant
    /// is not finite.
    #[error("scale matrix is not in the dual cone")]
    NotInDualCone,
    /// Finite differencing could not find a step that keeps both probe
    /// points inside the dual cone.
    #[error("no admissible finite-difference step for class parameter {0}")]
    StepTooLarge(String),
    /// Every Monte-Carlo draw fell outside the cone; the estimator is
    /// degenerate.
    #[error("degenerate Monte-Carlo envelope: no draw completed")]
    DegenerateEnvelope,

    // ---- Metropolis-Hastings sampler ----
    /// The scale matrix has no Cholesky factorization.
    #[error("scale matrix D is not positive definite")]
    DNotPositiveDefinite,
    /// Chain initialization failed to find a starting point in the cone.
    #[error("chain initialization failed after {0} proposal attempts")]
    InitFailed(usize),
    /// The degrees of freedom give a nonpositive chi-square parameter for a
    /// free diagonal entry.
    #[error("invalid degrees of freedom: row {index} has nonpositive proposal parameter {value}")]
    InvalidDoF { index: usize, value: f64 },
    /// The posterior scale D + nS is not positive definite.
    #[error("posterior scale D + nS is not positive definite")]
    PosteriorScaleNotPD,
    /// A run or experiment configuration is self-inconsistent.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    // ---- diagnostics ----
    /// The reference matrix of a relative error is numerically zero.
    #[error("reference matrix has zero norm")]
    ZeroReference,
    /// The series is constant, so autocorrelations are undefined.
    #[error("series is constant; autocorrelation undefined")]
    ConstantSeries,
    /// The requested batch count does not fit the series length.
    #[error("bad batch count {batches} for series of length {len}")]
    BadBatchCount { batches: usize, len: usize },

    // ---- harness and CLI ----
    /// No built-in fixture has the requested name.
    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
    /// A matrix that must be positive definite is not.
    #[error("matrix K is not positive definite")]
    KNotPD,
    /// Underlying I/O failure.
    #[error("io error: {0}")]
    IoError(#[from] std::io::Error),

    // ---- serialization plumbing ----
    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    /// CSV (de)serialization failure.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    /// A scalar field failed to parse.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
