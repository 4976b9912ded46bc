//! Error type shared by the factorization and network-construction pipeline.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A mask's effective degree exceeds the bound its context allows.
    MaskTooLong { degree: usize, bound: usize },
    /// The all-zero sequence has no symbol roots and cannot be factorized.
    ZeroSequence,
    /// Factorization into masks of length `s + 1` needs `s >= 2`.
    FilterLengthTooSmall { s: usize },
    /// Network construction needs `s <= d` so each layer widens by `s`.
    FilterLengthExceedsDimension { s: usize, d: usize },
    /// Root refinement exhausted its iteration budget.
    DidNotConverge { iterations: u32, worst_residual: f64 },
    /// A vector's length disagrees with the dimension it must match.
    DimensionMismatch { expected: usize, got: usize },
    /// Requested depth is below the minimum the expansion needs.
    DepthTooSmall { depth: usize, minimal: usize },
    /// The cumulative mask norm vanished, so no bias offset can be formed.
    DegenerateScale,
    /// A hidden-layer bias does not repeat its interior entries.
    UnstructuredBias { layer: usize },
    /// A ridge expansion violates one of its normalization invariants.
    InvalidExpansion(String),
    /// Name not present in the target-function registry.
    UnknownTarget(String),
    Io(String),
    Format(String),
    /// A file declares a schema this tool does not read.
    SchemaMismatch { found: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::MaskTooLong { degree, bound } => {
                write!(f, "mask degree {degree} exceeds bound {bound}")
            }
            Error::ZeroSequence => write!(f, "the all-zero sequence cannot be factorized"),
            Error::FilterLengthTooSmall { s } => {
                write!(f, "s must be \u{2265} 2 (got {s})")
            }
            Error::FilterLengthExceedsDimension { s, d } => {
                write!(f, "filter length s = {s} must not exceed input dimension d = {d}")
            }
            Error::DidNotConverge { iterations, worst_residual } => write!(
                f,
                "root refinement did not converge after {iterations} iterations \
                 (worst relative residual {worst_residual:.3e})"
            ),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::DepthTooSmall { depth, minimal } => {
                write!(f, "depth {depth} is below the minimum {minimal} for this expansion")
            }
            Error::DegenerateScale => {
                write!(f, "cumulative mask norm is zero; bias offsets cannot be formed")
            }
            Error::UnstructuredBias { layer } => {
                write!(f, "bias of layer {layer} does not repeat its interior entries")
            }
            Error::InvalidExpansion(msg) => write!(f, "invalid ridge expansion: {msg}"),
            Error::UnknownTarget(name) => write!(f, "unknown target function '{name}'"),
            Error::Io(msg) => write!(f, "i/o error: {msg}"),
            Error::Format(msg) => write!(f, "format error: {msg}"),
            Error::SchemaMismatch { found } => {
                write!(f, "unsupported schema '{found}' (expected '{}')", crate::io::SCHEMA)
            }
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
