use std::fmt;

/// Crate-wide error type.
#[derive(Debug)]
pub enum Error {
    /// Malformed input file or JSON value.
    Parse(String),
    /// A vertex/face/edge index referenced something that does not exist.
    IndexOutOfRange(String),
    /// The same unordered edge was given two different lengths.
    ConflictingEdgeLength(usize, usize),
    /// An edge of some face has no length and none can be derived.
    MissingEdgeLength(usize, usize),
    /// Chart transfer requested between faces that share no edge.
    NotAdjacent(usize, usize),
    /// A point argument does not lie on the complex (or in the stated face).
    PointOutside(String),
    /// Operation requires a complex that passes validation.
    InvalidComplex(String),
    /// Geometric routine lost its invariants (should not happen on valid input).
    Numerical(String),
    /// An operation that needs at least one point got none.
    EmptyPointSet,
    /// Bad CLI or API argument.
    BadArgument(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse(m) => write!(f, "parse error: {m}"),
            Error::IndexOutOfRange(m) => write!(f, "index out of range: {m}"),
            Error::ConflictingEdgeLength(u, v) => {
                write!(f, "conflicting lengths for edge ({u},{v})")
            }
            Error::MissingEdgeLength(u, v) => write!(f, "missing length for edge ({u},{v})"),
            Error::NotAdjacent(a, b) => write!(f, "faces {a} and {b} share no edge"),
            Error::PointOutside(m) => write!(f, "point not on complex: {m}"),
            Error::InvalidComplex(m) => write!(f, "invalid complex: {m}"),
            Error::Numerical(m) => write!(f, "numerical failure: {m}"),
            Error::EmptyPointSet => write!(f, "empty point set"),
            Error::BadArgument(m) => write!(f, "bad argument: {m}"),
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
