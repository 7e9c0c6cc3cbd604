use alloc::string::String;
use core::fmt;

/// Failure modes shared by every computation in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes are incompatible for the named operation.
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    /// A vector or parameter group has the wrong length.
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// A matrix or vector contains NaN or an infinity.
    NonFinite,
    /// A matrix was requested with zero rows or columns.
    Empty,
    /// The SVD iteration limit was reached.
    SvdNoConvergence { iterations: usize },
    /// The quantity in a condition number denominator is zero.
    Degenerate(&'static str),
    /// An exact formula needs full column rank.
    NotFullColumnRank { rank: usize, cols: usize },
    /// Two Cauchy-Vandermonde nodes coincide (`c[i] == d[j]`).
    NodeCollision { c_index: usize, d_index: usize },
    /// A Vandermonde node is zero where its derivative needs `1/c`.
    ZeroNode { index: usize },
    /// Parameter values outside the model's domain.
    InvalidDomain(String),
    /// Invalid argument to an operation.
    InvalidArgument(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch { op, left, right } => write!(
                f,
                "{op}: shape mismatch {}x{} vs {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::LengthMismatch { what, expected, got } => {
                write!(f, "{what}: expected length {expected}, got {got}")
            }
            Error::NonFinite => write!(f, "non-finite value in input"),
            Error::Empty => write!(f, "matrix has zero rows or columns"),
            Error::SvdNoConvergence { iterations } => {
                write!(f, "SVD did not converge within {iterations} iterations")
            }
            Error::Degenerate(what) => write!(f, "degenerate input: {what}"),
            Error::NotFullColumnRank { rank, cols } => {
                write!(f, "matrix has rank {rank} but {cols} columns")
            }
            Error::NodeCollision { c_index, d_index } => write!(
                f,
                "node collision: c[{c_index}] equals d[{d_index}] (1-based: c_{} = d_{})",
                c_index + 1,
                d_index + 1
            ),
            Error::ZeroNode { index } => write!(
                f,
                "node c[{index}] is zero but the Vandermonde derivative needs 1/c"
            ),
            Error::InvalidDomain(msg) => write!(f, "parameter domain: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// True for errors that reflect a mathematically degenerate instance
    /// rather than malformed input.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_)
                | Error::NotFullColumnRank { .. }
                | Error::NodeCollision { .. }
                | Error::ZeroNode { .. }
                | Error::InvalidDomain(_)
                | Error::SvdNoConvergence { .. }
        )
    }
}
