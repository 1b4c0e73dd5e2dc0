use core::fmt;

/// Errors raised by the numerical layer.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    Domain(&'static str),
    /// Two inputs disagree on dimension.
    DimensionMismatch { expected: usize, found: usize },
    /// A matrix failed the structural checks of a correlation matrix.
    InvalidCorrelation(&'static str),
    /// A Cholesky pivot fell below the jitter floor.
    NotPositiveDefinite { pivot: usize, value: f64 },
    /// An iterative eigensolver hit its iteration cap.
    NoConvergence { iterations: usize },
    /// A sample-correlation column has zero variance.
    DegenerateColumn(usize),
    /// Principal factor removal drove a diagonal entry to (near) zero.
    DiagonalCollapse { k: usize, index: usize },
    /// No number of removed factors met the weak-dependence criterion.
    CriterionUnreachable { threshold: f64 },
    /// A root-finding bracket did not change sign.
    RootNotBracketed,
    /// Inclusion-exclusion produced a clearly negative probability.
    NegativeProbability(f64),
    /// A λ grid is too short or malformed.
    GridTooSmall { len: usize, min: usize },
    /// The model cannot be generated at this dimension.
    UnsupportedDimension { p: usize, min: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidCorrelation(msg) => write!(f, "invalid correlation matrix: {msg}"),
            Error::NotPositiveDefinite { pivot, value } => {
                write!(f, "matrix not positive definite: pivot {pivot} = {value:e}")
            }
            Error::NoConvergence { iterations } => {
                write!(f, "eigensolver did not converge after {iterations} iterations")
            }
            Error::DegenerateColumn(j) => write!(f, "column {j} has zero sample variance"),
            Error::DiagonalCollapse { k, index } => {
                write!(f, "removing {k} factors collapsed diagonal entry {index}")
            }
            Error::CriterionUnreachable { threshold } => {
                write!(f, "weak-dependence criterion {threshold} unreachable")
            }
            Error::RootNotBracketed => f.write_str("root not bracketed"),
            Error::NegativeProbability(v) => {
                write!(f, "rectangle probability {v:e} is negative beyond rounding")
            }
            Error::GridTooSmall { len, min } => {
                write!(f, "lambda grid has {len} points, need at least {min}")
            }
            Error::UnsupportedDimension { p, min } => {
                write!(f, "dimension {p} unsupported, need at least {min}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
