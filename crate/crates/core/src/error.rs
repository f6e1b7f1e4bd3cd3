use alloc::boxed::Box;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the numeric routines.
///
/// The variants separate three failure classes: malformed input (dimension
/// and positivity violations), linear-algebra breakdown, and an iteration
/// leaving the domain where its update rule is defined.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DimensionMismatch { expected: usize, found: usize },
    NonFinite { index: usize },
    Empty,
    /// A quantity required to be strictly positive was not.
    NonPositive { what: &'static str, index: usize },
    /// Elimination hit a pivot below the absolute threshold.
    Breakdown { index: usize },
    Singular { index: usize },
    NonPositiveR { index: usize },
    NonPositiveH { index: usize },
    NonPositivePhi { index: usize },
    NonPositiveMu { index: usize },
    DenominatorBreakdown,
    SafeFormulaUnavailable { phi1: f64 },
    MaxIterationsExceeded { iterations: usize, last_z: f64 },
    NonPositiveIterate { step: usize, index: usize },
    InvalidInput(&'static str),
    /// A failure inside step `step` of an iteration.
    AtStep { step: usize, cause: Box<Error> },
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            e @ Error::AtStep { .. } => e,
            e => Error::AtStep { step, cause: Box::new(e) },
        }
    }

    /// The innermost error, looking through [`Error::AtStep`].
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { cause, .. } => cause.root(),
            e => e,
        }
    }

    /// Whether the error means the algorithm left its domain of definition
    /// rather than failing on bad input or numerics.
    pub fn is_domain_error(&self) -> bool {
        matches!(
            self.root(),
            Error::NonPositiveIterate { .. }
                | Error::NonPositiveR { .. }
                | Error::NonPositiveH { .. }
                | Error::NonPositivePhi { .. }
                | Error::NonPositiveMu { .. }
                | Error::SafeFormulaUnavailable { .. }
                | Error::Singular { .. }
                | Error::Breakdown { .. }
                | Error::DenominatorBreakdown
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NonFinite { index } => write!(f, "non-finite value at index {index}"),
            Error::Empty => f.write_str("empty input"),
            Error::NonPositive { what, index } => {
                write!(f, "{what} must be positive, violated at index {index}")
            }
            Error::Breakdown { index } => write!(f, "elimination breakdown at pivot {index}"),
            Error::Singular { index } => write!(f, "matrix is singular (pivot {index})"),
            Error::NonPositiveR { index } => write!(f, "r sequence not positive at index {index}"),
            Error::NonPositiveH { index } => write!(f, "h sequence not positive at index {index}"),
            Error::NonPositivePhi { index } => {
                write!(f, "phi sequence not positive at index {index}")
            }
            Error::NonPositiveMu { index } => {
                write!(f, "mu sequence not positive at index {index}")
            }
            Error::DenominatorBreakdown => f.write_str("explicit solver denominator vanished"),
            Error::SafeFormulaUnavailable { phi1 } => {
                write!(f, "safe initial shift needs phi_1 < 1, got {phi1}")
            }
            Error::MaxIterationsExceeded { iterations, last_z } => {
                write!(f, "no convergence after {iterations} iterations (last z = {last_z})")
            }
            Error::NonPositiveIterate { step, index } => write!(
                f,
                "iterate {step} has a non-positive component at index {index}; max-ratio undefined"
            ),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::AtStep { step, cause } => write!(f, "step {step}: {cause}"),
        }
    }
}

impl core::error::Error for Error {}
