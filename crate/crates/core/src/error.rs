use core::fmt;

/// Errors raised by model construction, sampling and estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Error {
    /// A model parameter or argument is outside its admissible range.
    InvalidParameter { name: &'static str, value: f64 },
    /// An argument falls outside the domain of the operation.
    Domain { what: &'static str, value: f64 },
    /// An estimator needs a known parameter that was not supplied.
    MissingParameter(&'static str),
    /// Rate estimation needs `x0 != mu`.
    EqualLevels,
    /// `(mean - mu) / (x0 - mu)` was not positive, so the logarithm is undefined.
    NonPositiveRatio { ratio: f64 },
    /// A draw vector does not match the Fourier truncation.
    LengthMismatch { expected: usize, actual: usize },
    /// `j * sqrt(p)` no longer has fractional bits in `f64`.
    PrecisionExhausted { stream: u32, index: u64 },
    /// The operation needs at least one value.
    Empty,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid value for {name}: {value}")
            }
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::MissingParameter(name) => write!(f, "known parameter `{name}` is required"),
            Error::EqualLevels => f.write_str("rate estimation requires x0 != mu"),
            Error::NonPositiveRatio { ratio } => {
                write!(
                    f,
                    "rate estimate undefined: (mean - mu)/(x0 - mu) = {ratio} is not positive"
                )
            }
            Error::LengthMismatch { expected, actual } => {
                write!(f, "expected {expected} Gaussian draws, got {actual}")
            }
            Error::PrecisionExhausted { stream, index } => {
                write!(
                    f,
                    "Weyl stream {stream} exhausted f64 precision at index {index}"
                )
            }
            Error::Empty => f.write_str("empty input"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}
