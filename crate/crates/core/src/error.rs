use alloc::boxed::Box;
use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("infeasible geometry: {0}")]
    Infeasible(String),

    #[error(
        "under-determined design: {elements} elements cannot satisfy truncation order \
         {truncation} (needs at least {required})"
    )]
    UnderDetermined {
        elements: usize,
        truncation: usize,
        required: usize,
    },

    #[error("truncation order {truncation} is below the pattern order {order}")]
    TruncationTooSmall { truncation: usize, order: usize },

    #[error("rank-deficient Gram matrix (condition estimate {condition:.3e})")]
    RankDeficient { condition: f64 },

    #[error("degenerate Rayleigh quotient (denominator {denominator:.3e})")]
    DegenerateQuotient { denominator: f64 },

    #[error("empty design grid")]
    EmptyGrid,

    #[error("at {frequency_hz} Hz, steering {steering_rad} rad: {source}")]
    AtGridPoint {
        frequency_hz: f64,
        steering_rad: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, frequency_hz: f64, steering_rad: f64) -> Self {
        Error::AtGridPoint {
            frequency_hz,
            steering_rad,
            source: Box::new(self),
        }
    }

    /// Strips grid-point context, returning the underlying failure.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtGridPoint { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures of the numerical pipeline rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::UnderDetermined { .. }
                | Error::TruncationTooSmall { .. }
                | Error::RankDeficient { .. }
                | Error::DegenerateQuotient { .. }
        )
    }
}
