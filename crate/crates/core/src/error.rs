use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("price {price} at row {row} is not a positive finite number")]
    MalformedPrice { row: usize, price: f64 },
    #[error("time {time} at row {row} does not strictly increase")]
    NonMonotonicTime { row: usize, time: f64 },
    #[error("{len} observations, at least {min} required")]
    TooShort { len: usize, min: usize },
    #[error("t = {t} is at or beyond the critical time {tc}")]
    BeyondSingularity { t: f64, tc: f64 },
    #[error("degenerate design: {0}")]
    DegenerateDesign(&'static str),
    #[error("no start of the calibration produced a finite fit")]
    NoFit,
    #[error("{found} drawdowns in the bulk, at least {min} required")]
    TooFewDrawdowns { found: usize, min: usize },
    #[error("all drawdown magnitudes are equal")]
    DegenerateSample,
    #[error("report contains no crash")]
    NoCrashes,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedPrice { .. } => "MalformedPrice",
            Error::NonMonotonicTime { .. } => "NonMonotonicTime",
            Error::TooShort { .. } => "TooShort",
            Error::BeyondSingularity { .. } => "BeyondSingularity",
            Error::DegenerateDesign(_) => "DegenerateDesign",
            Error::NoFit => "NoFit",
            Error::TooFewDrawdowns { .. } => "TooFewDrawdowns",
            Error::DegenerateSample => "DegenerateSample",
            Error::NoCrashes => "NoCrashes",
            Error::InvalidParameter(_) => "InvalidParameter",
        }
    }
}
