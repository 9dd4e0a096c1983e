//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A CSV row could not be parsed into `(minute, value)`.
    #[error("malformed input at line {line}: {reason}")]
    MalformedInput { line: u64, reason: String },

    /// More consecutive minutes are missing than the ingest gap limit allows.
    #[error("gap of {missing} missing minutes after t={after} exceeds the limit of {limit}")]
    GapTooLarge {
        after: i64,
        missing: u32,
        limit: u32,
    },

    /// Normalisation was asked for on an all-zero series.
    #[error("cannot normalise a series whose maximum absolute value is zero")]
    DegenerateSeries,

    /// The synthetic generator needs at least two full days.
    #[error("synthetic span of {days} days is too short, need at least {min}")]
    InsufficientSpan { days: u32, min: u32 },

    /// Synthesis parameters describe an invalid workload shape.
    #[error("invalid synthesis parameters: {0}")]
    InvalidSynthesisSpec(&'static str),

    /// A window or forecast reached outside the recorded span.
    #[error("window [{from}, {to}] falls outside the series span [{start}, {end}]")]
    OutOfHistory {
        from: i64,
        to: i64,
        start: i64,
        end: i64,
    },

    /// Usable span too short for a degree-1 fit (undersized kernel window,
    /// or a series shorter than the window sliding over it).
    #[error("usable span of {window} minutes is too short, need at least {min} minutes")]
    WindowTooShort { window: u32, min: u32 },

    /// Window length (or centered half-window) does not land on the sample grid.
    #[error("window of {window} minutes does not align with the {period}-minute sample grid")]
    MisalignedWindow { window: u32, period: u32 },

    /// Horizon does not land on the sample grid.
    #[error("horizon of {horizon} minutes does not align with the {period}-minute sample grid")]
    MisalignedHorizon { horizon: u32, period: u32 },

    /// Horizon outside the supported short-term range.
    #[error("horizon of {horizon} minutes is outside 1..={max} (pass the long-horizon override to lift the cap)")]
    HorizonOutOfRange { horizon: u32, max: u32 },

    /// Sampling period must divide a day exactly.
    #[error("sampling period of {period} minutes does not divide a 1440-minute day")]
    IncompatibleSampling { period: u32 },

    /// A kernel was used for a purpose it was not built for.
    #[error("kernel mismatch: expected {expected}, got {got}")]
    KernelMismatch {
        expected: &'static str,
        got: &'static str,
    },

    /// No origins satisfy every method's availability constraints.
    #[error("evaluation range is empty: {0}")]
    EmptyEvaluationRange(String),

    /// Relative gain against a zero-error forecast is undefined.
    #[error("method error is exactly zero, gain against it is undefined")]
    PerfectForecast,

    /// Unrecognized forecasting method name.
    #[error("unknown forecasting method `{0}` (expected persistence, scaled, algebraic or mixed)")]
    UnknownMethod(String),

    /// Per-VM capacity must be positive.
    #[error("per-VM capacity must be positive, got {0}")]
    InvalidCapacity(f64),

    /// Workload-to-CPU scale factor must be positive.
    #[error("scale factor must be positive, got {0}")]
    InvalidScaleFactor(f64),

    /// A batch operation failed at a specific forecast origin.
    #[error("forecast failed at origin t={origin}: {source}")]
    AtOrigin {
        origin: i64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Attach the forecast origin a batch operation was processing.
    pub(crate) fn at_origin(self, origin: i64) -> Error {
        Error::AtOrigin {
            origin,
            source: Box::new(self),
        }
    }
}
