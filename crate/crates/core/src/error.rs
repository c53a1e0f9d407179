use thiserror::Error;

/// Errors raised by every module of the crate.
///
/// Each variant carries enough context to be reported as a machine-readable
/// record by the command-line front end (see [`Error::kind`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point variant mismatch: {0}")]
    VariantMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("empty prefix index set at path position k={k} (0-based); every k in tau..n needs an admissible earlier index")]
    EmptyPrefix { k: usize },

    #[error("infinite gauge value in profile entry {index}; use the thresholded estimator G_t (part (i) bounds only)")]
    InfiniteGauge { index: usize },

    #[error("function sample field `{0}` is required by this gauge")]
    MissingFunctionData(&'static str),

    #[error("backend {backend} cannot serve gauge {gauge}")]
    IncompatibleBackend { backend: &'static str, gauge: String },

    #[error("unsupported process: {0}")]
    UnsupportedProcess(String),

    #[error("path format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable snake_case tag for machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::VariantMismatch(_) => "variant_mismatch",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::InvalidPoint(_) => "invalid_point",
            Error::EmptyPrefix { .. } => "empty_prefix",
            Error::InfiniteGauge { .. } => "infinite_gauge",
            Error::MissingFunctionData(_) => "missing_function_data",
            Error::IncompatibleBackend { .. } => "incompatible_backend",
            Error::UnsupportedProcess(_) => "unsupported_process",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be a positive finite real, got {value}")))
    }
}

pub(crate) fn ensure_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::param(name, format!("must lie in [0, 1], got {value}")))
    }
}

pub(crate) fn ensure_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must lie in (0, 1), got {value}")))
    }
}
