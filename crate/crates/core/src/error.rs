use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("{op} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        op: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("grid too short: {0}")]
    GridTooShort(String),

    #[error("quasianalytic parameters (tau={tau}, sigma={sigma}) admit no compactly supported window")]
    Quasianalytic { tau: f64, sigma: f64 },

    #[error("sample spacing mismatch: signal dt={signal_dt}, window dt={window_dt}")]
    DtMismatch { signal_dt: f64, window_dt: f64 },

    #[error("window ({window_len} samples) is longer than the signal ({signal_len} samples)")]
    WindowTooLong {
        window_len: usize,
        signal_len: usize,
    },

    #[error("invalid STFT configuration: {0}")]
    StftConfig(String),

    #[error("window pair is numerically orthogonal: |<g, psi>| = {inner:e} <= {bound:e}")]
    OrthogonalWindows { inner: f64, bound: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("insufficient frequency range: {0}")]
    InsufficientRange(String),

    #[error("degenerate decay profile: {0}")]
    DegenerateProfile(String),

    #[error("window is not compactly supported")]
    NonCompactWindow,

    #[error("cone too narrow: {bins} frequency bins (need at least {required})")]
    ConeTooNarrow { bins: usize, required: usize },

    #[error("invalid signal spec: {0}")]
    InvalidSpec(String),

    #[error("signal parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        op,
        detail: detail.into(),
    }
}
