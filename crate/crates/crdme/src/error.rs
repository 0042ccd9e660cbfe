use thiserror::Error;

#[derive(Debug, Error)]
pub enum CrdmeError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Total propensity hit zero with record times still pending; the caller
    /// decides whether that is fatal or just fast-forwards.
    #[error("no enabled event channel at t = {0}")]
    AbsorbingState(f64),

    /// Incrementally maintained propensities diverged from a fresh rebuild.
    #[error("schedule drift: {what} differs from rebuild by {relative:e} (relative)")]
    ScheduleDrift { what: &'static str, relative: f64 },

    #[error(transparent)]
    Core(#[from] rdd_core::CoreError),
}
