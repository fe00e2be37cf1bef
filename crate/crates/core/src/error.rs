use crate::asynchrony::Trace;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported objective `{name}` with dim {dim}: {reason}")]
    UnsupportedObjective { name: String, dim: usize, reason: String },

    #[error("invalid feasible set: {0}")]
    InvalidSet(String),

    #[error("invalid step schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid delay model: {0}")]
    InvalidDelayModel(String),

    #[error("variational coherence check: {0}")]
    VcCheck(String),

    #[error("flow integration produced a non-finite state at t = {t} (step too large?)")]
    FlowDiverged { t: f64 },

    #[error("invalid run configuration: {0}")]
    InvalidRun(String),

    #[error("analysis: {0}")]
    Analysis(String),

    #[error("malformed trace: {0}")]
    MalformedTrace(String),

    #[error("worker thread failed after {} recorded updates", partial_trace.len())]
    WorkerFailed { partial_trace: Box<Trace> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
