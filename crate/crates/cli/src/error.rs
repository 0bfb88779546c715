use phire_core::gates::GateError;
use phire_core::io::IoError;
use phire_core::perf::PerfError;
use phire_core::permcheck::PermError;
use phire_core::schedule::ScheduleError;
use phire_core::sumcheck::SumcheckError;
use phire_core::Reject;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("rejected: {0}")]
    Rejected(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("infeasible config: {0}")]
    Infeasible(String),
    /// Stdout was closed by the reader.
    #[error("output closed")]
    OutputClosed,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::OutputClosed => 1,
            CliError::Rejected(_) => 2,
            CliError::Malformed(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Io { .. } => CliError::Io(e.to_string()),
            IoError::Malformed(m) => CliError::Malformed(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            CliError::OutputClosed
        } else {
            CliError::Io(e.to_string())
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => io.into(),
            other => CliError::Io(format!("{other:?}")),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<GateError> for CliError {
    fn from(e: GateError) -> Self {
        CliError::Malformed(e.to_string())
    }
}

impl From<ScheduleError> for CliError {
    fn from(e: ScheduleError) -> Self {
        CliError::Infeasible(e.to_string())
    }
}

impl From<PerfError> for CliError {
    fn from(e: PerfError) -> Self {
        match e {
            PerfError::Calibration(m) => CliError::Malformed(m),
            other => CliError::Infeasible(other.to_string()),
        }
    }
}

impl From<SumcheckError> for CliError {
    fn from(e: SumcheckError) -> Self {
        CliError::Malformed(e.to_string())
    }
}

impl From<Reject> for CliError {
    fn from(e: Reject) -> Self {
        match e {
            Reject::Malformed(m) => CliError::Malformed(m),
            other => CliError::Rejected(other.to_string()),
        }
    }
}

impl From<PermError> for CliError {
    fn from(e: PermError) -> Self {
        match e {
            PermError::RootNotOne(_) | PermError::Sumcheck(_) => CliError::Rejected(e.to_string()),
            other => CliError::Malformed(other.to_string()),
        }
    }
}
