use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),

    #[error("date index has gaps, missing: {}", format_dates(.0))]
    MissingDates(Vec<NaiveDate>),

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("split out of bounds: train {train} + test {test} exceeds length {len}")]
    SplitBounds { train: usize, test: usize, len: usize },

    #[error("decomposition depth {requested} exceeds the maximum of {max} for length {len}")]
    LevelTooDeep {
        requested: usize,
        max: usize,
        len: usize,
    },

    #[error("mismatched component lengths: {0}")]
    Structure(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("ARIMA{order:?} did not converge after {iterations} iterations")]
    NoConvergence {
        order: (usize, usize, usize),
        iterations: usize,
    },

    #[error("training diverged: non-finite loss at epoch {epoch}, restart {restart}")]
    Training { epoch: usize, restart: usize },

    #[error("{phase} phase: {source}")]
    Phase {
        phase: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("zero actual value on {0}, percent error undefined")]
    ZeroActual(NaiveDate),

    #[error("non-positive value {value} on {date}, log-linear fit undefined")]
    NonPositive { date: NaiveDate, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("SIR fit failed: {message} (best beta={beta:.6}, gamma={gamma:.6}, i0={i0:.3e})")]
    SirFit {
        message: String,
        beta: f64,
        gamma: f64,
        i0: f64,
    },

    #[error("unknown model tag {0:?}")]
    UnknownModel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn in_phase(self, phase: &'static str) -> Self {
        Error::Phase {
            phase,
            source: Box::new(self),
        }
    }
}

fn format_dates(dates: &[NaiveDate]) -> String {
    const SHOWN: usize = 10;
    let mut s = dates
        .iter()
        .take(SHOWN)
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    if dates.len() > SHOWN {
        s.push_str(&format!(" (+{} more)", dates.len() - SHOWN));
    }
    s
}
