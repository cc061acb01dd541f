use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("invalid distribution parameters: {0}")]
    InvalidParameter(String),
    #[error("probability {0} outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),
}

/// Logic errors raised by the engine. Any of these aborts the replication.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("event scheduled at {at} before current clock {now}")]
    BackInTime { at: f64, now: f64 },
    #[error("non-finite event time {0}")]
    NonFiniteTime(f64),
    #[error("completion at {station} with nobody in service")]
    IdleCompletion { station: String },
    #[error("patient {patient} is already present at {station}")]
    DuplicateEntry { patient: u64, station: String },
    #[error("unknown patient {0}")]
    UnknownPatient(u64),
    #[error("facility {facility} did not drain by t={limit} minutes")]
    DrainTimeout { facility: usize, limit: f64 },
    #[error("lookahead for patient {patient} exceeded horizon of {horizon} minutes")]
    LookaheadHorizon { patient: u64, horizon: f64 },
    #[error("network has no facility {0}")]
    UnknownFacility(usize),
}

/// One violated constraint in a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: String,
    pub message: String,
    pub line: Option<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

/// All violations found while reading a scenario, not just the first.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigError {
    pub violations: Vec<Violation>,
}

impl ConfigError {
    pub fn single(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            violations: vec![Violation {
                field: field.into(),
                message: message.into(),
                line: None,
            }],
        }
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.violations.iter().any(|v| v.field == field)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} configuration error(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}
