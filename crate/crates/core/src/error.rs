use std::fmt;

use thiserror::Error;

/// Pipeline stage an error originated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Initialization,
    PowerAllocation,
    Beamforming,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Initialization => "initialization",
            Stage::PowerAllocation => "power allocation",
            Stage::Beamforming => "passive beamforming",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: entries ({row},{col}) and ({col},{row}) differ by {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible link: {0} gain is zero")]
    InfeasibleLink(&'static str),

    #[error("infeasible interference: closed-form denominator {denominator:e} is not positive")]
    InfeasibleInterference { denominator: f64 },

    #[error("matrix is not rank-one extractable: residual {residual:e} >= 1")]
    NotRankOneExtractable { residual: f64 },

    #[error("interference composite h3 is zero")]
    ZeroInterferenceChannel,

    #[error("initialization failed after {attempts} attempts")]
    InitializationFailed { attempts: usize },

    #[error("subproblem {status} at SCA iteration {iteration}")]
    Subproblem { iteration: usize, status: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at(self, stage: Stage) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error with any stage tags removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Stage tag of the outermost wrapper, if any.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
