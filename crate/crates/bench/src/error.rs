use std::path::PathBuf;

use subzero_core::oracles::OracleError;
use subzero_core::problems::ProblemError;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid config: {0}")]
    Config(#[from] ConfigError),
    /// The instance does not satisfy the interior assumption; the run is refused.
    #[error("run refused: {0}")]
    Assumption(ProblemError),
    #[error("solver failed: {0}")]
    Solver(subzero_core::Error),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("cannot encode trace: {0}")]
    Encode(String),
    #[error("cannot merge {path}: {message}")]
    Merge { path: PathBuf, message: String },
}

impl BenchError {
    /// True when a query left the feasible set, which the solvers must never do.
    pub fn is_infeasible_query(&self) -> bool {
        matches!(self, BenchError::Solver(subzero_core::Error::Oracle(OracleError::Infeasible { .. })))
    }
}

impl From<subzero_core::Error> for BenchError {
    fn from(e: subzero_core::Error) -> Self {
        match e {
            subzero_core::Error::Problem(p @ ProblemError::InteriorViolated { .. }) => BenchError::Assumption(p),
            other => BenchError::Solver(other),
        }
    }
}
