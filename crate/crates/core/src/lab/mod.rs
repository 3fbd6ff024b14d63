//! Experiment drivers, file formats and the command-line front end.

pub mod cli;
pub mod config;
mod experiment;
pub mod format;
mod verify;

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::discrete::{DiscreteError, ModelError};
use crate::elliptic::EllipticError;
use crate::parabolic::ParabolicError;
use crate::problem::ProblemError;

pub use config::{Format, GeometryKind, RunConfig};
pub use experiment::{
    boundary_row_residual, lambda_star_experiment, robin_experiment, threshold_experiment, ClassifiedRun,
    LambdaStarReport, RobinReport, ThresholdOptions, ThresholdReport,
};
pub use format::{Check, ExperimentResult, Provenance, RunRecord, Snapshot};
pub use verify::{
    duality_defect, sample_power_inequality, trajectory_checks, verify_suite, Direction, InequalitySampling,
    TrajectoryChecks, VerifyOptions, VerifyReport, ENERGY_TOL, STEP_TOL,
};

#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Discrete(#[from] DiscreteError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    Parabolic(#[from] ParabolicError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl LabError {
    /// Exit status: 1 for bad input, 2 for numerical or I/O failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Precondition(_) | LabError::Format(_) | LabError::Problem(_) => 1,
            LabError::Model(ModelError::Problem(_)) => 1,
            LabError::Model(ModelError::Discrete(DiscreteError::ResolutionTooSmall { .. })) => 1,
            _ => 2,
        }
    }
}
