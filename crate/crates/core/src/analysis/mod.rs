//! Convergence-rate fits and verification reports.

mod alexandrov;
mod fit;
mod invariants;
mod limit;
mod persistence;
mod report;
mod sweep;

use thiserror::Error;

use crate::catalog::CatalogError;
use crate::field::FieldError;
use crate::flow::FlowError;
use crate::geometry::GeometryError;

pub use alexandrov::{
    alexandrov_scaling, discrete_reference_perimeter, verify_alexandrov_along_flow,
    AlexandrovReport, AlexandrovSample, ScalingReport,
};
pub use fit::{fit_decay, fit_exponential_rate, fit_line, LineFit, RateFit, TimeSeries};
pub use invariants::{perimeter_series, verify_flow_invariants};
pub use limit::{detect_limit, LimitReport};
pub use persistence::{
    distance_persistence_check, persistence_sweep, PersistenceReport, PersistenceSweep,
};
pub use report::{CheckRecord, SkippedCheck, VerificationReport};
pub use sweep::{run_sweep, SweepJob, SweepOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("value {value} at t = {time} is not positive; cannot take its logarithm")]
    NonPositive { time: f64, value: f64 },
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("state at step {step} is unclassified (perimeter {perimeter}, deviation {deviation:e})")]
    Unclassified {
        step: usize,
        perimeter: f64,
        deviation: f64,
    },
    #[error("flow failed at step {step}: {error}")]
    Run { step: usize, error: FlowError },
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Field(#[from] FieldError),
}
