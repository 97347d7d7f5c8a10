//! Reduction of polarisation series: grating calibration, weighted
//! quadratic fits, wobble isolation and fitting, polarity correction and
//! combination, and the physics report.

mod calibration;
mod correction;
mod pipeline;
mod quadratic;
mod report;
mod wobble;

pub use calibration::*;
pub use correction::*;
pub use pipeline::*;
pub use quadratic::*;
pub use report::*;
pub use wobble::*;

use crate::instrument::InstrumentError;
use crate::linalg::LinalgError;
use crate::signal::SignalError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("calibration failed: {0}")]
    Calibration(&'static str),
    #[error("ambiguous peak order assignment: {0}")]
    Ambiguity(&'static str),
    #[error("fit did not converge: {0}")]
    NoConvergence(&'static str),
    #[error("report inconsistent: {0}")]
    Inconsistent(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Instrument(#[from] InstrumentError),
}

/// A value with its one-standard-deviation error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub const fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            error: self.error * factor.abs(),
        }
    }
}
