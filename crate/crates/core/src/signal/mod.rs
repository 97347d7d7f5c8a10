//! Forward model of the measured polarisation, its systematics, and seeded
//! synthetic datasets.

mod grating;
mod model;
mod series;
mod simulate;

pub use grating::{grating_correlation, simulate_grating, GratingSpec};
pub use model::{
    measured_polarization, polarization_model, ModelValue, PolarizationModelParams, WobbleTerm,
    DEFAULT_K1_PER_ANG, DEFAULT_WOBBLE_PHASES, WOBBLE_RATIO_BAND,
};
pub use series::{Polarity, PolarizationSeries, Provenance, SeriesRow, VALUE_LIMIT};
pub use simulate::{
    simulate_counts, simulate_dataset, wavelength_grid, SimulationOptions, DEFAULT_BINS,
    DEFAULT_COUNTS_PER_PULSE,
};

use crate::instrument::InstrumentError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SignalError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(&'static str),
    #[error("invalid series at row {row}: {reason}")]
    InvalidSeries { row: usize, reason: &'static str },
    #[error(transparent)]
    Instrument(#[from] InstrumentError),
}
