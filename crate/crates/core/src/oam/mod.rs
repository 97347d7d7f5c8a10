//! Orbital-angular-momentum mode algebra for offset Gaussian wavepackets.
//!
//! Lengths and momenta here are dimensionless model units. The closed-form
//! spectra in [`closed_form`] are cross-checked against the polar-grid
//! quadrature in [`grid`].

mod closed_form;
mod distribution;
mod grid;
mod moments;
mod packet;

pub use closed_form::{
    default_window, oam_spectrum, oam_spectrum_offset_planewave, oam_spectrum_split_pair,
    spectrum_with_threshold, vortex_mode_amplitude,
};
pub use distribution::{oam_moment, ModeWindow, OamDistribution, DEFAULT_CAPTURE_THRESHOLD};
pub use grid::{numeric_oam_spectrum, PolarGrid, PolarGridField, BOUNDARY_RATIO_LIMIT};
pub use moments::{
    expectation_momentum, expectation_position, extrinsic_oam, first_moment_translation_delta,
    second_moment_translation_delta, transverse_momentum_expectation,
};
pub use packet::{PacketKind, WavePacket};

/// Failures raised by the OAM routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OamError {
    #[error("invalid wavepacket: {0}")]
    InvalidPacket(&'static str),
    #[error("operation needs a {expected} packet")]
    WrongKind { expected: &'static str },
    #[error("numeric range exceeded while evaluating {0}")]
    NumericRange(&'static str),
    #[error("mode window [{}, {}] captures only {captured_mass:.6} of the mass; try [{}, {}]",
        window.min, window.max, suggested.min, suggested.max)]
    Truncation {
        window: ModeWindow,
        captured_mass: f64,
        suggested: ModeWindow,
    },
    #[error("invalid mode window [{min}, {max}]")]
    InvalidWindow { min: i64, max: i64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("grid too small: boundary magnitude is {ratio:.3e} of the peak")]
    GridExtent { ratio: f64 },
    #[error("angular grid under-resolved: {guard_mass:.3e} of the mass sits in the guard band")]
    Bandwidth { guard_mass: f64 },
    #[error("split pair with beta = pi and zero separation has no amplitude")]
    Degenerate,
    #[error("translation routes disagree: direct {direct:.12e}, term-by-term {term_by_term:.12e}")]
    Inconsistent { direct: f64, term_by_term: f64 },
}
