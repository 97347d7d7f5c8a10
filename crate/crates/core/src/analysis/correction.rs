use alloc::vec::Vec;
use libm::sqrt;

use super::{AnalysisError, Estimate, FitResult, WobbleFit};
use crate::signal::{Polarity, PolarizationSeries, SeriesRow};

/// How the error on a corrected coefficient was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorConvention {
    /// Fit error and amplitude errors added in quadrature.
    Quadrature,
    /// Taken from an external source as given.
    Supplied,
}

/// `ā2 = a2 - s Σ|A_i|` for one polarity.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedA2 {
    pub polarity: Polarity,
    pub raw: Estimate,
    pub amplitudes: Vec<Estimate>,
    pub corrected: Estimate,
    pub convention: ErrorConvention,
}

impl CorrectedA2 {
    /// Replaces the error on `ā2` with an externally supplied one.
    pub fn with_supplied_error(mut self, error: f64) -> Self {
        self.corrected.error = error;
        self.convention = ErrorConvention::Supplied;
        self
    }

    pub fn amplitude_sum(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.value).sum()
    }
}

/// Removes the wobble DC from a fitted `a2`.
pub fn correct_a2(
    fit: &FitResult,
    wobble: &WobbleFit,
    polarity: Polarity,
) -> Result<CorrectedA2, AnalysisError> {
    let amplitudes: Vec<Estimate> = wobble
        .components
        .iter()
        .map(|c| Estimate::new(c.amplitude, c.amplitude_error))
        .collect();
    correct_a2_estimate(Estimate::new(fit.a2(), fit.a2_error()), &amplitudes, polarity)
}

/// [`correct_a2`] on tabulated numbers.
pub fn correct_a2_estimate(
    a2: Estimate,
    amplitudes: &[Estimate],
    polarity: Polarity,
) -> Result<CorrectedA2, AnalysisError> {
    if polarity == Polarity::Off {
        return Err(AnalysisError::InvalidInput("correction needs a rotator polarity"));
    }
    if amplitudes.iter().any(|a| a.value < 0.0 || a.error < 0.0) {
        return Err(AnalysisError::InvalidInput("wobble amplitudes must be non-negative"));
    }
    let s = polarity.sign();
    let sum: f64 = amplitudes.iter().map(|a| a.value).sum();
    let var: f64 = a2.error * a2.error + amplitudes.iter().map(|a| a.error * a.error).sum::<f64>();
    Ok(CorrectedA2 {
        polarity,
        raw: a2,
        amplitudes: amplitudes.to_vec(),
        corrected: Estimate::new(a2.value - s * sum, sqrt(var)),
        convention: ErrorConvention::Quadrature,
    })
}

/// `(x₊ - x₋)/2` with error `sqrt(σ₊² + σ₋²)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Combined {
    pub estimate: Estimate,
    /// Both inputs had the same sign, contrary to the expected polarity flip.
    pub same_sign: bool,
}

pub fn combine_polarities(plus: Estimate, minus: Estimate) -> Combined {
    let same_sign = plus.value * minus.value > 0.0;
    if same_sign {
        log::warn!("positive and negative polarity estimates share a sign");
    }
    Combined {
        estimate: Estimate::new(
            0.5 * (plus.value - minus.value),
            0.5 * sqrt(plus.error * plus.error + minus.error * minus.error),
        ),
        same_sign,
    }
}

/// Series-level combination `P_S = (P₊ - P₋)/2` with variance `(v₊ + v₋)/4`.
pub fn aggregate_series(
    plus: &PolarizationSeries,
    minus: &PolarizationSeries,
) -> Result<PolarizationSeries, AnalysisError> {
    if plus.len() != minus.len() {
        return Err(AnalysisError::InvalidInput("polarity series differ in length"));
    }
    let mut rows = Vec::with_capacity(plus.len());
    for (p, m) in plus.rows().iter().zip(minus.rows()) {
        let scale = p.lambda_ang.abs().max(1.0);
        if (p.lambda_ang - m.lambda_ang).abs() > 1e-9 * scale {
            return Err(AnalysisError::InvalidInput("polarity series use different wavelength grids"));
        }
        rows.push(SeriesRow::new(
            p.lambda_ang,
            0.5 * (p.value - m.value),
            0.25 * (p.variance + m.variance),
        ));
    }
    Ok(PolarizationSeries::derived(rows, Polarity::Positive)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitudes_leave_a2() {
        let c = correct_a2_estimate(Estimate::new(-0.9e-3, 0.08e-3), &[Estimate::default(); 2], Polarity::Negative)
            .unwrap();
        assert_eq!(c.corrected, Estimate::new(-0.9e-3, 0.08e-3));
    }

    #[test]
    fn correction_sign_follows_polarity() {
        let amps = [Estimate::new(1e-4, 0.0), Estimate::new(5e-5, 0.0)];
        let p = correct_a2_estimate(Estimate::exact(-1e-3), &amps, Polarity::Positive).unwrap();
        let m = correct_a2_estimate(Estimate::exact(1e-3), &amps, Polarity::Negative).unwrap();
        assert!((p.corrected.value + 1.15e-3).abs() < 1e-18);
        assert!((m.corrected.value - 1.15e-3).abs() < 1e-18);
        assert!(correct_a2_estimate(Estimate::exact(0.0), &amps, Polarity::Off).is_err());
    }

    #[test]
    fn equal_and_opposite_inputs() {
        let c = combine_polarities(Estimate::exact(-2e-3), Estimate::exact(2e-3));
        assert_eq!(c.estimate, Estimate::exact(-2e-3));
        assert!(!c.same_sign);
        assert!(combine_polarities(Estimate::exact(1.0), Estimate::exact(2.0)).same_sign);
    }
}
