use alloc::vec::Vec;

use super::series::{Polarity, PolarizationSeries, Provenance, SeriesRow};
use super::simulate::{simulate_counts, SimulationOptions};
use super::SignalError;
use crate::instrument::{spin_echo_constant, InstrumentConfig};

/// Binary transmission grating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingSpec {
    pub period_um: f64,
    /// Transmitting fraction of each period.
    pub duty: f64,
}

impl Default for GratingSpec {
    fn default() -> Self {
        Self {
            period_um: 2.0,
            duty: 0.5,
        }
    }
}

impl GratingSpec {
    pub fn validate(&self) -> Result<(), SignalError> {
        if !(self.period_um > 0.0 && self.period_um.is_finite()) {
            return Err(SignalError::InvalidParams("grating period must be positive"));
        }
        if !(self.duty > 0.0 && self.duty < 1.0) {
            return Err(SignalError::InvalidParams("grating duty cycle must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Autocorrelation of the transmission profile at displacement
    /// `delta_um`, normalised to 1 at zero displacement.
    pub fn autocorrelation(&self, delta_um: f64) -> f64 {
        let p = self.period_um;
        let w = self.duty * p;
        let u = delta_um.abs().rem_euclid(p);
        ((w - u).max(0.0) + (u - (p - w)).max(0.0)) / w
    }
}

/// Spin-echo polarisation of the grating on `lambdas`, with the variance a
/// counting measurement of `expected_counts` neutrons per bin would carry.
pub fn grating_correlation(
    grating: &GratingSpec,
    cfg: &InstrumentConfig,
    lambdas: &[f64],
    expected_counts: f64,
) -> Result<PolarizationSeries, SignalError> {
    grating.validate()?;
    let c_se = spin_echo_constant(cfg)?;
    let n = expected_counts.max(1.0);
    let rows: Vec<SeriesRow> = lambdas
        .iter()
        .map(|&l| {
            let p = grating.autocorrelation(c_se * l * l);
            SeriesRow::new(l, p, ((1.0 - p * p) / n).max(1.0 / (n * n)))
        })
        .collect();
    PolarizationSeries::new(rows, Polarity::Off, Provenance::Derived)
}

/// Counting-noise grating measurement on the configured band.
pub fn simulate_grating(
    grating: &GratingSpec,
    cfg: &InstrumentConfig,
    n_pulses: u64,
    seed: u64,
    options: &SimulationOptions,
) -> Result<PolarizationSeries, SignalError> {
    grating.validate()?;
    let c_se = spin_echo_constant(cfg)?;
    let (min, max) = options.band.unwrap_or((cfg.lambda_min_ang, cfg.lambda_max_ang));
    if !(min > 0.0 && min < max) || options.bins == 0 {
        return Err(SignalError::InvalidParams("wavelength band or bin count"));
    }
    let lambdas = super::simulate::wavelength_grid(min, max, options.bins);
    simulate_counts(
        |l| grating.autocorrelation(c_se * l * l),
        &lambdas,
        n_pulses,
        seed,
        options,
        Polarity::Off,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::simulate::wavelength_grid;

    #[test]
    fn autocorrelation_shape() {
        let g = GratingSpec::default();
        assert_eq!(g.autocorrelation(0.0), 1.0);
        assert_eq!(g.autocorrelation(2.0), 1.0);
        assert_eq!(g.autocorrelation(1.0), 0.0);
        assert!((g.autocorrelation(0.5) - 0.5).abs() < 1e-15);
        assert!((g.autocorrelation(1.5) - 0.5).abs() < 1e-15);
        assert!((g.autocorrelation(-0.25) - 0.75).abs() < 1e-15);
        let narrow = GratingSpec { period_um: 2.0, duty: 0.25 };
        assert_eq!(narrow.autocorrelation(0.75), 0.0);
        assert!((narrow.autocorrelation(0.25) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn peaks_at_integer_periods() {
        let mut cfg = InstrumentConfig::nominal();
        cfg.c_se_um_per_ang2 = Some(0.137);
        let lambdas = wavelength_grid(3.0, 13.0, 4000);
        let s = grating_correlation(&GratingSpec::default(), &cfg, &lambdas, 1e6).unwrap();
        let v = s.values();
        let mut peaks = Vec::new();
        for i in 1..v.len() - 1 {
            if v[i] > v[i - 1] && v[i] >= v[i + 1] {
                peaks.push(lambdas[i]);
            }
        }
        let step = lambdas[1] - lambdas[0];
        for (n, l) in (1..).zip(&peaks) {
            let expected = libm::sqrt(2.0 * n as f64 / 0.137);
            assert!((l - expected).abs() <= step, "n={n}: {l} vs {expected}");
        }
        assert!((peaks[0] - 3.82).abs() < 0.01 && (peaks[1] - 5.40).abs() < 0.01);
    }

    #[test]
    fn invalid_gratings() {
        assert!(GratingSpec { period_um: 0.0, duty: 0.5 }.validate().is_err());
        assert!(GratingSpec { period_um: 2.0, duty: 1.0 }.validate().is_err());
    }
}
