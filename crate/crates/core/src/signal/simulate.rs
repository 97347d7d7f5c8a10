use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::model::{measured_polarization, PolarizationModelParams};
use super::series::{Polarity, PolarizationSeries, Provenance, SeriesRow};
use super::SignalError;
use crate::instrument::InstrumentConfig;

pub const DEFAULT_BINS: usize = 200;
/// Expected neutrons per wavelength bin per pulse.
pub const DEFAULT_COUNTS_PER_PULSE: f64 = 25.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOptions {
    pub bins: usize,
    pub counts_per_pulse: f64,
    /// Replace the counting noise by its expectation.
    pub noiseless: bool,
    /// Overrides the configured wavelength band.
    pub band: Option<(f64, f64)>,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            counts_per_pulse: DEFAULT_COUNTS_PER_PULSE,
            noiseless: false,
            band: None,
        }
    }
}

/// Centres of `bins` uniform bins spanning `[min, max]`.
pub fn wavelength_grid(min: f64, max: f64, bins: usize) -> Vec<f64> {
    let width = (max - min) / bins as f64;
    (0..bins).map(|i| min + (i as f64 + 0.5) * width).collect()
}

/// Draws a seeded two-channel counting dataset from the polarisation model
/// on the configured wavelength band.
pub fn simulate_dataset(
    params: &PolarizationModelParams,
    cfg: &InstrumentConfig,
    n_pulses: u64,
    seed: u64,
    options: &SimulationOptions,
) -> Result<PolarizationSeries, SignalError> {
    params.validate()?;
    let (min, max) = options.band.unwrap_or((cfg.lambda_min_ang, cfg.lambda_max_ang));
    if !(min > 0.0 && min < max) || options.bins == 0 {
        return Err(SignalError::InvalidParams("wavelength band or bin count"));
    }
    let lambdas = wavelength_grid(min, max, options.bins);
    simulate_counts(
        |l| measured_polarization(params, l),
        &lambdas,
        n_pulses,
        seed,
        options,
        params.polarity,
    )
}

/// Counting model shared by all simulators: for target polarisation `P`
/// and expected total `N`, `N± ~ Poisson(N (1 ± P)/2)`; each bin uses its
/// own stream of the seeded generator.
pub fn simulate_counts(
    target: impl Fn(f64) -> f64,
    lambdas: &[f64],
    n_pulses: u64,
    seed: u64,
    options: &SimulationOptions,
    polarity: Polarity,
) -> Result<PolarizationSeries, SignalError> {
    if n_pulses == 0 {
        return Err(SignalError::InvalidParams("n_pulses must be positive"));
    }
    if !(options.counts_per_pulse > 0.0 && options.counts_per_pulse.is_finite()) {
        return Err(SignalError::InvalidParams("counts per pulse must be positive"));
    }
    let expected_total = n_pulses as f64 * options.counts_per_pulse;
    let mut rows = Vec::with_capacity(lambdas.len());
    for (bin, &lambda) in lambdas.iter().enumerate() {
        let p = target(lambda).clamp(-1.0, 1.0);
        let mean_up = 0.5 * expected_total * (1.0 + p);
        let mean_down = 0.5 * expected_total * (1.0 - p);
        let (n_up, n_down) = if options.noiseless {
            (mean_up, mean_down)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(bin as u64);
            (draw(mean_up, &mut rng)?, draw(mean_down, &mut rng)?)
        };
        let n = n_up + n_down;
        if n <= 0.0 {
            log::warn!("dropping wavelength bin {lambda} Å with zero counts");
            continue;
        }
        let (value, variance) = if options.noiseless {
            (p, ((1.0 - p * p) / n).max(1.0 / (n * n)))
        } else {
            ((n_up - n_down) / n, (4.0 * n_up * n_down / (n * n * n)).max(1.0 / (n * n)))
        };
        rows.push(SeriesRow {
            lambda_ang: lambda,
            value,
            variance,
            n_up: Some(n_up),
            n_down: Some(n_down),
        });
    }
    PolarizationSeries::new(rows, polarity, Provenance::Synthetic { seed })
}

fn draw(mean: f64, rng: &mut ChaCha8Rng) -> Result<f64, SignalError> {
    if mean <= 0.0 {
        return Ok(0.0);
    }
    let dist = Poisson::new(mean).map_err(|_| SignalError::InvalidParams("Poisson mean"))?;
    Ok(dist.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::model::PolarizationModelParams;

    fn params() -> PolarizationModelParams {
        PolarizationModelParams::for_polarity(
            Polarity::Positive,
            -1.083e-3,
            PolarizationModelParams::default_wobble(14.4e-5, 8.22e-5),
        )
    }

    #[test]
    fn deterministic_for_a_seed() {
        let cfg = InstrumentConfig::nominal();
        let o = SimulationOptions::default();
        let a = simulate_dataset(&params(), &cfg, 100, 7, &o).unwrap();
        let b = simulate_dataset(&params(), &cfg, 100, 7, &o).unwrap();
        let c = simulate_dataset(&params(), &cfg, 100, 8, &o).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), DEFAULT_BINS);
        assert_eq!(a.rows()[0].lambda_ang, 4.0 + 8.75 / 400.0);
    }

    #[test]
    fn noiseless_matches_model() {
        let cfg = InstrumentConfig::nominal();
        let o = SimulationOptions {
            noiseless: true,
            ..SimulationOptions::default()
        };
        let s = simulate_dataset(&params(), &cfg, 10, 0, &o).unwrap();
        for r in s.rows() {
            assert_eq!(r.value, measured_polarization(&params(), r.lambda_ang));
        }
    }

    #[test]
    fn variance_scales_inversely_with_pulses() {
        let cfg = InstrumentConfig::nominal();
        let o = SimulationOptions::default();
        let lo = simulate_dataset(&params(), &cfg, 1_000, 3, &o).unwrap();
        let hi = simulate_dataset(&params(), &cfg, 10_000, 3, &o).unwrap();
        let mean = |s: &PolarizationSeries| s.variances().iter().sum::<f64>() / s.len() as f64;
        let ratio = mean(&lo) / mean(&hi);
        assert!((ratio / 10.0 - 1.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn rejects_zero_pulses() {
        let cfg = InstrumentConfig::nominal();
        assert!(simulate_dataset(&params(), &cfg, 0, 0, &SimulationOptions::default()).is_err());
    }
}
