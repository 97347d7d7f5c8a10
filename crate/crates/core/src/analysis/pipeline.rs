use alloc::vec::Vec;

use super::{
    combine_polarities, correct_a2, fit_wobble_with, isolate_oscillations, weighted_quadratic_fit,
    AnalysisError, Combined, CorrectedA2, FitResult, WobbleFit, WobbleOptions,
};
use crate::signal::{Polarity, PolarizationSeries, SeriesRow};

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionOptions {
    pub wobble: WobbleOptions,
    /// Overrides the polarity tag of the series.
    pub polarity: Option<Polarity>,
    pub max_iterations: usize,
    /// Stop once `a2` moves by less than this fraction of its error.
    pub tolerance: f64,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self {
            wobble: WobbleOptions::default(),
            polarity: None,
            max_iterations: 100,
            tolerance: 1e-6,
        }
    }
}

/// Outcome of [`reduce_polarity`].
#[derive(Debug, Clone, PartialEq)]
pub struct PolarityReduction {
    /// Quadratic fit of the raw series.
    pub raw_fit: FitResult,
    /// Oscillations isolated from the final quadratic fit.
    pub residuals: PolarizationSeries,
    pub wobble: WobbleFit,
    /// Quadratic fit after the fitted oscillations were subtracted.
    pub dewiggled_fit: FitResult,
    pub corrected: CorrectedA2,
    pub iterations: usize,
}

/// Full reduction of one polarity: quadratic fit, oscillation isolation,
/// wobble fit, removal of the oscillating part and refit, alternated until
/// `a2` settles, then the DC correction.
pub fn reduce_polarity(
    series: &PolarizationSeries,
    options: &ReductionOptions,
) -> Result<PolarityReduction, AnalysisError> {
    let polarity = options.polarity.unwrap_or(series.polarity());
    let raw_fit = weighted_quadratic_fit(series)?;
    let mut fit = raw_fit.clone();
    let mut residuals = isolate_oscillations(series, &fit)?;
    let mut wobble = fit_wobble_with(&residuals, &options.wobble)?;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        iterations += 1;
        let cleaned = subtract_oscillation(series, &wobble)?;
        let next = weighted_quadratic_fit(&cleaned)?;
        let moved = (next.a2() - fit.a2()).abs();
        fit = next;
        residuals = isolate_oscillations(series, &fit)?;
        wobble = fit_wobble_with(&residuals, &options.wobble)?;
        if !wobble.significant || moved <= options.tolerance * fit.a2_error() {
            break;
        }
    }
    if !wobble.significant {
        fit = raw_fit.clone();
    }
    let corrected = correct_a2(&fit, &wobble, polarity)?;
    Ok(PolarityReduction {
        raw_fit,
        residuals,
        wobble,
        dewiggled_fit: fit,
        corrected,
        iterations,
    })
}

/// Both polarities reduced and combined at the coefficient level.
#[derive(Debug, Clone, PartialEq)]
pub struct PairReduction {
    pub plus: PolarityReduction,
    pub minus: PolarityReduction,
    pub raw: Combined,
    pub corrected: Combined,
}

pub fn reduce_pair(
    plus: &PolarizationSeries,
    minus: &PolarizationSeries,
    options: &ReductionOptions,
) -> Result<PairReduction, AnalysisError> {
    let plus_opts = ReductionOptions { polarity: Some(Polarity::Positive), ..options.clone() };
    let minus_opts = ReductionOptions { polarity: Some(Polarity::Negative), ..options.clone() };
    let p = reduce_polarity(plus, &plus_opts)?;
    let m = reduce_polarity(minus, &minus_opts)?;
    let raw = combine_polarities(
        super::Estimate::new(p.raw_fit.a2(), p.raw_fit.a2_error()),
        super::Estimate::new(m.raw_fit.a2(), m.raw_fit.a2_error()),
    );
    let corrected = combine_polarities(p.corrected.corrected, m.corrected.corrected);
    Ok(PairReduction { plus: p, minus: m, raw, corrected })
}

/// `value - λ² Σ B_i cos(2k_iλ + 2φ_i)`; the wobble offset stays in the data.
pub fn subtract_oscillation(
    series: &PolarizationSeries,
    wobble: &WobbleFit,
) -> Result<PolarizationSeries, AnalysisError> {
    let rows: Vec<SeriesRow> = series
        .rows()
        .iter()
        .map(|r| {
            let l = r.lambda_ang;
            SeriesRow::new(l, r.value - l * l * wobble.oscillation(l), r.variance)
        })
        .collect();
    Ok(PolarizationSeries::derived(rows, series.polarity())?)
}
