use alloc::vec::Vec;

use super::AnalysisError;
use crate::linalg::{weighted_least_squares, Design};
use crate::signal::{PolarizationSeries, SeriesRow};

pub const MIN_FIT_POINTS: usize = 10;

/// Weighted fit of `ε + a1 λ + a2 λ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// `[ε, a1, a2]`
    pub coefficients: [f64; 3],
    /// Inverse weighted normal matrix, not rescaled by the reduced χ².
    pub covariance: [[f64; 3]; 3],
    pub chi_square: f64,
    pub reduced_chi_square: f64,
    /// `value - model`, one per input row.
    pub residuals: Vec<f64>,
}

impl FitResult {
    pub fn epsilon(&self) -> f64 {
        self.coefficients[0]
    }

    pub fn a1(&self) -> f64 {
        self.coefficients[1]
    }

    pub fn a2(&self) -> f64 {
        self.coefficients[2]
    }

    pub fn std_error(&self, j: usize) -> f64 {
        libm::sqrt(self.covariance[j][j].max(0.0))
    }

    pub fn a2_error(&self) -> f64 {
        self.std_error(2)
    }

    pub fn evaluate(&self, lambda: f64) -> f64 {
        let [e, a1, a2] = self.coefficients;
        e + a1 * lambda + a2 * lambda * lambda
    }
}

/// Fits `ε + a1 λ + a2 λ²` with weights `1/variance` by Householder QR.
pub fn weighted_quadratic_fit(series: &PolarizationSeries) -> Result<FitResult, AnalysisError> {
    let rows = series.rows();
    if rows.len() < MIN_FIT_POINTS {
        return Err(AnalysisError::TooFewPoints {
            needed: MIN_FIT_POINTS,
            got: rows.len(),
        });
    }
    let design = Design::from_fn(rows.len(), 3, |i, j| libm::pow(rows[i].lambda_ang, j as f64));
    let y: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let w: Vec<f64> = rows.iter().map(|r| 1.0 / r.variance).collect();
    let ls = weighted_least_squares(&design, &y, &w)?;
    let mut covariance = [[0.0; 3]; 3];
    for (j, row) in covariance.iter_mut().enumerate() {
        for (k, c) in row.iter_mut().enumerate() {
            *c = ls.covariance[j * 3 + k];
        }
    }
    let dof = (rows.len() - 3) as f64;
    Ok(FitResult {
        coefficients: [ls.coefficients[0], ls.coefficients[1], ls.coefficients[2]],
        covariance,
        chi_square: ls.chi_square,
        reduced_chi_square: ls.chi_square / dof,
        residuals: ls.residuals,
    })
}

/// `(value - quadratic)/λ²` with variance `variance/λ⁴`.
pub fn isolate_oscillations(
    series: &PolarizationSeries,
    fit: &FitResult,
) -> Result<PolarizationSeries, AnalysisError> {
    let mut rows = Vec::with_capacity(series.len());
    for r in series.rows() {
        let l2 = r.lambda_ang * r.lambda_ang;
        if l2 == 0.0 {
            return Err(AnalysisError::InvalidInput("zero wavelength in oscillation isolation"));
        }
        rows.push(SeriesRow::new(
            r.lambda_ang,
            (r.value - fit.evaluate(r.lambda_ang)) / l2,
            r.variance / (l2 * l2),
        ));
    }
    Ok(PolarizationSeries::derived(rows, series.polarity())?)
}
