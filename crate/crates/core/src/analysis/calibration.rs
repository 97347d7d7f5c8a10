use alloc::vec::Vec;
use libm::sqrt;

use super::{AnalysisError, Estimate};
use crate::signal::{GratingSpec, PolarizationSeries};

/// Minimum topographic prominence of an accepted peak, in units of the
/// standard error at the peak.
pub const PEAK_PROMINENCE_SIGMAS: f64 = 3.0;
/// Largest distance of an implied order from an integer.
pub const ORDER_TOLERANCE: f64 = 0.25;
const MAX_FIRST_ORDER: u32 = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    /// Refined position (Å).
    pub lambda_ang: f64,
    pub height: f64,
    pub prominence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    /// `c_SE` in µm Å⁻².
    pub spin_echo_constant: Estimate,
    pub peaks: Vec<Peak>,
    /// Grating order assigned to each peak.
    pub orders: Vec<u32>,
    pub residual_sum_squares: f64,
}

/// Interior local maxima of `|value|` with a 3-point parabolic vertex.
pub fn find_peaks(series: &PolarizationSeries, min_prominence_sigmas: f64) -> Vec<Peak> {
    let rows = series.rows();
    let y: Vec<f64> = rows.iter().map(|r| r.value.abs()).collect();
    let n = y.len();
    let mut peaks = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if !(y[i] > y[i - 1] && y[i] >= y[i + 1]) {
            continue;
        }
        let prominence = prominence(&y, i);
        if prominence < min_prominence_sigmas * sqrt(rows[i].variance) {
            continue;
        }
        let (x0, x1, x2) = (rows[i - 1].lambda_ang, rows[i].lambda_ang, rows[i + 1].lambda_ang);
        let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
        let num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
        let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
        let vertex = if den != 0.0 { x1 - 0.5 * num / den } else { x1 };
        peaks.push(Peak {
            index: i,
            lambda_ang: vertex.clamp(x0, x2),
            height: rows[i].value,
            prominence,
        });
    }
    peaks
}

/// Height above the higher of the two lowest points reached before a taller
/// sample (or the series end) on either side.
fn prominence(y: &[f64], i: usize) -> f64 {
    let h = y[i];
    let mut left_min = h;
    for v in y[..i].iter().rev() {
        if *v > h {
            break;
        }
        left_min = left_min.min(*v);
    }
    let mut right_min = h;
    for v in &y[i + 1..] {
        if *v > h {
            break;
        }
        right_min = right_min.min(*v);
    }
    h - left_min.max(right_min)
}

/// Through-origin slope of `δ = c λ²`, its residual-scaled error and the RSS.
pub fn fit_through_origin(lambdas: &[f64], deltas: &[f64]) -> (Estimate, f64) {
    let sxx: f64 = lambdas.iter().map(|l| l.powi(4)).sum();
    let sxy: f64 = lambdas.iter().zip(deltas).map(|(l, d)| l * l * d).sum();
    let c = sxy / sxx;
    let rss: f64 = lambdas
        .iter()
        .zip(deltas)
        .map(|(l, d)| (d - c * l * l).powi(2))
        .sum();
    let dof = lambdas.len().saturating_sub(1).max(1) as f64;
    (Estimate::new(c, sqrt(rss / dof / sxx)), rss)
}

/// Spin-echo constant from a grating scan: detected peaks are assigned
/// consecutive orders `n0, n0+1, …`, the offset `n0` chosen by the best
/// through-origin fit of `n·period` against `λ²`.
pub fn calibrate_spin_echo_constant(
    series: &PolarizationSeries,
    grating: &GratingSpec,
) -> Result<Calibration, AnalysisError> {
    grating.validate()?;
    let peaks = find_peaks(series, PEAK_PROMINENCE_SIGMAS);
    if peaks.len() < 3 {
        return Err(AnalysisError::Calibration("fewer than 3 grating peaks detected"));
    }
    let lambdas: Vec<f64> = peaks.iter().map(|p| p.lambda_ang).collect();
    let mut ranked: Vec<(u32, Estimate, f64)> = (1..=MAX_FIRST_ORDER)
        .map(|n0| {
            let deltas: Vec<f64> = (0..peaks.len())
                .map(|j| (n0 + j as u32) as f64 * grating.period_um)
                .collect();
            let (c, rss) = fit_through_origin(&lambdas, &deltas);
            (n0, c, rss)
        })
        .collect();
    ranked.sort_by(|a, b| a.2.total_cmp(&b.2));
    let (n0, c, rss) = ranked[0];
    if ranked[1].2 <= 4.0 * rss {
        return Err(AnalysisError::Ambiguity("order offset not resolved by the peak set"));
    }
    let orders: Vec<u32> = (0..peaks.len()).map(|j| n0 + j as u32).collect();
    for (l, n) in lambdas.iter().zip(&orders) {
        let implied = c.value * l * l / grating.period_um;
        if (implied - *n as f64).abs() > ORDER_TOLERANCE {
            return Err(AnalysisError::Ambiguity("peaks do not follow consecutive orders"));
        }
    }
    Ok(Calibration {
        spin_echo_constant: c,
        peaks,
        orders,
        residual_sum_squares: rss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{Polarity, Provenance, SeriesRow};

    fn series_from(f: impl Fn(f64) -> f64, bins: usize) -> PolarizationSeries {
        let rows = (0..bins)
            .map(|i| {
                let l = 3.0 + 10.0 * (i as f64 + 0.5) / bins as f64;
                SeriesRow::new(l, f(l), 1e-6)
            })
            .collect();
        PolarizationSeries::new(rows, Polarity::Off, Provenance::Measured).unwrap()
    }

    #[test]
    fn arithmetic_peak_set() {
        // peaks at λ_n² = 14.6 n ⇒ c = 2/14.6
        let lambdas: Vec<f64> = (1..=5).map(|n| sqrt(14.6 * n as f64)).collect();
        let deltas: Vec<f64> = (1..=5).map(|n| 2.0 * n as f64).collect();
        let (c, rss) = fit_through_origin(&lambdas, &deltas);
        assert!((c.value - 2.0 / 14.6).abs() < 1e-15);
        assert!(rss < 1e-24);
    }

    #[test]
    fn smooth_peaks_recover_constant() {
        let c_se = 0.137;
        let g = GratingSpec::default();
        let s = series_from(|l| 0.5 * (1.0 + libm::cos(PI2 * c_se * l * l / g.period_um)), 4000);
        let cal = calibrate_spin_echo_constant(&s, &g).unwrap();
        assert!((cal.spin_echo_constant.value / c_se - 1.0).abs() < 1e-5);
        assert_eq!(cal.orders[0], 1);
    }

    #[test]
    fn too_few_peaks() {
        let s = series_from(|l| libm::exp(-(l - 6.0) * (l - 6.0)), 100);
        assert!(matches!(
            calibrate_spin_echo_constant(&s, &GratingSpec::default()),
            Err(AnalysisError::Calibration(_))
        ));
    }

    #[test]
    fn missing_peak_is_rejected() {
        let c_se = 0.137;
        let g = GratingSpec::default();
        // suppress the third order
        let s = series_from(
            |l| {
                let n = c_se * l * l / g.period_um;
                let v = 0.5 * (1.0 + libm::cos(PI2 * n));
                if (n - 3.0).abs() < 0.5 { 0.0 } else { v }
            },
            4000,
        );
        assert!(matches!(
            calibrate_spin_echo_constant(&s, &g),
            Err(AnalysisError::Ambiguity(_))
        ));
    }

    const PI2: f64 = 2.0 * core::f64::consts::PI;
}
