use alloc::vec::Vec;
use core::f64::consts::PI;
use libm::{atan2, cos, sin, sqrt};

use super::AnalysisError;
use crate::linalg::{solve_with_damping, weighted_least_squares, Design, LeastSquares};
use crate::signal::PolarizationSeries;

/// Tuning of [`fit_wobble_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct WobbleOptions {
    /// Periodogram points per Fourier resolution element.
    pub oversample: usize,
    /// Allowed `k2/k1` during refinement.
    pub ratio_band: (f64, f64),
    /// A fit is significant when some amplitude exceeds this many standard errors.
    pub significance: f64,
    pub max_iterations: usize,
}

impl Default for WobbleOptions {
    fn default() -> Self {
        Self {
            oversample: 10,
            ratio_band: (1.8, 2.2),
            significance: 2.0,
            max_iterations: 200,
        }
    }
}

/// One `|A| (1 + cos(2kλ + 2φ))` oscillation, reported through `|A|`, `k`, `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WobbleComponent {
    /// `|A|` in Å⁻²
    pub amplitude: f64,
    pub amplitude_error: f64,
    /// `k` in Å⁻¹
    pub frequency: f64,
    pub frequency_error: f64,
    /// `φ` in rad, reduced to `[0, π)`
    pub phase: f64,
    pub phase_error: f64,
}

impl WobbleComponent {
    /// `|A| cos(2kλ + 2φ)`.
    pub fn oscillation(&self, lambda: f64) -> f64 {
        self.amplitude * cos(2.0 * (self.frequency * lambda + self.phase))
    }
}

/// Two-frequency fit of isolated oscillations.
#[derive(Debug, Clone, PartialEq)]
pub struct WobbleFit {
    pub offset: f64,
    pub offset_error: f64,
    /// Ordered by frequency.
    pub components: [WobbleComponent; 2],
    /// False when no amplitude reached the significance threshold; the
    /// amplitudes are then zero.
    pub significant: bool,
    pub chi_square: f64,
    /// Fitted wavelength window (Å) and point count.
    pub window: (f64, f64),
    pub points: usize,
    /// Periodogram resolution expressed in `k` (Å⁻¹).
    pub k_bin: f64,
}

impl WobbleFit {
    /// Zero-amplitude result carrying the window metadata.
    pub fn zero(window: (f64, f64), points: usize, k_bin: f64) -> Self {
        Self {
            offset: 0.0,
            offset_error: 0.0,
            components: [WobbleComponent::default(); 2],
            significant: false,
            chi_square: 0.0,
            window,
            points,
            k_bin,
        }
    }

    /// `Σ |A_i|`
    pub fn amplitude_sum(&self) -> f64 {
        self.components.iter().map(|c| c.amplitude).sum()
    }

    /// Oscillatory part `Σ |A_i| cos(2k_iλ + 2φ_i)` without the offset.
    pub fn oscillation(&self, lambda: f64) -> f64 {
        self.components.iter().map(|c| c.oscillation(lambda)).sum()
    }
}

/// χ² reduction obtained by adding `cos ωλ`, `sin ωλ` to a constant model,
/// for every `ω` in `omegas`.
pub fn periodogram(series: &PolarizationSeries, omegas: &[f64]) -> Result<Vec<f64>, AnalysisError> {
    let (l, y, w) = columns(series);
    let base = weighted_least_squares(&Design::from_fn(l.len(), 1, |_, _| 1.0), &y, &w)?;
    let mut out = Vec::with_capacity(omegas.len());
    for &om in omegas {
        let chi = match linear_fit(&l, &y, &w, &[om]) {
            Ok(ls) => ls.chi_square,
            Err(_) => base.chi_square,
        };
        out.push((base.chi_square - chi).max(0.0));
    }
    Ok(out)
}

/// Fits `offset + B1 cos(2k1λ + ψ1) + B2 cos(2k2λ + ψ2)` with default options.
pub fn fit_wobble(residuals: &PolarizationSeries) -> Result<WobbleFit, AnalysisError> {
    fit_wobble_with(residuals, &WobbleOptions::default())
}

/// Periodogram search for the dominant angular frequency `ω = 2k`, a
/// partner search near `2ω` or `ω/2`, then Levenberg-Marquardt refinement
/// of both frequencies with the ratio held inside `ratio_band`.
pub fn fit_wobble_with(
    residuals: &PolarizationSeries,
    options: &WobbleOptions,
) -> Result<WobbleFit, AnalysisError> {
    let n = residuals.len();
    if n < 12 {
        return Err(AnalysisError::TooFewPoints { needed: 12, got: n });
    }
    let (l, y, w) = columns(residuals);
    let span = l[n - 1] - l[0];
    let spacing = span / (n - 1) as f64;
    let window = (l[0], l[n - 1]);
    let d_omega = 2.0 * PI / (span * options.oversample.max(1) as f64);
    let k_bin = 0.5 * d_omega;
    let omega_min = 2.0 * PI / span;
    let omega_max = PI / spacing;
    let grid: Vec<f64> = (0..)
        .map(|j| omega_min + j as f64 * d_omega)
        .take_while(|&om| om <= omega_max)
        .collect();

    let power = periodogram(residuals, &grid)?;
    let (best_idx, best_power) = power
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (i, p)| if p > acc.1 { (i, p) } else { acc });
    let scale = y.iter().zip(&w).map(|(v, wt)| v * v * wt).sum::<f64>();
    if !(best_power > 1e-24 * scale.max(f64::MIN_POSITIVE)) || scale == 0.0 {
        return Ok(WobbleFit::zero(window, n, k_bin));
    }
    let omega_a = grid[best_idx];

    // partner frequency: scan the allowed band above and below the peak
    let (lo, hi) = options.ratio_band;
    let mut best_pair = None;
    let mut best_chi = f64::INFINITY;
    let steps = 40;
    for (a_lo, a_hi, partner_above) in [(omega_a * lo, omega_a * hi, true), (omega_a / hi, omega_a / lo, false)] {
        if a_hi > omega_max || a_lo < 0.5 * omega_min {
            continue;
        }
        for s in 0..=steps {
            let om_b = a_lo + (a_hi - a_lo) * s as f64 / steps as f64;
            if let Ok(ls) = linear_fit(&l, &y, &w, &[omega_a, om_b]) {
                if ls.chi_square < best_chi {
                    best_chi = ls.chi_square;
                    best_pair = Some(if partner_above { (omega_a, om_b) } else { (om_b, omega_a) });
                }
            }
        }
    }
    let (om1, om2) = match best_pair {
        Some(p) => p,
        None => return Err(AnalysisError::NoConvergence("no admissible partner frequency")),
    };

    let centre = 0.5 * (l[0] + l[n - 1]);
    let lc: Vec<f64> = l.iter().map(|v| v - centre).collect();
    let init = linear_fit(&lc, &y, &w, &[om1, om2])?;
    let mut theta = [
        init.coefficients[0],
        init.coefficients[1],
        init.coefficients[2],
        om1,
        init.coefficients[3],
        init.coefficients[4],
        om2,
    ];
    let chi = levenberg_marquardt(&lc, &y, &w, &mut theta, options)?;

    let cov = jacobian_fit(&lc, &y, &w, &theta)?.covariance;
    let c = |i: usize, j: usize| cov[i * 7 + j];
    let component = |ic: usize, is: usize, iw: usize| -> WobbleComponent {
        let (cc, ss, om) = (theta[ic], theta[is], theta[iw]);
        let b = sqrt(cc * cc + ss * ss);
        let psi = atan2(-ss, cc) - om * centre;
        // gradients of B and ψ with respect to (c, s, ω)
        let gb = [cc / b, ss / b, 0.0];
        let gp = [ss / (b * b), -cc / (b * b), -centre];
        let idx = [ic, is, iw];
        let quad = |g: &[f64; 3], h: &[f64; 3]| {
            let mut acc = 0.0;
            for a in 0..3 {
                for bb in 0..3 {
                    acc += g[a] * h[bb] * c(idx[a], idx[bb]);
                }
            }
            acc
        };
        WobbleComponent {
            amplitude: b,
            amplitude_error: sqrt(quad(&gb, &gb).max(0.0)),
            frequency: 0.5 * om,
            frequency_error: 0.5 * sqrt(c(iw, iw).max(0.0)),
            phase: (0.5 * psi).rem_euclid(PI),
            phase_error: 0.5 * sqrt(quad(&gp, &gp).max(0.0)),
        }
    };
    let first = component(1, 2, 3);
    let second = component(4, 5, 6);
    let significant = [first, second]
        .iter()
        .any(|c| c.amplitude > options.significance * c.amplitude_error);
    if !significant {
        log::warn!("no significant oscillation found; reporting zero amplitudes");
        return Ok(WobbleFit::zero(window, n, k_bin));
    }
    Ok(WobbleFit {
        offset: theta[0],
        offset_error: sqrt(c(0, 0).max(0.0)),
        components: [first, second],
        significant,
        chi_square: chi,
        window,
        points: n,
        k_bin,
    })
}

fn columns(series: &PolarizationSeries) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let rows = series.rows();
    (
        rows.iter().map(|r| r.lambda_ang).collect(),
        rows.iter().map(|r| r.value).collect(),
        rows.iter().map(|r| 1.0 / r.variance).collect(),
    )
}

/// Offset plus a cosine/sine pair for each angular frequency.
fn linear_fit(l: &[f64], y: &[f64], w: &[f64], omegas: &[f64]) -> Result<LeastSquares, AnalysisError> {
    let design = Design::from_fn(l.len(), 1 + 2 * omegas.len(), |i, j| {
        if j == 0 {
            1.0
        } else {
            let om = omegas[(j - 1) / 2];
            if j % 2 == 1 {
                cos(om * l[i])
            } else {
                sin(om * l[i])
            }
        }
    });
    Ok(weighted_least_squares(&design, y, w)?)
}

fn model(theta: &[f64; 7], x: f64) -> f64 {
    theta[0]
        + theta[1] * cos(theta[3] * x)
        + theta[2] * sin(theta[3] * x)
        + theta[4] * cos(theta[6] * x)
        + theta[5] * sin(theta[6] * x)
}

fn jacobian(l: &[f64], theta: &[f64; 7]) -> Design {
    Design::from_fn(l.len(), 7, |i, j| {
        let x = l[i];
        let (c1, s1) = (cos(theta[3] * x), sin(theta[3] * x));
        let (c2, s2) = (cos(theta[6] * x), sin(theta[6] * x));
        match j {
            0 => 1.0,
            1 => c1,
            2 => s1,
            3 => x * (-theta[1] * s1 + theta[2] * c1),
            4 => c2,
            5 => s2,
            _ => x * (-theta[4] * s2 + theta[5] * c2),
        }
    })
}

fn residual(l: &[f64], y: &[f64], theta: &[f64; 7]) -> Vec<f64> {
    l.iter().zip(y).map(|(&x, &v)| v - model(theta, x)).collect()
}

fn chi_square(l: &[f64], y: &[f64], w: &[f64], theta: &[f64; 7]) -> f64 {
    residual(l, y, theta).iter().zip(w).map(|(r, wt)| r * r * wt).sum()
}

/// Linearised fit at `theta`; its covariance is `(JᵀWJ)⁻¹`.
fn jacobian_fit(l: &[f64], y: &[f64], w: &[f64], theta: &[f64; 7]) -> Result<LeastSquares, AnalysisError> {
    Ok(weighted_least_squares(&jacobian(l, theta), &residual(l, y, theta), w)?)
}

fn levenberg_marquardt(
    l: &[f64],
    y: &[f64],
    w: &[f64],
    theta: &mut [f64; 7],
    options: &WobbleOptions,
) -> Result<f64, AnalysisError> {
    let (lo, hi) = options.ratio_band;
    let mut mu = 1e-3;
    let mut chi = chi_square(l, y, w, theta);
    for _ in 0..options.max_iterations {
        let jac = jacobian(l, theta);
        let r = residual(l, y, theta);
        let col_norms: Vec<f64> = (0..7)
            .map(|j| sqrt((0..l.len()).map(|i| w[i] * jac.at(i, j) * jac.at(i, j)).sum::<f64>()))
            .collect();
        let mut improved = false;
        for _ in 0..30 {
            let damping: Vec<f64> = col_norms.iter().map(|c| sqrt(mu) * c).collect();
            let step = solve_with_damping(&jac, &r, w, Some(&damping))?;
            let mut trial = *theta;
            for (t, d) in trial.iter_mut().zip(&step.coefficients) {
                *t += d;
            }
            trial[6] = trial[6].clamp(lo * trial[3], hi * trial[3]);
            let trial_chi = chi_square(l, y, w, &trial);
            if trial_chi <= chi {
                let change = chi - trial_chi;
                *theta = trial;
                chi = trial_chi;
                mu = (mu / 3.0).max(1e-12);
                improved = change > 1e-12 * chi.max(f64::MIN_POSITIVE);
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            return Ok(chi);
        }
    }
    Ok(chi)
}
