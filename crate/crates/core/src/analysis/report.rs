use libm::sqrt;

use super::{combine_polarities, AnalysisError, CorrectedA2, ErrorConvention, Estimate};
use crate::instrument::{c_oam_from_a2, ell_slope_from_c_oam, predict_a2, InstrumentConfig};
use crate::signal::Polarity;

/// Denominator used for the headline rotational sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SensitivityReference {
    /// `Ω σ / |a2|` with the measured coefficient.
    #[default]
    Measured,
    /// `Ω σ / |a2|` with the configured prediction.
    Theory,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReportOptions {
    pub reference: SensitivityReference,
    /// `a2` from a single fit of the aggregated series; when present the
    /// sensitivity is based on it.
    pub series_a2: Option<Estimate>,
}

/// Smallest resolvable rotation rate (rad s⁻¹).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivity {
    pub measured_rad_s: f64,
    pub theory_rad_s: f64,
    pub reference: SensitivityReference,
    /// The `a2` whose error sets the bound.
    pub basis: Estimate,
}

impl Sensitivity {
    pub fn value(&self) -> f64 {
        match self.reference {
            SensitivityReference::Measured => self.measured_rad_s,
            SensitivityReference::Theory => self.theory_rad_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub plus: Option<CorrectedA2>,
    pub minus: Option<CorrectedA2>,
    /// Combination of the uncorrected coefficients.
    pub combined_raw: Option<Estimate>,
    /// Combination of the corrected coefficients, or the direct input.
    pub combined_a2: Estimate,
    pub series_a2: Option<Estimate>,
    /// Å⁻¹
    pub c_oam: Estimate,
    /// ħ Å⁻¹
    pub ell_slope: Estimate,
    pub theory_a2: f64,
    pub theory_c_oam: f64,
    pub sensitivity: Sensitivity,
    /// Set when per-polarity errors come from a convention that may differ
    /// from the one behind published error bars.
    pub error_convention_caveat: bool,
}

impl AnalysisReport {
    /// Recomputes the combination and the slope from the stored inputs.
    pub fn check_consistency(&self) -> Result<(), AnalysisError> {
        if let (Some(p), Some(m)) = (&self.plus, &self.minus) {
            let c = combine_polarities(p.corrected, m.corrected).estimate;
            if !close(c.value, self.combined_a2.value) || !close(c.error, self.combined_a2.error) {
                return Err(AnalysisError::Inconsistent("combined a2 does not match its inputs"));
            }
            if let Some(raw) = self.combined_raw {
                let r = combine_polarities(p.raw, m.raw).estimate;
                if !close(r.value, raw.value) || !close(r.error, raw.error) {
                    return Err(AnalysisError::Inconsistent("combined raw a2 does not match its inputs"));
                }
            }
        }
        let slope = ell_slope_from_c_oam(self.c_oam.value);
        if !close(slope, self.ell_slope.value) {
            return Err(AnalysisError::Inconsistent("OAM slope is not half of c_OAM"));
        }
        Ok(())
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn rate_bound(omega: f64, error: f64, reference: f64) -> f64 {
    if error == 0.0 {
        0.0
    } else {
        omega * error / reference.abs()
    }
}

/// `c_OAM`, the OAM slope and the rotational sensitivity for a combined `a2`.
pub fn physics_report(
    a2: Estimate,
    cfg: &InstrumentConfig,
    options: &ReportOptions,
) -> Result<AnalysisReport, AnalysisError> {
    cfg.validate()?;
    let c_oam = Estimate::new(c_oam_from_a2(a2.value, cfg)?, c_oam_from_a2(a2.error, cfg)?.abs());
    let ell_slope = c_oam.scaled(0.5);
    let theory_a2 = predict_a2(cfg)?;
    let basis = options.series_a2.unwrap_or(a2);
    let sensitivity = Sensitivity {
        measured_rad_s: rate_bound(cfg.omega_rad_s, basis.error, basis.value),
        theory_rad_s: rate_bound(cfg.omega_rad_s, basis.error, theory_a2),
        reference: options.reference,
        basis,
    };
    Ok(AnalysisReport {
        plus: None,
        minus: None,
        combined_raw: None,
        combined_a2: a2,
        series_a2: options.series_a2,
        c_oam,
        ell_slope,
        theory_a2,
        theory_c_oam: c_oam_from_a2(theory_a2, cfg)?,
        sensitivity,
        error_convention_caveat: false,
    })
}

/// Report built from both corrected polarities.
pub fn polarity_report(
    plus: CorrectedA2,
    minus: CorrectedA2,
    cfg: &InstrumentConfig,
    options: &ReportOptions,
) -> Result<AnalysisReport, AnalysisError> {
    if plus.polarity != Polarity::Positive || minus.polarity != Polarity::Negative {
        return Err(AnalysisError::InvalidInput("expected one positive and one negative polarity"));
    }
    let combined = combine_polarities(plus.corrected, minus.corrected).estimate;
    let raw = combine_polarities(plus.raw, minus.raw).estimate;
    let mut report = physics_report(combined, cfg, options)?;
    report.error_convention_caveat = [plus.convention, minus.convention]
        .iter()
        .any(|c| matches!(c, ErrorConvention::Quadrature | ErrorConvention::Supplied));
    report.combined_raw = Some(raw);
    report.plus = Some(plus);
    report.minus = Some(minus);
    report.check_consistency()?;
    Ok(report)
}

/// `sqrt(Σ σ_i²)`
pub fn quadrature(errors: &[f64]) -> f64 {
    sqrt(errors.iter().map(|e| e * e).sum())
}
