//! JSON shapes of fit and report outputs, and the tabulated-coefficient input.

use serde::{Deserialize, Serialize};

use sagnac_core::analysis::{
    correct_a2_estimate, polarity_report, AnalysisReport, CorrectedA2, ErrorConvention, Estimate, FitResult,
    ReportOptions, WobbleFit,
};
use sagnac_core::instrument::{c_oam_from_a2, InstrumentConfig};
use sagnac_core::signal::Polarity;

use crate::error::{Error, Result};

pub const ERROR_CONVENTION_NOTE: &str = "per-polarity errors on the corrected a2 are the quadrature sum of the \
     fit and amplitude errors unless supplied externally; published error bars may follow a different, \
     unstated convention";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateJson {
    pub value: f64,
    pub error: f64,
}

impl From<Estimate> for EstimateJson {
    fn from(e: Estimate) -> Self {
        Self { value: e.value, error: e.error }
    }
}

impl From<EstimateJson> for Estimate {
    fn from(e: EstimateJson) -> Self {
        Estimate::new(e.value, e.error)
    }
}

/// Coefficients of one polarity as tabulated (all in Å⁻²).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRow {
    pub a2_per_ang2: f64,
    pub a2_error_per_ang2: f64,
    pub amplitudes_per_ang2: Vec<f64>,
    pub amplitude_errors_per_ang2: Vec<f64>,
    /// Replaces the quadrature error on the corrected coefficient.
    #[serde(default)]
    pub corrected_error_per_ang2: Option<f64>,
}

/// Input of `report` when raw data are not available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableInput {
    pub plus: TableRow,
    pub minus: TableRow,
    /// `a2` of a single fit to the aggregated series.
    #[serde(default)]
    pub series_a2_per_ang2: Option<EstimateJson>,
}

impl TableRow {
    pub fn correct(&self, polarity: Polarity) -> Result<CorrectedA2> {
        if self.amplitudes_per_ang2.len() != self.amplitude_errors_per_ang2.len() {
            return Err(Error::Config("amplitudes and amplitude errors differ in length".into()));
        }
        let amps: Vec<Estimate> = self
            .amplitudes_per_ang2
            .iter()
            .zip(&self.amplitude_errors_per_ang2)
            .map(|(&v, &e)| Estimate::new(v, e))
            .collect();
        let c = correct_a2_estimate(Estimate::new(self.a2_per_ang2, self.a2_error_per_ang2), &amps, polarity)?;
        Ok(match self.corrected_error_per_ang2 {
            Some(e) => c.with_supplied_error(e),
            None => c,
        })
    }
}

/// Runs the correction, combination and physics report on tabulated numbers.
pub fn table_report(table: &TableInput, cfg: &InstrumentConfig, options: &ReportOptions) -> Result<AnalysisReport> {
    let plus = table.plus.correct(Polarity::Positive)?;
    let minus = table.minus.correct(Polarity::Negative)?;
    let options = ReportOptions {
        series_a2: table.series_a2_per_ang2.map(Into::into).or(options.series_a2),
        ..*options
    };
    Ok(polarity_report(plus, minus, cfg, &options)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticFitJson {
    pub epsilon: f64,
    pub a1_per_ang: f64,
    pub a2_per_ang2: f64,
    pub errors: [f64; 3],
    pub covariance: [[f64; 3]; 3],
    pub chi_square: f64,
    pub reduced_chi_square: f64,
    pub points: usize,
}

impl From<&FitResult> for QuadraticFitJson {
    fn from(f: &FitResult) -> Self {
        Self {
            epsilon: f.epsilon(),
            a1_per_ang: f.a1(),
            a2_per_ang2: f.a2(),
            errors: [f.std_error(0), f.std_error(1), f.std_error(2)],
            covariance: f.covariance,
            chi_square: f.chi_square,
            reduced_chi_square: f.reduced_chi_square,
            points: f.residuals.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WobbleComponentJson {
    pub amplitude_per_ang2: EstimateJson,
    pub k_per_ang: EstimateJson,
    pub phase_rad: EstimateJson,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WobbleFitJson {
    pub significant: bool,
    pub offset_per_ang2: EstimateJson,
    pub components: Vec<WobbleComponentJson>,
    pub window_ang: [f64; 2],
    pub points: usize,
    pub k_bin_per_ang: f64,
    pub chi_square: f64,
}

impl From<&WobbleFit> for WobbleFitJson {
    fn from(w: &WobbleFit) -> Self {
        Self {
            significant: w.significant,
            offset_per_ang2: Estimate::new(w.offset, w.offset_error).into(),
            components: w
                .components
                .iter()
                .map(|c| WobbleComponentJson {
                    amplitude_per_ang2: Estimate::new(c.amplitude, c.amplitude_error).into(),
                    k_per_ang: Estimate::new(c.frequency, c.frequency_error).into(),
                    phase_rad: Estimate::new(c.phase, c.phase_error).into(),
                })
                .collect(),
            window_ang: [w.window.0, w.window.1],
            points: w.points,
            k_bin_per_ang: w.k_bin,
            chi_square: w.chi_square,
        }
    }
}

fn polarity_name(p: Polarity) -> &'static str {
    match p {
        Polarity::Positive => "positive",
        Polarity::Negative => "negative",
        Polarity::Off => "off",
    }
}

fn convention_name(c: ErrorConvention) -> &'static str {
    match c {
        ErrorConvention::Quadrature => "quadrature",
        ErrorConvention::Supplied => "supplied",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarityJson {
    pub polarity: &'static str,
    pub a2_per_ang2: EstimateJson,
    pub amplitudes_per_ang2: Vec<EstimateJson>,
    pub corrected_a2_per_ang2: EstimateJson,
    pub error_convention: &'static str,
    pub c_oam_per_ang: EstimateJson,
}

impl PolarityJson {
    pub fn new(c: &CorrectedA2, cfg: &InstrumentConfig) -> Result<Self> {
        let c_oam = Estimate::new(
            c_oam_from_a2(c.corrected.value, cfg)?,
            c_oam_from_a2(c.corrected.error, cfg)?.abs(),
        );
        Ok(Self {
            polarity: polarity_name(c.polarity),
            a2_per_ang2: c.raw.into(),
            amplitudes_per_ang2: c.amplitudes.iter().map(|&a| a.into()).collect(),
            corrected_a2_per_ang2: c.corrected.into(),
            error_convention: convention_name(c.convention),
            c_oam_per_ang: c_oam.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaveatJson {
    pub flagged: bool,
    pub note: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityJson {
    pub sensitivity_rad_per_s: f64,
    pub reference: &'static str,
    pub measured_basis_rad_per_s: f64,
    pub theory_basis_rad_per_s: f64,
    pub basis_a2_per_ang2: EstimateJson,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryJson {
    pub a2_per_ang2: f64,
    pub c_oam_per_ang: f64,
    pub ell_slope_per_ang: f64,
}

/// Serialised [`AnalysisReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReportJson {
    pub polarities: Vec<PolarityJson>,
    pub combined_raw_a2_per_ang2: Option<EstimateJson>,
    pub combined_a2_per_ang2: EstimateJson,
    pub series_a2_per_ang2: Option<EstimateJson>,
    pub c_oam_per_ang: EstimateJson,
    pub ell_slope_per_ang: EstimateJson,
    pub sensitivity: SensitivityJson,
    pub theory: TheoryJson,
    pub error_convention_caveat: CaveatJson,
    pub consistency: &'static str,
}

impl AnalysisReportJson {
    /// Verifies the report's internal algebra before serialising it.
    pub fn new(r: &AnalysisReport, cfg: &InstrumentConfig) -> Result<Self> {
        r.check_consistency()?;
        let polarities = [&r.plus, &r.minus]
            .into_iter()
            .flatten()
            .map(|c| PolarityJson::new(c, cfg))
            .collect::<Result<Vec<_>>>()?;
        let s = &r.sensitivity;
        Ok(Self {
            polarities,
            combined_raw_a2_per_ang2: r.combined_raw.map(Into::into),
            combined_a2_per_ang2: r.combined_a2.into(),
            series_a2_per_ang2: r.series_a2.map(Into::into),
            c_oam_per_ang: r.c_oam.into(),
            ell_slope_per_ang: r.ell_slope.into(),
            sensitivity: SensitivityJson {
                sensitivity_rad_per_s: s.value(),
                reference: match s.reference {
                    sagnac_core::analysis::SensitivityReference::Measured => "measured",
                    sagnac_core::analysis::SensitivityReference::Theory => "theory",
                },
                measured_basis_rad_per_s: s.measured_rad_s,
                theory_basis_rad_per_s: s.theory_rad_s,
                basis_a2_per_ang2: s.basis.into(),
            },
            theory: TheoryJson {
                a2_per_ang2: r.theory_a2,
                c_oam_per_ang: r.theory_c_oam,
                ell_slope_per_ang: 0.5 * r.theory_c_oam,
            },
            error_convention_caveat: CaveatJson {
                flagged: r.error_convention_caveat,
                note: ERROR_CONVENTION_NOTE,
            },
            consistency: "recomputed",
        })
    }
}
