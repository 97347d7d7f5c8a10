//! JSON run configuration and the instrument document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sagnac_core::analysis::{ReductionOptions, SensitivityReference, WobbleOptions};
use sagnac_core::instrument::{
    effective_length_for_oam_ratio, InstrumentConfig, Orientation, CODATA, NOMINAL_BAND_ANG,
};
use sagnac_core::signal::{GratingSpec, SimulationOptions, DEFAULT_K1_PER_ANG, DEFAULT_WOBBLE_PHASES};

use crate::error::{Error, Result};

/// Instrument document. Angles are in degrees here and radians in
/// [`InstrumentConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstrumentJson {
    pub l1_m: f64,
    pub l2_m: f64,
    pub l3_m: f64,
    pub latitude_deg: f64,
    pub theta_deg: f64,
    #[serde(default)]
    pub b0_tesla: Option<f64>,
    #[serde(default)]
    pub rf_hz: Option<f64>,
    #[serde(default)]
    pub c_se_um_per_ang2: Option<f64>,
    #[serde(default = "earth_rate")]
    pub omega_rad_s: f64,
    #[serde(default = "band_min")]
    pub lambda_min_ang: f64,
    #[serde(default = "band_max")]
    pub lambda_max_ang: f64,
}

fn earth_rate() -> f64 {
    CODATA.earth_rotation
}

fn band_min() -> f64 {
    NOMINAL_BAND_ANG.0
}

fn band_max() -> f64 {
    NOMINAL_BAND_ANG.1
}

impl From<&InstrumentConfig> for InstrumentJson {
    fn from(c: &InstrumentConfig) -> Self {
        Self {
            l1_m: c.l1_m,
            l2_m: c.l2_m,
            l3_m: c.l3_m,
            latitude_deg: c.latitude_rad.to_degrees(),
            theta_deg: c.theta_rad.to_degrees(),
            b0_tesla: c.b0_tesla,
            rf_hz: c.rf_hz,
            c_se_um_per_ang2: c.c_se_um_per_ang2,
            omega_rad_s: c.omega_rad_s,
            lambda_min_ang: c.lambda_min_ang,
            lambda_max_ang: c.lambda_max_ang,
        }
    }
}

impl InstrumentJson {
    /// Validated instrument; the orientation is the default one.
    pub fn to_config(&self) -> Result<InstrumentConfig> {
        let cfg = InstrumentConfig {
            l1_m: self.l1_m,
            l2_m: self.l2_m,
            l3_m: self.l3_m,
            latitude_rad: self.latitude_deg.to_radians(),
            theta_rad: self.theta_deg.to_radians(),
            b0_tesla: self.b0_tesla,
            rf_hz: self.rf_hz,
            c_se_um_per_ang2: self.c_se_um_per_ang2,
            omega_rad_s: self.omega_rad_s,
            lambda_min_ang: self.lambda_min_ang,
            lambda_max_ang: self.lambda_max_ang,
            orientation: Orientation::default(),
        };
        cfg.validate().map_err(|e| Error::Config(format!("instrument: {e}")))?;
        Ok(cfg)
    }
}

/// Inline instrument document or a path to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstrumentSource {
    Path(PathBuf),
    Inline(InstrumentJson),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WobbleConfig {
    /// `[|A1|, |A2|]` in Å⁻² for the positive polarity.
    pub plus_amplitudes_per_ang2: [f64; 2],
    pub minus_amplitudes_per_ang2: [f64; 2],
    pub k1_per_ang: f64,
    /// Defaults to `2 k1`.
    pub k2_per_ang: Option<f64>,
    pub phases_rad: [f64; 2],
}

impl Default for WobbleConfig {
    fn default() -> Self {
        Self {
            plus_amplitudes_per_ang2: [14.4e-5, 8.22e-5],
            minus_amplitudes_per_ang2: [8.88e-5, 6.23e-5],
            k1_per_ang: DEFAULT_K1_PER_ANG,
            k2_per_ang: None,
            phases_rad: [DEFAULT_WOBBLE_PHASES.0, DEFAULT_WOBBLE_PHASES.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GratingConfig {
    pub period_um: f64,
    pub duty: f64,
    pub n_pulses: u64,
}

impl Default for GratingConfig {
    fn default() -> Self {
        let g = GratingSpec::default();
        Self {
            period_um: g.period_um,
            duty: g.duty,
            n_pulses: 1000,
        }
    }
}

impl GratingConfig {
    pub fn spec(&self) -> GratingSpec {
        GratingSpec {
            period_um: self.period_um,
            duty: self.duty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub seed: Option<u64>,
    pub n_pulses: u64,
    pub counts_per_pulse: f64,
    pub bins: usize,
    pub noiseless: bool,
    pub band_ang: Option<[f64; 2]>,
    /// Sagnac coefficient to inject; the instrument prediction when absent.
    pub a2_sagnac_per_ang2: Option<f64>,
    pub epsilon: f64,
    pub a1_per_ang: f64,
    pub p0: f64,
    pub wobble: WobbleConfig,
    pub grating: GratingConfig,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        let o = SimulationOptions::default();
        Self {
            seed: None,
            n_pulses: 500,
            counts_per_pulse: o.counts_per_pulse,
            bins: o.bins,
            noiseless: false,
            band_ang: None,
            a2_sagnac_per_ang2: None,
            epsilon: 0.0,
            a1_per_ang: 0.0,
            p0: 1.0,
            wobble: WobbleConfig::default(),
            grating: GratingConfig::default(),
        }
    }
}

impl SimulationConfig {
    pub fn options(&self) -> SimulationOptions {
        SimulationOptions {
            bins: self.bins,
            counts_per_pulse: self.counts_per_pulse,
            noiseless: self.noiseless,
            band: self.band_ang.map(|[a, b]| (a, b)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SensitivityChoice {
    #[default]
    Measured,
    Theory,
}

impl From<SensitivityChoice> for SensitivityReference {
    fn from(c: SensitivityChoice) -> Self {
        match c {
            SensitivityChoice::Measured => SensitivityReference::Measured,
            SensitivityChoice::Theory => SensitivityReference::Theory,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// Wavelength window (Å) applied to series before fitting.
    pub window_ang: Option<[f64; 2]>,
    pub wobble_significance: f64,
    pub wobble_ratio_band: [f64; 2],
    pub periodogram_oversample: usize,
    pub max_iterations: usize,
    pub sensitivity_reference: SensitivityChoice,
    /// Fixes the conversion `c_OAM / a2` (Å) by rescaling the effective
    /// arm length of the instrument.
    pub oam_ratio_ang: Option<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let w = WobbleOptions::default();
        let r = ReductionOptions::default();
        Self {
            window_ang: None,
            wobble_significance: w.significance,
            wobble_ratio_band: [w.ratio_band.0, w.ratio_band.1],
            periodogram_oversample: w.oversample,
            max_iterations: r.max_iterations,
            sensitivity_reference: SensitivityChoice::default(),
            oam_ratio_ang: None,
        }
    }
}

impl AnalysisConfig {
    pub fn reduction(&self) -> ReductionOptions {
        ReductionOptions {
            wobble: WobbleOptions {
                oversample: self.periodogram_oversample,
                ratio_band: (self.wobble_ratio_band[0], self.wobble_ratio_band[1]),
                significance: self.wobble_significance,
                ..WobbleOptions::default()
            },
            max_iterations: self.max_iterations,
            ..ReductionOptions::default()
        }
    }
}

/// Existing datasets consumed by `calibrate`, `fit` and `report`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct InputsConfig {
    pub plus: Option<PathBuf>,
    pub minus: Option<PathBuf>,
    pub grating: Option<PathBuf>,
    /// Tabulated per-polarity coefficients (see [`crate::report::TableInput`]).
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PacketKindJson {
    Offset,
    SplitPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketJson {
    pub name: String,
    pub kind: PacketKindJson,
    #[serde(default = "unit")]
    pub amplitude: f64,
    /// Offset δ for offset packets, separation 2δ for split pairs.
    pub displacement: f64,
    pub coherence_length: f64,
    #[serde(default)]
    pub transverse_momentum: f64,
    #[serde(default)]
    pub relative_phase_rad: f64,
    #[serde(default)]
    pub window: Option<[i64; 2]>,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadialProfileJson {
    pub packet: String,
    pub modes: Vec<i64>,
    pub r_max: f64,
    pub points: usize,
}

impl Default for RadialProfileJson {
    fn default() -> Self {
        Self {
            packet: "offset_k4_d10_s2".into(),
            modes: (38..=42).collect(),
            r_max: 20.0,
            points: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecomposeConfig {
    pub packets: Vec<PacketJson>,
    pub profiles: Vec<RadialProfileJson>,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        let offset = |name: &str, k: f64, d: f64, s: f64| PacketJson {
            name: name.into(),
            kind: PacketKindJson::Offset,
            amplitude: 1.0,
            displacement: d,
            coherence_length: s,
            transverse_momentum: k,
            relative_phase_rad: 0.0,
            window: None,
        };
        let split = |name: &str, d: f64, s: f64, beta: f64| PacketJson {
            name: name.into(),
            kind: PacketKindJson::SplitPair,
            amplitude: 1.0,
            displacement: d,
            coherence_length: s,
            transverse_momentum: 0.0,
            relative_phase_rad: beta,
            window: None,
        };
        let pi = std::f64::consts::PI;
        Self {
            packets: vec![
                offset("offset_k-1_d0_s20", -1.0, 0.0, 20.0),
                offset("offset_k-1_d50_s20", -1.0, 50.0, 20.0),
                offset("offset_k-1_d100_s20", -1.0, 100.0, 20.0),
                offset("offset_k-1_d0_s5", -1.0, 0.0, 5.0),
                offset("offset_k-1_d50_s5", -1.0, 50.0, 5.0),
                offset("offset_k-1_d100_s5", -1.0, 100.0, 5.0),
                offset("offset_k4_d10_s2", 4.0, 10.0, 2.0),
                split("split_even_sep2_s10", 2.0, 10.0, 0.0),
                split("split_odd_sep2_s10", 2.0, 10.0, pi),
                split("split_even_sep40_s10", 40.0, 10.0, 0.0),
                split("split_odd_sep40_s10", 40.0, 10.0, pi),
            ],
            profiles: vec![RadialProfileJson::default()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// The back-solved default geometry when absent.
    pub instrument: Option<InstrumentSource>,
    pub simulation: SimulationConfig,
    pub analysis: AnalysisConfig,
    pub inputs: InputsConfig,
    pub decompose: Option<DecomposeConfig>,
    pub output_dir: Option<PathBuf>,
}

/// A parsed configuration together with where it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub run: RunConfig,
    pub instrument: InstrumentConfig,
    /// Directory that relative paths are resolved against.
    pub base_dir: PathBuf,
    /// SHA-256 of the configuration bytes (hex).
    pub sha256: String,
}

impl LoadedConfig {
    /// Reads `path`, or uses the defaults when `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let bytes = std::fs::read(p).map_err(|e| Error::input(p, e))?;
                let run: RunConfig = serde_json::from_slice(&bytes).map_err(|e| Error::input(p, e))?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
                Self::resolve(run, base, &bytes)
            }
            None => {
                let run = RunConfig::default();
                let bytes = serde_json::to_vec(&run).expect("default configuration serialises");
                Self::resolve(run, PathBuf::new(), &bytes)
            }
        }
    }

    pub fn from_run(run: RunConfig, base_dir: PathBuf) -> Result<Self> {
        let bytes = serde_json::to_vec(&run).map_err(|e| Error::Config(e.to_string()))?;
        Self::resolve(run, base_dir, &bytes)
    }

    fn resolve(mut run: RunConfig, base_dir: PathBuf, bytes: &[u8]) -> Result<Self> {
        let join = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };
        let mut instrument = match &run.instrument {
            None => InstrumentConfig::nominal(),
            Some(InstrumentSource::Inline(doc)) => doc.to_config()?,
            Some(InstrumentSource::Path(p)) => {
                let path = join(p);
                let text = std::fs::read(&path).map_err(|e| Error::input(&path, e))?;
                let doc: InstrumentJson = serde_json::from_slice(&text).map_err(|e| Error::input(&path, e))?;
                doc.to_config()?
            }
        };
        if let Some(ratio) = run.analysis.oam_ratio_ang {
            if !(ratio > 0.0 && ratio.is_finite()) {
                return Err(Error::Config("oam_ratio_ang must be positive".into()));
            }
            let l_eff = effective_length_for_oam_ratio(ratio, instrument.latitude_rad, instrument.omega_rad_s);
            instrument = instrument
                .with_effective_length(l_eff)
                .map_err(|e| Error::Config(format!("oam_ratio_ang: {e}")))?;
        }
        let inputs = &mut run.inputs;
        for slot in [&mut inputs.plus, &mut inputs.minus, &mut inputs.grating, &mut inputs.table] {
            if let Some(p) = slot.as_mut() {
                *p = join(p);
                if !p.is_file() {
                    return Err(Error::input(p.clone(), "referenced file does not exist"));
                }
            }
        }
        if let Some(out) = run.output_dir.as_mut() {
            *out = join(out);
        }
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        Ok(Self {
            run,
            instrument,
            base_dir,
            sha256: hex::encode(hasher.finalize()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instrument_round_trip_converts_angles() {
        let cfg = InstrumentConfig::nominal();
        let doc = InstrumentJson::from(&cfg);
        assert!((doc.theta_deg - 40.0).abs() < 1e-12);
        let text = serde_json::to_string(&doc).unwrap();
        let back: InstrumentJson = serde_json::from_str(&text).unwrap();
        let restored = back.to_config().unwrap();
        assert!((restored.theta_rad - cfg.theta_rad).abs() < 1e-15);
        assert!((restored.latitude_rad - cfg.latitude_rad).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"simulation": {"seeds": 3}}"#).unwrap_err();
        assert!(err.to_string().contains("unknown field"));
        let doc = r#"{"l1_m":1,"l2_m":1,"l3_m":1,"latitude_deg":50,"theta_deg":40,"colour":1}"#;
        assert!(serde_json::from_str::<InstrumentJson>(doc).is_err());
    }

    #[test]
    fn missing_input_file_is_a_config_error() {
        let run = RunConfig {
            inputs: InputsConfig {
                plus: Some("does/not/exist.csv".into()),
                ..Default::default()
            },
            ..Default::default()
        };
        let err = LoadedConfig::from_run(run, PathBuf::from("/nonexistent")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
