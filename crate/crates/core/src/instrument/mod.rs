//! Physical-unit model of the Larmor spin-echo interferometer.

mod constants;
pub mod units;

use core::f64::consts::PI;
use libm::{sin, tan};

pub use constants::{PhysicalConstants, CODATA};
use units::{
    check_spin_echo_length, check_wavelength, check_wavelength_or_zero,
    spin_echo_constant_from_si, spin_echo_constant_to_ang, spin_echo_constant_to_si,
    ANGSTROMS_PER_MICROMETRE, METRES_PER_ANGSTROM, METRES_PER_MICROMETRE,
};

/// Relative agreement demanded between the two Sagnac phase routes.
pub const ROUTE_RTOL: f64 = 1e-12;
/// Allowed relative mismatch between a given `B0` and `2πf/γ`.
pub const FIELD_MATCH_RTOL: f64 = 5e-3;

pub const NOMINAL_THETA_DEG: f64 = 40.0;
pub const NOMINAL_RF_HZ: f64 = 2.0e6;
pub const NOMINAL_C_SE_UM_PER_ANG2: f64 = 0.137;
pub const NOMINAL_A2_PER_ANG2: f64 = -1.15e-3;
pub const ISIS_LATITUDE_DEG: f64 = 51.57;
pub const NOMINAL_BAND_ANG: (f64, f64) = (4.0, 12.75);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InstrumentError {
    #[error("invalid instrument configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("configuration lacks {0}")]
    MissingField(&'static str),
    #[error("b0 = {b0_tesla} T disagrees with the RF resonance field {rf_b0_tesla} T")]
    FieldMismatch { b0_tesla: f64, rf_b0_tesla: f64 },
    #[error("{quantity} = {value} outside [{min}, {max}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("geometry factor sin(latitude) (L1 + L3 + 2 L2) times rotation rate is zero")]
    ZeroGeometry,
    #[error("Sagnac phase routes disagree: {oam_route} vs {area_route}")]
    RouteMismatch { oam_route: f64, area_route: f64 },
}

/// Sense of the beam relative to the rotation axis. Multiplies the sign of
/// the predicted Sagnac term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    Positive,
    #[default]
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentConfig {
    pub l1_m: f64,
    pub l2_m: f64,
    pub l3_m: f64,
    pub latitude_rad: f64,
    pub theta_rad: f64,
    pub b0_tesla: Option<f64>,
    pub rf_hz: Option<f64>,
    /// Overrides the value computed from the field and geometry when set.
    pub c_se_um_per_ang2: Option<f64>,
    pub omega_rad_s: f64,
    pub lambda_min_ang: f64,
    pub lambda_max_ang: f64,
    pub orientation: Orientation,
}

impl InstrumentConfig {
    /// θ = 40°, f = 2 MHz, latitude 51.57°, with `L1` chosen so the computed
    /// spin-echo constant is 0.137 µm Å⁻² and the remaining lengths chosen so
    /// that the predicted `a2` is −1.15×10⁻³ Å⁻² (`L3 = L1`).
    pub fn nominal() -> Self {
        let theta = NOMINAL_THETA_DEG.to_radians();
        let latitude = ISIS_LATITUDE_DEG.to_radians();
        let b0 = b0_from_rf(NOMINAL_RF_HZ);
        let l1 = l1_for_spin_echo_constant(NOMINAL_C_SE_UM_PER_ANG2, b0, theta);
        let l_eff = effective_length_for_a2(
            NOMINAL_A2_PER_ANG2,
            NOMINAL_C_SE_UM_PER_ANG2,
            latitude,
            CODATA.earth_rotation,
        );
        let base = Self {
            l1_m: l1,
            l2_m: 1.0,
            l3_m: l1,
            latitude_rad: latitude,
            theta_rad: theta,
            b0_tesla: Some(b0),
            rf_hz: Some(NOMINAL_RF_HZ),
            c_se_um_per_ang2: None,
            omega_rad_s: CODATA.earth_rotation,
            lambda_min_ang: NOMINAL_BAND_ANG.0,
            lambda_max_ang: NOMINAL_BAND_ANG.1,
            orientation: Orientation::Negative,
        };
        base.with_effective_length(l_eff)
            .expect("nominal geometry has a positive middle arm")
    }

    /// Keeps `L1` and sets `L3 = L1`, `L2 = (L_eff − 2 L1)/2`.
    pub fn with_effective_length(mut self, l_eff: f64) -> Result<Self, InstrumentError> {
        let l2 = 0.5 * (l_eff - 2.0 * self.l1_m);
        if !(l2 > 0.0) {
            return Err(InstrumentError::InvalidConfig(
                "effective length too short for the flipper spacing",
            ));
        }
        self.l3_m = self.l1_m;
        self.l2_m = l2;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), InstrumentError> {
        for l in [self.l1_m, self.l2_m, self.l3_m] {
            if !(l.is_finite() && l > 0.0) {
                return Err(InstrumentError::InvalidConfig("lengths must be positive"));
            }
        }
        if !(self.theta_rad > 0.0 && self.theta_rad < PI / 2.0) {
            return Err(InstrumentError::InvalidConfig("poleshoe angle must lie in (0°, 90°)"));
        }
        if !(self.latitude_rad.abs() <= PI / 2.0) {
            return Err(InstrumentError::InvalidConfig("latitude must lie in [-90°, 90°]"));
        }
        if !self.omega_rad_s.is_finite() {
            return Err(InstrumentError::InvalidConfig("rotation rate must be finite"));
        }
        if !(self.lambda_min_ang.is_finite() && self.lambda_min_ang < self.lambda_max_ang) {
            return Err(InstrumentError::InvalidConfig("wavelength band must satisfy min < max"));
        }
        if let Some(b0) = self.b0_tesla {
            if !(b0.is_finite() && b0 >= 0.0) {
                return Err(InstrumentError::InvalidConfig("b0 must be non-negative"));
            }
        }
        if let Some(f) = self.rf_hz {
            if !(f.is_finite() && f >= 0.0) {
                return Err(InstrumentError::InvalidConfig("RF frequency must be non-negative"));
            }
        }
        if let (Some(b0), Some(f)) = (self.b0_tesla, self.rf_hz) {
            let rf_b0 = b0_from_rf(f);
            if (b0 - rf_b0).abs() > FIELD_MATCH_RTOL * rf_b0.abs().max(b0.abs()) {
                return Err(InstrumentError::FieldMismatch {
                    b0_tesla: b0,
                    rf_b0_tesla: rf_b0,
                });
            }
        }
        if let Some(c) = self.c_se_um_per_ang2 {
            if !(c.is_finite() && c >= 0.0) {
                return Err(InstrumentError::InvalidConfig("spin-echo constant must be non-negative"));
            }
        }
        Ok(())
    }

    /// Static field, taken from `b0_tesla` or derived from `rf_hz`.
    pub fn resolved_b0(&self) -> Result<f64, InstrumentError> {
        match (self.b0_tesla, self.rf_hz) {
            (Some(b0), _) => Ok(b0),
            (None, Some(f)) => Ok(b0_from_rf(f)),
            (None, None) => Err(InstrumentError::MissingField("b0_tesla or rf_hz")),
        }
    }

    /// `L1 + L3 + 2 L2` in metres.
    pub fn effective_length(&self) -> f64 {
        self.l1_m + self.l3_m + 2.0 * self.l2_m
    }

    /// `sin Λ (L1 + L3 + 2 L2)` in metres.
    pub fn geometry_factor(&self) -> f64 {
        sin(self.latitude_rad) * self.effective_length()
    }

    fn warn_outside_band(&self, lambda_ang: f64) {
        if lambda_ang < self.lambda_min_ang || lambda_ang > self.lambda_max_ang {
            log::warn!(
                "wavelength {lambda_ang} Å outside configured band [{}, {}] Å",
                self.lambda_min_ang,
                self.lambda_max_ang
            );
        }
    }
}

impl Default for InstrumentConfig {
    fn default() -> Self {
        Self::nominal()
    }
}

/// Resonance field `B0 = 2πf/γ` in tesla.
pub fn b0_from_rf(rf_hz: f64) -> f64 {
    2.0 * PI * rf_hz / CODATA.gyromagnetic_ratio
}

/// `L1` (m) giving spin-echo constant `c_se_um_per_ang2` at field `b0` and
/// poleshoe angle `theta_rad`.
pub fn l1_for_spin_echo_constant(c_se_um_per_ang2: f64, b0_tesla: f64, theta_rad: f64) -> f64 {
    let c = &CODATA;
    spin_echo_constant_to_si(c_se_um_per_ang2) * 2.0 * PI * PI * c.hbar * tan(theta_rad)
        / (c.neutron_mass * c.gyromagnetic_ratio * b0_tesla)
}

/// `L1 + L3 + 2 L2` (m) for which the predicted `|a2|` equals `|a2_per_ang2|`.
pub fn effective_length_for_a2(
    a2_per_ang2: f64,
    c_se_um_per_ang2: f64,
    latitude_rad: f64,
    omega_rad_s: f64,
) -> f64 {
    let k2 = CODATA.rotation_wavenumber_sq(omega_rad_s);
    (a2_per_ang2 / (c_se_um_per_ang2 * METRES_PER_MICROMETRE * k2 * sin(latitude_rad))).abs()
}

/// `L1 + L3 + 2 L2` (m) for which `c_oam_from_a2` maps `a2` to `ratio_ang * a2`.
pub fn effective_length_for_oam_ratio(ratio_ang: f64, latitude_rad: f64, omega_rad_s: f64) -> f64 {
    let k2 = CODATA.rotation_wavenumber_sq(omega_rad_s);
    (2.0 * PI / (METRES_PER_ANGSTROM * k2 * ratio_ang * sin(latitude_rad))).abs()
}

/// `c_SE = m γ B0 L1 cot θ / (2π² ħ)` in µm Å⁻², ignoring any override.
pub fn computed_spin_echo_constant(cfg: &InstrumentConfig) -> Result<f64, InstrumentError> {
    let b0 = cfg.resolved_b0()?;
    let c = &CODATA;
    let per_m = c.neutron_mass * c.gyromagnetic_ratio * b0 * cfg.l1_m
        / (tan(cfg.theta_rad) * 2.0 * PI * PI * c.hbar);
    Ok(spin_echo_constant_from_si(per_m))
}

/// Spin-echo constant in µm Å⁻²: the configured override, else the value
/// computed from field and geometry.
pub fn spin_echo_constant(cfg: &InstrumentConfig) -> Result<f64, InstrumentError> {
    match cfg.c_se_um_per_ang2 {
        Some(c) => Ok(c),
        None => computed_spin_echo_constant(cfg),
    }
}

/// `δ_SE = c_SE λ²` in µm.
pub fn spin_echo_length(cfg: &InstrumentConfig, lambda_ang: f64) -> Result<f64, InstrumentError> {
    check_wavelength_or_zero(lambda_ang)?;
    if lambda_ang > 0.0 {
        cfg.warn_outside_band(lambda_ang);
    }
    Ok(spin_echo_constant(cfg)? * lambda_ang * lambda_ang)
}

/// Wavelength (Å) at which the spin-echo length equals `delta_um`.
pub fn wavelength_for_spin_echo_length(c_se_um_per_ang2: f64, delta_um: f64) -> f64 {
    libm::sqrt(delta_um / c_se_um_per_ang2)
}

/// OAM eigenvalues `(ℓ+, ℓ−) = ±δ_SE |k| / 2` of the two path states, in ħ.
pub fn oam_eigenvalue(delta_se_um: f64, lambda_ang: f64) -> Result<(f64, f64), InstrumentError> {
    check_spin_echo_length(delta_se_um)?;
    check_wavelength(lambda_ang)?;
    let k = 2.0 * PI / lambda_ang;
    let ell = 0.5 * delta_se_um * ANGSTROMS_PER_MICROMETRE * k;
    Ok((ell, -ell))
}

/// The Sagnac phase evaluated from the OAM precession picture and from the
/// enclosed area, in that order.
pub fn sagnac_phase_routes(
    cfg: &InstrumentConfig,
    lambda_ang: f64,
) -> Result<(f64, f64), InstrumentError> {
    check_wavelength(lambda_ang)?;
    let c = &CODATA;
    let sign = cfg.orientation.sign();
    let delta_m = spin_echo_constant(cfg)? * lambda_ang * lambda_ang * METRES_PER_MICROMETRE;
    let sin_lat = sin(cfg.latitude_rad);

    let k = 2.0 * PI / (lambda_ang * METRES_PER_ANGSTROM);
    let delta_ell = delta_m * k;
    let oam_route = sign * (c.neutron_mass * cfg.omega_rad_s * delta_ell / (c.hbar * k))
        * sin_lat
        * (cfg.l1_m + cfg.l3_m + 2.0 * cfg.l2_m);

    let area = delta_m * (0.5 * (cfg.l1_m + cfg.l3_m) + cfg.l2_m);
    let area_route = sign * 2.0 * c.neutron_mass * area * cfg.omega_rad_s * sin_lat / c.hbar;
    Ok((oam_route, area_route))
}

/// Sagnac phase (rad) at `lambda_ang`, after confirming both routes agree.
pub fn sagnac_phase(cfg: &InstrumentConfig, lambda_ang: f64) -> Result<f64, InstrumentError> {
    let (oam_route, area_route) = sagnac_phase_routes(cfg, lambda_ang)?;
    let scale = oam_route.abs().max(area_route.abs());
    if (oam_route - area_route).abs() > ROUTE_RTOL * scale {
        return Err(InstrumentError::RouteMismatch {
            oam_route,
            area_route,
        });
    }
    Ok(oam_route)
}

/// Predicted quadratic coefficient `a2` (Å⁻²) of the polarisation ratio.
pub fn predict_a2(cfg: &InstrumentConfig) -> Result<f64, InstrumentError> {
    let k2 = CODATA.rotation_wavenumber_sq(cfg.omega_rad_s);
    let c_se_si = spin_echo_constant_to_si(spin_echo_constant(cfg)?);
    Ok(cfg.orientation.sign()
        * c_se_si
        * k2
        * cfg.geometry_factor()
        * METRES_PER_ANGSTROM
        * METRES_PER_ANGSTROM)
}

/// `c_OAM = 2π ħ a2 / (m Ω sin Λ (L1 + L3 + 2 L2))` in Å⁻¹.
pub fn c_oam_from_a2(a2_per_ang2: f64, cfg: &InstrumentConfig) -> Result<f64, InstrumentError> {
    let denom = CODATA.rotation_wavenumber_sq(cfg.omega_rad_s) * cfg.geometry_factor();
    if denom == 0.0 || !denom.is_finite() {
        return Err(InstrumentError::ZeroGeometry);
    }
    Ok(2.0 * PI * a2_per_ang2 / (denom * METRES_PER_ANGSTROM))
}

/// `c_OAM` implied directly by the spin-echo constant: `±2π c_SE` (Å units).
pub fn c_oam_from_spin_echo_constant(cfg: &InstrumentConfig) -> Result<f64, InstrumentError> {
    Ok(cfg.orientation.sign() * 2.0 * PI * spin_echo_constant_to_ang(spin_echo_constant(cfg)?))
}

/// Per-state OAM slope `ℓ±/λ = ±c_OAM/2` (ħ Å⁻¹); returns `c_OAM/2`.
pub fn ell_slope_from_c_oam(c_oam_per_ang: f64) -> f64 {
    0.5 * c_oam_per_ang
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nominal_cfg() -> InstrumentConfig {
        InstrumentConfig::nominal()
    }

    #[test]
    fn resonance_field_at_two_megahertz() {
        let b0 = b0_from_rf(2.0e6);
        assert!((b0 - 0.0686).abs() < 5e-5, "{b0}");
    }

    #[test]
    fn nominal_reproduces_quoted_values() {
        let cfg = nominal_cfg();
        cfg.validate().unwrap();
        assert!((cfg.l1_m - 1.1369).abs() < 1e-3, "{}", cfg.l1_m);
        assert!((spin_echo_constant(&cfg).unwrap() - 0.137).abs() < 1e-12);
        // 1.15e-3 Å⁻² / (0.137e-6 m⁻¹·Å⁻²·m · mΩ/ħ · sin 51.57°)
        let k2 = 1.674_927_498_04e-27 * 7.292_115e-5 / 1.054_571_817e-34;
        let expected = 1.15e-3 / (0.137e-6 * k2 * sin(51.57_f64.to_radians()));
        assert!((cfg.effective_length() - expected).abs() < 1e-9);
        assert!((cfg.effective_length() - 9.252).abs() < 1e-3, "{}", cfg.effective_length());
        assert!((predict_a2(&cfg).unwrap() + 1.15e-3).abs() < 1e-15);
        let c = c_oam_from_a2(-1.15e-3, &cfg).unwrap();
        assert!((c + 8.62e3).abs() / 8.62e3 < 0.01, "{c}");
    }

    #[test]
    fn zero_inputs_give_zero() {
        let mut cfg = nominal_cfg();
        assert_eq!(spin_echo_length(&cfg, 0.0).unwrap(), 0.0);
        assert_eq!(oam_eigenvalue(0.0, 5.0).unwrap().0, 0.0);
        assert_eq!(c_oam_from_a2(0.0, &cfg).unwrap(), 0.0);
        cfg.omega_rad_s = 0.0;
        assert_eq!(sagnac_phase(&cfg, 10.0).unwrap(), 0.0);
        assert_eq!(c_oam_from_a2(1.0, &cfg), Err(InstrumentError::ZeroGeometry));
        let mut cfg = nominal_cfg();
        cfg.b0_tesla = Some(0.0);
        cfg.rf_hz = None;
        assert_eq!(spin_echo_constant(&cfg).unwrap(), 0.0);
        assert_eq!(predict_a2(&cfg).unwrap(), 0.0);
    }

    #[test]
    fn spin_echo_length_and_eigenvalues() {
        let mut cfg = nominal_cfg();
        cfg.c_se_um_per_ang2 = Some(0.137);
        assert!((spin_echo_length(&cfg, 10.0).unwrap() - 13.7).abs() < 1e-12);
        let (plus, minus) = oam_eigenvalue(13.7, 10.0).unwrap();
        assert!((plus - 43_039.8).abs() < 0.1, "{plus}");
        assert_eq!(minus, -plus);
        // slope per Å matches half the OAM constant
        let c = c_oam_from_spin_echo_constant(&cfg).unwrap();
        assert!((plus / 10.0 - ell_slope_from_c_oam(c).abs()).abs() < 1e-9);
        assert!(spin_echo_length(&cfg, 200.0).is_err());
        assert!(oam_eigenvalue(2e4, 10.0).is_err());
    }

    #[test]
    fn phase_matches_quadratic_prediction() {
        let cfg = nominal_cfg();
        let phase = sagnac_phase(&cfg, 10.0).unwrap();
        assert!((phase - predict_a2(&cfg).unwrap() * 100.0).abs() < 1e-15);
        assert!((phase + 0.115).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut cfg = nominal_cfg();
        cfg.b0_tesla = Some(0.07);
        assert!(matches!(cfg.validate(), Err(InstrumentError::FieldMismatch { .. })));
        let mut cfg = nominal_cfg();
        cfg.theta_rad = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = nominal_cfg();
        cfg.lambda_min_ang = 20.0;
        assert!(cfg.validate().is_err());
        let mut cfg = nominal_cfg();
        cfg.b0_tesla = None;
        cfg.rf_hz = None;
        assert!(matches!(spin_echo_constant(&cfg), Err(InstrumentError::MissingField(_))));
        assert!(nominal_cfg().with_effective_length(1.0).is_err());
    }

    #[test]
    fn oam_ratio_back_solve() {
        let cfg = nominal_cfg();
        let l = effective_length_for_oam_ratio(7.5e6, cfg.latitude_rad, cfg.omega_rad_s);
        let cfg = cfg.with_effective_length(l).unwrap();
        let c = c_oam_from_a2(-1e-3, &cfg).unwrap();
        assert!((c + 7.5e3).abs() < 1e-9);
    }
}
