//! Unit conversions and range checks. Wavelength-indexed quantities are kept
//! in Å and Å⁻¹, geometry in metres, angles in radians.

use super::InstrumentError;

pub const METRES_PER_ANGSTROM: f64 = 1e-10;
pub const METRES_PER_MICROMETRE: f64 = 1e-6;
pub const ANGSTROMS_PER_MICROMETRE: f64 = 1e4;

pub const WAVELENGTH_RANGE_ANG: (f64, f64) = (0.1, 100.0);
pub const SPIN_ECHO_LENGTH_RANGE_UM: (f64, f64) = (0.0, 1e4);

/// µm Å⁻² to the dimensionless Å Å⁻².
pub fn spin_echo_constant_to_ang(c_se_um_per_ang2: f64) -> f64 {
    c_se_um_per_ang2 * ANGSTROMS_PER_MICROMETRE
}

/// µm Å⁻² to m⁻¹.
pub fn spin_echo_constant_to_si(c_se_um_per_ang2: f64) -> f64 {
    c_se_um_per_ang2 * METRES_PER_MICROMETRE / (METRES_PER_ANGSTROM * METRES_PER_ANGSTROM)
}

/// m⁻¹ to µm Å⁻².
pub fn spin_echo_constant_from_si(c_se_per_m: f64) -> f64 {
    c_se_per_m * METRES_PER_ANGSTROM * METRES_PER_ANGSTROM / METRES_PER_MICROMETRE
}

pub fn check_wavelength(lambda_ang: f64) -> Result<(), InstrumentError> {
    check_range("wavelength (Å)", lambda_ang, WAVELENGTH_RANGE_ANG)
}

/// Like [`check_wavelength`] but also admits exactly zero.
pub fn check_wavelength_or_zero(lambda_ang: f64) -> Result<(), InstrumentError> {
    if lambda_ang == 0.0 {
        Ok(())
    } else {
        check_wavelength(lambda_ang)
    }
}

pub fn check_spin_echo_length(delta_um: f64) -> Result<(), InstrumentError> {
    check_range("spin-echo length (µm)", delta_um, SPIN_ECHO_LENGTH_RANGE_UM)
}

fn check_range(quantity: &'static str, value: f64, (min, max): (f64, f64)) -> Result<(), InstrumentError> {
    if value.is_finite() && (min..=max).contains(&value) {
        Ok(())
    } else {
        Err(InstrumentError::OutOfRange {
            quantity,
            value,
            min,
            max,
        })
    }
}
