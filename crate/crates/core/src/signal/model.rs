use alloc::vec::Vec;
use core::f64::consts::PI;
use libm::{cos, sin};

use super::series::Polarity;
use super::SignalError;

/// Synthetic default wobble frequency: six `cos²` periods across 4-12.75 Å.
pub const DEFAULT_K1_PER_ANG: f64 = 6.0 * PI / 8.75;
/// Synthetic phases for the default wobble terms.
pub const DEFAULT_WOBBLE_PHASES: (f64, f64) = (0.3, 1.1);
/// Allowed `k2/k1` band for two-term wobbles.
pub const WOBBLE_RATIO_BAND: (f64, f64) = (1.6, 2.4);

/// One `|A| cos²(kλ + φ)` term of the precession-plane oscillation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WobbleTerm {
    /// Å⁻²
    pub amplitude: f64,
    /// Å⁻¹
    pub frequency: f64,
    /// rad
    pub phase: f64,
}

impl WobbleTerm {
    pub fn new(amplitude: f64, frequency: f64, phase: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase,
        }
    }

    /// `|A| cos²(kλ + φ)`.
    pub fn cos_squared(&self, lambda: f64) -> f64 {
        let c = cos(self.frequency * lambda + self.phase);
        self.amplitude.abs() * c * c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationModelParams {
    pub p0: f64,
    pub epsilon: f64,
    /// Å⁻¹
    pub a1: f64,
    /// Å⁻², as it appears in this polarity's measured ratio.
    pub a2: f64,
    pub wobble: Vec<WobbleTerm>,
    pub polarity: Polarity,
}

/// Model outputs at one wavelength. `p_y` and `ratio` are absent when the
/// rotator is off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelValue {
    pub p_x: f64,
    pub p_y: Option<f64>,
    pub ratio: Option<f64>,
}

impl PolarizationModelParams {
    /// Parameters for one rotator polarity with the Sagnac coefficient
    /// `a2_sagnac` carrying the polarity sign and the given wobble terms.
    pub fn for_polarity(
        polarity: Polarity,
        a2_sagnac: f64,
        wobble: Vec<WobbleTerm>,
    ) -> Self {
        Self {
            p0: 1.0,
            epsilon: 0.0,
            a1: 0.0,
            a2: polarity.sign() * a2_sagnac,
            wobble,
            polarity,
        }
    }

    /// Two-term wobble with `k2 = 2 k1`, default frequency and phases.
    pub fn default_wobble(a1_amplitude: f64, a2_amplitude: f64) -> Vec<WobbleTerm> {
        alloc::vec![
            WobbleTerm::new(a1_amplitude, DEFAULT_K1_PER_ANG, DEFAULT_WOBBLE_PHASES.0),
            WobbleTerm::new(a2_amplitude, 2.0 * DEFAULT_K1_PER_ANG, DEFAULT_WOBBLE_PHASES.1),
        ]
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        if !(self.p0 > 0.0 && self.p0 <= 1.0) {
            return Err(SignalError::InvalidParams("P0 must lie in (0, 1]"));
        }
        if ![self.epsilon, self.a1, self.a2].iter().all(|v| v.is_finite()) {
            return Err(SignalError::InvalidParams("coefficients must be finite"));
        }
        for w in &self.wobble {
            if !(w.amplitude >= 0.0 && w.frequency.is_finite() && w.phase.is_finite()) {
                return Err(SignalError::InvalidParams("wobble amplitudes must be non-negative"));
            }
        }
        if let [w1, w2] = self.wobble.as_slice() {
            let ratio = w2.frequency / w1.frequency;
            if !(WOBBLE_RATIO_BAND.0..=WOBBLE_RATIO_BAND.1).contains(&ratio) {
                return Err(SignalError::InvalidParams("k2/k1 outside the accepted band"));
            }
        }
        Ok(())
    }

    /// `ε + a1 λ + a2 λ²`.
    pub fn quadratic(&self, lambda: f64) -> f64 {
        self.epsilon + self.a1 * lambda + self.a2 * lambda * lambda
    }

    /// `2 λ² Σ |A_i| cos²(k_i λ + φ_i)`, before the polarity sign.
    pub fn wobble_term(&self, lambda: f64) -> f64 {
        2.0 * lambda * lambda * self.wobble.iter().map(|w| w.cos_squared(lambda)).sum::<f64>()
    }

    /// `Σ |A_i|`: the constant the wobble adds to the fitted `a2`.
    pub fn wobble_dc(&self) -> f64 {
        self.wobble.iter().map(|w| w.amplitude.abs()).sum()
    }
}

/// Evaluates the polarisation model. With the rotator on, `ratio` is the
/// normalised polarisation `ε + a1λ + a2λ² + s 2λ² Σ|A_i|cos²(k_iλ + φ_i)`
/// and `P_y = P0 sin(ratio)`, `P_x = P0 cos(ratio)`. With it off only
/// `P_x = P0 cos(ε + a1λ + a2λ²)` is returned.
pub fn polarization_model(params: &PolarizationModelParams, lambda: f64) -> ModelValue {
    match params.polarity {
        Polarity::Off => ModelValue {
            p_x: params.p0 * cos(params.quadratic(lambda)),
            p_y: None,
            ratio: None,
        },
        p => {
            let ratio = params.quadratic(lambda) + p.sign() * params.wobble_term(lambda);
            ModelValue {
                p_x: params.p0 * cos(ratio),
                p_y: Some(params.p0 * sin(ratio)),
                ratio: Some(ratio),
            }
        }
    }
}

/// The quantity a detector pair estimates: the normalised ratio with the
/// rotator on, `P_x` otherwise.
pub fn measured_polarization(params: &PolarizationModelParams, lambda: f64) -> f64 {
    let v = polarization_model(params, lambda);
    v.ratio.unwrap_or(v.p_x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_parameters_give_zero_ratio() {
        let p = PolarizationModelParams::for_polarity(Polarity::Positive, 0.0, Vec::new());
        assert_eq!(polarization_model(&p, 7.0).ratio, Some(0.0));
    }

    #[test]
    fn sagnac_quadratic_term() {
        let p = PolarizationModelParams::for_polarity(Polarity::Positive, -1.15e-3, Vec::new());
        assert!((polarization_model(&p, 10.0).ratio.unwrap() + 0.115).abs() < 1e-15);
        let m = PolarizationModelParams::for_polarity(Polarity::Negative, -1.15e-3, Vec::new());
        assert!((polarization_model(&m, 10.0).ratio.unwrap() - 0.115).abs() < 1e-15);
    }

    #[test]
    fn wobble_decomposes_into_dc_and_oscillation() {
        let mut p = PolarizationModelParams::for_polarity(Polarity::Positive, 0.0, Vec::new());
        p.wobble = alloc::vec![WobbleTerm::new(14.4e-5, DEFAULT_K1_PER_ANG, 0.0)];
        for lambda in [4.0, 6.3, 12.7] {
            let r = polarization_model(&p, lambda).ratio.unwrap() / (lambda * lambda);
            let expected = 14.4e-5 * (1.0 + cos(2.0 * DEFAULT_K1_PER_ANG * lambda));
            assert!((r - expected).abs() < 1e-18);
        }
    }

    #[test]
    fn rotator_off_returns_px_only() {
        let mut p = PolarizationModelParams::for_polarity(Polarity::Off, 0.0, Vec::new());
        p.p0 = 0.8;
        let v = polarization_model(&p, 5.0);
        assert_eq!((v.p_x, v.p_y, v.ratio), (0.8, None, None));
    }

    #[test]
    fn validation() {
        let mut p = PolarizationModelParams::for_polarity(
            Polarity::Positive,
            1e-3,
            PolarizationModelParams::default_wobble(1e-4, 1e-4),
        );
        assert!(p.validate().is_ok());
        p.wobble[1].frequency = 3.0 * p.wobble[0].frequency;
        assert!(p.validate().is_err());
        p.wobble.clear();
        p.p0 = 0.0;
        assert!(p.validate().is_err());
    }
}
