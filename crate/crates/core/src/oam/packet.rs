use libm::{cos, exp, sin};
use num_complex::Complex64;

use super::OamError;

/// Which of the two transverse wavefunctions a [`WavePacket`] describes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PacketKind {
    /// Gaussian-envelope planewave displaced by `offset` along x and moving
    /// along y with `transverse_momentum`.
    SingleOffset { transverse_momentum: f64 },
    /// Spin-erased pair of Gaussians at `x = ±offset` with relative phase
    /// `relative_phase`. The separation is `2 * offset`.
    SplitPair { relative_phase: f64 },
}

/// Dimensionless offset Gaussian (or split pair) in the transverse plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePacket {
    amplitude: f64,
    offset: f64,
    coherence_length: f64,
    kind: PacketKind,
}

impl WavePacket {
    pub fn offset_planewave(
        amplitude: f64,
        offset: f64,
        coherence_length: f64,
        transverse_momentum: f64,
    ) -> Result<Self, OamError> {
        if !transverse_momentum.is_finite() {
            return Err(OamError::InvalidPacket("transverse momentum must be finite"));
        }
        Self::validated(
            amplitude,
            offset,
            coherence_length,
            PacketKind::SingleOffset {
                transverse_momentum,
            },
        )
    }

    /// `separation` is the full spin-echo splitting; the model offset is half of it.
    pub fn split_pair(
        amplitude: f64,
        separation: f64,
        coherence_length: f64,
        relative_phase: f64,
    ) -> Result<Self, OamError> {
        if !relative_phase.is_finite() {
            return Err(OamError::InvalidPacket("relative phase must be finite"));
        }
        if separation < 0.0 {
            return Err(OamError::InvalidPacket("separation must be non-negative"));
        }
        Self::validated(
            amplitude,
            0.5 * separation,
            coherence_length,
            PacketKind::SplitPair { relative_phase },
        )
    }

    fn validated(
        amplitude: f64,
        offset: f64,
        coherence_length: f64,
        kind: PacketKind,
    ) -> Result<Self, OamError> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(OamError::InvalidPacket("amplitude must be positive"));
        }
        if !(coherence_length.is_finite() && coherence_length > 0.0) {
            return Err(OamError::InvalidPacket("coherence length must be positive"));
        }
        if !offset.is_finite() {
            return Err(OamError::InvalidPacket("offset must be finite"));
        }
        Ok(Self {
            amplitude,
            offset,
            coherence_length,
            kind,
        })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn coherence_length(&self) -> f64 {
        self.coherence_length
    }

    pub fn kind(&self) -> PacketKind {
        self.kind
    }

    /// Zero for split pairs.
    pub fn transverse_momentum(&self) -> f64 {
        match self.kind {
            PacketKind::SingleOffset {
                transverse_momentum,
            } => transverse_momentum,
            PacketKind::SplitPair { .. } => 0.0,
        }
    }

    /// Full separation of a split pair (`2 * offset`), zero otherwise.
    pub fn separation(&self) -> f64 {
        match self.kind {
            PacketKind::SplitPair { .. } => 2.0 * self.offset,
            PacketKind::SingleOffset { .. } => 0.0,
        }
    }

    /// Cartesian wavefunction `ψ(x, y)`.
    pub fn evaluate(&self, x: f64, y: f64) -> Complex64 {
        let s2 = self.coherence_length * self.coherence_length;
        let d = self.offset;
        match self.kind {
            PacketKind::SingleOffset {
                transverse_momentum,
            } => {
                let envelope = self.amplitude * exp(-((x - d) * (x - d) + y * y) / s2);
                Complex64::from_polar(envelope, transverse_momentum * y)
            }
            PacketKind::SplitPair { relative_phase } => {
                let g_plus = exp(-((x + d) * (x + d) + y * y) / s2);
                let g_minus = exp(-((x - d) * (x - d) + y * y) / s2);
                let half = 0.5 * relative_phase;
                let phase = Complex64::new(cos(half), sin(half));
                (phase * g_plus + phase.conj() * g_minus)
                    * (self.amplitude / core::f64::consts::SQRT_2)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_parameters() {
        assert!(WavePacket::offset_planewave(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(WavePacket::offset_planewave(-1.0, 0.0, 1.0, 1.0).is_err());
        assert!(WavePacket::offset_planewave(1.0, f64::NAN, 1.0, 1.0).is_err());
        assert!(WavePacket::split_pair(1.0, -2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn split_pair_stores_half_separation() {
        let wp = WavePacket::split_pair(1.0, 200.0, 50.0, 0.0).unwrap();
        assert_eq!(wp.offset(), 100.0);
        assert_eq!(wp.separation(), 200.0);
        assert_eq!(wp.transverse_momentum(), 0.0);
    }

    #[test]
    fn evaluates_defining_wavefunctions() {
        let wp = WavePacket::offset_planewave(2.0, 3.0, 1.5, 0.7).unwrap();
        let v = wp.evaluate(3.0, 1.0);
        assert!((v.norm() - 2.0 * exp(-1.0 / 2.25)).abs() < 1e-15);
        assert!((v.arg() - 0.7).abs() < 1e-15);

        let pair = WavePacket::split_pair(1.0, 2.0, 1.0, core::f64::consts::PI).unwrap();
        // antisymmetric combination vanishes on the symmetry axis
        assert!(pair.evaluate(0.0, 0.3).norm() < 1e-15);
    }
}
