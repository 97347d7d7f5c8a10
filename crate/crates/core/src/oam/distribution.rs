use alloc::vec::Vec;

use super::OamError;

/// Default lower bound on the pre-renormalisation mass a window must hold.
pub const DEFAULT_CAPTURE_THRESHOLD: f64 = 0.999;

/// Inclusive range of mode numbers `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeWindow {
    pub min: i64,
    pub max: i64,
}

impl ModeWindow {
    pub fn new(min: i64, max: i64) -> Result<Self, OamError> {
        if min > max {
            return Err(OamError::InvalidWindow { min, max });
        }
        Ok(Self { min, max })
    }

    pub fn centered(center: i64, half_width: i64) -> Self {
        let h = half_width.max(0);
        Self {
            min: center - h,
            max: center + h,
        }
    }

    pub fn len(&self) -> usize {
        (self.max - self.min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, ell: i64) -> bool {
        (self.min..=self.max).contains(&ell)
    }

    pub fn iter(&self) -> core::ops::RangeInclusive<i64> {
        self.min..=self.max
    }

    /// Largest `|ℓ|` in the window.
    pub fn max_abs(&self) -> u64 {
        self.min.unsigned_abs().max(self.max.unsigned_abs())
    }
}

/// Probabilities over a contiguous window of mode numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct OamDistribution {
    window: ModeWindow,
    probabilities: Vec<f64>,
    captured_mass: f64,
}

impl OamDistribution {
    /// Normalises non-negative `weights` over `window`. `captured_mass` is the
    /// fraction of the full distribution that the weights represent.
    pub fn from_weights(
        window: ModeWindow,
        weights: Vec<f64>,
        captured_mass: f64,
    ) -> Result<Self, OamError> {
        if weights.len() != window.len() {
            return Err(OamError::InvalidWindow {
                min: window.min,
                max: window.max,
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(OamError::NumericRange("mode probabilities"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(OamError::NumericRange("distribution normalisation"));
        }
        let probabilities = weights.into_iter().map(|w| w / total).collect();
        Ok(Self {
            window,
            probabilities,
            captured_mass: captured_mass.clamp(0.0, 1.0),
        })
    }

    pub fn window(&self) -> ModeWindow {
        self.window
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn captured_mass(&self) -> f64 {
        self.captured_mass
    }

    /// Zero outside the window.
    pub fn probability(&self, ell: i64) -> f64 {
        if self.window.contains(ell) {
            self.probabilities[(ell - self.window.min) as usize]
        } else {
            0.0
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.window.iter().zip(self.probabilities.iter().copied())
    }

    /// Mode with the largest probability (lowest `ℓ` on ties).
    pub fn peak_mode(&self) -> i64 {
        let mut best = (self.window.min, f64::NEG_INFINITY);
        for (ell, p) in self.iter() {
            if p > best.1 {
                best = (ell, p);
            }
        }
        best.0
    }

    /// Total probability of odd (`odd = true`) or even modes.
    pub fn parity_mass(&self, odd: bool) -> f64 {
        self.iter()
            .filter(|(ell, _)| (ell.rem_euclid(2) == 1) == odd)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn moment(&self, n: u32) -> f64 {
        oam_moment(self, n)
    }
}

/// `Σ ℓⁿ p[ℓ]`, in units of `ħⁿ`.
pub fn oam_moment(dist: &OamDistribution, n: u32) -> f64 {
    dist.iter()
        .map(|(ell, p)| libm::pow(ell as f64, n as f64) * p)
        .sum()
}
