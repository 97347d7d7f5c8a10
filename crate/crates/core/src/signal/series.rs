use alloc::vec::Vec;

use super::SignalError;

/// Admissible magnitude of a normalised polarisation sample.
pub const VALUE_LIMIT: f64 = 1.5;

/// Spin-rotator setting of a measurement. `Off` measures `P_x` alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Polarity {
    Positive,
    Negative,
    #[default]
    Off,
}

impl Polarity {
    /// `+1`, `-1`, or `0` when the rotator is off.
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
            Polarity::Off => 0.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        self.sign() as i8
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(Polarity::Positive),
            -1 => Some(Polarity::Negative),
            0 => Some(Polarity::Off),
            _ => None,
        }
    }
}

/// Where a series came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Provenance {
    #[default]
    Measured,
    Synthetic { seed: u64 },
    /// Computed from other series (residuals, aggregates, model curves).
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub lambda_ang: f64,
    pub value: f64,
    pub variance: f64,
    pub n_up: Option<f64>,
    pub n_down: Option<f64>,
}

impl SeriesRow {
    pub fn new(lambda_ang: f64, value: f64, variance: f64) -> Self {
        Self {
            lambda_ang,
            value,
            variance,
            n_up: None,
            n_down: None,
        }
    }
}

/// Polarisation samples on a strictly increasing wavelength grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationSeries {
    rows: Vec<SeriesRow>,
    polarity: Polarity,
    provenance: Provenance,
}

impl PolarizationSeries {
    pub fn new(
        rows: Vec<SeriesRow>,
        polarity: Polarity,
        provenance: Provenance,
    ) -> Result<Self, SignalError> {
        Self::check(&rows, VALUE_LIMIT)?;
        Ok(Self {
            rows,
            polarity,
            provenance,
        })
    }

    /// Residual-type series whose values are not polarisations and so skip
    /// the magnitude check.
    pub fn derived(rows: Vec<SeriesRow>, polarity: Polarity) -> Result<Self, SignalError> {
        Self::check(&rows, f64::INFINITY)?;
        Ok(Self {
            rows,
            polarity,
            provenance: Provenance::Derived,
        })
    }

    fn check(rows: &[SeriesRow], limit: f64) -> Result<(), SignalError> {
        for (i, r) in rows.iter().enumerate() {
            if !r.lambda_ang.is_finite() {
                return Err(SignalError::InvalidSeries { row: i, reason: "non-finite wavelength" });
            }
            if i > 0 && r.lambda_ang <= rows[i - 1].lambda_ang {
                return Err(SignalError::InvalidSeries {
                    row: i,
                    reason: "wavelengths must be strictly increasing",
                });
            }
            if !(r.variance.is_finite() && r.variance > 0.0) {
                return Err(SignalError::InvalidSeries { row: i, reason: "variance must be positive" });
            }
            if !(r.value.is_finite() && r.value.abs() <= limit) {
                return Err(SignalError::InvalidSeries { row: i, reason: "value out of range" });
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> &[SeriesRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_polarity(mut self, polarity: Polarity) -> Self {
        self.polarity = polarity;
        self
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.lambda_ang).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn variances(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.variance).collect()
    }

    /// Mean spacing of the wavelength grid.
    pub fn mean_spacing(&self) -> f64 {
        match self.rows.len() {
            0 | 1 => 0.0,
            n => (self.rows[n - 1].lambda_ang - self.rows[0].lambda_ang) / (n - 1) as f64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn validation() {
        let ok = vec![SeriesRow::new(1.0, 0.1, 1e-4), SeriesRow::new(2.0, -0.2, 1e-4)];
        assert!(PolarizationSeries::new(ok.clone(), Polarity::Positive, Provenance::Measured).is_ok());
        let mut bad = ok.clone();
        bad[1].lambda_ang = 1.0;
        assert!(PolarizationSeries::new(bad, Polarity::Off, Provenance::Measured).is_err());
        let mut bad = ok.clone();
        bad[0].variance = 0.0;
        assert!(PolarizationSeries::new(bad, Polarity::Off, Provenance::Measured).is_err());
        let mut big = ok;
        big[0].value = 2.0;
        assert!(PolarizationSeries::new(big.clone(), Polarity::Off, Provenance::Measured).is_err());
        assert!(PolarizationSeries::derived(big, Polarity::Off).is_ok());
    }

    #[test]
    fn polarity_codes() {
        for p in [Polarity::Positive, Polarity::Negative, Polarity::Off] {
            assert_eq!(Polarity::from_i8(p.as_i8()), Some(p));
        }
        assert_eq!(Polarity::from_i8(3), None);
    }
}
