/// Fundamental constants used by the instrument model (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// kg
    pub neutron_mass: f64,
    /// rad s⁻¹ T⁻¹ (magnitude)
    pub gyromagnetic_ratio: f64,
    /// J s
    pub hbar: f64,
    /// rad s⁻¹
    pub earth_rotation: f64,
}

pub const CODATA: PhysicalConstants = PhysicalConstants {
    neutron_mass: 1.674_927_498_04e-27,
    gyromagnetic_ratio: 1.832_471_71e8,
    hbar: 1.054_571_817e-34,
    earth_rotation: 7.292_115_0e-5,
};

impl PhysicalConstants {
    /// `m Ω / ħ` in m⁻² for a rotation rate `omega`.
    pub fn rotation_wavenumber_sq(&self, omega: f64) -> f64 {
        self.neutron_mass * omega / self.hbar
    }
}
