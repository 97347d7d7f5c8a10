use libm::{cos, exp, sin};
use num_complex::Complex64;

use super::grid::{PolarGrid, PolarGridField};
use super::packet::{PacketKind, WavePacket};
use super::OamError;

/// Agreement demanded between the two translation routes, relative to the
/// larger of the two.
const TRANSLATION_RTOL: f64 = 1e-6;

/// `(⟨x⟩, ⟨y⟩)` of the packet's probability density.
pub fn expectation_position(wp: &WavePacket) -> (f64, f64) {
    match wp.kind() {
        PacketKind::SingleOffset { .. } => (wp.offset(), 0.0),
        // the density is even in x for every relative phase
        PacketKind::SplitPair { .. } => (0.0, 0.0),
    }
}

/// `(⟨p_x⟩, ⟨p_y⟩)` of the packet.
pub fn expectation_momentum(wp: &WavePacket) -> (f64, f64) {
    match wp.kind() {
        PacketKind::SingleOffset {
            transverse_momentum,
        } => (0.0, transverse_momentum),
        PacketKind::SplitPair { relative_phase } => {
            let s2 = wp.coherence_length() * wp.coherence_length();
            let d = wp.offset();
            let overlap = exp(-2.0 * d * d / s2);
            let px = -2.0 * d * sin(relative_phase) * overlap
                / (s2 * (1.0 + cos(relative_phase) * overlap));
            (px, 0.0)
        }
    }
}

/// z-component of `⟨r⟩ × ⟨p⟩`, in units of ħ.
pub fn extrinsic_oam(wp: &WavePacket) -> f64 {
    let (x, y) = expectation_position(wp);
    let (px, py) = expectation_momentum(wp);
    x * py - y * px
}

/// `(⟨k_x⟩, ⟨k_y⟩)` of `g(r) Σ c_ℓ e^{iℓφ}` evaluated on `grid`.
pub fn transverse_momentum_expectation(
    superposition: &[(i64, Complex64)],
    profile: impl Fn(f64) -> f64,
    grid: &PolarGrid,
) -> Result<(f64, f64), OamError> {
    if superposition.is_empty() {
        return Err(OamError::InvalidGrid("empty superposition"));
    }
    let field = PolarGridField::from_polar(grid.clone(), |r, phi| {
        let g = profile(r);
        superposition
            .iter()
            .map(|&(ell, c)| c * Complex64::from_polar(g, ell as f64 * phi))
            .sum()
    });
    field.check_boundary()?;
    if !(field.norm_squared() > 0.0) {
        return Err(OamError::NumericRange("superposition norm"));
    }
    Ok(field.momentum_expectation())
}

/// `⟨L'_z⟩ - ⟨L_z⟩` for the angular momentum `L'_z` taken about `(x₀, y₀)`.
pub fn first_moment_translation_delta(
    field: &PolarGridField,
    x0: f64,
    y0: f64,
) -> Result<f64, OamError> {
    field.check_boundary()?;
    let (px, py) = field.momentum_expectation();
    Ok(-x0 * py + y0 * px)
}

/// `⟨L'_z²⟩ - ⟨L_z²⟩` for the angular momentum taken about `(x₀, y₀)`.
///
/// The shift is evaluated once from `‖L'_z ψ‖² - ‖L_z ψ‖²` and once from the
/// expanded second-order differential operator `L'_z² - L_z²`; the two must
/// agree or [`OamError::Inconsistent`] is returned.
pub fn second_moment_translation_delta(
    field: &PolarGridField,
    x0: f64,
    y0: f64,
) -> Result<f64, OamError> {
    field.check_boundary()?;
    let norm = field.norm_squared();
    if !(norm > 0.0) {
        return Err(OamError::NumericRange("field norm"));
    }
    let one = Complex64::new(1.0, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);
    let dphi = field.d_phi();
    let (dx, dy) = field.gradient();

    let l = dphi.scaled(minus_i);
    let l_shifted = PolarGridField::combine(&[
        (one, &dphi),
        (Complex64::new(-x0, 0.0), &dy),
        (Complex64::new(y0, 0.0), &dx),
    ])
    .scaled(minus_i);
    let direct = (l_shifted.norm_squared() - l.norm_squared()) / norm;

    let (dxx, dxy) = dx.gradient();
    let (_, dyy) = dy.gradient();
    let t = PolarGridField::combine(&[
        (one, &dyy.weighted(|r, p| x0 * x0 - 2.0 * r * cos(p) * x0)),
        (one, &dxx.weighted(|r, p| y0 * y0 - 2.0 * r * sin(p) * y0)),
        (
            one,
            &dxy.weighted(|r, p| 2.0 * (r * cos(p) * y0 + r * sin(p) * x0 - x0 * y0)),
        ),
        (Complex64::new(x0, 0.0), &dx),
        (Complex64::new(y0, 0.0), &dy),
    ]);
    let term_by_term = -field.inner(&t).re / norm;

    let scale = direct.abs().max(term_by_term.abs());
    if (direct - term_by_term).abs() > TRANSLATION_RTOL * scale {
        return Err(OamError::Inconsistent {
            direct,
            term_by_term,
        });
    }
    Ok(direct)
}
