use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use libm::{cos, sin, sqrt};
use num_complex::Complex64;

use super::distribution::{ModeWindow, OamDistribution};
use super::packet::WavePacket;
use super::OamError;
use crate::fft::fft_in_place;
use crate::quadrature::GaussLegendre;

/// Largest admissible ratio of boundary-ring magnitude to peak magnitude.
pub const BOUNDARY_RATIO_LIMIT: f64 = 1e-8;
/// Relative mass tolerated in the outer quarter of the angular spectrum.
const GUARD_MASS_LIMIT: f64 = 1e-10;
/// Envelope radius in units of the coherence length.
const EXTENT_SIGMAS: f64 = 8.0;

/// Gauss-Legendre radial nodes on `[r_min, r_max]` times a uniform angular
/// grid of `n_phi` points.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    radial: GaussLegendre,
    n_phi: usize,
    r_min: f64,
    r_max: f64,
}

impl PolarGrid {
    pub const DEFAULT_N_R: usize = 512;
    pub const DEFAULT_N_PHI: usize = 1024;

    /// `n_phi` must be a power of two (radix-2 transforms) and at least 4.
    pub fn new(n_r: usize, n_phi: usize, r_min: f64, r_max: f64) -> Result<Self, OamError> {
        if n_r < 2 {
            return Err(OamError::InvalidGrid("need at least two radial nodes"));
        }
        if n_phi < 4 || !n_phi.is_power_of_two() {
            return Err(OamError::InvalidGrid("angular size must be a power of two >= 4"));
        }
        if !(r_min >= 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(OamError::InvalidGrid("radial range must satisfy 0 <= r_min < r_max"));
        }
        Ok(Self {
            radial: GaussLegendre::new(n_r, r_min, r_max),
            n_phi,
            r_min,
            r_max,
        })
    }

    /// Annulus `|δ| ± 8σ` (clipped at the origin) with sizes grown from the
    /// defaults to cover the packet's angular and radial bandwidth.
    pub fn for_packet(wp: &WavePacket) -> Result<Self, OamError> {
        let s = wp.coherence_length();
        let d = libm::fabs(wp.offset());
        let k = libm::fabs(wp.transverse_momentum());
        let r_max = d + EXTENT_SIGMAS * s;
        let r_min = (d - EXTENT_SIGMAS * s).max(0.0);
        let c = 2.0 * d / (s * s);

        // twelve standard deviations of the mode spectrum either side of k_y δ
        let spread = sqrt(s * s * k * k / 4.0 + d * d / (s * s));
        let ell_needed = libm::fabs(wp.transverse_momentum() * wp.offset()) + 12.0 * spread + 16.0;
        let n_phi = ((ell_needed * 8.0 / 3.0).ceil() as usize)
            .max(Self::DEFAULT_N_PHI)
            .next_power_of_two();

        // radial oscillation of J_ℓ(k'r) when k' is real
        let q2 = (k + c) * (k - c);
        let oscillation_nodes = if q2 > 0.0 {
            (sqrt(q2) * (r_max - r_min)).ceil() as usize + 64
        } else {
            0
        };
        let n_r = oscillation_nodes.max(Self::DEFAULT_N_R);
        Self::new(n_r, n_phi, r_min, r_max)
    }

    pub fn n_r(&self) -> usize {
        self.radial.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn radii(&self) -> &[f64] {
        &self.radial.nodes
    }

    pub fn radial_weights(&self) -> &[f64] {
        &self.radial.weights
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_phi as f64
    }
}

/// Complex samples `ψ(r_i, φ_j)` stored ring by ring.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGridField {
    grid: PolarGrid,
    samples: Vec<Complex64>,
}

impl PolarGridField {
    pub fn from_samples(grid: PolarGrid, samples: Vec<Complex64>) -> Result<Self, OamError> {
        if samples.len() != grid.n_r() * grid.n_phi() {
            return Err(OamError::InvalidGrid("sample count does not match grid"));
        }
        Ok(Self { grid, samples })
    }

    /// Samples a Cartesian function `f(x, y)`.
    pub fn from_cartesian(grid: PolarGrid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        Self::from_polar(grid, |r, phi| f(r * cos(phi), r * sin(phi)))
    }

    /// Samples a polar function `f(r, φ)`.
    pub fn from_polar(grid: PolarGrid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let n_phi = grid.n_phi();
        let mut samples = Vec::with_capacity(grid.n_r() * n_phi);
        for &r in grid.radii() {
            for j in 0..n_phi {
                samples.push(f(r, grid.phi(j)));
            }
        }
        Self { grid, samples }
    }

    /// Samples the packet on [`PolarGrid::for_packet`].
    pub fn from_packet(wp: &WavePacket) -> Result<Self, OamError> {
        let grid = PolarGrid::for_packet(wp)?;
        Ok(Self::from_cartesian(grid, |x, y| wp.evaluate(x, y)))
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.samples[i * self.grid.n_phi + j]
    }

    fn ring(&self, i: usize) -> &[Complex64] {
        let n = self.grid.n_phi;
        &self.samples[i * n..(i + 1) * n]
    }

    /// Largest boundary-ring magnitude over the largest magnitude anywhere.
    /// The inner ring counts only when the grid is an annulus.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let ring_max = |i: usize| self.ring(i).iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut edge = ring_max(self.grid.n_r() - 1);
        if self.grid.r_min > 0.0 {
            edge = edge.max(ring_max(0));
        }
        edge / peak
    }

    pub fn check_boundary(&self) -> Result<(), OamError> {
        let ratio = self.boundary_ratio();
        if ratio < BOUNDARY_RATIO_LIMIT {
            Ok(())
        } else {
            Err(OamError::GridExtent { ratio })
        }
    }

    /// `⟨self|other⟩` over the plane.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let n_phi = self.grid.n_phi;
        let mut total = Complex64::new(0.0, 0.0);
        for (i, (&r, &w)) in self.grid.radii().iter().zip(self.grid.radial_weights()).enumerate() {
            let ring: Complex64 = self.samples[i * n_phi..(i + 1) * n_phi]
                .iter()
                .zip(&other.samples[i * n_phi..(i + 1) * n_phi])
                .map(|(a, b)| a.conj() * b)
                .sum();
            total += ring * (w * r);
        }
        total * (2.0 * PI / n_phi as f64)
    }

    pub fn norm_squared(&self) -> f64 {
        self.inner(self).re
    }

    fn map_samples(&self, f: impl Fn(usize, usize, Complex64) -> Complex64) -> Self {
        let n_phi = self.grid.n_phi;
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(idx, &v)| f(idx / n_phi, idx % n_phi, v))
            .collect();
        Self {
            grid: self.grid.clone(),
            samples,
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        self.map_samples(|_, _, v| v * factor)
    }

    /// Pointwise linear combination `Σ a_k f_k` on a shared grid.
    pub fn combine(terms: &[(Complex64, &Self)]) -> Self {
        let first = terms[0].1;
        let mut samples = vec![Complex64::new(0.0, 0.0); first.samples.len()];
        for (a, f) in terms {
            for (s, v) in samples.iter_mut().zip(&f.samples) {
                *s += a * v;
            }
        }
        Self {
            grid: first.grid.clone(),
            samples,
        }
    }

    /// Multiplies sample `(r, φ)` by `g(r, φ)`.
    pub fn weighted(&self, g: impl Fn(f64, f64) -> f64) -> Self {
        let grid = &self.grid;
        self.map_samples(|i, j, v| v * g(grid.radii()[i], grid.phi(j)))
    }

    /// `∂ψ/∂φ` by spectral differentiation of each ring.
    pub fn d_phi(&self) -> Self {
        let n = self.grid.n_phi;
        let mut samples = self.samples.clone();
        for ring in samples.chunks_mut(n) {
            fft_in_place(ring, false);
            for (m, v) in ring.iter_mut().enumerate() {
                let ell = if m < n / 2 {
                    m as f64
                } else if m == n / 2 {
                    0.0
                } else {
                    m as f64 - n as f64
                };
                *v *= Complex64::new(0.0, ell / n as f64);
            }
            fft_in_place(ring, true);
        }
        Self {
            grid: self.grid.clone(),
            samples,
        }
    }

    /// `∂ψ/∂r` using the Gauss-Legendre differentiation matrix.
    pub fn d_r(&self) -> Self {
        let n_r = self.grid.n_r();
        let n_phi = self.grid.n_phi;
        let d = self.grid.radial.differentiation_matrix();
        let mut samples = vec![Complex64::new(0.0, 0.0); self.samples.len()];
        for i in 0..n_r {
            let out = &mut samples[i * n_phi..(i + 1) * n_phi];
            for k in 0..n_r {
                let dik = d[i * n_r + k];
                for (o, v) in out.iter_mut().zip(&self.samples[k * n_phi..(k + 1) * n_phi]) {
                    *o += v * dik;
                }
            }
        }
        Self {
            grid: self.grid.clone(),
            samples,
        }
    }

    /// Cartesian gradient `(∂ψ/∂x, ∂ψ/∂y)`.
    pub fn gradient(&self) -> (Self, Self) {
        let dr = self.d_r();
        let dphi = self.d_phi().weighted(|r, _| 1.0 / r);
        let dx = Self::combine(&[
            (Complex64::new(1.0, 0.0), &dr.weighted(|_, p| cos(p))),
            (Complex64::new(-1.0, 0.0), &dphi.weighted(|_, p| sin(p))),
        ]);
        let dy = Self::combine(&[
            (Complex64::new(1.0, 0.0), &dr.weighted(|_, p| sin(p))),
            (Complex64::new(1.0, 0.0), &dphi.weighted(|_, p| cos(p))),
        ]);
        (dx, dy)
    }

    /// `(⟨p_x⟩, ⟨p_y⟩)` with `p = -i∇`.
    pub fn momentum_expectation(&self) -> (f64, f64) {
        let (dx, dy) = self.gradient();
        let norm = self.norm_squared();
        let px = (self.inner(&dx) * Complex64::new(0.0, -1.0)).re / norm;
        let py = (self.inner(&dy) * Complex64::new(0.0, -1.0)).re / norm;
        (px, py)
    }
}

/// Mode probabilities from ring-wise discrete Fourier transforms and radial
/// quadrature. The window spans every resolvable mode of the angular grid.
pub fn numeric_oam_spectrum(field: &PolarGridField) -> Result<OamDistribution, OamError> {
    field.check_boundary()?;
    let n = field.grid.n_phi;
    let half = (n / 2) as i64;
    let mut power = vec![0.0; n];
    let mut ring = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..field.grid.n_r() {
        ring.copy_from_slice(field.ring(i));
        fft_in_place(&mut ring, false);
        let weight = field.grid.radial_weights()[i] * field.grid.radii()[i];
        for (m, c) in ring.iter().enumerate() {
            let ell = if (m as i64) < half { m as i64 } else { m as i64 - n as i64 };
            power[(ell + half) as usize] += weight * c.norm_sqr();
        }
    }
    let total: f64 = power.iter().sum();
    if !(total > 0.0) {
        return Err(OamError::NumericRange("field norm"));
    }
    let guard_start = (3 * n / 8) as i64;
    let guard: f64 = power
        .iter()
        .enumerate()
        .filter(|(idx, _)| (*idx as i64 - half).abs() >= guard_start)
        .map(|(_, p)| p)
        .sum();
    let guard_mass = guard / total;
    if guard_mass > GUARD_MASS_LIMIT {
        return Err(OamError::Bandwidth { guard_mass });
    }
    let window = ModeWindow::new(-half, half - 1)?;
    OamDistribution::from_weights(window, power, 1.0 - guard_mass)
}
