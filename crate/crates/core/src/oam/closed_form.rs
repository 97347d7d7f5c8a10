use alloc::vec::Vec;
use libm::{cos, exp, expm1, lgamma, log, sin, sqrt};
use num_complex::Complex64;

use super::distribution::{ModeWindow, OamDistribution, DEFAULT_CAPTURE_THRESHOLD};
use super::packet::{PacketKind, WavePacket};
use super::OamError;
use crate::bessel::{bessel_i_scaled_ln_orders, bessel_j};

const MIN_HALF_WIDTH: i64 = 32;
const MAX_HALF_WIDTH: i64 = 1 << 22;
const PHASE_RESIDUE_LIMIT: f64 = 1e-10;
/// Below this Bessel argument the single-offset spectrum is taken in its
/// Poisson limit.
const POISSON_LIMIT_X: f64 = 1e-9;

/// Window centred on `round(k_y δ)` with half-width
/// `max(32, 8 sqrt(σ²k_y²/4 + δ²/σ²))`, which is eight standard deviations of
/// the single-offset spectrum.
pub fn default_window(wp: &WavePacket) -> ModeWindow {
    let s = wp.coherence_length();
    let d = wp.offset();
    let k = wp.transverse_momentum();
    let spread = sqrt(s * s * k * k / 4.0 + d * d / (s * s));
    let half = ((8.0 * spread).ceil() as i64).clamp(MIN_HALF_WIDTH, MAX_HALF_WIDTH);
    ModeWindow::centered(libm::round(k * d) as i64, half)
}

/// Complex amplitude `ψ^ℓ(r)` of the vortex mode `ℓ` at radius `r`.
pub fn vortex_mode_amplitude(wp: &WavePacket, ell: i64, r: f64) -> Result<Complex64, OamError> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(OamError::InvalidPacket("radius must be finite and non-negative"));
    }
    let s2 = wp.coherence_length() * wp.coherence_length();
    let d = wp.offset();
    let c = 2.0 * d / s2;
    let m = ell.unsigned_abs();
    let ln_env = log(wp.amplitude()) - (r * r + d * d) / s2;
    match wp.kind() {
        PacketKind::SingleOffset {
            transverse_momentum: k,
        } => {
            let base = if ell >= 0 { k + c } else { c - k };
            let q2 = (k + c) * (k - c);
            let (modified, q) = (q2 < 0.0, sqrt(libm::fabs(q2)));
            let (ln_mag, negative) = ln_scaled_bessel_power(m, base, q, r, modified);
            let mag = exp(ln_env + ln_mag);
            if !mag.is_finite() {
                return Err(OamError::NumericRange("vortex mode amplitude"));
            }
            Ok(Complex64::new(if negative { -mag } else { mag }, 0.0))
        }
        PacketKind::SplitPair { relative_phase } => {
            let arg = c * r;
            let ln_i = if arg == 0.0 {
                if m == 0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                bessel_i_scaled_ln_orders(m as usize, arg)[m as usize] + arg
            };
            let mag = exp(ln_env + ln_i) / core::f64::consts::SQRT_2;
            if !mag.is_finite() {
                return Err(OamError::NumericRange("split-pair vortex amplitude"));
            }
            let a_plus = if m % 2 == 1 { -1.0 } else { 1.0 };
            let a_minus = 1.0;
            let half = 0.5 * relative_phase;
            let phase = Complex64::new(cos(half), sin(half));
            Ok((phase * a_plus + phase.conj() * a_minus) * mag)
        }
    }
}

/// `ln |(b/q)^m F_m(q r)|` and whether the value is negative, where `F` is
/// `J` or (for `modified`) `I`. Small `q r` is handled by the power series so
/// the `q -> 0` limit stays finite.
fn ln_scaled_bessel_power(m: u64, b: f64, q: f64, r: f64, modified: bool) -> (f64, bool) {
    let negative_base = b < 0.0 && m % 2 == 1;
    if m == 0 && (q == 0.0 || r == 0.0) {
        return (0.0, false);
    }
    if m > 0 && (b == 0.0 || r == 0.0) {
        return (f64::NEG_INFINITY, false);
    }
    let z = q * r;
    if z < 1.0 {
        let y = 0.25 * z * z;
        let sign = if modified { 1.0 } else { -1.0 };
        let (mut term, mut sum) = (1.0f64, 1.0f64);
        let mut k = 0.0;
        let mf = m as f64;
        while term.abs() > 1e-18 * sum.abs() {
            term *= sign * y / ((k + 1.0) * (mf + k + 1.0));
            sum += term;
            k += 1.0;
        }
        let ln = mf * log(libm::fabs(b) * r / 2.0) - lgamma(mf + 1.0) + log(sum);
        return (ln, negative_base);
    }
    let ln_ratio = (m as f64) * (log(libm::fabs(b)) - log(q));
    if modified {
        let ln_i = bessel_i_scaled_ln_orders(m as usize, z)[m as usize] + z;
        (ln_i + ln_ratio, negative_base)
    } else {
        let j = bessel_j(m as i64, z);
        (log(libm::fabs(j)) + ln_ratio, negative_base ^ (j < 0.0))
    }
}

/// Spectrum of a single-offset packet, auto-widening the default window
/// when `window` is `None`.
pub fn oam_spectrum_offset_planewave(
    wp: &WavePacket,
    window: Option<ModeWindow>,
) -> Result<OamDistribution, OamError> {
    if !matches!(wp.kind(), PacketKind::SingleOffset { .. }) {
        return Err(OamError::WrongKind {
            expected: "single-offset",
        });
    }
    spectrum_with_threshold(wp, window, DEFAULT_CAPTURE_THRESHOLD)
}

/// Spectrum of a split pair, auto-widening the default window when `window`
/// is `None`.
pub fn oam_spectrum_split_pair(
    wp: &WavePacket,
    window: Option<ModeWindow>,
) -> Result<OamDistribution, OamError> {
    if !matches!(wp.kind(), PacketKind::SplitPair { .. }) {
        return Err(OamError::WrongKind {
            expected: "split-pair",
        });
    }
    spectrum_with_threshold(wp, window, DEFAULT_CAPTURE_THRESHOLD)
}

/// Closed-form spectrum for either packet kind.
pub fn oam_spectrum(wp: &WavePacket, window: Option<ModeWindow>) -> Result<OamDistribution, OamError> {
    spectrum_with_threshold(wp, window, DEFAULT_CAPTURE_THRESHOLD)
}

/// As [`oam_spectrum`] with an explicit capture threshold in `(0, 1]`.
pub fn spectrum_with_threshold(
    wp: &WavePacket,
    window: Option<ModeWindow>,
    threshold: f64,
) -> Result<OamDistribution, OamError> {
    let threshold = threshold.clamp(0.0, 1.0);
    let build = |w: ModeWindow| -> Result<(Vec<f64>, f64), OamError> {
        let weights = mode_probabilities(wp, w)?;
        let captured = weights.iter().sum::<f64>();
        Ok((weights, captured))
    };
    match window {
        Some(w) => {
            let (weights, captured) = build(w)?;
            if captured < threshold {
                let mut suggested = default_window(wp);
                while build(suggested)?.1 < threshold {
                    suggested = widen(suggested)?;
                }
                return Err(OamError::Truncation {
                    window: w,
                    captured_mass: captured,
                    suggested,
                });
            }
            OamDistribution::from_weights(w, weights, captured)
        }
        None => {
            let mut w = default_window(wp);
            loop {
                let (weights, captured) = build(w)?;
                if captured >= threshold {
                    return OamDistribution::from_weights(w, weights, captured);
                }
                log::debug!("widening mode window beyond [{}, {}]", w.min, w.max);
                w = widen(w)?;
            }
        }
    }
}

fn widen(w: ModeWindow) -> Result<ModeWindow, OamError> {
    let half = (w.max - w.min) / 2;
    if half >= MAX_HALF_WIDTH {
        return Err(OamError::NumericRange("mode window growth"));
    }
    Ok(ModeWindow::centered(w.min + half, (2 * half).max(1)))
}

/// Exact mode probabilities over `window`, normalised against the full
/// (infinite) spectrum so their sum is the captured mass.
fn mode_probabilities(wp: &WavePacket, window: ModeWindow) -> Result<Vec<f64>, OamError> {
    let ln_p = match wp.kind() {
        PacketKind::SingleOffset {
            transverse_momentum,
        } => single_offset_ln_probabilities(wp, transverse_momentum, window)?,
        PacketKind::SplitPair { relative_phase } => {
            split_pair_ln_probabilities(wp, relative_phase, window)?
        }
    };
    Ok(ln_p.into_iter().map(exp).collect())
}

fn single_offset_ln_probabilities(
    wp: &WavePacket,
    k: f64,
    window: ModeWindow,
) -> Result<Vec<f64>, OamError> {
    let s2 = wp.coherence_length() * wp.coherence_length();
    let c = 2.0 * wp.offset() / s2;
    let kp = libm::fabs(c + k);
    let km = libm::fabs(c - k);
    let n = window.len();

    if kp == 0.0 && km == 0.0 {
        return Ok(window
            .iter()
            .map(|l| if l == 0 { 0.0 } else { f64::NEG_INFINITY })
            .collect());
    }

    // p[ℓ] ∝ t^ℓ e^{-x} I_ℓ(x), with t = e^{-2 Im α} and x = σ²|k'|²/4.
    let x = 0.25 * s2 * kp * km;
    check_phase_residue(k, c, window)?;

    if x < POISSON_LIMIT_X {
        // x -> 0 with x t fixed: Poisson in ℓ (or -ℓ) with mean σ²(c ± k)²/8.
        let (mu, sign) = if kp >= km {
            (0.125 * s2 * kp * kp, 1)
        } else {
            (0.125 * s2 * km * km, -1)
        };
        let ln_mu = log(mu);
        return Ok(window
            .iter()
            .map(|l| {
                let j = l * sign;
                if j < 0 {
                    f64::NEG_INFINITY
                } else {
                    let jf = j as f64;
                    jf * ln_mu - mu - lgamma(jf + 1.0)
                }
            })
            .collect());
    }

    let ln_t = log(kp) - log(km);
    // Σ t^ℓ e^{-x} I_ℓ(x) = exp(x (t + 1/t)/2 - x) = exp(σ² min(|c|,|k|)² / 2).
    let mn = libm::fabs(c).min(libm::fabs(k));
    let ln_total = 0.5 * s2 * mn * mn;
    let ln_ie = bessel_i_scaled_ln_orders(window.max_abs() as usize, x);
    let mut out = Vec::with_capacity(n);
    for l in window.iter() {
        out.push(l as f64 * ln_t + ln_ie[l.unsigned_abs() as usize] - ln_total);
    }
    Ok(out)
}

/// Evaluates `e^{iℓ(α-α*)}` with `e^{iα} = (k_y + c)/k'` and confirms it is
/// real to within the residue limit over the window.
fn check_phase_residue(k: f64, c: f64, window: ModeWindow) -> Result<(), OamError> {
    let kprime = Complex64::new((k + c) * (k - c), 0.0).sqrt();
    if kprime.norm() == 0.0 || k + c == 0.0 {
        return Ok(());
    }
    let z = Complex64::new(k + c, 0.0) / kprime;
    let alpha = -Complex64::i() * z.ln();
    let diff = alpha - alpha.conj();
    for l in [window.min, window.max] {
        let exponent = Complex64::i() * (l as f64) * diff;
        if libm::fabs(exponent.im) > PHASE_RESIDUE_LIMIT {
            return Err(OamError::NumericRange("imaginary residue of e^{iℓ(α-α*)}"));
        }
    }
    Ok(())
}

fn split_pair_ln_probabilities(
    wp: &WavePacket,
    beta: f64,
    window: ModeWindow,
) -> Result<Vec<f64>, OamError> {
    let s = wp.coherence_length();
    let x = (wp.offset() / s) * (wp.offset() / s);
    let cb = cos(beta);
    // Σ e^{-x} I_ℓ(x) (1 + (-1)^ℓ cos β)/2 = ½[1 + cos β e^{-2x}]
    let total = 0.5 * ((1.0 + cb) + cb * expm1(-2.0 * x));
    if !(total > 0.0) {
        return Err(OamError::Degenerate);
    }
    let ln_total = log(total);
    let ln_ie = if x == 0.0 {
        let mut v = alloc::vec![f64::NEG_INFINITY; window.max_abs() as usize + 1];
        v[0] = 0.0;
        v
    } else {
        bessel_i_scaled_ln_orders(window.max_abs() as usize, x)
    };
    let ln_even = log(0.5 * (1.0 + cb));
    let ln_odd = log(0.5 * (1.0 - cb));
    Ok(window
        .iter()
        .map(|l| {
            let parity = if l.rem_euclid(2) == 0 { ln_even } else { ln_odd };
            ln_ie[l.unsigned_abs() as usize] + parity - ln_total
        })
        .collect())
}
