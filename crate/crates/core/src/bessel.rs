//! Integer-order Bessel functions of real argument.
//!
//! Both families are evaluated for a whole run of orders at once since every
//! caller (mode windows, radial profiles) needs a contiguous block of orders.
//! `J_n` uses Miller's backward recurrence normalised by
//! `J_0 + 2 Σ J_2k = 1`; `I_n` is carried as a chain of ratios
//! `I_k / I_{k-1}` obtained from the backward continued fraction, which keeps
//! the exponentially scaled values representable for arguments in the tens of
//! thousands.

use alloc::vec;
use alloc::vec::Vec;
use libm::{cbrt, exp, log};

const RESCALE_ABOVE: f64 = 1e250;

fn miller_start(n_max: usize, x: f64) -> usize {
    let base = if x > n_max as f64 { x as usize } else { n_max };
    let start = base + 50 + (10.0 * cbrt(x)) as usize + (x.sqrt() as usize);
    start + (start & 1)
}

/// `J_0(x) ..= J_{n_max}(x)` for real `x`.
pub fn bessel_j_orders(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let start = miller_start(n_max, ax);
    let two_over_x = 2.0 / ax;

    let mut next = 0.0_f64; // J_{k+1}
    let mut current = 1e-300_f64; // J_k
    let mut norm = 0.0_f64;
    for k in (1..=start).rev() {
        if k <= n_max {
            out[k] = current;
        }
        if k % 2 == 0 {
            norm += 2.0 * current;
        }
        let previous = k as f64 * two_over_x * current - next;
        next = current;
        current = previous;
        if current.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            current *= s;
            next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    out[0] = current;
    norm += current;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `J_n(x)` for any integer order.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let order = n.unsigned_abs() as usize;
    let value = bessel_j_orders(order, x)[order];
    if n < 0 && order % 2 == 1 {
        -value
    } else {
        value
    }
}

/// `ln(e^{-x} I_k(x))` for `k = 0 ..= n_max`, `x >= 0`.
///
/// Orders whose value underflows the ratio chain come back as `-inf`.
pub fn bessel_i_scaled_ln_orders(n_max: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0, "modified Bessel argument must be non-negative");
    let mut out = vec![f64::NEG_INFINITY; n_max + 1];
    if x == 0.0 {
        out[0] = 0.0;
        return out;
    }
    let start = n_max.max(8) + 40 + (12.0 * x.sqrt()) as usize;
    // ratios[k] = I_k / I_{k-1}
    let mut ratios = vec![0.0_f64; start + 1];
    let mut rho = 0.0_f64;
    for k in (1..=start).rev() {
        rho = 1.0 / (2.0 * k as f64 / x + rho);
        ratios[k] = rho;
    }
    // e^{x} = I_0 + 2 Σ I_k  =>  Ie_0 = 1 / (1 + 2 Σ Π ρ)
    let mut product = 1.0_f64;
    let mut tail = 0.0_f64;
    for &r in &ratios[1..] {
        product *= r;
        if product == 0.0 {
            break;
        }
        tail += product;
    }
    let ln_ie0 = -log(1.0 + 2.0 * tail);
    let mut acc = ln_ie0;
    out[0] = acc;
    for k in 1..=n_max {
        acc += log(ratios[k]);
        out[k] = acc;
    }
    out
}

/// `e^{-|x|} I_n(x)` for any integer order.
pub fn bessel_i_scaled(n: i64, x: f64) -> f64 {
    let order = n.unsigned_abs() as usize;
    let value = exp(bessel_i_scaled_ln_orders(order, x.abs())[order]);
    if x < 0.0 && order % 2 == 1 {
        -value
    } else {
        value
    }
}
