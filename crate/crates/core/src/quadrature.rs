//! Gauss–Legendre rules and the matching spectral differentiation matrix.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use libm::cos;

/// Nodes (ascending) and weights of an `n`-point rule on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    reference_nodes: Vec<f64>,
    reference_weights: Vec<f64>,
    a: f64,
    b: f64,
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

impl GaussLegendre {
    pub fn new(n: usize, a: f64, b: f64) -> Self {
        assert!(n >= 2, "need at least two quadrature nodes");
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            let mut t = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, t);
                dp = d;
                let step = p / d;
                t -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, t);
            dp = if d.is_finite() { d } else { dp };
            let weight = 2.0 / ((1.0 - t * t) * dp * dp);
            // t descends with i; mirror into ascending order
            x[n - 1 - i] = t;
            x[i] = -t;
            w[n - 1 - i] = weight;
            w[i] = weight;
        }
        if n % 2 == 1 {
            x[n / 2] = 0.0;
        }
        let scale = 0.5 * (b - a);
        let nodes = x.iter().map(|&t| a + scale * (t + 1.0)).collect();
        let weights = w.iter().map(|&v| v * scale).collect();
        Self {
            nodes,
            weights,
            reference_nodes: x,
            reference_weights: w,
            a,
            b,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Dense `n × n` (row-major) matrix mapping nodal values to nodal
    /// derivatives of the interpolating polynomial on `[a, b]`.
    pub fn differentiation_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let t = &self.reference_nodes;
        // barycentric weights for Legendre points: (-1)^j sqrt((1 - t_j²) w_j)
        let bary: Vec<f64> = (0..n)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * ((1.0 - t[j] * t[j]) * self.reference_weights[j]).sqrt()
            })
            .collect();
        let scale = 2.0 / (self.b - self.a);
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            let mut diagonal = 0.0;
            for j in 0..n {
                if i != j {
                    let entry = bary[j] / bary[i] / (t[i] - t[j]);
                    d[i * n + j] = entry * scale;
                    diagonal -= entry;
                }
            }
            d[i * n + i] = diagonal * scale;
        }
        d
    }
}
