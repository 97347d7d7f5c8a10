//! Weighted linear least squares via Householder QR.

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("design matrix is rank deficient (column {column})")]
    RankDeficient { column: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("weights must be finite and positive")]
    BadWeight,
}

/// Row-major design matrix.
#[derive(Debug, Clone)]
pub struct Design {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Design {
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    /// `(Xᵀ W X)⁻¹`, row-major.
    pub covariance: Vec<f64>,
    pub chi_square: f64,
    pub residuals: Vec<f64>,
}

impl LeastSquares {
    pub fn std_error(&self, j: usize) -> f64 {
        let p = self.coefficients.len();
        self.covariance[j * p + j].max(0.0).sqrt()
    }
}

/// Minimises `Σ w_i (y_i - (Xβ)_i)²`.
///
/// Columns are equilibrated before the factorisation and rank is judged on
/// the scaled `R` diagonal relative to its largest entry.
pub fn weighted_least_squares(
    design: &Design,
    y: &[f64],
    weights: &[f64],
) -> Result<LeastSquares, LinalgError> {
    solve_with_damping(design, y, weights, None)
}

/// Same as [`weighted_least_squares`] with an extra Tikhonov block
/// `damping_j * δ_j = 0` appended; used by the Levenberg–Marquardt steps.
pub fn solve_with_damping(
    design: &Design,
    y: &[f64],
    weights: &[f64],
    damping: Option<&[f64]>,
) -> Result<LeastSquares, LinalgError> {
    let (m, p) = (design.rows, design.cols);
    if y.len() != m || weights.len() != m {
        return Err(LinalgError::Dimension("rows of design, y and weights differ"));
    }
    if m < p {
        return Err(LinalgError::Dimension("fewer rows than parameters"));
    }
    if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
        return Err(LinalgError::BadWeight);
    }
    let extra = if damping.is_some() { p } else { 0 };
    let rows = m + extra;

    let mut col_scale = vec![0.0; p];
    for (j, scale) in col_scale.iter_mut().enumerate() {
        let norm: f64 = (0..m)
            .map(|i| weights[i] * design.at(i, j) * design.at(i, j))
            .sum::<f64>()
            .sqrt();
        *scale = if norm > 0.0 { norm } else { 1.0 };
    }

    // column-major working copy of sqrt(W) X D⁻¹
    let mut a = vec![0.0; rows * p];
    let mut b = vec![0.0; rows];
    for i in 0..m {
        let sw = weights[i].sqrt();
        for j in 0..p {
            a[j * rows + i] = sw * design.at(i, j) / col_scale[j];
        }
        b[i] = sw * y[i];
    }
    if let Some(damp) = damping {
        for j in 0..p {
            a[j * rows + m + j] = damp[j] / col_scale[j];
        }
    }

    let mut diag = vec![0.0; p];
    for k in 0..p {
        let norm: f64 = (k..rows).map(|i| a[k * rows + i].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(LinalgError::RankDeficient { column: k });
        }
        let alpha = if a[k * rows + k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..rows).map(|i| a[k * rows + i]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        diag[k] = alpha;
        if vnorm2 > 0.0 {
            for j in k..p {
                let dot: f64 = (k..rows).map(|i| v[i - k] * a[j * rows + i]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in k..rows {
                    a[j * rows + i] -= f * v[i - k];
                }
            }
            let dot: f64 = (k..rows).map(|i| v[i - k] * b[i]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..rows {
                b[i] -= f * v[i - k];
            }
        }
    }
    let r = |i: usize, j: usize| a[j * rows + i];
    let max_diag = diag.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
    for (k, d) in diag.iter().enumerate() {
        if d.abs() <= 1e-12 * max_diag {
            return Err(LinalgError::RankDeficient { column: k });
        }
    }

    // back substitution R z = Qᵀ b
    let mut z = vec![0.0; p];
    for k in (0..p).rev() {
        let s: f64 = (k + 1..p).map(|j| r(k, j) * z[j]).sum();
        z[k] = (b[k] - s) / r(k, k);
    }
    // R⁻¹ (upper triangular)
    let mut rinv = vec![0.0; p * p];
    for col in 0..p {
        for k in (0..=col).rev() {
            let unit = if k == col { 1.0 } else { 0.0 };
            let s: f64 = (k + 1..=col).map(|j| r(k, j) * rinv[j * p + col]).sum();
            rinv[k * p + col] = (unit - s) / r(k, k);
        }
    }
    let mut covariance = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            let s: f64 = (i.max(j)..p).map(|k| rinv[i * p + k] * rinv[j * p + k]).sum();
            covariance[i * p + j] = s / (col_scale[i] * col_scale[j]);
        }
    }
    let coefficients: Vec<f64> = z.iter().zip(&col_scale).map(|(v, s)| v / s).collect();
    let residuals: Vec<f64> = (0..m)
        .map(|i| y[i] - (0..p).map(|j| design.at(i, j) * coefficients[j]).sum::<f64>())
        .collect();
    let chi_square = residuals
        .iter()
        .zip(weights)
        .map(|(r, w)| w * r * r)
        .sum();
    Ok(LeastSquares {
        coefficients,
        covariance,
        chi_square,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_line_and_covariance() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let design = Design::from_fn(4, 2, |i, j| if j == 0 { 1.0 } else { xs[i] });
        let y: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let fit = weighted_least_squares(&design, &y, &[1.0; 4]).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-14);
        assert!((fit.coefficients[1] + 0.5).abs() < 1e-14);
        // (XᵀX)⁻¹ for x = 0..3: [[0.7, -0.3], [-0.3, 0.2]]
        let expected = [0.7, -0.3, -0.3, 0.2];
        for (c, e) in fit.covariance.iter().zip(expected) {
            assert!((c - e).abs() < 1e-13);
        }
    }

    #[test]
    fn detects_rank_deficiency() {
        let design = Design::from_fn(5, 2, |i, _| i as f64);
        let err = weighted_least_squares(&design, &[1.0; 5], &[1.0; 5]).unwrap_err();
        assert!(matches!(err, LinalgError::RankDeficient { .. }));
    }
}
