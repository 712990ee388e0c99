//! Small dense least squares via the normal equations.

use crate::error::{ArenaError, Result};

/// Row-major design matrix with a target vector.
#[derive(Debug, Clone, Default)]
pub struct Rows {
    pub dim: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Rows {
    pub fn new(dim: usize) -> Self {
        Rows {
            dim,
            x: Vec::new(),
            y: Vec::new(),
        }
    }

    pub fn push(&mut self, features: &[f64], target: f64) {
        debug_assert_eq!(features.len(), self.dim);
        self.x.extend_from_slice(features);
        self.y.push(target);
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.x
            .chunks_exact(self.dim.max(1))
            .zip(self.y.iter().copied())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// In-place Cholesky factorization of a symmetric positive-definite matrix
/// (row-major, lower triangle used). Fails on a non-positive pivot.
pub fn cholesky(a: &mut [f64], n: usize) -> Result<()> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(ArenaError::Numerical(format!(
                "matrix not positive definite at pivot {j}"
            )));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Ok(())
}

/// Solves `L Lᵀ x = b` given the factor produced by [`cholesky`].
pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut z = b.to_vec();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l[i * n + k] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= l[k * n + i] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    z
}

/// Minimizes `Σ (y − Xw)² + Σ_j penalty_j · w_j²`.
///
/// Columns are equilibrated by the square root of their Gram diagonal before
/// factorizing; an all-zero unpenalized column makes the system singular and
/// is reported as a numerical error.
pub fn ridge_least_squares(rows: &Rows, penalties: &[f64]) -> Result<Vec<f64>> {
    let d = rows.dim;
    assert_eq!(penalties.len(), d, "one penalty per column");
    if rows.is_empty() {
        return Err(ArenaError::InsufficientData("no rows to fit".into()));
    }
    let mut gram = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    for (x, y) in rows.iter() {
        for i in 0..d {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            rhs[i] += xi * y;
            for j in 0..=i {
                gram[i * d + j] += xi * x[j];
            }
        }
    }
    for i in 0..d {
        gram[i * d + i] += penalties[i];
        for j in 0..i {
            gram[j * d + i] = gram[i * d + j];
        }
    }
    let scale: Vec<f64> = (0..d)
        .map(|i| {
            let v = gram[i * d + i];
            if v > 0.0 {
                v.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    for i in 0..d {
        rhs[i] /= scale[i];
        for j in 0..d {
            gram[i * d + j] /= scale[i] * scale[j];
        }
    }
    // relative pivot floor: anything below this is rank deficiency
    for i in 0..d {
        if gram[i * d + i] < 1e-300 {
            return Err(ArenaError::Numerical(format!(
                "column {i} is identically zero"
            )));
        }
    }
    cholesky(&mut gram, d)?;
    let min_pivot = (0..d)
        .map(|i| gram[i * d + i])
        .fold(f64::INFINITY, f64::min);
    if min_pivot < 1e-7 {
        return Err(ArenaError::Numerical(
            "design matrix is rank deficient".into(),
        ));
    }
    let w = cholesky_solve(&gram, d, &rhs);
    Ok(w.iter().zip(&scale).map(|(w, s)| w / s).collect())
}
