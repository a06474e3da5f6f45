//! Small dense symmetric positive-definite matrices.
//!
//! Targets live in modest dimensions (tens), so the factorizations here are
//! plain textbook routines: Cholesky for validation/solves/determinants and
//! cyclic Jacobi for eigenvalue extremes.

use crate::{Error, Result};

/// A symmetric positive-definite matrix with its Cholesky factor `L`
/// (`Σ = L Lᵀ`) computed once at construction.
#[derive(Clone, Debug)]
pub struct SpdMatrix {
    dim: usize,
    /// Row-major entries of the full symmetric matrix.
    data: Vec<f64>,
    /// Row-major lower-triangular Cholesky factor.
    chol: Vec<f64>,
}

impl SpdMatrix {
    /// Build from row-major entries, validating symmetry and positive
    /// definiteness (via the Cholesky attempt).
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = data[i * dim + j];
                let b = data[j * dim + i];
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::NotPositiveDefinite);
                }
            }
        }
        let chol = cholesky(dim, &data)?;
        Ok(Self { dim, data, chol })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self::from_row_major(dim, data).expect("identity is SPD")
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        let mut data = vec![0.0; dim * dim];
        for (i, &v) in diag.iter().enumerate() {
            data[i * dim + i] = v;
        }
        Self::from_row_major(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    /// `ln det Σ = 2 Σ_i ln L_ii`.
    pub fn ln_det(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.chol[i * self.dim + i].ln())
            .sum::<f64>()
            * 2.0
    }

    /// Quadratic form `xᵀ Σ x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut total = 0.0;
        for i in 0..self.dim {
            let mut row = 0.0;
            for j in 0..self.dim {
                row += self.entry(i, j) * x[j];
            }
            total += x[i] * row;
        }
        total
    }

    /// `out = Σ x`.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for i in 0..self.dim {
            let mut acc = 0.0;
            for j in 0..self.dim {
                acc += self.entry(i, j) * x[j];
            }
            out[i] = acc;
        }
    }

    /// Solve `Lᵀ x = y` by back substitution. Used by the reference sampler:
    /// if `y` has the isotropic law then `x = L⁻ᵀ y` satisfies `xᵀΣx = |y|²`.
    pub fn solve_lt(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                // Lᵀ[i][j] = L[j][i]
                acc -= self.chol[j * n + i] * x[j];
            }
            x[i] = acc / self.chol[i * n + i];
        }
        x
    }

    /// Smallest and largest eigenvalues via cyclic Jacobi sweeps.
    pub fn eigen_extremes(&self) -> (f64, f64) {
        let n = self.dim;
        let mut a = self.data.clone();
        for _sweep in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[p * n + q].abs();
                }
            }
            if off < 1e-13 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = 0.5 * (aqq - app) / apq;
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for i in 0..n {
            min = min.min(a[i * n + i]);
            max = max.max(a[i * n + i]);
        }
        (min, max)
    }
}

fn cholesky(n: usize, a: &[f64]) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::NotPositiveDefinite);
                }
                l[i * n + j] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Ok(l)
}
