use crate::error::{Error, Result};

use super::linalg::{sym_eigen, SymEigen, SymMatrix};

/// Relative floor on the smallest eigenvalue for density evaluation.
pub const PD_RELATIVE_FLOOR: f64 = 1e-12;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A Gaussian with its covariance pre-factored, for repeated evaluation.
#[derive(Clone, Debug)]
pub struct GaussianKernel {
    mean: Vec<f64>,
    eig: SymEigen,
    inv_values: Vec<f64>,
    log_norm: f64,
}

impl GaussianKernel {
    pub fn new(mean: &[f64], cov: &SymMatrix) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(Error::DimensionMismatch {
                expected: cov.dim(),
                found: mean.len(),
            });
        }
        let eig = sym_eigen(cov)?;
        Self::from_eigen(mean, eig)
    }

    pub fn from_eigen(mean: &[f64], eig: SymEigen) -> Result<Self> {
        let p = eig.dim();
        let max = eig.values[0];
        let min = eig.values[p - 1];
        if !(max > 0.0) || !(min > PD_RELATIVE_FLOOR * max) {
            return Err(Error::SingularCovariance { min, max });
        }
        let log_det: f64 = eig.values.iter().map(|v| v.ln()).sum();
        let inv_values = eig.values.iter().map(|v| 1.0 / v).collect();
        Ok(Self {
            mean: mean.to_vec(),
            eig,
            inv_values,
            log_norm: -0.5 * (p as f64 * LN_2PI + log_det),
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn log_det(&self) -> f64 {
        self.eig.values.iter().map(|v| v.ln()).sum()
    }

    /// `(x - μ)ᵀ Σ⁻¹ (x - μ)`
    #[inline]
    pub fn mahalanobis_sq(&self, x: &[f64]) -> f64 {
        let p = self.mean.len();
        let v = &self.eig.vectors;
        let mut q = 0.0;
        for l in 0..p {
            let mut proj = 0.0;
            for i in 0..p {
                proj += (x[i] - self.mean[i]) * v[i * p + l];
            }
            q += proj * proj * self.inv_values[l];
        }
        q
    }

    #[inline]
    pub fn log_density(&self, x: &[f64]) -> f64 {
        self.log_norm - 0.5 * self.mahalanobis_sq(x)
    }
}

/// `log φ(x; μ, Σ)`.
pub fn log_gaussian_density(x: &[f64], mean: &[f64], cov: &SymMatrix) -> Result<f64> {
    if x.len() != mean.len() {
        return Err(Error::DimensionMismatch {
            expected: mean.len(),
            found: x.len(),
        });
    }
    Ok(GaussianKernel::new(mean, cov)?.log_density(x))
}
