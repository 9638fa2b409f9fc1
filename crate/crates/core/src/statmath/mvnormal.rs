use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::DataMatrix;
use crate::error::{Error, Result};

use super::linalg::{sym_eigen, SymMatrix};
use super::rng::RngStream;

/// Draws from `N(μ, Σ)` through the symmetric square root `V Λ^{1/2}`,
/// which also covers singular (semidefinite) covariances.
#[derive(Clone, Debug)]
pub struct MvNormalSampler {
    mean: Vec<f64>,
    factor: Vec<f64>,
}

impl MvNormalSampler {
    pub fn new(mean: &[f64], cov: &SymMatrix) -> Result<Self> {
        let p = cov.dim();
        if mean.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: mean.len(),
            });
        }
        let eig = sym_eigen(cov)?;
        let scale = eig.values[0].abs().max(f64::MIN_POSITIVE);
        if eig.values[p - 1] < -1e-10 * scale {
            return Err(Error::Domain(format!(
                "covariance is indefinite (smallest eigenvalue {})",
                eig.values[p - 1]
            )));
        }
        let mut factor = vec![0.0; p * p];
        for i in 0..p {
            for l in 0..p {
                factor[i * p + l] = eig.vectors[i * p + l] * eig.values[l].max(0.0).sqrt();
            }
        }
        Ok(Self {
            mean: mean.to_vec(),
            factor,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let p = self.mean.len();
        let mut z = [0.0_f64; 16];
        let mut heap;
        let z: &mut [f64] = if p <= 16 {
            &mut z[..p]
        } else {
            heap = vec![0.0; p];
            &mut heap
        };
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for i in 0..p {
            let mut acc = self.mean[i];
            for l in 0..p {
                acc += self.factor[i * p + l] * z[l];
            }
            out[i] = acc;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.mean.len()];
        self.sample_into(rng, &mut out);
        out
    }
}

/// `n` i.i.d. rows from `N(mean, cov)`, deterministic given `stream`.
pub fn sample_mvnormal(
    mean: &[f64],
    cov: &SymMatrix,
    n: usize,
    stream: &RngStream,
) -> Result<DataMatrix> {
    let sampler = MvNormalSampler::new(mean, cov)?;
    let p = sampler.dim();
    let mut rng = stream.rng();
    let mut values = vec![0.0; n * p];
    for row in values.chunks_mut(p) {
        sampler.sample_into(&mut rng, row);
    }
    DataMatrix::new(n, p, values)
}
