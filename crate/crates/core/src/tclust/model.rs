use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statmath::{sym_eigen, RngStream, SymMatrix};

/// Tolerance on the weights summing to one.
pub const WEIGHT_SUM_TOL: f64 = 1e-10;
/// Relative slack allowed on the eigenvalue-ratio bound.
pub const RATIO_SLACK: f64 = 1e-8;

/// Number of trimmed observations, `⌊nα⌋`.
///
/// A `1e-9` guard absorbs representation error in grid values such as
/// `3 × 0.2 / 8`, so `n·α` that is integral in exact arithmetic is not
/// rounded down by one.
pub fn trim_count(n: usize, alpha: f64) -> usize {
    ((n as f64) * alpha + 1e-9).floor() as usize
}

/// Weights, means and covariances of `k` Gaussian clusters together with the
/// eigenvalue-ratio bound they were fitted under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub covs: Vec<SymMatrix>,
    pub c: f64,
}

impl ClusterModel {
    pub fn new(
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        covs: Vec<SymMatrix>,
        c: f64,
    ) -> Result<Self> {
        let model = Self {
            weights,
            means,
            covs,
            c,
        };
        model.validate()?;
        Ok(model)
    }

    /// Checks shapes, weights and the bound `c` (not the eigenvalue ratio).
    pub fn validate(&self) -> Result<()> {
        let k = self.weights.len();
        if k == 0 {
            return Err(Error::Domain("model has no clusters".into()));
        }
        if self.means.len() != k || self.covs.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: self.means.len().min(self.covs.len()),
            });
        }
        let p = self.means[0].len();
        for (m, s) in self.means.iter().zip(&self.covs) {
            if m.len() != p || s.dim() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: if m.len() != p { m.len() } else { s.dim() },
                });
            }
        }
        if self.weights.iter().any(|w| !(*w >= 0.0 && *w <= 1.0)) {
            return Err(Error::Domain("weights must lie in [0, 1]".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Domain(format!("weights sum to {total}, not 1")));
        }
        if !(self.c >= 1.0) {
            return Err(Error::Domain(format!(
                "eigenvalue ratio bound must be >= 1, got {}",
                self.c
            )));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn p(&self) -> usize {
        self.means[0].len()
    }

    /// Largest over smallest eigenvalue across all cluster covariances.
    pub fn eigenvalue_ratio(&self) -> Result<f64> {
        let mut max = f64::NEG_INFINITY;
        let mut min = f64::INFINITY;
        for s in &self.covs {
            let e = sym_eigen(s)?;
            max = max.max(e.values[0]);
            min = min.min(*e.values.last().unwrap());
        }
        Ok(if min > 0.0 { max / min } else { f64::INFINITY })
    }

    pub fn is_feasible(&self) -> bool {
        self.eigenvalue_ratio()
            .map(|r| r <= self.c * (1.0 + RATIO_SLACK))
            .unwrap_or(false)
    }

    /// The same model with an extra weight-0 cluster appended (a copy of the
    /// first cluster's parameters, so feasibility is preserved).
    pub fn with_empty_cluster(&self) -> Self {
        let mut out = self.clone();
        out.weights.push(0.0);
        out.means.push(self.means[0].clone());
        out.covs.push(self.covs[0].clone());
        out
    }

    /// Splits cluster `j` into two halves displaced by one standard deviation
    /// along its leading eigen-direction; the result has `k + 1` clusters.
    pub fn split_cluster(&self, j: usize) -> Result<Self> {
        let e = sym_eigen(&self.covs[j])?;
        let dir = e.vector(0);
        let sd = e.values[0].max(0.0).sqrt();
        let mut out = self.clone();
        let half = self.weights[j] / 2.0;
        out.weights[j] = half;
        out.weights.push(half);
        let lo: Vec<f64> = self.means[j]
            .iter()
            .zip(&dir)
            .map(|(m, d)| m - sd * d)
            .collect();
        let hi: Vec<f64> = self.means[j]
            .iter()
            .zip(&dir)
            .map(|(m, d)| m + sd * d)
            .collect();
        out.means[j] = lo;
        out.means.push(hi);
        // shrink the split direction so the two halves do not coincide
        let mut vals = e.values.clone();
        vals[0] *= 0.25;
        let shrunk = e.recompose(&vals);
        out.covs[j] = shrunk.clone();
        out.covs.push(shrunk);
        Ok(out)
    }

    /// Index of the populated cluster with the widest leading eigenvalue.
    pub fn widest_cluster(&self) -> Result<usize> {
        let mut best = (0, f64::NEG_INFINITY);
        for (j, s) in self.covs.iter().enumerate() {
            if self.weights[j] <= 0.0 {
                continue;
            }
            let lead = sym_eigen(s)?.values[0];
            if lead > best.1 {
                best = (j, lead);
            }
        }
        Ok(best.0)
    }
}

/// Per-observation labels: `0` is trimmed, `1..=k` are clusters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimmedPartition {
    pub labels: Vec<usize>,
    pub alpha: f64,
}

impl TrimmedPartition {
    pub fn trimmed(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == 0)
            .map(|(i, _)| i)
    }

    pub fn trimmed_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 0).count()
    }

    /// Sizes of clusters `1..=k` (index 0 of the result is cluster 1).
    pub fn cluster_sizes(&self, k: usize) -> Vec<usize> {
        let mut sizes = vec![0; k];
        for &l in &self.labels {
            if l > 0 && l <= k {
                sizes[l - 1] += 1;
            }
        }
        sizes
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == cluster)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Outcome of a multistart fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ClusterModel,
    pub partition: TrimmedPartition,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restarts_used: usize,
}

/// Multistart settings for [`fit_tclust`](super::fit_tclust).
#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub n_starts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub rng: RngStream,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_starts: 32,
            max_iter: 100,
            tol: 1e-8,
            rng: RngStream::new(0, 0),
        }
    }
}

impl FitConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            rng: RngStream::new(seed, 0),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_starts == 0 {
            return Err(Error::Config("n_starts must be >= 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be >= 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::Config("tol must be >= 0".into()));
        }
        Ok(())
    }
}
