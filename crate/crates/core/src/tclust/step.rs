use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::statmath::{sym_eigen, GaussianKernel};

use super::constraint::constrain_eigenvalues;
use super::model::{trim_count, ClusterModel, TrimmedPartition};

/// Trimmed classification log-likelihood
/// `Σ_j Σ_{i ∈ R_j} log(π_j φ(x_i; μ_j, Σ_j))`.
pub fn objective(
    data: &DataMatrix,
    model: &ClusterModel,
    partition: &TrimmedPartition,
) -> Result<f64> {
    if partition.labels.len() != data.n() {
        return Err(Error::InvalidPartition(format!(
            "{} labels for {} observations",
            partition.labels.len(),
            data.n()
        )));
    }
    if model.p() != data.p() {
        return Err(Error::DimensionMismatch {
            expected: data.p(),
            found: model.p(),
        });
    }
    let k = model.k();
    let sizes = partition.cluster_sizes(k);
    if let Some(&bad) = partition.labels.iter().find(|&&l| l > k) {
        return Err(Error::InvalidPartition(format!(
            "label {bad} exceeds k = {k}"
        )));
    }
    let mut kernels = Vec::with_capacity(k);
    for j in 0..k {
        if sizes[j] == 0 {
            kernels.push(None);
            continue;
        }
        if model.weights[j] <= 0.0 {
            return Err(Error::InvalidPartition(format!(
                "cluster {} has weight 0 but {} members",
                j + 1,
                sizes[j]
            )));
        }
        kernels.push(Some(GaussianKernel::new(&model.means[j], &model.covs[j])?));
    }
    let mut total = 0.0;
    for (i, &l) in partition.labels.iter().enumerate() {
        if l == 0 {
            continue;
        }
        let kern = kernels[l - 1].as_ref().unwrap();
        total += model.weights[l - 1].ln() + kern.log_density(data.row(i));
    }
    Ok(total)
}

/// Reusable buffers for concentration steps on one data set.
pub(crate) struct Stepper<'a> {
    data: &'a DataMatrix,
    trimmed: usize,
    best: Vec<f64>,
    labels: Vec<usize>,
    order: Vec<usize>,
}

impl<'a> Stepper<'a> {
    pub fn new(data: &'a DataMatrix, alpha: f64) -> Self {
        let n = data.n();
        Self {
            data,
            trimmed: trim_count(n, alpha),
            best: vec![0.0; n],
            labels: vec![0; n],
            order: (0..n).collect(),
        }
    }

    fn kernels(model: &ClusterModel) -> Result<Vec<Option<(f64, GaussianKernel)>>> {
        model
            .weights
            .iter()
            .zip(model.means.iter().zip(&model.covs))
            .map(|(&w, (m, s))| {
                if w > 0.0 {
                    Ok(Some((w.ln(), GaussianKernel::new(m, s)?)))
                } else {
                    Ok(None)
                }
            })
            .collect()
    }

    /// Assign to the best weighted density (lowest index on ties) and trim
    /// the `⌊nα⌋` observations whose best value is smallest.
    fn assign(&mut self, model: &ClusterModel) -> Result<()> {
        let kernels = Self::kernels(model)?;
        for i in 0..self.data.n() {
            let x = self.data.row(i);
            let mut best = f64::NEG_INFINITY;
            let mut label = 0;
            for (j, kern) in kernels.iter().enumerate() {
                if let Some((lw, g)) = kern {
                    let v = lw + g.log_density(x);
                    if v > best {
                        best = v;
                        label = j + 1;
                    }
                }
            }
            self.best[i] = best;
            self.labels[i] = label;
        }
        if self.trimmed > 0 {
            let best = &self.best;
            let cmp = |a: &usize, b: &usize| best[*a].total_cmp(&best[*b]).then(a.cmp(b));
            self.order.iter_mut().enumerate().for_each(|(i, o)| *o = i);
            self.order.select_nth_unstable_by(self.trimmed - 1, cmp);
            for &i in &self.order[..self.trimmed] {
                self.labels[i] = 0;
            }
        }
        Ok(())
    }

    /// Weighted, constrained maximum-likelihood update for the current labels.
    /// Empty clusters keep their parameters with weight 0.
    fn update(&self, model: &ClusterModel) -> Result<ClusterModel> {
        let k = model.k();
        let p = self.data.p();
        let mut counts = vec![0usize; k];
        let mut sums = vec![vec![0.0; p]; k];
        for (i, &l) in self.labels.iter().enumerate() {
            if l > 0 {
                counts[l - 1] += 1;
                for (s, v) in sums[l - 1].iter_mut().zip(self.data.row(i)) {
                    *s += v;
                }
            }
        }
        let mut means = model.means.clone();
        for j in 0..k {
            if counts[j] > 0 {
                means[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
        let mut scatter = vec![vec![0.0; p * p]; k];
        for (i, &l) in self.labels.iter().enumerate() {
            if l > 0 {
                let x = self.data.row(i);
                let mu = &means[l - 1];
                let acc = &mut scatter[l - 1];
                for a in 0..p {
                    let da = x[a] - mu[a];
                    for b in a..p {
                        acc[a * p + b] += da * (x[b] - mu[b]);
                    }
                }
            }
        }
        let mut eigs = Vec::with_capacity(k);
        for j in 0..k {
            let cov = if counts[j] > 0 {
                let m = counts[j] as f64;
                crate::statmath::SymMatrix::from_fn(p, |a, b| scatter[j][a * p + b] / m)
            } else {
                model.covs[j].clone()
            };
            eigs.push(sym_eigen(&cov)?);
        }
        let sizes: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let vals: Vec<Vec<f64>> = eigs.iter().map(|e| e.values.clone()).collect();
        let constrained = constrain_eigenvalues(&vals, &sizes, model.c)?;
        let covs = eigs
            .iter()
            .zip(&constrained)
            .map(|(e, v)| e.recompose(v))
            .collect();
        let assigned = (self.data.n() - self.trimmed) as f64;
        let weights = counts.iter().map(|&c| c as f64 / assigned).collect();
        Ok(ClusterModel {
            weights,
            means,
            covs,
            c: model.c,
        })
    }

    pub fn step(&mut self, model: &ClusterModel) -> Result<ClusterModel> {
        self.assign(model)?;
        self.update(model)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Objective of `model` on the current labels, one density per observation.
    pub fn current_objective(&self, model: &ClusterModel) -> Result<f64> {
        let kernels = Self::kernels(model)?;
        let mut total = 0.0;
        for (i, &l) in self.labels.iter().enumerate() {
            if l > 0 {
                let (lw, g) = kernels[l - 1].as_ref().ok_or_else(|| {
                    Error::InvalidPartition("weight-0 cluster has members".into())
                })?;
                total += lw + g.log_density(self.data.row(i));
            }
        }
        Ok(total)
    }
}

/// One trim–assign–update iteration starting from `model`.
pub fn concentration_step(
    data: &DataMatrix,
    model: &ClusterModel,
    alpha: f64,
) -> Result<(TrimmedPartition, ClusterModel)> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!(
            "trimming level must lie in [0, 1), got {alpha}"
        )));
    }
    if model.p() != data.p() {
        return Err(Error::DimensionMismatch {
            expected: data.p(),
            found: model.p(),
        });
    }
    let mut stepper = Stepper::new(data, alpha);
    let next = stepper.step(model)?;
    Ok((
        TrimmedPartition {
            labels: stepper.labels().to_vec(),
            alpha,
        },
        next,
    ))
}
