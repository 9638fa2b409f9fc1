//! Parametric bootstrap p-values for `k` versus `k + 1` clusters at a fixed
//! trimming level, and the sequential search for sensible `(k, α)` pairs.

use std::collections::HashMap;
use std::fmt::Write as _;

use log::{debug, warn};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ctlcurves::{cell_stream, repair_monotone};
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::statmath::{chi2_quantile, GaussianKernel, MvNormalSampler, RngStream, SymMatrix};
use crate::tclust::{
    extension_starts, fit_tclust_with_inits, trim_count, ClusterModel, FitConfig, FitResult,
    EXTENSION_SEEDS,
};

/// Attempts allowed per regenerated outlier in uniform-range mode.
pub const MAX_REJECTIONS: usize = 100_000;

/// How trimmed observations are filled in a bootstrap sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutlierMode {
    /// Copy the trimmed rows verbatim.
    #[default]
    KeepOriginal,
    /// Draw uniformly in the per-variable range of the data, away from every
    /// fitted centroid in Mahalanobis distance.
    UniformRange,
}

impl std::str::FromStr for OutlierMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "keep-original" | "keep" => Ok(Self::KeepOriginal),
            "uniform-range" | "uniform" => Ok(Self::UniformRange),
            other => Err(Error::Config(format!("unknown outlier mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapConfig {
    /// Number of bootstrap replicates `B`.
    pub replicates: usize,
    /// A cell is accepted when its p-value is strictly above `crit`.
    pub crit: f64,
    pub outlier_mode: OutlierMode,
    /// Chi-square level bounding regenerated outliers away from centroids.
    pub mahalanobis_percentile: f64,
    pub rng: RngStream,
    /// Settings for fits on the observed data.
    pub fit: FitConfig,
    /// Random starts per replicate fit; `None` means half of `fit.n_starts`.
    pub replicate_starts: Option<usize>,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 100,
            crit: 0.1,
            outlier_mode: OutlierMode::KeepOriginal,
            mahalanobis_percentile: 0.975,
            rng: RngStream::new(0, 0),
            fit: FitConfig::default(),
            replicate_starts: None,
        }
    }
}

impl BootstrapConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            rng: RngStream::new(seed, 0),
            fit: FitConfig::with_seed(seed),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config(
                "number of bootstrap replicates must be >= 1".into(),
            ));
        }
        if !(self.crit > 0.0 && self.crit < 1.0) {
            return Err(Error::Config(format!(
                "crit must lie in (0, 1), got {}",
                self.crit
            )));
        }
        if !(self.mahalanobis_percentile > 0.0 && self.mahalanobis_percentile < 1.0) {
            return Err(Error::Config(
                "mahalanobis percentile must lie in (0, 1)".into(),
            ));
        }
        self.fit.validate()
    }

    fn replicate_fit_config(&self, rng: RngStream) -> FitConfig {
        FitConfig {
            n_starts: self
                .replicate_starts
                .unwrap_or(self.fit.n_starts / 2)
                .max(1),
            rng,
            ..self.fit.clone()
        }
    }
}

fn pick_component<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (j, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = j;
        if u < acc {
            return j;
        }
    }
    last
}

/// One bootstrap sample: untrimmed rows are fresh i.i.d. draws from the
/// fitted mixture, trimmed rows follow `mode`.
pub fn generate_bootstrap_sample(
    data: &DataMatrix,
    fit: &FitResult,
    mode: OutlierMode,
    mahalanobis_percentile: f64,
    stream: &RngStream,
) -> Result<DataMatrix> {
    let n = data.n();
    let p = data.p();
    let labels = &fit.partition.labels;
    if labels.len() != n || fit.model.p() != p {
        return Err(Error::InvalidPartition(
            "fit does not belong to this data set".into(),
        ));
    }
    let model = &fit.model;
    let samplers = model
        .means
        .iter()
        .zip(&model.covs)
        .map(|(m, s)| MvNormalSampler::new(m, s))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = stream.rng();
    let mut values = vec![0.0; n * p];

    let uniform_setup = if mode == OutlierMode::UniformRange && labels.contains(&0) {
        let kernels = model
            .means
            .iter()
            .zip(&model.covs)
            .zip(&model.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|((m, s), _)| GaussianKernel::new(m, s))
            .collect::<Result<Vec<_>>>()?;
        let threshold = chi2_quantile(mahalanobis_percentile, p as u32)?;
        Some((kernels, threshold, data.column_ranges()))
    } else {
        None
    };

    for i in 0..n {
        let out = &mut values[i * p..(i + 1) * p];
        if labels[i] != 0 {
            let j = pick_component(&mut rng, &model.weights);
            samplers[j].sample_into(&mut rng, out);
            continue;
        }
        match &uniform_setup {
            None => out.copy_from_slice(data.row(i)),
            Some((kernels, threshold, ranges)) => {
                let mut placed = false;
                for _ in 0..MAX_REJECTIONS {
                    for (v, &(lo, hi)) in out.iter_mut().zip(ranges) {
                        *v = if hi > lo {
                            rng.random_range(lo..hi)
                        } else {
                            lo
                        };
                    }
                    if kernels.iter().all(|g| g.mahalanobis_sq(out) >= *threshold) {
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    return Err(Error::RejectionExhausted {
                        attempts: MAX_REJECTIONS,
                    });
                }
            }
        }
    }
    DataMatrix::new(n, p, values)
}

/// Result of one bootstrap test of `k` against `k + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PValue {
    pub p: f64,
    pub t_obs: f64,
    pub exceedances: usize,
    pub replicates: usize,
}

/// Replicate statistic `L(α, k+1; X*) - L(α, k; X*)`, both fits warm-started
/// from the corresponding fits on the observed data. The `k + 1` fit also
/// starts from extensions of the replicate's own `k` fit.
fn replicate_statistic(
    data: &DataMatrix,
    fit_k: &FitResult,
    fit_k1: &FitResult,
    boot: &BootstrapConfig,
    stream: &RngStream,
) -> Result<f64> {
    let alpha = fit_k.partition.alpha;
    let k = fit_k.model.k();
    let c = fit_k.model.c;
    let sample = generate_bootstrap_sample(
        data,
        fit_k,
        boot.outlier_mode,
        boot.mahalanobis_percentile,
        &stream.with_id(0),
    )?;
    let cfg_k = boot.replicate_fit_config(stream.child(1));
    let cfg_k1 = boot.replicate_fit_config(stream.child(2));
    let lower = fit_tclust_with_inits(
        &sample,
        k,
        alpha,
        c,
        &cfg_k,
        std::slice::from_ref(&fit_k.model),
    )?;
    let mut inits = vec![fit_k1.model.clone()];
    inits.extend(extension_starts(
        &sample,
        &lower.model,
        EXTENSION_SEEDS,
        &stream.child(3),
    ));
    let upper = fit_tclust_with_inits(&sample, k + 1, alpha, c, &cfg_k1, &inits)?;
    let upper = repair_monotone(&sample, &lower, upper, &cfg_k1)?;
    Ok(upper.objective - lower.objective)
}

/// Bootstrap p-value given the observed fits at `k` and `k + 1` (same `α`).
/// Replicate `b` uses `stream.child(b)`; a failed replicate is retried once
/// on `stream.child(B + b)`.
pub fn bootstrap_pvalue_from_fits(
    data: &DataMatrix,
    fit_k: &FitResult,
    fit_k1: &FitResult,
    boot: &BootstrapConfig,
    stream: &RngStream,
) -> Result<PValue> {
    boot.validate()?;
    if fit_k1.model.k() != fit_k.model.k() + 1 {
        return Err(Error::Config("fits must have k and k + 1 clusters".into()));
    }
    let t_obs = fit_k1.objective - fit_k.objective;
    let b_total = boot.replicates;
    let stats: Vec<Result<f64>> = (0..b_total)
        .into_par_iter()
        .map(|b| {
            replicate_statistic(data, fit_k, fit_k1, boot, &stream.child(b as u64)).or_else(|e| {
                debug!("replicate {b} failed ({e}); retrying on a fresh stream");
                replicate_statistic(
                    data,
                    fit_k,
                    fit_k1,
                    boot,
                    &stream.child((b_total + b) as u64),
                )
            })
        })
        .collect();
    let mut exceedances = 0;
    for s in stats {
        if s? > t_obs {
            exceedances += 1;
        }
    }
    Ok(PValue {
        p: exceedances as f64 / b_total as f64,
        t_obs,
        exceedances,
        replicates: b_total,
    })
}

/// Fits `k` and `k + 1` clusters on `data` and returns the bootstrap p-value
/// of the observed improvement.
pub fn bootstrap_pvalue(
    data: &DataMatrix,
    k: usize,
    alpha: f64,
    c: f64,
    boot: &BootstrapConfig,
) -> Result<PValue> {
    boot.validate()?;
    let cfg_k = FitConfig {
        rng: boot.fit.rng.child(k as u64),
        ..boot.fit.clone()
    };
    let cfg_k1 = FitConfig {
        rng: boot.fit.rng.child(k as u64 + 1),
        ..boot.fit.clone()
    };
    let fit_k = fit_tclust_with_inits(data, k, alpha, c, &cfg_k, &[])?;
    let inits = extension_starts(data, &fit_k.model, EXTENSION_SEEDS, &cfg_k1.rng.child(3));
    let fit_k1 = fit_tclust_with_inits(data, k + 1, alpha, c, &cfg_k1, &inits)?;
    let fit_k1 = repair_monotone(data, &fit_k, fit_k1, &cfg_k1)?;
    bootstrap_pvalue_from_fits(data, &fit_k, &fit_k1, boot, &boot.rng.child(k as u64))
}

/// State of one `(k, α)` cell of the p-value grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum CellStatus {
    NotEvaluated,
    Evaluated { p: f64, t_obs: f64 },
    Failed { reason: String },
}

impl CellStatus {
    pub fn p_value(&self) -> Option<f64> {
        match self {
            CellStatus::Evaluated { p, .. } => Some(*p),
            _ => None,
        }
    }
}

/// An accepted `(k, α)` pair.
#[derive(Clone, Debug, PartialEq)]
pub struct SensibleEntry {
    pub k: usize,
    pub alpha: f64,
    pub p_value: f64,
    pub t_obs: f64,
    pub fit: FitResult,
}

/// Serializable summary of a [`SensibleEntry`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensibleReport {
    pub k: usize,
    pub alpha: f64,
    pub p_value: f64,
    pub t_obs: f64,
    pub objective: f64,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub covariances: Vec<SymMatrix>,
    pub trimmed: Vec<usize>,
    pub labels: Vec<usize>,
}

impl SensibleEntry {
    pub fn report(&self) -> SensibleReport {
        SensibleReport {
            k: self.k,
            alpha: self.alpha,
            p_value: self.p_value,
            t_obs: self.t_obs,
            objective: self.fit.objective,
            weights: self.fit.model.weights.clone(),
            means: self.fit.model.means.clone(),
            covariances: self.fit.model.covs.clone(),
            trimmed: self.fit.partition.trimmed().collect(),
            labels: self.fit.partition.labels.clone(),
        }
    }
}

/// Output of [`select_sensible`].
#[derive(Clone, Debug)]
pub struct SensibleSolutions {
    /// In discovery order (increasing `α`).
    pub entries: Vec<SensibleEntry>,
    pub alpha_values: Vec<f64>,
    pub k_max: usize,
    /// `pvalue_grid[k - 1][alpha_index]`
    pub pvalue_grid: Vec<Vec<CellStatus>>,
}

impl SensibleSolutions {
    pub fn pairs(&self) -> Vec<(usize, f64)> {
        self.entries.iter().map(|e| (e.k, e.alpha)).collect()
    }

    pub fn cell(&self, k: usize, alpha_index: usize) -> &CellStatus {
        &self.pvalue_grid[k - 1][alpha_index]
    }

    /// Rows `k = 1..k_max`, one column per trimming level, `Na` for cells the
    /// search never reached and `Fail` for cells whose fits failed.
    pub fn pvalue_csv(&self) -> String {
        let mut out = String::from("k");
        for a in &self.alpha_values {
            let _ = write!(out, ",{a:.3}");
        }
        out.push('\n');
        for (k, row) in self.pvalue_grid.iter().enumerate() {
            let _ = write!(out, "{}", k + 1);
            for cell in row {
                match cell {
                    CellStatus::NotEvaluated => out.push_str(",Na"),
                    CellStatus::Failed { .. } => out.push_str(",Fail"),
                    CellStatus::Evaluated { p, .. } => {
                        let _ = write!(out, ",{p:.2}");
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn reports(&self) -> Vec<SensibleReport> {
        self.entries.iter().map(SensibleEntry::report).collect()
    }
}

/// Trimming levels `α_max · i / L` for `i = 0..=L`.
pub fn alpha_grid(alpha_max: f64, grid_len: usize) -> Vec<f64> {
    (0..=grid_len)
        .map(|i| alpha_max * i as f64 / grid_len as f64)
        .collect()
}

struct FitCache<'a> {
    data: &'a DataMatrix,
    c: f64,
    alphas: Vec<f64>,
    base: FitConfig,
    fits: HashMap<(usize, usize), Result<FitResult>>,
}

impl FitCache<'_> {
    fn get(&mut self, k: usize, ai: usize) -> Result<FitResult> {
        if let Some(f) = self.fits.get(&(k, ai)) {
            return f.clone();
        }
        let mut warm: Vec<ClusterModel> = ai
            .checked_sub(1)
            .and_then(|prev| self.fits.get(&(k, prev)))
            .and_then(|f| f.as_ref().ok())
            .map(|f| vec![f.model.clone()])
            .unwrap_or_default();
        let cfg = FitConfig {
            rng: cell_stream(&self.base.rng, k, ai),
            ..self.base.clone()
        };
        if let Some(Ok(lower)) = k.checked_sub(1).and_then(|km| self.fits.get(&(km, ai))) {
            warm.extend(extension_starts(
                self.data,
                &lower.model,
                EXTENSION_SEEDS,
                &cfg.rng.child(3),
            ));
        }
        let fit = fit_tclust_with_inits(self.data, k, self.alphas[ai], self.c, &cfg, &warm);
        self.fits.insert((k, ai), fit.clone());
        fit
    }

    /// Fits at `k` and `k + 1`, with the `k + 1` cell repaired if needed.
    fn pair(&mut self, k: usize, ai: usize) -> Result<(FitResult, FitResult)> {
        let lower = self.get(k, ai)?;
        let upper = self.get(k + 1, ai)?;
        if upper.objective < lower.objective {
            let cfg = FitConfig {
                rng: cell_stream(&self.base.rng, k + 1, ai).child(1),
                ..self.base.clone()
            };
            let fixed = repair_monotone(self.data, &lower, upper, &cfg)?;
            self.fits.insert((k + 1, ai), Ok(fixed.clone()));
            return Ok((lower, fixed));
        }
        Ok((lower, upper))
    }
}

/// Sequential search for sensible `(k, α)` pairs.
///
/// Trimming levels `0, α_max/L, …, α_max` are visited in order. At each level
/// `k` increases from 1 while it is below the best `k` accepted so far; the
/// first `k` whose p-value exceeds `crit` is recorded and becomes the new
/// bound. A cell whose fits fail counts as rejected.
pub fn select_sensible(
    data: &DataMatrix,
    k_max: usize,
    alpha_max: f64,
    grid_len: usize,
    c: f64,
    boot: &BootstrapConfig,
) -> Result<SensibleSolutions> {
    if k_max == 0 {
        return Err(Error::Config("k_max must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&alpha_max) {
        return Err(Error::Config(format!(
            "alpha_max must lie in [0, 1), got {alpha_max}"
        )));
    }
    if grid_len == 0 {
        return Err(Error::Config("grid length must be >= 1".into()));
    }
    boot.validate()?;

    let alphas = alpha_grid(alpha_max, grid_len);
    let mut grid = vec![vec![CellStatus::NotEvaluated; alphas.len()]; k_max];
    let mut entries = Vec::new();
    let mut cache = FitCache {
        data,
        c,
        alphas: alphas.clone(),
        base: boot.fit.clone(),
        fits: HashMap::new(),
    };
    let mut k_best = k_max + 1;

    for (ai, &alpha) in alphas.iter().enumerate() {
        let mut k = 1;
        while k < k_best {
            let outcome = cache.pair(k, ai).and_then(|(lower, upper)| {
                let stream = boot.rng.child(((ai as u64) << 32) | k as u64);
                bootstrap_pvalue_from_fits(data, &lower, &upper, boot, &stream)
                    .map(|pv| (pv, lower))
            });
            match outcome {
                Ok((pv, lower)) => {
                    debug!(
                        "k = {k}, alpha = {alpha}: t = {:.4}, p = {:.3}, n_trim = {}",
                        pv.t_obs,
                        pv.p,
                        trim_count(data.n(), alpha)
                    );
                    grid[k - 1][ai] = CellStatus::Evaluated {
                        p: pv.p,
                        t_obs: pv.t_obs,
                    };
                    if pv.p > boot.crit {
                        entries.push(SensibleEntry {
                            k,
                            alpha,
                            p_value: pv.p,
                            t_obs: pv.t_obs,
                            fit: lower,
                        });
                        k_best = k;
                    } else {
                        k += 1;
                    }
                }
                Err(e) => {
                    warn!("cell k = {k}, alpha = {alpha} failed and is treated as rejected: {e}");
                    grid[k - 1][ai] = CellStatus::Failed {
                        reason: e.to_string(),
                    };
                    k += 1;
                }
            }
        }
    }
    Ok(SensibleSolutions {
        entries,
        alpha_values: alphas,
        k_max,
        pvalue_grid: grid,
    })
}
