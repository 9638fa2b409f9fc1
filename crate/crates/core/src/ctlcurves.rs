//! Classification trimmed likelihood curves `(k, α) ↦ L(α, k)` and their
//! first differences in `k`.

use std::fmt::Write as _;

use log::warn;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::statmath::RngStream;
use crate::tclust::{
    extension_starts, fit_from_start, fit_tclust_with_inits, objective, ClusterModel, FitConfig,
    FitResult, TrimmedPartition, EXTENSION_SEEDS,
};

/// Allowed numerical slack on `L(α, k+1) >= L(α, k)`.
pub const MONOTONE_TOL: f64 = 1e-8;

/// Stream for the data fit of cell `(k, alpha_index)`. Shared with the
/// bootstrap selection so that both compute identical fits.
pub fn cell_stream(base: &RngStream, k: usize, alpha_index: usize) -> RngStream {
    base.child(((alpha_index as u64) << 32) | k as u64)
}

/// Restores `L(α, k+1) >= L(α, k)` when a multistart fit at `k + 1` landed
/// in a worse local optimum than the fit at `k`.
///
/// First one extra start is run from the `k` solution with its widest
/// cluster split in two. If that still falls short, the `k` solution with an
/// added empty cluster is returned: it attains exactly `L(α, k)`.
pub fn repair_monotone(
    data: &DataMatrix,
    lower: &FitResult,
    upper: FitResult,
    config: &FitConfig,
) -> Result<FitResult> {
    if upper.objective >= lower.objective {
        return Ok(upper);
    }
    let alpha = lower.partition.alpha;
    let mut best = upper;
    let split = lower
        .model
        .widest_cluster()
        .and_then(|j| lower.model.split_cluster(j));
    if let Ok(init) = split {
        if let Ok(refit) = fit_from_start(data, alpha, init, config) {
            if refit.objective > best.objective {
                best = refit;
            }
        }
    }
    if best.objective >= lower.objective {
        return Ok(best);
    }
    pad_with_empty(data, lower, best.restarts_used + 1)
}

fn pad_with_empty(data: &DataMatrix, lower: &FitResult, restarts_used: usize) -> Result<FitResult> {
    let model: ClusterModel = lower.model.with_empty_cluster();
    let partition = TrimmedPartition {
        labels: lower.partition.labels.clone(),
        alpha: lower.partition.alpha,
    };
    let objective = objective(data, &model, &partition)?;
    Ok(FitResult {
        model,
        partition,
        objective,
        iterations: lower.iterations,
        converged: lower.converged,
        restarts_used,
    })
}

/// Optimal objective values over a `k × α` grid.
#[derive(Clone, Debug)]
pub struct CtlCurves {
    pub k_values: Vec<usize>,
    pub alpha_values: Vec<f64>,
    /// `cells[k - 1][alpha_index]`
    pub cells: Vec<Vec<std::result::Result<FitResult, Error>>>,
}

impl CtlCurves {
    pub fn k_max(&self) -> usize {
        self.k_values.len()
    }

    pub fn alpha_index(&self, alpha: f64) -> Option<usize> {
        self.alpha_values
            .iter()
            .position(|&a| (a - alpha).abs() < 1e-12)
    }

    pub fn fit(&self, k: usize, alpha_index: usize) -> Option<&FitResult> {
        self.cells
            .get(k.checked_sub(1)?)?
            .get(alpha_index)?
            .as_ref()
            .ok()
    }

    pub fn objective(&self, k: usize, alpha_index: usize) -> Option<f64> {
        self.fit(k, alpha_index).map(|f| f.objective)
    }

    /// `t_{k,α} = L(α, k + 1) - L(α, k)`.
    pub fn tdiff(&self, k: usize, alpha: f64) -> Result<f64> {
        let invalid = |reason: &str| Error::InvalidCell {
            k,
            alpha,
            reason: reason.into(),
        };
        let a = self
            .alpha_index(alpha)
            .ok_or_else(|| invalid("alpha not on the grid"))?;
        let lo = self
            .objective(k, a)
            .ok_or_else(|| invalid("cell k is invalid"))?;
        let hi = self
            .objective(k + 1, a)
            .ok_or_else(|| invalid("cell k + 1 is invalid"))?;
        Ok(hi - lo)
    }

    /// `k,alpha,objective,tdiff` with `NA` for unavailable values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,alpha,objective,tdiff\n");
        for (ai, &alpha) in self.alpha_values.iter().enumerate() {
            for &k in &self.k_values {
                let obj = self
                    .objective(k, ai)
                    .map_or_else(|| "NA".to_string(), |v| format!("{v}"));
                let t = self
                    .tdiff(k, alpha)
                    .map_or_else(|_| "NA".to_string(), |v| format!("{v}"));
                let _ = writeln!(out, "{k},{alpha},{obj},{t}");
            }
        }
        out
    }
}

/// Validates a trimming grid: values in `[0, 1)`, strictly increasing.
pub fn check_alpha_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("empty trimming grid".into()));
    }
    if grid.iter().any(|a| !(0.0..1.0).contains(a)) {
        return Err(Error::Config("trimming levels must lie in [0, 1)".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(
            "trimming grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Fits every `(k, α)` cell. Trimming levels are processed in order and each
/// cell is warm-started from the same `k` at the previous level and from
/// extensions of the `k - 1` fit at the current level; cells that break
/// monotonicity in `k` are repaired. Failed cells are recorded, not propagated.
pub fn compute_ctlcurves(
    data: &DataMatrix,
    k_max: usize,
    alpha_grid: &[f64],
    c: f64,
    config: &FitConfig,
) -> Result<CtlCurves> {
    if k_max == 0 {
        return Err(Error::Config("k_max must be >= 1".into()));
    }
    check_alpha_grid(alpha_grid)?;
    config.validate()?;

    let mut cells: Vec<Vec<std::result::Result<FitResult, Error>>> = (0..k_max)
        .map(|_| Vec::with_capacity(alpha_grid.len()))
        .collect();
    for (ai, &alpha) in alpha_grid.iter().enumerate() {
        let mut column: Vec<std::result::Result<FitResult, Error>> = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            let mut inits: Vec<ClusterModel> = ai
                .checked_sub(1)
                .and_then(|prev| cells[k - 1][prev].as_ref().ok())
                .map(|f| vec![f.model.clone()])
                .unwrap_or_default();
            let cfg = FitConfig {
                rng: cell_stream(&config.rng, k, ai),
                ..config.clone()
            };
            if let Some(Ok(lower)) = k.checked_sub(2).map(|i| &column[i]) {
                inits.extend(extension_starts(
                    data,
                    &lower.model,
                    EXTENSION_SEEDS,
                    &cfg.rng.child(3),
                ));
            }
            column.push(fit_tclust_with_inits(data, k, alpha, c, &cfg, &inits));
        }
        for k in 2..=k_max {
            let (lo, hi) = column.split_at_mut(k - 1);
            if let (Ok(lower), Ok(upper)) = (&lo[k - 2], &hi[0]) {
                if upper.objective < lower.objective {
                    let cfg = FitConfig {
                        rng: cell_stream(&config.rng, k, ai).child(1),
                        ..config.clone()
                    };
                    hi[0] = repair_monotone(data, lower, upper.clone(), &cfg);
                }
            }
        }
        for (k, cell) in column.into_iter().enumerate() {
            if let Err(e) = &cell {
                warn!("ctlcurves cell k = {}, alpha = {alpha} failed: {e}", k + 1);
            }
            cells[k].push(cell);
        }
    }
    Ok(CtlCurves {
        k_values: (1..=k_max).collect(),
        alpha_values: alpha_grid.to_vec(),
        cells,
    })
}
