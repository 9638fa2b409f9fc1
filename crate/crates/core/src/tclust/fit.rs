use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::statmath::{sym_eigen, RngStream, SymMatrix};

use super::constraint::constrain_eigenvalues;
use super::model::{trim_count, ClusterModel, FitConfig, FitResult, TrimmedPartition};
use super::step::{objective, Stepper};

const INIT_ATTEMPTS: usize = 20;

/// Checks the preconditions shared by every fit.
pub fn check_feasible(data: &DataMatrix, k: usize, alpha: f64, c: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::Infeasible("k must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Infeasible(format!(
            "trimming level must lie in [0, 1), got {alpha}"
        )));
    }
    if !(c >= 1.0) {
        return Err(Error::Infeasible(format!(
            "eigenvalue ratio bound must be >= 1, got {c}"
        )));
    }
    let kept = data.n() - trim_count(data.n(), alpha);
    let need = k * (data.p() + 1);
    if kept < need {
        return Err(Error::Infeasible(format!(
            "{kept} untrimmed observations cannot support k = {k} clusters in p = {} (need {need})",
            data.p()
        )));
    }
    Ok(())
}

/// Random start: `k` disjoint subsets of `p + 1` observations, their means and
/// constrained covariances, uniform weights.
fn random_start(data: &DataMatrix, k: usize, c: f64, stream: &RngStream) -> Result<ClusterModel> {
    let p = data.p();
    let mut rng = stream.rng();
    let mut last = None;
    for _ in 0..INIT_ATTEMPTS {
        let idx = sample(&mut rng, data.n(), k * (p + 1)).into_vec();
        let mut means = Vec::with_capacity(k);
        let mut eigs = Vec::with_capacity(k);
        for chunk in idx.chunks(p + 1) {
            let (m, s) = data.subset_mean_and_covariance(chunk);
            means.push(m);
            eigs.push(sym_eigen(&s)?);
        }
        let vals: Vec<Vec<f64>> = eigs.iter().map(|e| e.values.clone()).collect();
        match constrain_eigenvalues(&vals, &vec![(p + 1) as f64; k], c) {
            Ok(v) => {
                let covs = eigs.iter().zip(&v).map(|(e, v)| e.recompose(v)).collect();
                return Ok(ClusterModel {
                    weights: vec![1.0 / k as f64; k],
                    means,
                    covs,
                    c,
                });
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

struct StartOutcome {
    model: ClusterModel,
    labels: Vec<usize>,
    objective: f64,
    iterations: usize,
    converged: bool,
}

/// Concentration steps from `init` until the objective changes by less than
/// `tol` or `max_iter` steps have run. Returns the objective after every
/// step when `trace` is set.
fn iterate(
    data: &DataMatrix,
    alpha: f64,
    init: ClusterModel,
    config: &FitConfig,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<StartOutcome> {
    let mut stepper = Stepper::new(data, alpha);
    let mut model = init;
    let mut prev = f64::NEG_INFINITY;
    let mut labels = Vec::new();
    for iter in 1..=config.max_iter {
        let next = stepper.step(&model)?;
        let obj = stepper.current_objective(&next)?;
        if let Some(t) = trace.as_deref_mut() {
            t.push(obj);
        }
        let same_labels = labels.as_slice() == stepper.labels();
        model = next;
        labels.clear();
        labels.extend_from_slice(stepper.labels());
        if (obj - prev).abs() < config.tol || same_labels {
            return Ok(StartOutcome {
                model,
                labels,
                objective: obj,
                iterations: iter,
                converged: true,
            });
        }
        prev = obj;
    }
    Ok(StartOutcome {
        model,
        labels,
        objective: prev,
        iterations: config.max_iter,
        converged: false,
    })
}

/// Objective trace of a single start, for diagnostics and tests.
pub fn concentration_trace(
    data: &DataMatrix,
    alpha: f64,
    init: ClusterModel,
    config: &FitConfig,
) -> Result<Vec<f64>> {
    let mut trace = Vec::new();
    iterate(data, alpha, init, config, Some(&mut trace))?;
    Ok(trace)
}

/// Runs concentration steps from a single given start.
pub fn fit_from_start(
    data: &DataMatrix,
    alpha: f64,
    init: ClusterModel,
    config: &FitConfig,
) -> Result<FitResult> {
    check_feasible(data, init.k(), alpha, init.c)?;
    config.validate()?;
    let out = iterate(data, alpha, init, config, None)?;
    let partition = TrimmedPartition {
        labels: out.labels,
        alpha,
    };
    let objective = objective(data, &out.model, &partition)?;
    Ok(FitResult {
        model: out.model,
        partition,
        objective,
        iterations: out.iterations,
        converged: out.converged,
        restarts_used: 1,
    })
}

/// Seeded starts added by the sequential fitters on top of the splits.
pub const EXTENSION_SEEDS: usize = 4;

/// Starts for a `k + 1` fit built from a `k`-cluster solution: every populated
/// cluster split in two, then `seeded` models that add a small cluster centred
/// on a random observation.
pub fn extension_starts(
    data: &DataMatrix,
    model: &ClusterModel,
    seeded: usize,
    stream: &RngStream,
) -> Vec<ClusterModel> {
    let mut out: Vec<ClusterModel> = (0..model.k())
        .filter(|&j| model.weights[j] > 0.0)
        .filter_map(|j| model.split_cluster(j).ok())
        .collect();
    if seeded == 0 || data.n() == 0 {
        return out;
    }
    let p = model.p();
    let total: f64 = model.weights.iter().filter(|w| **w > 0.0).sum();
    let pooled = SymMatrix::from_fn(p, |a, b| {
        model
            .covs
            .iter()
            .zip(&model.weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(s, w)| w * s.get(a, b))
            .sum::<f64>()
            / (4.0 * total)
    });
    let share = 1.0 / (model.k() + 1) as f64;
    let mut rng = stream.rng();
    for _ in 0..seeded {
        let i = rng.random_range(0..data.n());
        let mut m = model.clone();
        for w in &mut m.weights {
            *w *= 1.0 - share;
        }
        m.weights.push(share);
        m.means.push(data.row(i).to_vec());
        m.covs.push(pooled.clone());
        out.push(m);
    }
    out
}

/// Maximizes the trimmed classification likelihood over `config.n_starts`
/// random starts.
pub fn fit_tclust(
    data: &DataMatrix,
    k: usize,
    alpha: f64,
    c: f64,
    config: &FitConfig,
) -> Result<FitResult> {
    fit_tclust_with_inits(data, k, alpha, c, config, &[])
}

/// As [`fit_tclust`], with additional starts from the supplied models (which
/// must have `k` clusters). Ties on the objective go to the lowest start
/// index; random starts come first.
pub fn fit_tclust_with_inits(
    data: &DataMatrix,
    k: usize,
    alpha: f64,
    c: f64,
    config: &FitConfig,
    inits: &[ClusterModel],
) -> Result<FitResult> {
    check_feasible(data, k, alpha, c)?;
    config.validate()?;
    for m in inits {
        if m.k() != k || m.p() != data.p() {
            return Err(Error::Config(format!(
                "warm start has k = {}, p = {}; expected k = {k}, p = {}",
                m.k(),
                m.p(),
                data.p()
            )));
        }
    }
    let total = config.n_starts + inits.len();
    let outcomes: Vec<Result<StartOutcome>> = (0..total)
        .into_par_iter()
        .map(|s| {
            let init = if s < config.n_starts {
                random_start(data, k, c, &config.rng.with_id(s as u64))?
            } else {
                let mut m = inits[s - config.n_starts].clone();
                m.c = c;
                m
            };
            iterate(data, alpha, init, config, None)
        })
        .collect();

    let mut best: Option<StartOutcome> = None;
    let mut last_err = None;
    for out in outcomes {
        match out {
            Ok(o) => {
                if best.as_ref().map_or(true, |b| o.objective > b.objective) {
                    best = Some(o);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let best = best.ok_or_else(|| {
        last_err.unwrap_or_else(|| Error::DegenerateData("no start succeeded".into()))
    })?;
    let partition = TrimmedPartition {
        labels: best.labels,
        alpha,
    };
    let objective = objective(data, &best.model, &partition)?;
    Ok(FitResult {
        model: best.model,
        partition,
        objective,
        iterations: best.iterations,
        converged: best.converged,
        restarts_used: total,
    })
}
