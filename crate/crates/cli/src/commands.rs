use std::path::Path;

use anyhow::{bail, Context, Result};
use log::info;
use serde::{Deserialize, Serialize};
use tclust_core::bootstrap::{CellStatus, SensibleReport};
use tclust_core::datagen::{
    gen_overlap_target, gen_scenario, with_range_contamination, ScenarioSpec,
};
use tclust_core::population::{eta, mcd_consistency_factor, xi, Estimate, MonteCarlo};
use tclust_core::{
    adjusted_rand_index, bootstrap::alpha_grid, compute_ctlcurves, correct_k_rate, datagen,
    fit_tclust, select_sensible, BootstrapConfig, ClusterModel, FitConfig, FitResult, OutlierMode,
    RngStream, SymMatrix,
};

use crate::io::{read_data, read_labels, write_data, write_json, write_labels, write_text};
use crate::{
    Common, CurvesArgs, EvalArgs, FitArgs, OverlapArgs, Scenario, SelectArgs, SimulateArgs,
};

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn fit_config(common: &Common) -> FitConfig {
    FitConfig {
        n_starts: common.starts,
        ..FitConfig::with_seed(common.seed)
    }
}

#[derive(Serialize, Deserialize)]
pub struct FitReport {
    pub k: usize,
    pub alpha: f64,
    pub c: f64,
    pub n: usize,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restarts_used: usize,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub covariances: Vec<SymMatrix>,
    pub cluster_sizes: Vec<usize>,
    pub trimmed: Vec<usize>,
}

impl FitReport {
    fn new(fit: &FitResult, c: f64) -> Self {
        let k = fit.model.k();
        Self {
            k,
            alpha: fit.partition.alpha,
            c,
            n: fit.partition.labels.len(),
            objective: fit.objective,
            iterations: fit.iterations,
            converged: fit.converged,
            restarts_used: fit.restarts_used,
            weights: fit.model.weights.clone(),
            means: fit.model.means.clone(),
            covariances: fit.model.covs.clone(),
            cluster_sizes: fit.partition.cluster_sizes(k),
            trimmed: fit.partition.trimmed().collect(),
        }
    }
}

pub fn fit(args: FitArgs) -> Result<()> {
    let data = read_data(&args.common.input)?;
    prepare_out(&args.common.out)?;
    let fit = fit_tclust(
        &data,
        args.k,
        args.alpha,
        args.common.c,
        &fit_config(&args.common),
    )?;
    info!(
        "objective {:.6} after {} iterations",
        fit.objective, fit.iterations
    );
    write_json(
        &args.common.out.join("fit.json"),
        &FitReport::new(&fit, args.common.c),
    )?;
    write_labels(&args.common.out.join("labels.csv"), &fit.partition.labels)?;
    Ok(())
}

pub fn curves(args: CurvesArgs) -> Result<()> {
    let data = read_data(&args.common.input)?;
    prepare_out(&args.common.out)?;
    if args.grid.grid == 0 {
        bail!("--grid must be at least 1");
    }
    let alphas = alpha_grid(args.grid.alpha_max, args.grid.grid);
    let curves = compute_ctlcurves(
        &data,
        args.grid.kmax,
        &alphas,
        args.common.c,
        &fit_config(&args.common),
    )?;
    write_text(&args.common.out.join("curves.csv"), &curves.to_csv())
}

#[derive(Serialize)]
struct SelectReport {
    k_max: usize,
    c: f64,
    crit: f64,
    replicates: usize,
    outlier_mode: OutlierMode,
    alpha_values: Vec<f64>,
    /// `grid[k - 1][alpha_index]`, null where the search did not go.
    pvalues: Vec<Vec<Option<f64>>>,
    sensible: Vec<SensibleReport>,
}

pub fn select(args: SelectArgs) -> Result<()> {
    let data = read_data(&args.common.input)?;
    prepare_out(&args.common.out)?;
    let boot = BootstrapConfig {
        replicates: args.b,
        crit: args.crit,
        outlier_mode: args.outlier_mode.parse()?,
        rng: RngStream::new(args.common.seed, 0),
        fit: fit_config(&args.common),
        replicate_starts: args.replicate_starts,
        ..BootstrapConfig::default()
    };
    let sol = select_sensible(
        &data,
        args.grid.kmax,
        args.grid.alpha_max,
        args.grid.grid,
        args.common.c,
        &boot,
    )?;
    for (k, row) in sol.pvalue_grid.iter().enumerate() {
        for (ai, cell) in row.iter().enumerate() {
            if let CellStatus::Failed { reason } = cell {
                log::warn!(
                    "cell k = {}, alpha = {} failed: {reason}",
                    k + 1,
                    sol.alpha_values[ai]
                );
            }
        }
    }
    write_text(&args.common.out.join("pvalues.csv"), &sol.pvalue_csv())?;
    let report = SelectReport {
        k_max: sol.k_max,
        c: args.common.c,
        crit: boot.crit,
        replicates: boot.replicates,
        outlier_mode: boot.outlier_mode,
        alpha_values: sol.alpha_values.clone(),
        pvalues: sol
            .pvalue_grid
            .iter()
            .map(|row| row.iter().map(CellStatus::p_value).collect())
            .collect(),
        sensible: sol.reports(),
    };
    write_json(&args.common.out.join("sensible.json"), &report)
}

#[derive(Serialize)]
struct ScenarioReport {
    scenario: &'static str,
    n: usize,
    p: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    achieved_overlap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    separation: Option<f64>,
    spec: ScenarioSpec,
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    prepare_out(&args.out)?;
    let (name, mut spec, achieved, separation) = match args.scenario {
        Scenario::Fig1 => ("fig1", ScenarioSpec::figure1(args.seed), None, None),
        Scenario::Fig1Half => (
            "fig1-half",
            ScenarioSpec::figure1_half(args.seed),
            None,
            None,
        ),
        Scenario::Overlap => {
            let counts = vec![args.count; args.k];
            let sc = gen_overlap_target(
                args.k,
                args.p,
                args.c,
                args.overlap,
                &counts,
                &RngStream::new(args.seed, 0),
            )?;
            (
                "overlap",
                sc.spec,
                Some(sc.achieved_overlap),
                Some(sc.separation),
            )
        }
    };
    if args.contamination > 0 {
        spec = with_range_contamination(&spec, args.contamination)?;
    }
    let (data, labels) = gen_scenario(&spec)?;
    write_data(&args.out.join("data.csv"), &data)?;
    write_labels(&args.out.join("truth.csv"), &labels)?;
    let report = ScenarioReport {
        scenario: name,
        n: data.n(),
        p: data.p(),
        achieved_overlap: achieved,
        separation,
        spec,
    };
    write_json(&args.out.join("scenario.json"), &report)
}

#[derive(Deserialize)]
struct ModelFile {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    covariances: Vec<SymMatrix>,
    c: f64,
}

#[derive(Serialize)]
struct AlphaEstimate {
    alpha: f64,
    value: f64,
    std_error: f64,
}

#[derive(Serialize)]
struct AlphaValue {
    alpha: f64,
    value: f64,
}

#[derive(Serialize)]
struct OverlapReport {
    k: usize,
    p: usize,
    draws: usize,
    eta: Estimate,
    xi: Vec<AlphaEstimate>,
    consistency_factor: Vec<AlphaValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    average_pairwise_overlap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_pairwise_overlap: Option<f64>,
}

pub fn overlap(args: OverlapArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.model)
        .with_context(|| format!("cannot read {}", args.model.display()))?;
    let file: ModelFile = serde_json::from_str(&text)
        .with_context(|| format!("{}: not a model description", args.model.display()))?;
    let model = ClusterModel::new(file.weights, file.means, file.covariances, file.c)?;
    prepare_out(&args.out)?;
    let mc = MonteCarlo::new(args.draws, args.seed);
    let p = model.p();
    let eta = eta(&model, &mc)?;
    let mut xis = Vec::with_capacity(args.alpha.len());
    let mut nus = Vec::with_capacity(args.alpha.len());
    for &a in &args.alpha {
        let e = xi(&model, a, &mc)?;
        xis.push(AlphaEstimate {
            alpha: a,
            value: e.value,
            std_error: e.std_error,
        });
        nus.push(AlphaValue {
            alpha: a,
            value: mcd_consistency_factor(a, p as u32)?,
        });
    }
    let pairwise = if model.k() >= 2 {
        Some(datagen::pairwise_overlap(
            &model,
            args.draws,
            &RngStream::new(args.seed, 1),
        )?)
    } else {
        None
    };
    let report = OverlapReport {
        k: model.k(),
        p,
        draws: args.draws,
        eta,
        xi: xis,
        consistency_factor: nus,
        average_pairwise_overlap: pairwise.as_ref().map(|o| o.average()),
        max_pairwise_overlap: pairwise.as_ref().map(|o| o.max()),
    };
    write_json(&args.out.join("overlap.json"), &report)
}

#[derive(Serialize)]
struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ari: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    correct_k_rate: Option<f64>,
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let mut report = EvalReport {
        n: None,
        ari: None,
        runs: None,
        correct_k_rate: None,
    };
    if let (Some(labels), Some(truth)) = (&args.labels, &args.truth) {
        let a = read_labels(labels)?;
        let b = read_labels(truth)?;
        report.n = Some(a.len());
        report.ari = Some(adjusted_rand_index(&a, &b)?);
    }
    if let Some(k) = args.k {
        report.runs = Some(args.ks.len());
        report.correct_k_rate = Some(correct_k_rate(&args.ks, k)?);
    }
    if report.ari.is_none() && report.correct_k_rate.is_none() {
        bail!("nothing to evaluate: pass --labels/--truth or --ks/--k");
    }
    prepare_out(&args.out)?;
    write_json(&args.out.join("eval.json"), &report)
}
