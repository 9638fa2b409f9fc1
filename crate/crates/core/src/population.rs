//! Population functionals of a Gaussian cluster model: winner-region masses,
//! the overlap index `η`, its trimmed analogue `ξ`, the MCD consistency
//! factor and a Monte Carlo check of the classification-likelihood
//! inequality between two models.
//!
//! The reference distribution `P0` of a model `(θ, π)` has density
//! `f0(x) = η(θ, π) · max_j π_j φ(x; θ_j)`, i.e. each component restricted to
//! the region where it has the largest weighted density, renormalized.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statmath::{
    chi2_cdf, chi2_quantile, normal_cdf, GaussianKernel, MvNormalSampler, RngStream,
};
use crate::tclust::ClusterModel;

/// Monte Carlo draws are processed in batches of this size, one stream each.
const BATCH: usize = 1 << 16;
/// Fewest draws accepted for quantile-based estimates.
pub const MIN_QUANTILE_DRAWS: usize = 10_000;

/// Monte Carlo budget and stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarlo {
    pub draws: usize,
    pub rng: RngStream,
}

impl MonteCarlo {
    pub fn new(draws: usize, seed: u64) -> Self {
        Self {
            draws,
            rng: RngStream::new(seed, 0),
        }
    }
}

impl Default for MonteCarlo {
    fn default() -> Self {
        Self::new(1_000_000, 0)
    }
}

/// A point estimate with its standard error (0 for quadrature results).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
        }
    }
}

/// Weighted log-densities of the positive-weight components.
struct Scorer {
    terms: Vec<Option<(f64, GaussianKernel)>>,
}

impl Scorer {
    fn new(model: &ClusterModel) -> Result<Self> {
        let terms = model
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
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { terms })
    }

    /// `(argmax_j, max_j log(π_j φ_j(x)))`, lowest index on ties.
    #[inline]
    fn winner(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for (j, t) in self.terms.iter().enumerate() {
            if let Some((lw, g)) = t {
                let v = lw + g.log_density(x);
                if v > best.1 {
                    best = (j, v);
                }
            }
        }
        best
    }
}

fn batches(draws: usize) -> Vec<(u64, usize)> {
    (0..draws.div_ceil(BATCH))
        .map(|b| (b as u64, BATCH.min(draws - b * BATCH)))
        .collect()
}

/// Crossing points of `log(π_j φ_j) = log(π_r φ_r)` for univariate components.
fn crossings(model: &ClusterModel) -> Result<Vec<f64>> {
    let comps: Vec<(f64, f64, f64)> = (0..model.k())
        .filter(|&j| model.weights[j] > 0.0)
        .map(|j| {
            (
                model.weights[j].ln(),
                model.means[j][0],
                model.covs[j].get(0, 0),
            )
        })
        .collect();
    let mut roots = Vec::new();
    for (i, &(lw1, m1, v1)) in comps.iter().enumerate() {
        for &(lw2, m2, v2) in &comps[i + 1..] {
            // a x² + b x + c = 0
            let a = -0.5 / v1 + 0.5 / v2;
            let b = m1 / v1 - m2 / v2;
            let c =
                lw1 - lw2 - 0.5 * v1.ln() + 0.5 * v2.ln() - 0.5 * m1 * m1 / v1 + 0.5 * m2 * m2 / v2;
            let scale = (0.5 / v1).max(0.5 / v2);
            if a.abs() <= 1e-14 * scale {
                if b.abs() <= 1e-14 * scale * (1.0 + m1.abs() + m2.abs()) {
                    if c.abs() <= 1e-14 {
                        return Err(Error::RootFinding("two components are identical".into()));
                    }
                    continue;
                }
                roots.push(-c / b);
                continue;
            }
            let disc = b * b - 4.0 * a * c;
            if disc < 0.0 {
                continue;
            }
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            if q != 0.0 {
                roots.push(q / a);
                roots.push(c / q);
            } else {
                roots.push(0.0);
            }
        }
    }
    roots.retain(|r| r.is_finite());
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    Ok(roots)
}

/// `Φ((hi-μ)/σ) - Φ((lo-μ)/σ)` computed on the tail that avoids cancellation.
fn normal_interval(lo: f64, hi: f64, mean: f64, sd: f64) -> f64 {
    let (zl, zh) = ((lo - mean) / sd, (hi - mean) / sd);
    if zl > 0.0 {
        normal_cdf(-zl) - normal_cdf(-zh)
    } else {
        normal_cdf(zh) - normal_cdf(zl)
    }
}

fn quadrature_masses(model: &ClusterModel) -> Result<Vec<f64>> {
    let scorer = Scorer::new(model)?;
    let roots = crossings(model)?;
    let mut edges = Vec::with_capacity(roots.len() + 2);
    edges.push(f64::NEG_INFINITY);
    edges.extend_from_slice(&roots);
    edges.push(f64::INFINITY);
    let mut masses = vec![0.0; model.k()];
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let probe = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => lo + 1.0,
            (false, true) => hi - 1.0,
            (false, false) => 0.0,
        };
        let (j, _) = scorer.winner(&[probe]);
        let sd = model.covs[j].get(0, 0).sqrt();
        masses[j] += normal_interval(lo, hi, model.means[j][0], sd);
    }
    Ok(masses)
}

fn monte_carlo_masses(model: &ClusterModel, mc: &MonteCarlo) -> Result<(Vec<f64>, Vec<f64>)> {
    let scorer = Scorer::new(model)?;
    let k = model.k();
    let mut masses = vec![0.0; k];
    let mut ses = vec![0.0; k];
    for j in 0..k {
        if model.weights[j] <= 0.0 {
            continue;
        }
        let sampler = MvNormalSampler::new(&model.means[j], &model.covs[j])?;
        let stream = mc.rng.child(j as u64);
        let hits: usize = batches(mc.draws)
            .into_par_iter()
            .map(|(b, size)| {
                let mut rng = stream.with_id(b).rng();
                let mut x = vec![0.0; sampler.dim()];
                let mut hits = 0;
                for _ in 0..size {
                    sampler.sample_into(&mut rng, &mut x);
                    if scorer.winner(&x).0 == j {
                        hits += 1;
                    }
                }
                hits
            })
            .sum();
        let m = hits as f64 / mc.draws as f64;
        masses[j] = m;
        ses[j] = (m * (1.0 - m) / mc.draws as f64).sqrt();
    }
    Ok((masses, ses))
}

/// `p_j(Z_j(θ, π); θ)`: the mass component `j` puts on its own winner
/// region. Exact (Gaussian CDF between crossing points) for `p = 1`, Monte
/// Carlo with `mc.draws` draws per component otherwise. Weight-0 components
/// get mass 0.
pub fn winner_region_masses(model: &ClusterModel, mc: &MonteCarlo) -> Result<Vec<Estimate>> {
    model.validate()?;
    if model.p() == 1 {
        return Ok(quadrature_masses(model)?
            .into_iter()
            .map(Estimate::exact)
            .collect());
    }
    if mc.draws == 0 {
        return Err(Error::InsufficientDraws { got: 0, min: 1 });
    }
    let (m, s) = monte_carlo_masses(model, mc)?;
    Ok(m.into_iter()
        .zip(s)
        .map(|(value, std_error)| Estimate { value, std_error })
        .collect())
}

/// Overlap index `η(θ, π) = 1 / Σ_j π_j p_j(Z_j(θ, π); θ)`.
pub fn eta(model: &ClusterModel, mc: &MonteCarlo) -> Result<Estimate> {
    let masses = winner_region_masses(model, mc)?;
    let total: f64 = masses
        .iter()
        .zip(&model.weights)
        .map(|(m, w)| w * m.value)
        .sum();
    let var: f64 = masses
        .iter()
        .zip(&model.weights)
        .map(|(m, w)| (w * m.std_error).powi(2))
        .sum();
    Ok(Estimate {
        value: 1.0 / total,
        std_error: var.sqrt() / (total * total),
    })
}

/// A model read as the reference distribution `P0`, with its normalizer.
#[derive(Clone, Debug)]
pub struct PopulationModel {
    pub model: ClusterModel,
    pub eta: Estimate,
}

impl PopulationModel {
    pub fn new(model: ClusterModel, mc: &MonteCarlo) -> Result<Self> {
        let eta = eta(&model, mc)?;
        Ok(Self { model, eta })
    }
}

/// Draws from `P0` by rejection: pick a component by weight, draw from it,
/// keep the draw only if that component wins there. Calls `visit` with
/// `(x, accepted, winner score)` for every raw draw of the batch.
fn for_each_mixture_draw<F>(
    model: &ClusterModel,
    scorer: &Scorer,
    stream: RngStream,
    size: usize,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(&[f64], bool, f64),
{
    let samplers = model
        .means
        .iter()
        .zip(&model.covs)
        .map(|(m, s)| MvNormalSampler::new(m, s))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = stream.rng();
    let mut x = vec![0.0; model.p()];
    for _ in 0..size {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut comp = usize::MAX;
        for (j, &w) in model.weights.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                comp = j;
                if u < acc {
                    break;
                }
            }
        }
        samplers[comp].sample_into(&mut rng, &mut x);
        let (win, score) = scorer.winner(&x);
        visit(&x, win == comp, score);
    }
    Ok(())
}

/// Trimmed overlap `ξ_{P0}(θ, π) = 1 / Σ_j π_j p_j(Z_j ∩ B; θ)` where `P0`
/// is the model's own reference distribution and `B` keeps the `1 - α`
/// fraction of `P0` with the largest `max_j π_j φ_j`. For `α = 0` this is
/// [`eta`].
pub fn xi(model: &ClusterModel, alpha: f64, mc: &MonteCarlo) -> Result<Estimate> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!(
            "trimming level must lie in [0, 1), got {alpha}"
        )));
    }
    if alpha == 0.0 {
        return eta(model, mc);
    }
    model.validate()?;
    if mc.draws < MIN_QUANTILE_DRAWS {
        return Err(Error::InsufficientDraws {
            got: mc.draws,
            min: MIN_QUANTILE_DRAWS,
        });
    }
    let scorer = Scorer::new(model)?;
    let per_batch: Vec<Result<Vec<f64>>> = batches(mc.draws)
        .into_par_iter()
        .map(|(b, size)| {
            let mut scores = Vec::new();
            for_each_mixture_draw(model, &scorer, mc.rng.with_id(b), size, |_, ok, s| {
                if ok {
                    scores.push(s);
                }
            })?;
            Ok(scores)
        })
        .collect();
    let mut scores = Vec::new();
    for s in per_batch {
        scores.extend(s?);
    }
    if scores.is_empty() {
        return Err(Error::InsufficientDraws { got: 0, min: 1 });
    }
    scores.sort_by(f64::total_cmp);
    // empirical α-quantile of the winner score under P0
    let cut = ((alpha * scores.len() as f64).ceil() as usize).min(scores.len() - 1);
    let threshold = scores[cut];
    let kept = scores.len() - scores.partition_point(|&s| s < threshold);
    let frac = kept as f64 / mc.draws as f64;
    let se = (frac * (1.0 - frac) / mc.draws as f64).sqrt();
    Ok(Estimate {
        value: 1.0 / frac,
        std_error: se / (frac * frac),
    })
}

/// MCD consistency factor `ν_α = F_{χ²_{p+2}}(χ²_{p,α}) / (1 - α)`, with
/// `χ²_{p,α}` the `(1 - α)`-quantile of `χ²_p`.
pub fn mcd_consistency_factor(alpha: f64, p: u32) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!(
            "trimming level must lie in [0, 1), got {alpha}"
        )));
    }
    if alpha == 0.0 {
        return Ok(1.0);
    }
    let q = chi2_quantile(1.0 - alpha, p)?;
    Ok(chi2_cdf(q, p + 2)? / (1.0 - alpha))
}

/// Both sides of the inequality
/// `P0[log max_j π0_j φ(·; θ0_j)] - P0[log max_j π_j φ(·; θ_j)] >= log(η(θ, π) / η(θ0, π0))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub lhs_std_error: f64,
    pub rhs: f64,
    pub rhs_std_error: f64,
    pub holds: bool,
}

/// Monte Carlo evaluation of the inequality above with `mc.draws` draws
/// from `P0`. It holds when `lhs >= rhs - 3·se`, with `se` combining both
/// sides' standard errors.
pub fn check_proposition1(
    model0: &PopulationModel,
    model: &ClusterModel,
    mc: &MonteCarlo,
) -> Result<InequalityCheck> {
    model.validate()?;
    if model.p() != model0.model.p() {
        return Err(Error::DimensionMismatch {
            expected: model0.model.p(),
            found: model.p(),
        });
    }
    if mc.draws < 2 {
        return Err(Error::InsufficientDraws {
            got: mc.draws,
            min: 2,
        });
    }
    let scorer0 = Scorer::new(&model0.model)?;
    let scorer = Scorer::new(model)?;

    // Accepted draws from P0, generated batch-wise until `mc.draws` are kept.
    let stream = mc.rng.child(0xD0);
    let acceptance = 1.0 / model0.eta.value.max(1.0);
    let raw_per_batch = BATCH;
    let mut diffs: Vec<f64> = Vec::with_capacity(mc.draws);
    let mut next_batch = 0u64;
    let max_batches = 64 + (mc.draws as f64 / acceptance / raw_per_batch as f64 * 100.0) as u64;
    while diffs.len() < mc.draws {
        if next_batch > max_batches {
            return Err(Error::RejectionExhausted {
                attempts: next_batch as usize * raw_per_batch,
            });
        }
        let wave: Vec<u64> = (next_batch..next_batch + 8).collect();
        next_batch += 8;
        let parts: Vec<Result<Vec<f64>>> = wave
            .into_par_iter()
            .map(|b| {
                let mut out = Vec::new();
                for_each_mixture_draw(
                    &model0.model,
                    &scorer0,
                    stream.with_id(b),
                    raw_per_batch,
                    |x, ok, s0| {
                        if ok {
                            out.push(s0 - scorer.winner(x).1);
                        }
                    },
                )?;
                Ok(out)
            })
            .collect();
        for part in parts {
            diffs.extend(part?);
        }
    }
    diffs.truncate(mc.draws);
    let m = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / m;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let lhs_se = (var / m).sqrt();

    let eta_model = eta(
        model,
        &MonteCarlo {
            draws: mc.draws,
            rng: mc.rng.child(0xE7),
        },
    )?;
    let eta0 = if model0.model.p() == 1 {
        model0.eta
    } else {
        // same stream as above so identical models cancel exactly
        eta(
            &model0.model,
            &MonteCarlo {
                draws: mc.draws,
                rng: mc.rng.child(0xE7),
            },
        )?
    };
    let rhs = (eta_model.value / eta0.value).ln();
    let rhs_se = ((eta_model.std_error / eta_model.value).powi(2)
        + (eta0.std_error / eta0.value).powi(2))
    .sqrt();
    let se = (lhs_se * lhs_se + rhs_se * rhs_se).sqrt();
    Ok(InequalityCheck {
        lhs: mean,
        lhs_std_error: lhs_se,
        rhs,
        rhs_std_error: rhs_se,
        holds: mean >= rhs - 3.0 * se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statmath::SymMatrix;

    fn two_1d(w1: f64, m1: f64, v1: f64, m2: f64, v2: f64) -> ClusterModel {
        ClusterModel::new(
            vec![w1, 1.0 - w1],
            vec![vec![m1], vec![m2]],
            vec![SymMatrix::from_diag(&[v1]), SymMatrix::from_diag(&[v2])],
            1e12,
        )
        .unwrap()
    }

    #[test]
    fn single_component_has_unit_mass() {
        let m = ClusterModel::new(
            vec![1.0],
            vec![vec![0.3]],
            vec![SymMatrix::from_diag(&[2.0])],
            1.0,
        )
        .unwrap();
        let masses = winner_region_masses(&m, &MonteCarlo::default()).unwrap();
        assert!((masses[0].value - 1.0).abs() < 1e-15);
        let m2 = ClusterModel::new(
            vec![1.0],
            vec![vec![0.0, 0.0]],
            vec![SymMatrix::identity(2)],
            1.0,
        )
        .unwrap();
        let masses = winner_region_masses(&m2, &MonteCarlo::new(20_000, 1)).unwrap();
        assert_eq!(masses[0].value, 1.0);
    }

    #[test]
    fn equal_variance_pair_has_closed_form() {
        let m = two_1d(0.5, -0.5, 1.0, 0.5, 1.0);
        let masses = winner_region_masses(&m, &MonteCarlo::default()).unwrap();
        let phi = normal_cdf(0.5);
        assert!((masses[0].value - phi).abs() < 1e-12);
        assert!((masses[1].value - phi).abs() < 1e-12);
        assert!((eta(&m, &MonteCarlo::default()).unwrap().value - 1.0 / phi).abs() < 1e-12);
    }

    #[test]
    fn dominated_component_has_empty_region() {
        // 0.1·φ(x; -0.2, 0.1) never exceeds 0.9·φ(x; 0, 1)
        let m = two_1d(0.1, -0.2, 0.1, 0.0, 1.0);
        let masses = winner_region_masses(&m, &MonteCarlo::default()).unwrap();
        assert!(masses[0].value < 1e-15);
        assert!((masses[1].value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eta_shrinks_with_separation() {
        let mut last = f64::INFINITY;
        for d in [1.0, 5.0, 10.0] {
            let e = eta(&two_1d(0.5, -d, 1.0, d, 1.0), &MonteCarlo::default())
                .unwrap()
                .value;
            assert!(e >= 1.0 && e <= last);
            last = e;
        }
        assert!(last - 1.0 < 1e-12);
    }

    #[test]
    fn quadrature_agrees_with_monte_carlo() {
        let m = two_1d(0.3, -0.4, 0.5, 0.6, 1.5);
        let exact = winner_region_masses(&m, &MonteCarlo::default()).unwrap();
        let scorer = Scorer::new(&m).unwrap();
        let mut rng = RngStream::new(8, 0).rng();
        for j in 0..2 {
            let s = MvNormalSampler::new(&m.means[j], &m.covs[j]).unwrap();
            let n = 200_000;
            let hits = (0..n)
                .filter(|_| scorer.winner(&s.sample(&mut rng)).0 == j)
                .count();
            let est = hits as f64 / n as f64;
            let se = (est * (1.0 - est) / n as f64).sqrt();
            assert!(
                (est - exact[j].value).abs() < 3.0 * se + 1e-12,
                "j={j}: {est} vs {}",
                exact[j].value
            );
        }
    }

    #[test]
    fn identical_components_fail_root_finding() {
        let m = two_1d(0.5, 0.0, 1.0, 0.0, 1.0);
        assert!(matches!(
            winner_region_masses(&m, &MonteCarlo::default()),
            Err(Error::RootFinding(_))
        ));
    }

    #[test]
    fn xi_at_zero_is_eta() {
        let m = two_1d(0.5, -0.5, 1.0, 0.5, 1.0);
        let mc = MonteCarlo::new(50_000, 3);
        assert_eq!(xi(&m, 0.0, &mc).unwrap(), eta(&m, &mc).unwrap());
    }

    #[test]
    fn xi_standard_normal() {
        let m = ClusterModel::new(
            vec![1.0],
            vec![vec![0.0]],
            vec![SymMatrix::identity(1)],
            1.0,
        )
        .unwrap();
        let x = xi(&m, 0.1, &MonteCarlo::new(200_000, 5)).unwrap();
        assert!((x.value - 1.0 / 0.9).abs() < 1e-4, "{}", x.value);
    }

    #[test]
    fn xi_needs_enough_draws() {
        let m = ClusterModel::new(
            vec![1.0],
            vec![vec![0.0]],
            vec![SymMatrix::identity(1)],
            1.0,
        )
        .unwrap();
        assert!(matches!(
            xi(&m, 0.1, &MonteCarlo::new(100, 5)),
            Err(Error::InsufficientDraws { .. })
        ));
    }

    #[test]
    fn consistency_factor_values() {
        assert_eq!(mcd_consistency_factor(0.0, 3).unwrap(), 1.0);
        let q = -2.0 * 0.25_f64.ln();
        let num = 1.0 - (-q / 2.0).exp() * (1.0 + q / 2.0);
        let want = num / 0.75;
        let got = mcd_consistency_factor(0.25, 2).unwrap();
        assert!((got - want).abs() < 1e-12);
        assert!((got - 0.53790).abs() < 1e-4);
    }

    #[test]
    fn proposition1_equality_cases() {
        let mc = MonteCarlo::new(20_000, 9);
        let m0 = two_1d(0.5, -5.0, 1.0, 5.0, 1.0);
        let pop = PopulationModel::new(m0.clone(), &mc).unwrap();
        let same = check_proposition1(&pop, &m0, &mc).unwrap();
        assert_eq!(same.lhs, 0.0);
        assert_eq!(same.rhs, 0.0);
        assert!(same.holds);

        let padded = m0.with_empty_cluster();
        let pad = check_proposition1(&pop, &padded, &mc).unwrap();
        assert_eq!(pad.lhs, 0.0);
        assert_eq!(pad.rhs, 0.0);

        let merged = ClusterModel::new(
            vec![1.0],
            vec![vec![0.0]],
            vec![SymMatrix::identity(1)],
            1.0,
        )
        .unwrap();
        let strict = check_proposition1(&pop, &merged, &MonteCarlo::new(1_000_000, 9)).unwrap();
        assert!(strict.holds && strict.lhs > strict.rhs);
    }

    #[test]
    fn proposition1_equality_in_two_dims() {
        let mc = MonteCarlo::new(20_000, 4);
        let m0 = ClusterModel::new(
            vec![0.4, 0.6],
            vec![vec![-1.0, 0.0], vec![1.0, 0.5]],
            vec![SymMatrix::identity(2), SymMatrix::from_diag(&[2.0, 0.5])],
            10.0,
        )
        .unwrap();
        let pop = PopulationModel::new(m0.clone(), &mc).unwrap();
        let same = check_proposition1(&pop, &m0, &mc).unwrap();
        assert_eq!((same.lhs, same.rhs), (0.0, 0.0));
        let pad = check_proposition1(&pop, &m0.with_empty_cluster(), &mc).unwrap();
        assert_eq!((pad.lhs, pad.rhs), (0.0, 0.0));
    }
}
