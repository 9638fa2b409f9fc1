//! Seeded scenario generation: Gaussian components plus uniform
//! contamination, and overlap-targeted random mixtures.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::statmath::{
    chi2_quantile, sym_eigen, GaussianKernel, MvNormalSampler, RngStream, SymMatrix,
};
use crate::tclust::ClusterModel;

/// Uniform draws per contamination row before giving up.
pub const MAX_CONTAMINATION_ATTEMPTS: usize = 100_000;
/// Iteration limit of the separation search.
pub const MAX_BISECTION_ITERATIONS: usize = 60;
/// Monte Carlo draws per component when measuring overlap during the search.
pub const OVERLAP_DRAWS: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub cov: SymMatrix,
    pub count: usize,
}

/// Uniform points on an axis-aligned box. With `exclusion_percentile` set, a
/// draw is kept only when its squared Mahalanobis distance to every
/// component exceeds that `χ²_p` quantile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion_percentile: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub components: Vec<ComponentSpec>,
    #[serde(default)]
    pub contamination: Vec<ContaminationSpec>,
    pub seed: u64,
}

fn cov2(a: f64, b: f64, d: f64) -> SymMatrix {
    SymMatrix::from_rows(&[vec![a, b], vec![b, d]]).expect("symmetric literal")
}

impl ScenarioSpec {
    /// The four-component bivariate dataset with two contamination boxes
    /// (n = 1000).
    pub fn figure1(seed: u64) -> Self {
        Self::figure1_scaled(seed, 1)
    }

    /// Same layout with every count halved (n = 500).
    pub fn figure1_half(seed: u64) -> Self {
        Self::figure1_scaled(seed, 2)
    }

    fn figure1_scaled(seed: u64, div: usize) -> Self {
        let layout = [
            ([3.0, 23.0], cov2(4.0, 1.5, 3.0), 240),
            ([23.0, 3.0], cov2(5.0, -2.0, 3.0), 230),
            ([14.0, 14.0], cov2(3.0, 0.0, 3.0), 200),
            ([30.0, 30.0], cov2(4.0, 1.0, 3.0), 230),
        ];
        let total: usize = layout.iter().map(|l| l.2).sum();
        let components = layout
            .into_iter()
            .map(|(mean, cov, count)| ComponentSpec {
                weight: count as f64 / total as f64,
                mean: mean.to_vec(),
                cov,
                count: count / div,
            })
            .collect();
        let boxes = [
            ([10.0, 35.0], [15.0, 40.0], 20),
            ([30.0, 25.0], [60.0, 45.0], 80),
        ];
        let contamination = boxes
            .into_iter()
            .map(|(lower, upper, count)| ContaminationSpec {
                lower: lower.to_vec(),
                upper: upper.to_vec(),
                count: count / div,
                exclusion_percentile: None,
            })
            .collect();
        Self {
            components,
            contamination,
            seed,
        }
    }

    pub fn n(&self) -> usize {
        self.components.iter().map(|c| c.count).sum::<usize>()
            + self.contamination.iter().map(|c| c.count).sum::<usize>()
    }

    pub fn p(&self) -> usize {
        self.components.first().map_or(0, |c| c.mean.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::Config(
                "a scenario needs at least one component".into(),
            ));
        }
        let p = self.p();
        if p == 0 {
            return Err(Error::Config("component means must be non-empty".into()));
        }
        for (j, c) in self.components.iter().enumerate() {
            if c.count == 0 {
                return Err(Error::Config(format!("component {} has count 0", j + 1)));
            }
            if c.mean.len() != p || c.cov.dim() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: if c.mean.len() != p {
                        c.mean.len()
                    } else {
                        c.cov.dim()
                    },
                });
            }
            if !(c.weight.is_finite() && c.weight >= 0.0) {
                return Err(Error::Config(format!(
                    "component {} has invalid weight {}",
                    j + 1,
                    c.weight
                )));
            }
        }
        for (i, box_) in self.contamination.iter().enumerate() {
            if box_.count == 0 {
                return Err(Error::Config(format!(
                    "contamination block {} has count 0",
                    i + 1
                )));
            }
            if box_.lower.len() != p || box_.upper.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: box_.lower.len().min(box_.upper.len()),
                });
            }
            if box_
                .lower
                .iter()
                .zip(&box_.upper)
                .any(|(l, u)| !(u > l) || !l.is_finite() || !u.is_finite())
            {
                return Err(Error::Config(format!(
                    "contamination block {} has a degenerate rectangle",
                    i + 1
                )));
            }
            if let Some(q) = box_.exclusion_percentile {
                if !(q > 0.0 && q < 1.0) {
                    return Err(Error::Config(format!(
                        "exclusion percentile must lie in (0, 1), got {q}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The generating mixture, weights normalized to sum 1.
    pub fn model(&self, c: f64) -> Result<ClusterModel> {
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        ClusterModel::new(
            self.components.iter().map(|c| c.weight / total).collect(),
            self.components.iter().map(|c| c.mean.clone()).collect(),
            self.components.iter().map(|c| c.cov.clone()).collect(),
            c,
        )
    }
}

/// Rows grouped by component (labels `1..=K`) then contamination (label 0).
/// Component `j` draws from stream `(seed, j)`, contamination block `i`
/// from `(seed, 1000 + i)`.
pub fn gen_scenario(spec: &ScenarioSpec) -> Result<(DataMatrix, Vec<usize>)> {
    spec.validate()?;
    let p = spec.p();
    let n = spec.n();
    let mut values = Vec::with_capacity(n * p);
    let mut labels = Vec::with_capacity(n);
    for (j, c) in spec.components.iter().enumerate() {
        let sampler = MvNormalSampler::new(&c.mean, &c.cov)?;
        let mut rng = RngStream::new(spec.seed, j as u64).rng();
        let mut x = vec![0.0; p];
        for _ in 0..c.count {
            sampler.sample_into(&mut rng, &mut x);
            values.extend_from_slice(&x);
            labels.push(j + 1);
        }
    }
    for (i, box_) in spec.contamination.iter().enumerate() {
        let mut rng = RngStream::new(spec.seed, 1000 + i as u64).rng();
        let exclusion = match box_.exclusion_percentile {
            Some(q) => {
                let kernels = spec
                    .components
                    .iter()
                    .map(|c| GaussianKernel::new(&c.mean, &c.cov))
                    .collect::<Result<Vec<_>>>()?;
                Some((kernels, chi2_quantile(q, p as u32)?))
            }
            None => None,
        };
        let mut x = vec![0.0; p];
        for _ in 0..box_.count {
            let mut attempts = 0;
            loop {
                if attempts == MAX_CONTAMINATION_ATTEMPTS {
                    return Err(Error::RejectionExhausted { attempts });
                }
                attempts += 1;
                for d in 0..p {
                    x[d] = rng.random_range(box_.lower[d]..box_.upper[d]);
                }
                match &exclusion {
                    Some((kernels, cut)) if kernels.iter().any(|g| g.mahalanobis_sq(&x) < *cut) => {
                        continue
                    }
                    _ => break,
                }
            }
            values.extend_from_slice(&x);
            labels.push(0);
        }
    }
    Ok((DataMatrix::new(n, p, values)?, labels))
}

/// Monte Carlo misclassification probabilities of a mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    /// `conditional[j][l]` = `w_{j|l}` = `P_l[π_l φ_l(X) < π_j φ_j(X)]`, exact
    /// ties counted with weight 1/2.
    pub conditional: Vec<Vec<f64>>,
    /// `w_{jl} = w_{j|l} + w_{l|j}`, zero diagonal.
    pub pairwise: Vec<Vec<f64>>,
}

impl Overlap {
    pub fn average(&self) -> f64 {
        let k = self.pairwise.len();
        let mut sum = 0.0;
        for j in 0..k {
            for l in j + 1..k {
                sum += self.pairwise[j][l];
            }
        }
        sum / (k * (k - 1) / 2) as f64
    }

    pub fn max(&self) -> f64 {
        self.pairwise.iter().flatten().copied().fold(0.0, f64::max)
    }
}

/// Component `l` draws `draws` points from stream `rng.child(l)`.
pub fn pairwise_overlap(model: &ClusterModel, draws: usize, rng: &RngStream) -> Result<Overlap> {
    model.validate()?;
    let k = model.k();
    if k < 2 {
        return Err(Error::Domain(
            "overlap needs at least two components".into(),
        ));
    }
    if draws == 0 {
        return Err(Error::InsufficientDraws { got: 0, min: 1 });
    }
    let kernels = model
        .means
        .iter()
        .zip(&model.covs)
        .map(|(m, s)| GaussianKernel::new(m, s))
        .collect::<Result<Vec<_>>>()?;
    let log_w: Vec<f64> = model.weights.iter().map(|w| w.ln()).collect();
    let columns: Vec<Result<Vec<f64>>> = (0..k)
        .into_par_iter()
        .map(|l| {
            let sampler = MvNormalSampler::new(&model.means[l], &model.covs[l])?;
            let mut rng = rng.child(l as u64).rng();
            let mut x = vec![0.0; model.p()];
            // ties count as half a misclassification
            let mut counts = vec![0usize; k];
            let mut ties = vec![0usize; k];
            let mut scores = vec![0.0; k];
            for _ in 0..draws {
                sampler.sample_into(&mut rng, &mut x);
                for j in 0..k {
                    scores[j] = log_w[j] + kernels[j].log_density(&x);
                }
                for j in 0..k {
                    if j != l {
                        if scores[l] < scores[j] {
                            counts[j] += 1;
                        } else if scores[l] == scores[j] {
                            ties[j] += 1;
                        }
                    }
                }
            }
            Ok(counts
                .into_iter()
                .zip(ties)
                .map(|(c, t)| (c as f64 + 0.5 * t as f64) / draws as f64)
                .collect())
        })
        .collect();
    let mut conditional = vec![vec![0.0; k]; k];
    for (l, col) in columns.into_iter().enumerate() {
        for (j, w) in col?.into_iter().enumerate() {
            conditional[j][l] = w;
        }
    }
    let pairwise = (0..k)
        .map(|j| {
            (0..k)
                .map(|l| {
                    if j == l {
                        0.0
                    } else {
                        conditional[j][l] + conditional[l][j]
                    }
                })
                .collect()
        })
        .collect();
    Ok(Overlap {
        conditional,
        pairwise,
    })
}

/// Result of [`gen_overlap_target`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapScenario {
    pub spec: ScenarioSpec,
    pub achieved_overlap: f64,
    pub separation: f64,
    /// Every `(separation, average overlap)` evaluated during the search.
    pub trace: Vec<(f64, f64)>,
}

fn random_rotation<R: Rng>(p: usize, rng: &mut R) -> Result<Vec<f64>> {
    let a = SymMatrix::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok(sym_eigen(&a)?.vectors)
}

/// Directions of the mean offsets: unit vectors for `p >= 2`, evenly spaced
/// points on `[-1, 1]` for `p = 1`.
fn directions<R: Rng>(k: usize, p: usize, rng: &mut R) -> Vec<Vec<f64>> {
    if p == 1 {
        return (0..k)
            .map(|j| {
                vec![if k == 1 {
                    0.0
                } else {
                    -1.0 + 2.0 * j as f64 / (k - 1) as f64
                }]
            })
            .collect();
    }
    (0..k)
        .map(|_| loop {
            let v: Vec<f64> = (0..p)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-8 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect()
}

/// Random `k`-component mixture in `p` dimensions whose Monte Carlo average
/// pairwise overlap hits `target`. Covariances have eigenvalues uniform on
/// `[1, c]` with random orientation, so the global eigenvalue ratio stays
/// within `c`. Means are `s · u_j`; `s` is bracketed by doubling and then
/// bisected until the overlap lies within 10% of `target` (or below 0.005
/// for a zero target). Overlap is always measured with the same draws.
pub fn gen_overlap_target(
    k: usize,
    p: usize,
    c: f64,
    target: f64,
    counts: &[usize],
    rng: &RngStream,
) -> Result<OverlapScenario> {
    if !(0.0..0.5).contains(&target) {
        return Err(Error::Domain(format!(
            "target overlap must lie in [0, 0.5), got {target}"
        )));
    }
    if !(c >= 1.0) {
        return Err(Error::Domain(format!(
            "eigenvalue ratio bound must be at least 1, got {c}"
        )));
    }
    if k < 2 || p == 0 {
        return Err(Error::Domain(
            "need k >= 2 components in p >= 1 dimensions".into(),
        ));
    }
    if counts.len() != k || counts.contains(&0) {
        return Err(Error::Config(format!("need {k} positive component counts")));
    }
    let mut r = rng.rng();
    let dirs = directions(k, p, &mut r);
    let covs = (0..k)
        .map(|_| {
            let vectors = random_rotation(p, &mut r)?;
            let values: Vec<f64> = (0..p).map(|_| r.random_range(1.0..=c)).collect();
            Ok(SymMatrix::from_eigen(&values, &vectors))
        })
        .collect::<Result<Vec<_>>>()?;
    let total: usize = counts.iter().sum();
    let weights: Vec<f64> = counts.iter().map(|&m| m as f64 / total as f64).collect();
    let seed = r.random::<u64>();
    let mc = rng.child(0x0E);

    let build = |s: f64| -> Result<ClusterModel> {
        ClusterModel::new(
            weights.clone(),
            dirs.iter()
                .map(|u| u.iter().map(|x| s * x).collect())
                .collect(),
            covs.clone(),
            c * (1.0 + 1e-9),
        )
    };
    let mut trace = Vec::new();
    let mut measure = |s: f64| -> Result<f64> {
        let w = pairwise_overlap(&build(s)?, OVERLAP_DRAWS, &mc)?.average();
        trace.push((s, w));
        Ok(w)
    };
    let accept = |w: f64| {
        if target == 0.0 {
            w <= 0.005
        } else {
            (w - target).abs() <= 0.1 * target
        }
    };

    let mut iterations = 0;
    let mut hi = 1.0;
    let mut w_hi = measure(hi)?;
    iterations += 1;
    let mut lo = 0.0;
    let mut found = accept(w_hi).then_some((hi, w_hi));
    while found.is_none() && w_hi > target {
        if iterations >= MAX_BISECTION_ITERATIONS {
            return Err(Error::NonBracketing { iterations });
        }
        lo = hi;
        hi *= 2.0;
        w_hi = measure(hi)?;
        iterations += 1;
        if accept(w_hi) {
            found = Some((hi, w_hi));
        }
    }
    if found.is_none() && target > 0.0 && lo == 0.0 {
        let w0 = measure(0.0)?;
        iterations += 1;
        if w0 < target {
            return Err(Error::NonBracketing { iterations });
        }
        if accept(w0) {
            found = Some((0.0, w0));
        }
    }
    while found.is_none() {
        if iterations >= MAX_BISECTION_ITERATIONS {
            return Err(Error::NonBracketing { iterations });
        }
        let mid = 0.5 * (lo + hi);
        let w = measure(mid)?;
        iterations += 1;
        if accept(w) {
            found = Some((mid, w));
        } else if w > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (separation, achieved_overlap) = found.expect("loop exits with a solution");
    let model = build(separation)?;
    let spec = ScenarioSpec {
        components: (0..k)
            .map(|j| ComponentSpec {
                weight: weights[j],
                mean: model.means[j].clone(),
                cov: model.covs[j].clone(),
                count: counts[j],
            })
            .collect(),
        contamination: Vec::new(),
        seed,
    };
    Ok(OverlapScenario {
        spec,
        achieved_overlap,
        separation,
        trace,
    })
}

/// Appends a uniform contamination block on the bounding box of the clean
/// data generated by `spec`.
pub fn with_range_contamination(spec: &ScenarioSpec, count: usize) -> Result<ScenarioSpec> {
    let clean = ScenarioSpec {
        contamination: Vec::new(),
        ..spec.clone()
    };
    let (data, _) = gen_scenario(&clean)?;
    let (lower, upper) = data.column_ranges().into_iter().unzip();
    let mut out = spec.clone();
    out.contamination.push(ContaminationSpec {
        lower,
        upper,
        count,
        exclusion_percentile: None,
    });
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statmath::normal_cdf;

    #[test]
    fn zero_covariance_gives_identical_rows() {
        let spec = ScenarioSpec {
            components: vec![ComponentSpec {
                weight: 1.0,
                mean: vec![1.5, -2.0],
                cov: SymMatrix::zeros(2),
                count: 10,
            }],
            contamination: vec![],
            seed: 3,
        };
        let (data, labels) = gen_scenario(&spec).unwrap();
        assert_eq!(data.n(), 10);
        assert!(data.rows().all(|r| r == [1.5, -2.0]));
        assert_eq!(labels, vec![1; 10]);
    }

    #[test]
    fn figure1_layout() {
        let spec = ScenarioSpec::figure1(11);
        let (data, labels) = gen_scenario(&spec).unwrap();
        assert_eq!(data.n(), 1000);
        assert_eq!(labels.len(), 1000);
        assert_eq!(labels.iter().filter(|&&l| l == 0).count(), 100);
        for (row, &l) in data.rows().zip(&labels).skip(900) {
            assert_eq!(l, 0);
            assert!(row.iter().all(|v| v.is_finite()));
        }
        let first_box = &spec.contamination[0];
        for row in data.rows().skip(900).take(20) {
            for d in 0..2 {
                assert!(row[d] >= first_box.lower[d] && row[d] < first_box.upper[d]);
            }
        }
        assert_eq!(
            gen_scenario(&ScenarioSpec::figure1_half(11)).unwrap().0.n(),
            500
        );
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_scenario(&ScenarioSpec::figure1(5)).unwrap();
        let b = gen_scenario(&ScenarioSpec::figure1(5)).unwrap();
        assert_eq!(a, b);
        let c = gen_scenario(&ScenarioSpec::figure1(6)).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn exclusion_keeps_contamination_away() {
        let mut spec = ScenarioSpec::figure1(2);
        spec.contamination = vec![ContaminationSpec {
            lower: vec![-10.0, -10.0],
            upper: vec![50.0, 50.0],
            count: 200,
            exclusion_percentile: Some(0.975),
        }];
        let (data, labels) = gen_scenario(&spec).unwrap();
        let kernels: Vec<_> = spec
            .components
            .iter()
            .map(|c| GaussianKernel::new(&c.mean, &c.cov).unwrap())
            .collect();
        let cut = chi2_quantile(0.975, 2).unwrap();
        for (row, &l) in data.rows().zip(&labels) {
            if l == 0 {
                assert!(kernels.iter().all(|g| g.mahalanobis_sq(row) >= cut));
            }
        }
    }

    #[test]
    fn impossible_exclusion_exhausts() {
        let spec = ScenarioSpec {
            components: vec![ComponentSpec {
                weight: 1.0,
                mean: vec![0.0],
                cov: SymMatrix::identity(1),
                count: 5,
            }],
            contamination: vec![ContaminationSpec {
                lower: vec![-0.1],
                upper: vec![0.1],
                count: 1,
                exclusion_percentile: Some(0.9),
            }],
            seed: 1,
        };
        assert!(matches!(
            gen_scenario(&spec),
            Err(Error::RejectionExhausted { .. })
        ));
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = ScenarioSpec::figure1(1);
        spec.components[0].count = 0;
        assert!(spec.validate().is_err());
        let mut spec = ScenarioSpec::figure1(1);
        spec.contamination[0].upper[0] = spec.contamination[0].lower[0];
        assert!(spec.validate().is_err());
    }

    fn pair(m: f64, cov: SymMatrix) -> ClusterModel {
        let p = cov.dim();
        let mut far = vec![0.0; p];
        far[0] = m;
        ClusterModel::new(
            vec![0.5, 0.5],
            vec![vec![0.0; p], far],
            vec![cov.clone(), cov],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn overlap_far_and_identical() {
        let far = pairwise_overlap(
            &pair(100.0, SymMatrix::identity(2)),
            20_000,
            &RngStream::new(1, 0),
        )
        .unwrap();
        assert_eq!(far.max(), 0.0);
        let same = pairwise_overlap(
            &pair(0.0, SymMatrix::identity(2)),
            20_000,
            &RngStream::new(1, 0),
        )
        .unwrap();
        assert_eq!(same.conditional[0][1], 0.5);
        assert_eq!(same.pairwise[0][1], 1.0);
        assert_eq!(same.pairwise[0][1], same.pairwise[1][0]);
    }

    #[test]
    fn overlap_matches_gaussian_tail() {
        let m = ClusterModel::new(
            vec![0.5, 0.5],
            vec![vec![-0.5], vec![0.5]],
            vec![SymMatrix::identity(1), SymMatrix::identity(1)],
            1.0,
        )
        .unwrap();
        let n = 200_000;
        let o = pairwise_overlap(&m, n, &RngStream::new(4, 0)).unwrap();
        let want = normal_cdf(-0.5);
        let se = (want * (1.0 - want) / n as f64).sqrt();
        assert!((o.conditional[0][1] - want).abs() < 3.0 * se);
        assert!((o.conditional[1][0] - want).abs() < 3.0 * se);
    }

    #[test]
    fn overlap_needs_two_components() {
        let m = ClusterModel::new(
            vec![1.0],
            vec![vec![0.0]],
            vec![SymMatrix::identity(1)],
            1.0,
        )
        .unwrap();
        assert!(pairwise_overlap(&m, 100, &RngStream::new(0, 0)).is_err());
    }

    fn check_trace(trace: &[(f64, f64)]) {
        let mut t = trace.to_vec();
        t.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in t.windows(2) {
            assert!(w[1].1 <= w[0].1 + 2e-3, "{:?}", t);
        }
    }

    #[test]
    fn overlap_target_reached() {
        let out = gen_overlap_target(2, 2, 12.0, 0.05, &[100, 100], &RngStream::new(3, 0)).unwrap();
        assert!(
            (0.045..=0.055).contains(&out.achieved_overlap),
            "{}",
            out.achieved_overlap
        );
        check_trace(&out.trace);
        let model = out.spec.model(12.0).unwrap();
        assert!(model.eigenvalue_ratio().unwrap() <= 12.0 + 1e-8);

        let zero = gen_overlap_target(4, 3, 12.0, 0.0, &[50; 4], &RngStream::new(8, 0)).unwrap();
        assert!(zero.achieved_overlap <= 0.005);
        check_trace(&zero.trace);

        let four = gen_overlap_target(4, 2, 12.0, 0.01, &[50; 4], &RngStream::new(9, 0)).unwrap();
        assert!((four.achieved_overlap - 0.01).abs() <= 0.001 + 1e-12);
        check_trace(&four.trace);
        assert!(four.spec.model(12.0).unwrap().eigenvalue_ratio().unwrap() <= 12.0 + 1e-8);
    }

    #[test]
    fn overlap_target_domain() {
        assert!(gen_overlap_target(2, 2, 12.0, 0.5, &[10, 10], &RngStream::new(0, 0)).is_err());
        assert!(gen_overlap_target(2, 2, 0.5, 0.1, &[10, 10], &RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn range_contamination_spans_clean_data() {
        let spec = ScenarioSpec::figure1(4);
        let clean = ScenarioSpec {
            contamination: vec![],
            ..spec.clone()
        };
        let out = with_range_contamination(&clean, 20).unwrap();
        let (data, labels) = gen_scenario(&out).unwrap();
        assert_eq!(labels.iter().filter(|&&l| l == 0).count(), 20);
        let ranges = gen_scenario(&clean).unwrap().0.column_ranges();
        for (row, &l) in data.rows().zip(&labels) {
            if l == 0 {
                for d in 0..2 {
                    assert!(row[d] >= ranges[d].0 && row[d] <= ranges[d].1);
                }
            }
        }
    }
}
