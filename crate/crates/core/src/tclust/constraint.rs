//! Eigenvalue truncation enforcing `max λ / min λ <= c` across clusters.
//!
//! For a threshold `t`, every eigenvalue is clipped into `[t, c·t]`. The
//! size-weighted cost `Σ_j n_j Σ_l [ln m_jl + λ_jl / m_jl]` is piecewise
//! smooth in `t` with breakpoints at `{λ_jl}` and `{λ_jl / c}`; between
//! consecutive breakpoints it has a single closed-form stationary point. The
//! minimizer is therefore among the breakpoints and those stationary points.

use crate::error::{Error, Result};

fn clip(lambda: f64, t: f64, c: f64) -> f64 {
    lambda.max(t).min(c * t)
}

fn cost(eig_sets: &[Vec<f64>], sizes: &[f64], c: f64, t: f64) -> f64 {
    let mut total = 0.0;
    for (vals, &n) in eig_sets.iter().zip(sizes) {
        if n <= 0.0 {
            continue;
        }
        let s: f64 = vals
            .iter()
            .map(|&l| {
                let m = clip(l, t, c);
                m.ln() + l / m
            })
            .sum();
        total += n * s;
    }
    total
}

/// Stationary point of the cost on the piece containing `probe`.
fn piece_optimum(eig_sets: &[Vec<f64>], sizes: &[f64], c: f64, probe: f64) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (vals, &n) in eig_sets.iter().zip(sizes) {
        if n <= 0.0 {
            continue;
        }
        for &l in vals {
            if l < probe {
                num += n * l;
                den += n;
            } else if l > c * probe {
                num += n * l / c;
                den += n;
            }
        }
    }
    (den > 0.0).then(|| num / den)
}

/// Optimal common threshold `t`; every eigenvalue is then clipped to `[t, c·t]`.
pub fn optimal_threshold(eig_sets: &[Vec<f64>], sizes: &[f64], c: f64) -> Result<f64> {
    let mut breaks: Vec<f64> = eig_sets
        .iter()
        .zip(sizes)
        .filter(|(_, &n)| n > 0.0)
        .flat_map(|(v, _)| v.iter().flat_map(move |&l| [l, l / c]))
        .filter(|&t| t > 0.0)
        .collect();
    if breaks.is_empty() {
        return Err(Error::DegenerateData(
            "all eigenvalues of the populated clusters are zero".into(),
        ));
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut candidates = breaks.clone();
    // piece (0, first breakpoint) only matters when some eigenvalue is zero
    let mut lower = 0.0;
    for &upper in &breaks {
        if let Some(t) = piece_optimum(eig_sets, sizes, c, 0.5 * (lower + upper)) {
            if t > lower && t < upper {
                candidates.push(t);
            }
        }
        lower = upper;
    }

    let mut best = (f64::INFINITY, f64::INFINITY);
    for t in candidates {
        let f = cost(eig_sets, sizes, c, t);
        if f < best.0 || (f == best.0 && t < best.1) {
            best = (f, t);
        }
    }
    Ok(best.1)
}

/// Truncates each cluster's eigenvalues so the global ratio is at most `c`,
/// choosing the truncation that maximizes the size-weighted Gaussian
/// likelihood of the scatter matrices. Clusters with size 0 are clipped to
/// the same window but do not influence it. Inputs already satisfying the
/// bound are returned unchanged.
pub fn constrain_eigenvalues(
    eig_sets: &[Vec<f64>],
    sizes: &[f64],
    c: f64,
) -> Result<Vec<Vec<f64>>> {
    if eig_sets.len() != sizes.len() {
        return Err(Error::DimensionMismatch {
            expected: eig_sets.len(),
            found: sizes.len(),
        });
    }
    if !(c >= 1.0) {
        return Err(Error::Domain(format!(
            "eigenvalue ratio bound must be >= 1, got {c}"
        )));
    }
    let all = eig_sets.iter().flatten();
    let max = all.clone().fold(f64::NEG_INFINITY, |a, &v| a.max(v));
    let min = all.fold(f64::INFINITY, |a, &v| a.min(v));
    if min.is_nan() || min < 0.0 && min < -1e-12 * max.abs() {
        return Err(Error::Domain(format!("negative eigenvalue {min}")));
    }
    if min > 0.0 && max <= c * min {
        return Ok(eig_sets.to_vec());
    }
    let sets: Vec<Vec<f64>> = eig_sets
        .iter()
        .map(|v| v.iter().map(|l| l.max(0.0)).collect())
        .collect();
    let t = optimal_threshold(&sets, sizes, c)?;
    Ok(sets
        .iter()
        .map(|v| v.iter().map(|&l| clip(l, t, c)).collect())
        .collect())
}


#[cfg(test)]
mod tests {
    use super::oracle::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inactive_constraint_is_identity() {
        let eig = vec![vec![3.0, 1.0], vec![2.0, 1.5]];
        let out = constrain_eigenvalues(&eig, &[10.0, 5.0], 3.0).unwrap();
        assert_eq!(out, eig);
    }

    #[test]
    fn c_one_gives_weighted_mean() {
        let out = constrain_eigenvalues(&[vec![4.0], vec![1.0]], &[5.0, 5.0], 1.0).unwrap();
        assert!((out[0][0] - 2.5).abs() < 1e-14);
        assert!((out[1][0] - 2.5).abs() < 1e-14);
    }

    #[test]
    fn single_cluster_matches_fine_grid() {
        let eig = vec![vec![9.0, 1.0]];
        let sizes = [10.0];
        let out = constrain_eigenvalues(&eig, &sizes, 2.0).unwrap();
        assert!(out[0][0] / out[0][1] <= 2.0 * (1.0 + 1e-12));

        // plain grid of 10^6 points over [min λ / c, max λ]
        let (lo, hi) = (0.5, 9.0);
        let mut best = (0.0, f64::INFINITY);
        for i in 0..1_000_000 {
            let t = lo + (hi - lo) * i as f64 / 999_999.0;
            let f = brute_cost(&eig, &sizes, 2.0, t);
            if f < best.1 {
                best = (t, f);
            }
        }
        let t = optimal_threshold(&eig, &sizes, 2.0).unwrap();
        let got = brute_cost(&eig, &sizes, 2.0, t);
        assert!(got <= best.1 + 1e-12);
        assert!((got - best.1).abs() <= 1e-6 * best.1.abs());
        assert!((t - best.0).abs() <= 1e-5);
        // Closed form on the active piece: both eigenvalues clipped,
        // t = (1 + 9/2) / 2 = 2.75.
        assert!((t - 2.75).abs() < 1e-12);
        assert!((out[0][0] - 5.5).abs() < 1e-12 && (out[0][1] - 2.75).abs() < 1e-12);
    }

    #[test]
    fn zero_eigenvalues_are_raised() {
        let out =
            constrain_eigenvalues(&[vec![4.0, 0.0], vec![2.0, 1.0]], &[3.0, 3.0], 10.0).unwrap();
        assert!(out[0][1] > 0.0);
        let all: Vec<f64> = out.iter().flatten().copied().collect();
        let max = all.iter().cloned().fold(0.0, f64::max);
        let min = all.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min <= 10.0 * (1.0 + 1e-12));
    }

    #[test]
    fn all_zero_is_degenerate() {
        assert!(matches!(
            constrain_eigenvalues(&[vec![0.0, 0.0]], &[4.0], 5.0),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn empty_clusters_follow_the_window() {
        let out =
            constrain_eigenvalues(&[vec![100.0], vec![1.0], vec![1e-6]], &[5.0, 5.0, 0.0], 4.0)
                .unwrap();
        let t = out[1][0];
        assert!(out[2][0] >= t * (1.0 - 1e-12));
        assert!(out[0][0] <= 4.0 * t * (1.0 + 1e-12));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn matches_grid_oracle(
            k in 1usize..=4,
            p in 1usize..=3,
            raw in proptest::collection::vec(0.0f64..1.0, 12),
            sizes in proptest::collection::vec(1u32..50, 4),
            log_c in 0.0f64..4.0,
        ) {
            let c = 10f64.powf(log_c);
            // eigenvalues spread over four decades
            let eig: Vec<Vec<f64>> = (0..k)
                .map(|j| (0..p).map(|l| 10f64.powf(4.0 * raw[j * 3 + l] - 2.0)).collect())
                .collect();
            let sizes: Vec<f64> = sizes[..k].iter().map(|&s| s as f64).collect();
            let out = constrain_eigenvalues(&eig, &sizes, c).unwrap();
            let all: Vec<f64> = out.iter().flatten().copied().collect();
            let max = all.iter().cloned().fold(0.0, f64::max);
            let min = all.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert!(max / min <= c * (1.0 + 1e-8));

            let got: f64 = out.iter().zip(&eig).zip(&sizes)
                .map(|((m, l), n)| n * m.iter().zip(l).map(|(m, l)| m.ln() + l / m).sum::<f64>())
                .sum();
            let (_, want) = grid_search(&eig, &sizes, c, 20_000);
            prop_assert!(got <= want + 1e-6 * want.abs().max(1.0));
            prop_assert!((got - want).abs() <= 1e-6 * want.abs().max(1.0));
        }
    }
}
