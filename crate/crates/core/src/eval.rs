//! Agreement between partitions. Label `0` (trimmed or noise) is an ordinary
//! class here.

use std::collections::HashMap;

use crate::error::{Error, Result};

fn choose2(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

/// Adjusted Rand index (Hubert & Arabie) from the contingency table.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let n = a.len() as u64;
    if n < 2 {
        return Err(Error::Domain(
            "adjusted Rand index needs at least two observations".into(),
        ));
    }
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: u64 = table.values().map(|&m| choose2(m)).sum();
    let sum_a: u64 = rows.values().map(|&m| choose2(m)).sum();
    let sum_b: u64 = cols.values().map(|&m| choose2(m)).sum();
    let total = choose2(n) as f64;
    let expected = sum_a as f64 * sum_b as f64 / total;
    let max = 0.5 * (sum_a + sum_b) as f64;
    if max == expected {
        // both partitions are all-in-one or both all-singletons
        return Ok(1.0);
    }
    Ok((index as f64 - expected) / (max - expected))
}

/// Fraction of fitted cluster counts equal to `truth`.
pub fn correct_k_rate(results: &[usize], truth: usize) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::Domain("no results to score".into()));
    }
    Ok(results.iter().filter(|&&k| k == truth).count() as f64 / results.len() as f64)
}

#[cfg(test)]
pub(crate) mod oracle {
    /// O(n²) pair counting: agreements and disagreements over all pairs.
    pub fn pair_counting_ari(a: &[usize], b: &[usize]) -> f64 {
        let n = a.len();
        let (mut ss, mut sd, mut ds, mut dd) = (0u64, 0u64, 0u64, 0u64);
        for i in 0..n {
            for j in (i + 1)..n {
                match (a[i] == a[j], b[i] == b[j]) {
                    (true, true) => ss += 1,
                    (true, false) => sd += 1,
                    (false, true) => ds += 1,
                    (false, false) => dd += 1,
                }
            }
        }
        let (ss, sd, ds, dd) = (ss as f64, sd as f64, ds as f64, dd as f64);
        let den = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd);
        if den == 0.0 {
            return 1.0;
        }
        2.0 * (ss * dd - sd * ds) / den
    }
}

#[cfg(test)]
mod tests {
    use super::oracle::pair_counting_ari;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_is_one() {
        let a = [1, 1, 2, 2, 3];
        assert_eq!(adjusted_rand_index(&a, &a).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&a, &[7, 7, 0, 0, 4]).unwrap(), 1.0);
    }

    #[test]
    fn one_cluster_vs_singletons_is_zero() {
        let a = [1; 6];
        let b = [0, 1, 2, 3, 4, 5];
        assert_eq!(adjusted_rand_index(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn five_point_hand_value() {
        // contingency [[2,0],[1,2]]: index 1+0+0+1 = 2, rows C(2,2)+C(3,2) = 4,
        // cols C(3,2)+C(2,2) = 4, total C(5,2) = 10.
        // ARI = (2 - 16/10) / (4 - 16/10) = 0.4 / 2.4 = 1/6.
        let a = [1, 1, 2, 2, 2];
        let b = [1, 1, 1, 2, 2];
        let v = adjusted_rand_index(&a, &b).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
        assert!((pair_counting_ari(&a, &b) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_is_error() {
        assert!(adjusted_rand_index(&[1, 2], &[1]).is_err());
    }

    #[test]
    fn correct_k_counting() {
        assert_eq!(correct_k_rate(&[3, 3, 3], 3).unwrap(), 1.0);
        assert_eq!(correct_k_rate(&[1, 2], 3).unwrap(), 0.0);
        assert_eq!(
            correct_k_rate(&[4, 4, 4, 4, 4, 4, 4, 2, 3, 5], 4).unwrap(),
            0.7
        );
        assert!(correct_k_rate(&[], 3).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_relabel_invariant_and_matches_oracle(
            pairs in proptest::collection::vec((0usize..5, 0usize..4), 2..50),
            perm_seed in 0usize..24,
        ) {
            let a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let ab = adjusted_rand_index(&a, &b).unwrap();
            prop_assert_eq!(ab, adjusted_rand_index(&b, &a).unwrap());
            prop_assert!((ab - pair_counting_ari(&a, &b)).abs() <= 1e-12);
            let perm = [[0, 1, 2, 3, 4], [4, 3, 2, 1, 0], [2, 0, 4, 1, 3]][perm_seed % 3];
            let a2: Vec<usize> = a.iter().map(|&x| perm[x] + 10).collect();
            prop_assert!((adjusted_rand_index(&a2, &b).unwrap() - ab).abs() <= 1e-15);
            prop_assert!(ab <= 1.0);
        }
    }
}
