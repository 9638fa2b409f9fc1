//! Shared fixtures for the benchmarks.

use tclust_core::datagen::{gen_scenario, ScenarioSpec};
use tclust_core::{DataMatrix, RngStream};

/// The four-component bivariate dataset with its two contamination boxes.
pub fn figure1_data(seed: u64) -> DataMatrix {
    gen_scenario(&ScenarioSpec::figure1(seed))
        .expect("valid scenario")
        .0
}

/// `k` sets of `p` eigenvalues spread over several orders of magnitude, with
/// cluster sizes.
pub fn eigen_sets(k: usize, p: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    use rand::Rng;
    let mut rng = RngStream::new(seed, 0).rng();
    let sets = (0..k)
        .map(|_| {
            (0..p)
                .map(|_| 10f64.powf(rng.random_range(-2.0..2.0)))
                .collect()
        })
        .collect();
    let sizes = (0..k).map(|_| rng.random_range(10.0..200.0)).collect();
    (sets, sizes)
}

/// Two labelings of `n` points with `k` classes each.
pub fn labelings(n: usize, k: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    use rand::Rng;
    let mut rng = RngStream::new(seed, 0).rng();
    let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let b = a
        .iter()
        .map(|&x| {
            if rng.random_bool(0.2) {
                rng.random_range(0..k)
            } else {
                x
            }
        })
        .collect();
    (a, b)
}
