use proptest::prelude::*;
use tclust_core::bootstrap::{bootstrap_pvalue, BootstrapConfig};
use tclust_core::datagen::gen_overlap_target;
use tclust_core::population::{eta, xi, MonteCarlo};
use tclust_core::statmath::sample_mvnormal;
use tclust_core::tclust::{
    concentration_trace, extension_starts, fit_tclust_with_inits, trim_count,
};
use tclust_core::{
    compute_ctlcurves, fit_tclust, ClusterModel, DataMatrix, FitConfig, RngStream, SymMatrix,
};

fn blob_data(seed: u64, centres: &[[f64; 2]], each: usize) -> DataMatrix {
    let mut values = Vec::new();
    for (j, c) in centres.iter().enumerate() {
        let d = sample_mvnormal(
            c,
            &SymMatrix::identity(2),
            each,
            &RngStream::new(seed, j as u64),
        )
        .unwrap();
        values.extend_from_slice(d.values());
    }
    DataMatrix::new(centres.len() * each, 2, values).unwrap()
}

fn small_config(seed: u64) -> FitConfig {
    FitConfig {
        n_starts: 6,
        ..FitConfig::with_seed(seed)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fits_are_feasible_trim_exactly_and_ascend(
        seed in 0u64..1_000,
        k in 1usize..4,
        alpha in 0.0f64..0.3,
        c in 1.0f64..100.0,
    ) {
        let data = blob_data(seed, &[[0.0, 0.0], [6.0, 0.0], [0.0, 6.0]], 20);
        let cfg = small_config(seed);
        let fit = fit_tclust(&data, k, alpha, c, &cfg).unwrap();
        let ratio = fit.model.eigenvalue_ratio().unwrap();
        prop_assert!(ratio <= c * (1.0 + 1e-8), "ratio {ratio} > c {c}");
        prop_assert_eq!(fit.partition.trimmed_count(), trim_count(data.n(), alpha));

        let start = fit_tclust(&data, k, alpha, c, &FitConfig { n_starts: 1, max_iter: 1, ..cfg.clone() })
            .unwrap()
            .model;
        let trace = concentration_trace(&data, alpha, start, &cfg).unwrap();
        for w in trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-10, "objective fell from {} to {}", w[0], w[1]);
        }
    }

    #[test]
    fn warm_started_k_plus_one_never_loses(
        seed in 0u64..1_000,
        k in 1usize..3,
        alpha in 0.0f64..0.2,
    ) {
        let data = blob_data(seed, &[[0.0, 0.0], [5.0, 1.0], [1.0, 5.0]], 20);
        let cfg = small_config(seed);
        let lower = fit_tclust(&data, k, alpha, 20.0, &cfg).unwrap();
        let mut inits = vec![lower.model.with_empty_cluster()];
        inits.extend(extension_starts(&data, &lower.model, 2, &RngStream::new(seed, 9)));
        let upper = fit_tclust_with_inits(&data, k + 1, alpha, 20.0, &cfg, &inits).unwrap();
        prop_assert!(upper.objective >= lower.objective - 1e-8);
    }

    #[test]
    fn eta_is_at_least_one_and_xi_at_zero_is_eta(
        w in 0.01f64..0.99,
        m1 in -5.0f64..5.0,
        m2 in -5.0f64..5.0,
        v1 in 0.05f64..5.0,
        v2 in 0.05f64..5.0,
    ) {
        prop_assume!((m1 - m2).abs() > 1e-3 || (v1 - v2).abs() > 1e-3);
        let model = ClusterModel::new(
            vec![w, 1.0 - w],
            vec![vec![m1], vec![m2]],
            vec![SymMatrix::from_diag(&[v1]), SymMatrix::from_diag(&[v2])],
            1e6,
        )
        .unwrap();
        let mc = MonteCarlo::new(20_000, 1);
        let e = eta(&model, &mc).unwrap();
        prop_assert!(e.value >= 1.0 - 1e-12, "eta = {}", e.value);
        prop_assert_eq!(xi(&model, 0.0, &mc).unwrap(), e);
    }
}

#[test]
fn ctlcurves_are_deterministic_and_monotone() {
    let data = blob_data(4, &[[0.0, 0.0], [6.0, 0.0]], 30);
    let grid = [0.0, 0.05, 0.1];
    let a = compute_ctlcurves(&data, 3, &grid, 12.0, &small_config(2)).unwrap();
    let b = compute_ctlcurves(&data, 3, &grid, 12.0, &small_config(2)).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    for &alpha in &grid {
        for k in 1..3 {
            assert!(a.tdiff(k, alpha).unwrap() >= -1e-8);
        }
    }
}

#[test]
fn bootstrap_pvalue_does_not_depend_on_thread_count() {
    let data = blob_data(8, &[[0.0, 0.0], [4.0, 0.0]], 25);
    let mut boot = BootstrapConfig::with_seed(3);
    boot.replicates = 12;
    boot.fit.n_starts = 4;
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| bootstrap_pvalue(&data, 1, 0.05, 12.0, &boot).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn overlap_search_trace_is_monotone_in_separation() {
    let sc = gen_overlap_target(3, 2, 12.0, 0.05, &[50, 50, 50], &RngStream::new(11, 0)).unwrap();
    let mut trace = sc.trace.clone();
    trace.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in trace.windows(2) {
        assert!(
            w[1].1 <= w[0].1 + 1e-12,
            "overlap rose from {:?} to {:?}",
            w[0],
            w[1]
        );
    }
    assert!((sc.achieved_overlap - 0.05).abs() <= 0.005 + 1e-12);
}
