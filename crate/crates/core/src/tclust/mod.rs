//! Trimmed classification likelihood clustering under an eigenvalue-ratio
//! constraint, fitted by multistart concentration steps.

mod constraint;
mod fit;
mod model;
mod step;

pub use constraint::{constrain_eigenvalues, optimal_threshold};
pub use fit::{
    check_feasible, concentration_trace, extension_starts, fit_from_start, fit_tclust,
    fit_tclust_with_inits, EXTENSION_SEEDS,
};
pub use model::{trim_count, ClusterModel, FitConfig, FitResult, TrimmedPartition, RATIO_SLACK};
pub use step::{concentration_step, objective};
