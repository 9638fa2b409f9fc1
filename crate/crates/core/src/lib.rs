//! Robust model-based clustering with impartial trimming.
//!
//! The estimator maximizes a trimmed classification likelihood over Gaussian
//! clusters whose covariance eigenvalues obey a global ratio bound `c`. On
//! top of it the crate provides classification trimmed likelihood curves, a
//! parametric bootstrap that turns those curves into a short list of
//! sensible `(k, α)` pairs, population overlap indices, scenario generators
//! and agreement metrics.

pub mod bootstrap;
pub mod ctlcurves;
pub mod data;
pub mod datagen;
mod error;
pub mod eval;
pub mod population;
pub mod statmath;
pub mod tclust;

pub use bootstrap::{
    bootstrap_pvalue, generate_bootstrap_sample, select_sensible, BootstrapConfig, OutlierMode,
    SensibleEntry, SensibleSolutions,
};
pub use ctlcurves::{compute_ctlcurves, CtlCurves};
pub use data::DataMatrix;
pub use error::{Error, Result};
pub use eval::{adjusted_rand_index, correct_k_rate};
pub use statmath::{RngStream, SymMatrix};
pub use tclust::{
    concentration_step, fit_tclust, objective, ClusterModel, FitConfig, FitResult, TrimmedPartition,
};
