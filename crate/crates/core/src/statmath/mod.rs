//! Numerical building blocks: symmetric eigen-decomposition, Gaussian
//! densities, chi-square functions and seeded multivariate normal sampling.

mod gaussian;
mod linalg;
mod mvnormal;
mod rng;
mod special;

pub use gaussian::{log_gaussian_density, GaussianKernel, PD_RELATIVE_FLOOR};
pub use linalg::{sym_eigen, SymEigen, SymMatrix};
pub use mvnormal::{sample_mvnormal, MvNormalSampler};
pub use rng::RngStream;
pub use special::{chi2_cdf, chi2_quantile, gamma_p, gamma_q, ln_gamma, normal_cdf};
