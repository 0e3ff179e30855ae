//! Sparse multiple-measurement-vector regression with group-structured
//! penalties.
//!
//! The model is `M = G X + E` with the `q = d n` rows of `X` split into `n`
//! groups of `d` consecutive rows. The crate provides
//!
//! * a weighted `l_{2,1}` solver by block coordinate descent ([`grouplasso`]),
//! * the reweighted MM scheme for the non-convex `l_{2,1/2}` objective and its
//!   hierarchical Bayesian counterpart ([`mm`]),
//! * a blocked Gibbs sampler of the joint posterior ([`sampler`]),
//! * sampler-initialized MM for mode exploration ([`explorer`]),
//! * seedable synthetic problems ([`synth`]) and file formats ([`io`]).
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, the precision every tolerance is stated in.

pub mod error;
pub mod explorer;
pub mod grouplasso;
pub mod io;
pub mod linalg;
pub mod mm;
pub mod model;
pub mod sampler;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use explorer::{
    cluster_modes, cooccurrence_matrix, explore, extract_support, objective_histogram,
    sample_covariance, switch_statistics, CovarianceTarget, Mode, ModeChain, ModeSummary,
};
pub use grouplasso::{lambda_max, objective_l2p, solve_weighted_l21, LassoResult};
pub use mm::{full_map_alternating, gamma_map_update, mm_solve, HyperPrior, MmTrace};
pub use model::{
    group_view, Exponent, GroupIndex, HyperState, MmConfig, MmvProblem, SamplerConfig,
};
pub use sampler::{gibbs_sample, Chain};
pub use scalar::Scalar;

/// Double-precision problem.
pub type Problem = MmvProblem<f64>;
/// Single-precision problem.
pub type Problem32 = MmvProblem<f32>;
pub type Config = MmConfig<f64>;
pub type GibbsConfig = SamplerConfig<f64>;
pub type Hyper = HyperState<f64>;
pub type Lasso = LassoResult<f64>;
pub type Trace = MmTrace<f64>;
pub type Modes = ModeChain<f64>;
pub type Samples = Chain<f64>;
