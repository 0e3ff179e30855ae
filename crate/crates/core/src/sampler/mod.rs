//! Blocked Gibbs sampling of the joint posterior over `(X, gamma)`.
//!
//! `X | gamma` is updated coefficient by coefficient with slice-within-Gibbs;
//! `gamma | X` factorizes over groups and is drawn by accept-reject.

mod gamma;
mod gibbs;
mod slice;
mod truncnorm;

pub use gamma::{sample_gamma_conditional, sample_gamma_conditional_counted, Envelope};
pub use gibbs::{gibbs_sample, Chain, ChainRng};
pub use slice::{
    precompute_group_gram, sc_coefficients, slice_sample_coefficient, SliceCoefficients,
};
pub use truncnorm::sample_truncated_gaussian;
