use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;

use super::gamma::sample_gamma_conditional;
use super::slice::{precompute_group_gram, sc_coefficients, slice_sample_coefficient};
use crate::error::{Error, Result};
use crate::mm::gamma_offset;
use crate::model::{group_norm, Exponent, GroupIndex, MmvProblem, SamplerConfig};
use crate::scalar::Scalar;

/// Generator owned by a single chain.
pub type ChainRng = rand_chacha::ChaCha8Rng;

/// Retained states of a Gibbs run (burn-in discarded).
#[derive(Debug, Clone)]
pub struct Chain<F> {
    pub x_samples: Vec<Array2<F>>,
    pub gamma_samples: Vec<Array1<F>>,
    pub seed: u64,
    pub config: SamplerConfig<F>,
}

impl<F> Chain<F> {
    pub fn len(&self) -> usize {
        self.x_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_samples.is_empty()
    }
}

/// Runs `burn_in + samples` outer steps of blocked Gibbs sampling.
///
/// Each step does `sc_sweeps` sweeps over the groups in a fresh random order,
/// updating every coefficient with `ss_steps` slice-sampling rounds, then
/// redraws every `gamma_i` from its conditional. Only `alpha = d t + 1`
/// (the prior matching MM) is supported, since the hyperparameter
/// conditional is then free of the `log gamma` term.
pub fn gibbs_sample<F: Scalar, R: Rng + ?Sized>(
    problem: &MmvProblem<F>,
    config: &SamplerConfig<F>,
    x_init: &Array2<F>,
    gamma_init: &Array1<F>,
    rng: &mut R,
) -> Result<Chain<F>> {
    config.validate()?;
    let (n, d, t) = (problem.n, problem.d, problem.t());
    let offset = gamma_offset(config.alpha, Exponent::One, d, t);
    if offset.abs() > F::lit(1e-12) * config.alpha {
        return Err(Error::InvalidParameter(format!(
            "sampler requires alpha = d t + 1 = {}, got {}",
            d * t + 1,
            config.alpha
        )));
    }
    if x_init.dim() != (problem.q(), t) {
        return Err(Error::DimensionMismatch(format!(
            "initial X is {:?}, expected ({}, {t})",
            x_init.dim(),
            problem.q()
        )));
    }
    if gamma_init.len() != n || gamma_init.iter().any(|g| !(*g > F::zero())) {
        return Err(Error::InvalidParameter(
            "gamma_init must hold n positive entries".into(),
        ));
    }

    let mut x = x_init.clone();
    let mut gamma = gamma_init.clone();
    let mut order: Vec<usize> = (0..n).collect();
    let mut chain = Chain {
        x_samples: Vec::with_capacity(config.samples),
        gamma_samples: Vec::with_capacity(config.samples),
        seed: config.seed,
        config: *config,
    };
    for step in 0..config.burn_in + config.samples {
        for _ in 0..config.sc_sweeps {
            order.shuffle(rng);
            for &l in &order {
                let gram = precompute_group_gram(&problem.design, GroupIndex::from_zero_based(l), d);
                for i in l * d..(l + 1) * d {
                    for j in 0..t {
                        let coeffs = sc_coefficients(problem, &x, i, j, &gamma, &gram)?;
                        x[[i, j]] = slice_sample_coefficient(&coeffs, x[[i, j]], config.ss_steps, rng)?;
                    }
                }
            }
        }
        for l in 0..n {
            gamma[l] = sample_gamma_conditional(group_norm(&x, l, d), config.beta, rng);
        }
        if step >= config.burn_in {
            chain.x_samples.push(x.clone());
            chain.gamma_samples.push(gamma.clone());
        }
    }
    Ok(chain)
}
