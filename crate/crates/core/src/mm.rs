//! Reweighted `l_{2,1}` iterations for the `l_{2,1/2}` objective and the
//! alternating full-MAP scheme of the matching hierarchical model.
//!
//! With `alpha = d t + 1` and `beta = 4 / lambda^2` the two schemes generate
//! the same weight sequence: the hyperparameter update `gamma_i = sqrt(beta
//! ||X_[i]||)` gives `lambda gamma_i = 2 sqrt(||X_[i]||)`, which is exactly the
//! MM weight.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouplasso::{objective_l2p, solve_weighted_l21_from};
use crate::model::{group_norms, sup_distance, Exponent, HyperState, MmConfig, MmvProblem};
use crate::scalar::Scalar;

/// Record of one MM run.
#[derive(Debug, Clone)]
pub struct MmTrace<F> {
    /// `(X^(k), w^(k))` for `k = 1 ..= outer_iterations`.
    pub iterates: Vec<(Array2<F>, Array1<F>)>,
    /// `l_{2,1/2}` objective of each iterate.
    pub objective_l2half: Vec<F>,
    pub converged: bool,
    pub outer_iterations: usize,
    /// `false` if any inner solve hit its iteration budget.
    pub inner_converged: bool,
}

impl<F: Scalar> MmTrace<F> {
    /// Final estimate.
    pub fn x_hat(&self) -> &Array2<F> {
        &self.iterates.last().expect("at least one iterate").0
    }

    pub fn final_objective(&self) -> F {
        *self.objective_l2half.last().expect("at least one iterate")
    }

    pub fn weights(&self) -> impl Iterator<Item = &Array1<F>> {
        self.iterates.iter().map(|(_, w)| w)
    }
}

/// `w_i = 2 sqrt(||X_[i]||_F)`; zero groups get weight zero.
pub fn update_weights<F: Scalar>(x_hat: &Array2<F>, d: usize, n: usize) -> Array1<F> {
    debug_assert_eq!(x_hat.nrows(), d * n);
    group_norms(x_hat, d).mapv(|g| F::lit(2.0) * g.sqrt())
}

/// Runs the reweighted scheme from initial weights `w0`.
///
/// Each inner problem is warm-started at the previous estimate, so the
/// `l_{2,1/2}` objective is non-increasing up to rounding.
pub fn mm_solve<F: Scalar>(
    problem: &MmvProblem<F>,
    config: &MmConfig<F>,
    w0: &Array1<F>,
) -> Result<MmTrace<F>> {
    config.validate()?;
    if w0.len() != problem.n {
        return Err(Error::DimensionMismatch(format!(
            "{} initial weights for {} groups",
            w0.len(),
            problem.n
        )));
    }
    let (n, d) = (problem.n, problem.d);
    let mut weights = HyperState::from_weights(w0.clone());
    weights.validate()?;
    let mut previous = problem.zeros();
    let mut trace = MmTrace {
        iterates: Vec::new(),
        objective_l2half: Vec::new(),
        converged: false,
        outer_iterations: 0,
        inner_converged: true,
    };
    for k in 1..=config.max_outer {
        let warm = (k > 1).then_some(&previous);
        let inner = solve_weighted_l21_from(
            problem,
            &weights,
            config.lambda,
            config.eps,
            config.max_inner,
            warm,
        )?;
        trace.inner_converged &= inner.converged;
        let x_hat = inner.x_hat;
        let w = update_weights(&x_hat, d, n);
        let objective = objective_l2p(problem, &x_hat, config.lambda, Exponent::Half);
        let change = sup_distance(&x_hat, &previous);
        trace.objective_l2half.push(objective);
        trace.iterates.push((x_hat.clone(), w.clone()));
        trace.outer_iterations = k;
        previous = x_hat;
        weights = HyperState::from_weights(w);
        if change <= config.tau {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

/// `nu = (alpha - 1 - d t / p) / 2`, the offset in the hyperparameter update.
pub fn gamma_offset<F: Scalar>(alpha: F, p: Exponent, d: usize, t: usize) -> F {
    (alpha - F::one() - F::lit((d * t) as f64 / p.value())) * F::lit(0.5)
}

/// Closed-form minimizer over `gamma` of the negative log posterior:
/// `gamma_i = beta (nu + sqrt(nu^2 + ||X_[i]||^p / beta))`.
pub fn gamma_map_update<F: Scalar>(
    x: &Array2<F>,
    alpha: F,
    beta: F,
    p: Exponent,
    d: usize,
    t: usize,
) -> Result<Array1<F>> {
    let nu = gamma_offset(alpha, p, d, t);
    if nu < F::zero() {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} is below the convexity bound d t / p + 1"
        )));
    }
    if !(beta > F::zero()) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    if x.ncols() != t || x.nrows() % d != 0 {
        return Err(Error::DimensionMismatch(format!(
            "X is {:?}, expected (q, {t}) with q a multiple of {d}",
            x.dim()
        )));
    }
    Ok(group_norms(x, d).mapv(|g| beta * (nu + (nu * nu + p.apply(g) / beta).sqrt())))
}

/// Hyper-prior matching MM at `lambda`: `alpha = d t + 1`, `beta = 4 / lambda^2`.
pub fn hbm_params_from_lambda<F: Scalar>(lambda: F, d: usize, t: usize) -> (F, F) {
    (F::lit((d * t) as f64 + 1.0), F::lit(4.0) / (lambda * lambda))
}

/// Initial MM weights from hyperparameters, `w_i = lambda gamma_i`.
pub fn weights_from_gamma<F: Scalar>(gamma: &Array1<F>, lambda: F) -> Array1<F> {
    gamma.mapv(|g| lambda * g)
}

/// Negative log of the joint posterior over `(X, gamma)`, dropping constants.
///
/// A zero `gamma_i` contributes nothing when the group is zero and `+inf`
/// otherwise; the log term is `+inf` for `gamma_i = 0` only when its
/// coefficient is nonzero.
pub fn neg_log_posterior<F: Scalar>(
    problem: &MmvProblem<F>,
    x: &Array2<F>,
    gamma: &Array1<F>,
    alpha: F,
    beta: F,
    p: Exponent,
) -> F {
    let residual = &problem.measurements - &problem.design.dot(x);
    let fit = residual.iter().map(|&v| v * v).sum::<F>() * F::lit(0.5);
    let log_coef = gamma_offset(alpha, p, problem.d, problem.t()) * F::lit(2.0);
    let norms = group_norms(x, problem.d);
    let mut total = fit;
    for (&g, &xn) in gamma.iter().zip(norms.iter()) {
        let xp = p.apply(xn);
        let prior = if g > F::zero() {
            xp / g
        } else if xp == F::zero() {
            F::zero()
        } else {
            F::infinity()
        };
        let log_term = if log_coef == F::zero() {
            F::zero()
        } else {
            -log_coef * g.ln()
        };
        total = total + prior + g / beta + log_term;
    }
    total
}

/// Hyper-prior of the hierarchical model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperPrior<F> {
    pub alpha: F,
    pub beta: F,
    pub p: Exponent,
}

/// Per-round record of [`full_map_alternating`].
#[derive(Debug, Clone)]
pub struct FullMapTrace<F> {
    pub x: Vec<Array2<F>>,
    pub gamma: Vec<Array1<F>>,
    /// Penalty weights `lambda gamma` after each round, comparable to MM weights.
    pub weights: Vec<Array1<F>>,
    pub neg_log_posterior: Vec<F>,
    pub converged: bool,
    pub inner_converged: bool,
}

#[derive(Debug, Clone)]
pub struct FullMapResult<F> {
    pub x: Array2<F>,
    pub gamma: Array1<F>,
    pub trace: FullMapTrace<F>,
}

/// Alternating minimization of the joint negative log posterior.
///
/// The X-step penalizes group `i` by `||X_[i]|| / gamma_i`, solved as a
/// weighted group lasso with `lambda = 2 / sqrt(beta)` and `w_i = lambda
/// gamma_i`. Groups with `gamma_i = 0` are pruned.
#[allow(clippy::too_many_arguments)]
pub fn full_map_alternating<F: Scalar>(
    problem: &MmvProblem<F>,
    prior: &HyperPrior<F>,
    gamma0: &Array1<F>,
    rounds: usize,
    eps: F,
    tau: F,
    max_inner: usize,
) -> Result<FullMapResult<F>> {
    if prior.p != Exponent::One {
        return Err(Error::InvalidParameter(
            "the X-step is only convex for p = 1".into(),
        ));
    }
    let (d, t) = (problem.d, problem.t());
    if gamma_offset(prior.alpha, prior.p, d, t) < F::zero() {
        return Err(Error::InvalidParameter(format!(
            "alpha = {} is below the convexity bound d t / p + 1",
            prior.alpha
        )));
    }
    if !(prior.beta > F::zero()) {
        return Err(Error::InvalidParameter("beta must be positive".into()));
    }
    if gamma0.len() != problem.n || gamma0.iter().any(|g| !(*g >= F::zero())) {
        return Err(Error::InvalidParameter(
            "gamma0 must hold n nonnegative entries".into(),
        ));
    }
    if rounds == 0 {
        return Err(Error::InvalidParameter("at least one round is required".into()));
    }
    let lambda = F::lit(2.0) / prior.beta.sqrt();
    let mut gamma = gamma0.clone();
    let mut x = problem.zeros();
    let mut trace = FullMapTrace {
        x: Vec::new(),
        gamma: Vec::new(),
        weights: Vec::new(),
        neg_log_posterior: Vec::new(),
        converged: false,
        inner_converged: true,
    };
    for k in 1..=rounds {
        let weights = HyperState {
            weights: weights_from_gamma(&gamma, lambda),
            gamma: gamma.clone(),
        };
        let warm = (k > 1).then_some(&x);
        let inner = solve_weighted_l21_from(problem, &weights, lambda, eps, max_inner, warm)?;
        trace.inner_converged &= inner.converged;
        let change = sup_distance(&inner.x_hat, &x);
        x = inner.x_hat;
        gamma = gamma_map_update(&x, prior.alpha, prior.beta, prior.p, d, t)?;
        trace.neg_log_posterior.push(neg_log_posterior(
            problem,
            &x,
            &gamma,
            prior.alpha,
            prior.beta,
            prior.p,
        ));
        trace.weights.push(weights_from_gamma(&gamma, lambda));
        trace.x.push(x.clone());
        trace.gamma.push(gamma.clone());
        if change <= tau {
            trace.converged = true;
            break;
        }
    }
    Ok(FullMapResult { x, gamma, trace })
}
