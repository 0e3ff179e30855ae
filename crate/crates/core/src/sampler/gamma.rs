//! Accept-reject draws from `p(x) ∝ exp(-c / x) exp(-x / beta)` on `(0, ∞)`.
//!
//! The dominating density is flat at the mode height `p̂` up to the point
//! `x̃` where the exponential factor drops to `p̂`, and the exponential itself
//! beyond it. All probabilities are handled as logarithms.

use rand::Rng;
use rand_distr::{Distribution, Open01};

use crate::scalar::Scalar;

/// One draw from the hyperparameter conditional.
pub fn sample_gamma_conditional<F: Scalar, R: Rng + ?Sized>(c: F, beta: F, rng: &mut R) -> F {
    sample_gamma_conditional_counted(c, beta, rng).0
}

/// Like [`sample_gamma_conditional`], also returning the number of proposals used.
pub fn sample_gamma_conditional_counted<F: Scalar, R: Rng + ?Sized>(
    c: F,
    beta: F,
    rng: &mut R,
) -> (F, usize) {
    let (c, beta) = (c.as_f64().max(0.0), beta.as_f64());
    debug_assert!(beta > 0.0);
    if c == 0.0 {
        let w: f64 = Open01.sample(rng);
        return (F::lit(-beta * w.ln()), 1);
    }
    let env = Envelope::new(c, beta);
    let mut trials = 0;
    loop {
        trials += 1;
        let u: f64 = Open01.sample(rng);
        let v: f64 = Open01.sample(rng);
        let w: f64 = Open01.sample(rng);
        if v.ln() + env.log_total < env.log_tail {
            let x = env.x_tilde - beta * w.ln();
            if u.ln() < -c / x {
                return (F::lit(x), trials);
            }
        } else {
            let x = w * env.x_tilde;
            if u.ln() + env.log_p_hat < -c / x - x / beta {
                return (F::lit(x), trials);
            }
        }
    }
}

/// Quantities of the dominating density for `c > 0`.
#[derive(Debug, Clone, Copy)]
pub struct Envelope {
    pub x_hat: f64,
    pub log_p_hat: f64,
    pub x_tilde: f64,
    pub log_tail: f64,
    pub log_head: f64,
    pub log_total: f64,
}

impl Envelope {
    pub fn new(c: f64, beta: f64) -> Self {
        let x_hat = (beta * c).sqrt();
        let log_p_hat = -c / x_hat - x_hat / beta;
        let x_tilde = beta * c / x_hat + x_hat;
        let log_tail = beta.ln() - x_tilde / beta;
        let log_head = log_p_hat + x_tilde.ln();
        let (hi, lo) = if log_tail > log_head {
            (log_tail, log_head)
        } else {
            (log_head, log_tail)
        };
        let log_total = hi + (lo - hi).exp().ln_1p();
        Self {
            x_hat,
            log_p_hat,
            x_tilde,
            log_tail,
            log_head,
            log_total,
        }
    }
}
