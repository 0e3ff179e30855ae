//! Regression problem, group indexing, and shared configuration types.

use std::fmt;

use ndarray::{s, Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Multiple measurement vector problem `M = G X + E`.
///
/// `X` has `q = d * n` rows split into `n` groups of `d` consecutive rows and
/// `t` columns. The noise `E` is never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MmvProblem<F> {
    /// Measurements, `m x t`.
    pub measurements: Array2<F>,
    /// Design matrix, `m x q`.
    pub design: Array2<F>,
    pub n: usize,
    pub d: usize,
}

impl<F: Scalar> MmvProblem<F> {
    /// Builds a problem and checks every invariant.
    pub fn new(design: Array2<F>, measurements: Array2<F>, n: usize, d: usize) -> Result<Self> {
        let problem = Self {
            measurements,
            design,
            n,
            d,
        };
        validate_problem(&problem)?;
        Ok(problem)
    }

    pub fn m(&self) -> usize {
        self.design.nrows()
    }

    pub fn q(&self) -> usize {
        self.design.ncols()
    }

    pub fn t(&self) -> usize {
        self.measurements.ncols()
    }

    /// Number of coefficients per group, `d * t`.
    pub fn group_size(&self) -> usize {
        self.d * self.t()
    }

    /// Row range of group `i` (zero based) in `X`.
    pub fn group_rows(&self, i: usize) -> std::ops::Range<usize> {
        i * self.d..(i + 1) * self.d
    }

    pub fn zeros(&self) -> Array2<F> {
        Array2::zeros((self.q(), self.t()))
    }
}

/// Checks shapes, the `q = d n` structure, and finiteness of all entries.
pub fn validate_problem<F: Scalar>(problem: &MmvProblem<F>) -> Result<()> {
    let (m, q) = problem.design.dim();
    let (mm, t) = problem.measurements.dim();
    if problem.n == 0 || problem.d == 0 {
        return Err(Error::DimensionMismatch(format!(
            "n = {} and d = {} must be positive",
            problem.n, problem.d
        )));
    }
    if q != problem.d * problem.n {
        return Err(Error::DimensionMismatch(format!(
            "design has {q} columns but d * n = {} * {} = {}",
            problem.d,
            problem.n,
            problem.d * problem.n
        )));
    }
    if mm != m {
        return Err(Error::DimensionMismatch(format!(
            "design has {m} rows but measurements have {mm}"
        )));
    }
    if m == 0 || t == 0 {
        return Err(Error::DimensionMismatch("empty measurement matrix".into()));
    }
    check_finite("design", &problem.design)?;
    check_finite("measurements", &problem.measurements)?;
    Ok(())
}

pub(crate) fn check_finite<F: Scalar>(what: &'static str, a: &Array2<F>) -> Result<()> {
    for ((row, col), v) in a.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFiniteEntry { what, row, col });
        }
    }
    Ok(())
}

/// One-based group (source location) index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupIndex(pub usize);

impl GroupIndex {
    /// From a zero-based position.
    pub fn from_zero_based(i: usize) -> Self {
        Self(i + 1)
    }

    pub fn zero_based(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for GroupIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Rows `(i-1)d+1 ..= i d` of `x`, the `d x t` block of group `i`.
pub fn group_view<F>(x: &Array2<F>, i: GroupIndex, d: usize) -> Result<ArrayView2<'_, F>> {
    let n = if d == 0 { 0 } else { x.nrows() / d };
    if i.0 == 0 || i.0 > n {
        return Err(Error::IndexOutOfRange { index: i.0, n });
    }
    let start = i.zero_based() * d;
    Ok(x.slice(s![start..start + d, ..]))
}

/// Frobenius norm of every group of `x`.
pub fn group_norms<F: Scalar>(x: &Array2<F>, d: usize) -> Array1<F> {
    let n = x.nrows() / d;
    Array1::from_shape_fn(n, |i| group_norm(x, i, d))
}

/// Frobenius norm of zero-based group `i`.
pub(crate) fn group_norm<F: Scalar>(x: &Array2<F>, i: usize, d: usize) -> F {
    x.slice(s![i * d..(i + 1) * d, ..])
        .iter()
        .map(|&v| v * v)
        .sum::<F>()
        .sqrt()
}

/// Repeats each entry of `w` `d` times (`w ⊗ 1_d`).
pub fn expand_weights<F: Scalar>(w: &Array1<F>, d: usize) -> Array1<F> {
    Array1::from_shape_fn(w.len() * d, |k| w[k / d])
}

/// Sup-norm of `a - b`.
pub fn sup_distance<F: Scalar>(a: &Array2<F>, b: &Array2<F>) -> F {
    a.iter()
        .zip(b.iter())
        .fold(F::zero(), |acc, (&x, &y)| acc.max((x - y).abs()))
}

/// Per-group hyperparameters and the derived penalty weights.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperState<F> {
    pub gamma: Array1<F>,
    pub weights: Array1<F>,
}

impl<F: Scalar> HyperState<F> {
    /// State carrying only weights, as used by the convex solver.
    pub fn from_weights(weights: Array1<F>) -> Self {
        Self {
            gamma: Array1::zeros(weights.len()),
            weights,
        }
    }

    pub fn uniform(n: usize) -> Self {
        Self::from_weights(Array1::ones(n))
    }

    /// Weights repeated `d` times, the diagonal of `W`.
    pub fn expanded(&self, d: usize) -> Array1<F> {
        expand_weights(&self.weights, d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.iter().any(|w| !(*w >= F::zero()) || !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        if self.gamma.iter().any(|g| !(*g >= F::zero())) {
            return Err(Error::InvalidParameter("gamma must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Penalty exponent of the `l_{2,p}` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exponent {
    /// `p = 1`, the convex group lasso.
    #[serde(rename = "1")]
    One,
    /// `p = 1/2`, the non-convex objective minimized by MM.
    #[serde(rename = "1/2")]
    Half,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::One => 1.0,
            Exponent::Half => 0.5,
        }
    }

    /// `x^p` for a nonnegative group norm.
    pub fn apply<F: Scalar>(self, x: F) -> F {
        match self {
            Exponent::One => x,
            Exponent::Half => x.sqrt(),
        }
    }
}

/// Settings of the reweighted (MM) solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmConfig<F> {
    pub lambda: F,
    /// Inner duality-gap precision.
    pub eps: F,
    /// Outer sup-norm stopping tolerance.
    pub tau: F,
    pub max_outer: usize,
    pub max_inner: usize,
}

impl<F: Scalar> MmConfig<F> {
    pub fn new(lambda: F) -> Self {
        Self {
            lambda,
            eps: F::lit(1e-8),
            tau: F::lit(1e-8),
            max_outer: 100,
            max_inner: 100_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > F::zero()) || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.eps > F::zero()) || !(self.tau > F::zero()) {
            return Err(Error::InvalidParameter("eps and tau must be positive".into()));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::InvalidParameter(
                "iteration limits must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Settings of the blocked Gibbs sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig<F> {
    /// Burn-in steps discarded before retaining samples.
    pub burn_in: usize,
    /// Retained samples.
    pub samples: usize,
    /// Single-component Gibbs sweeps per outer step.
    pub sc_sweeps: usize,
    /// Slice-sampler steps per coefficient.
    pub ss_steps: usize,
    /// Gamma hyper-prior shape.
    pub alpha: F,
    /// Gamma hyper-prior scale.
    pub beta: F,
    pub seed: u64,
}

impl<F: Scalar> SamplerConfig<F> {
    /// Configuration matching the MM algorithm at `lambda`
    /// (`alpha = d t + 1`, `beta = 4 / lambda^2`).
    pub fn for_lambda(lambda: F, d: usize, t: usize, seed: u64) -> Self {
        let (alpha, beta) = crate::mm::hbm_params_from_lambda(lambda, d, t);
        Self {
            burn_in: 1000,
            samples: 1000,
            sc_sweeps: 10,
            ss_steps: 10,
            alpha,
            beta,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > F::zero()) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter(
                "at least one retained sample is required".into(),
            ));
        }
        Ok(())
    }
}
