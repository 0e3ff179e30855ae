//! Weighted group lasso (`l_{2,1}`) solved by block coordinate descent.
//!
//! The weighted problem `1/2 ||M - G X||^2 + lambda sum_i ||X_[i]|| / w_i` is
//! solved in its rescaled form: with `G~ = G W` the solver minimizes
//! `1/2 ||M - G~ X~||^2 + lambda sum_i ||X~_[i]||` and returns `X = W X~`.
//! Groups with `w_i = 0` never enter the active set.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::linalg::sym_max_eigenvalue;
use crate::model::{group_norms, Exponent, HyperState, MmvProblem};
use crate::scalar::Scalar;

/// Output of [`solve_weighted_l21`].
#[derive(Debug, Clone)]
pub struct LassoResult<F> {
    /// Solution in the original (unscaled) coordinates.
    pub x_hat: Array2<F>,
    /// Weighted objective at `x_hat`.
    pub objective: F,
    pub dual_gap: F,
    /// Largest optimality-condition violation of the rescaled problem.
    pub kkt_violation: F,
    /// Full sweeps performed.
    pub iterations: usize,
    /// `false` when the iteration budget ran out before the gap reached `eps`.
    pub converged: bool,
}

/// Smallest `lambda` for which the uniformly weighted solution is zero:
/// `max_i ||(G^T M)_[i]||_F`.
pub fn lambda_max<F: Scalar>(
    design: &Array2<F>,
    measurements: &Array2<F>,
    n: usize,
    d: usize,
) -> Result<F> {
    if design.ncols() != n * d || design.nrows() != measurements.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "design {:?}, measurements {:?}, n = {n}, d = {d}",
            design.dim(),
            measurements.dim()
        )));
    }
    let corr = design.t().dot(measurements);
    let lmax = group_norms(&corr, d).iter().copied().fold(F::zero(), F::max);
    if !(lmax > F::zero()) {
        return Err(Error::DegenerateData("G^T M is identically zero".into()));
    }
    Ok(lmax)
}

/// Proximal operator of `threshold * ||.||_F`.
pub fn group_soft_threshold<F: Scalar>(b: ArrayView2<'_, F>, threshold: F) -> Array2<F> {
    let norm = b.iter().map(|&v| v * v).sum::<F>().sqrt();
    if norm <= threshold {
        Array2::zeros(b.raw_dim())
    } else {
        b.mapv(|v| v * (F::one() - threshold / norm))
    }
}

/// `1/2 ||M - G X||_F^2 + lambda sum_i ||X_[i]||_F^p`.
pub fn objective_l2p<F: Scalar>(
    problem: &MmvProblem<F>,
    x: &Array2<F>,
    lambda: F,
    p: Exponent,
) -> F {
    let residual = &problem.measurements - &problem.design.dot(x);
    let fit = residual.iter().map(|&v| v * v).sum::<F>() * F::lit(0.5);
    let penalty: F = group_norms(x, problem.d).iter().map(|&g| p.apply(g)).sum();
    fit + lambda * penalty
}

/// Solves the weighted group lasso from a zero start.
pub fn solve_weighted_l21<F: Scalar>(
    problem: &MmvProblem<F>,
    weights: &HyperState<F>,
    lambda: F,
    eps: F,
    max_inner: usize,
) -> Result<LassoResult<F>> {
    solve_weighted_l21_from(problem, weights, lambda, eps, max_inner, None)
}

/// Solves the weighted group lasso, optionally warm-started at `init`
/// (given in original coordinates).
pub fn solve_weighted_l21_from<F: Scalar>(
    problem: &MmvProblem<F>,
    weights: &HyperState<F>,
    lambda: F,
    eps: F,
    max_inner: usize,
    init: Option<&Array2<F>>,
) -> Result<LassoResult<F>> {
    if !(lambda > F::zero()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(eps > F::zero()) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    if weights.weights.len() != problem.n {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} groups",
            weights.weights.len(),
            problem.n
        )));
    }
    weights.validate()?;

    let mut solver = Bcd::new(problem, &weights.weights, lambda);
    if let Some(x0) = init {
        if x0.dim() != (problem.q(), problem.t()) {
            return Err(Error::DimensionMismatch("warm start shape".into()));
        }
        solver.warm_start(x0);
    }
    Ok(solver.run(eps, max_inner))
}

/// Optimality certificate of `x_hat` for the weighted problem.
#[derive(Debug, Clone)]
pub struct Certificate<F> {
    /// `||(G~^T (M - G x_hat))_[i]||_F` for each group (zero for pruned groups).
    pub correlation_norms: Array1<F>,
    /// Whether group `i` is nonzero in `x_hat`.
    pub active: Vec<bool>,
}

impl<F: Scalar> Certificate<F> {
    /// Largest deviation from `||.|| = lambda` (active) or `||.|| <= lambda` (inactive).
    pub fn max_violation(&self, lambda: F) -> F {
        self.correlation_norms
            .iter()
            .zip(&self.active)
            .map(|(&c, &a)| {
                if a {
                    (c - lambda).abs()
                } else {
                    (c - lambda).max(F::zero())
                }
            })
            .fold(F::zero(), F::max)
    }
}

/// Computes the group correlations of the residual at `x_hat`, independently
/// of the solver state.
pub fn certificate<F: Scalar>(
    problem: &MmvProblem<F>,
    weights: &HyperState<F>,
    x_hat: &Array2<F>,
) -> Certificate<F> {
    let residual = &problem.measurements - &problem.design.dot(x_hat);
    let corr = problem.design.t().dot(&residual);
    let norms = group_norms(&corr, problem.d);
    let xnorms = group_norms(x_hat, problem.d);
    Certificate {
        correlation_norms: Array1::from_shape_fn(problem.n, |i| {
            weights.weights[i] * norms[i]
        }),
        active: xnorms.iter().map(|&v| v > F::zero()).collect(),
    }
}

/// Sweeps between Anderson extrapolation attempts.
const ANDERSON_MEMORY: usize = 5;

struct Bcd<'a, F> {
    problem: &'a MmvProblem<F>,
    weights: &'a Array1<F>,
    lambda: F,
    /// Rescaled design `G W`.
    design: Array2<F>,
    /// `(G W)^T`, so that each column of the rescaled design is a contiguous row.
    design_t: Array2<F>,
    /// Per-group Lipschitz constants; zero marks a pruned group.
    lipschitz: Vec<F>,
    x: Array2<F>,
    residual: Array2<F>,
    /// Gradient step of the current group.
    step: Array2<F>,
}

impl<'a, F: Scalar> Bcd<'a, F> {
    fn new(problem: &'a MmvProblem<F>, weights: &'a Array1<F>, lambda: F) -> Self {
        let d = problem.d;
        let expanded = crate::model::expand_weights(weights, d);
        let mut design = problem.design.clone();
        for (mut col, &w) in design.axis_iter_mut(Axis(1)).zip(expanded.iter()) {
            col.mapv_inplace(|v| v * w);
        }
        let lipschitz = (0..problem.n)
            .map(|i| {
                if weights[i] > F::zero() {
                    let block = design.slice(s![.., i * d..(i + 1) * d]);
                    sym_max_eigenvalue(&block.t().dot(&block))
                } else {
                    F::zero()
                }
            })
            .collect();
        Self {
            problem,
            weights,
            lambda,
            design_t: design.t().as_standard_layout().into_owned(),
            design,
            lipschitz,
            x: Array2::zeros((problem.q(), problem.t())),
            residual: problem.measurements.clone(),
            step: Array2::zeros((d, problem.t())),
        }
    }

    fn active(&self, i: usize) -> bool {
        self.lipschitz[i] > F::zero()
    }

    fn warm_start(&mut self, x0: &Array2<F>) {
        let d = self.problem.d;
        for i in 0..self.problem.n {
            if self.active(i) {
                let w = self.weights[i];
                let src = x0.slice(s![i * d..(i + 1) * d, ..]);
                self.x
                    .slice_mut(s![i * d..(i + 1) * d, ..])
                    .assign(&src.mapv(|v| v / w));
            }
        }
        self.refresh_residual();
    }

    fn residual_at(&self, x: &Array2<F>) -> Array2<F> {
        &self.problem.measurements - &self.design.dot(x)
    }

    fn refresh_residual(&mut self) {
        self.residual = self.residual_at(&self.x);
    }

    fn sweep(&mut self) {
        let (d, t) = (self.problem.d, self.problem.t());
        for i in 0..self.problem.n {
            let lip = self.lipschitz[i];
            if lip == F::zero() {
                continue;
            }
            let mut sq = F::zero();
            for a in 0..d {
                let col = self.design_t.row(i * d + a);
                for j in 0..t {
                    let v = self.x[[i * d + a, j]] + col.dot(&self.residual.column(j)) / lip;
                    self.step[[a, j]] = v;
                    sq = sq + v * v;
                }
            }
            let norm = sq.sqrt();
            let threshold = self.lambda / lip;
            let shrink = if norm <= threshold {
                F::zero()
            } else {
                F::one() - threshold / norm
            };
            for a in 0..d {
                let row = i * d + a;
                for j in 0..t {
                    let new = self.step[[a, j]] * shrink;
                    let delta = new - self.x[[row, j]];
                    if delta != F::zero() {
                        self.residual
                            .column_mut(j)
                            .scaled_add(-delta, &self.design_t.row(row));
                        self.x[[row, j]] = new;
                    }
                }
            }
        }
    }

    /// Anderson extrapolation from consecutive sweep iterates; adopted only
    /// when it clearly lowers the primal objective.
    fn extrapolate(&mut self, history: &[Array2<F>]) {
        let k = history.len() - 1;
        let diffs: Vec<Array2<F>> = history.windows(2).map(|w| &w[1] - &w[0]).collect();
        let mut gram = Array2::<F>::zeros((k, k));
        for a in 0..k {
            for b in 0..=a {
                let v = (&diffs[a] * &diffs[b]).sum();
                gram[[a, b]] = v;
                gram[[b, a]] = v;
            }
        }
        let ridge = F::lit(1e-12) * (0..k).map(|a| gram[[a, a]]).sum::<F>();
        for a in 0..k {
            gram[[a, a]] = gram[[a, a]] + ridge;
        }
        let Ok(l) = crate::linalg::cholesky(&gram) else {
            return;
        };
        // solve L L^T z = 1
        let mut z = vec![F::one(); k];
        for a in 0..k {
            for b in 0..a {
                z[a] = z[a] - l[[a, b]] * z[b];
            }
            z[a] = z[a] / l[[a, a]];
        }
        for a in (0..k).rev() {
            for b in a + 1..k {
                z[a] = z[a] - l[[b, a]] * z[b];
            }
            z[a] = z[a] / l[[a, a]];
        }
        let total: F = z.iter().copied().sum();
        if !(total.abs() > F::zero()) || !total.is_finite() {
            return;
        }
        let mut candidate = Array2::<F>::zeros(self.x.raw_dim());
        for (c, x) in z.iter().zip(&history[1..]) {
            candidate.scaled_add(*c / total, x);
        }
        let residual = self.residual_at(&candidate);
        let value = |x: &Array2<F>, r: &Array2<F>| {
            r.iter().map(|&v| v * v).sum::<F>() * F::lit(0.5)
                + self.lambda * group_norms(x, self.problem.d).sum()
        };
        // demand a decrease well above rounding noise, so that nearly equal
        // weights keep taking the same path
        let current = self.primal();
        if value(&candidate, &residual) < current - F::lit(1e-12) * (F::one() + current.abs()) {
            self.x = candidate;
            self.residual = residual;
        }
    }

    fn primal(&self) -> F {
        let fit = self.residual.iter().map(|&v| v * v).sum::<F>() * F::lit(0.5);
        fit + self.lambda * group_norms(&self.x, self.problem.d).sum()
    }

    /// Duality gap and KKT violation at the current iterate.
    fn certify(&self) -> (F, F) {
        let d = self.problem.d;
        let corr = self.design.t().dot(&self.residual);
        let corr_norms = group_norms(&corr, d);
        let xnorms = group_norms(&self.x, d);
        let mut dual_norm = F::zero();
        let mut kkt = F::zero();
        for i in 0..self.problem.n {
            if !self.active(i) {
                continue;
            }
            dual_norm = dual_norm.max(corr_norms[i]);
            let v = if xnorms[i] > F::zero() {
                let rows = i * d..(i + 1) * d;
                let scale = self.lambda / xnorms[i];
                corr.slice(s![rows.clone(), ..])
                    .iter()
                    .zip(self.x.slice(s![rows, ..]).iter())
                    .map(|(&c, &x)| {
                        let e = c - scale * x;
                        e * e
                    })
                    .sum::<F>()
                    .sqrt()
            } else {
                (corr_norms[i] - self.lambda).max(F::zero())
            };
            kkt = kkt.max(v);
        }
        let scale = if dual_norm > self.lambda {
            self.lambda / dual_norm
        } else {
            F::one()
        };
        // dual objective 1/2||M||^2 - 1/2||M - theta||^2 with theta = scale * R
        let mut dual = F::zero();
        for (&m, &r) in self.problem.measurements.iter().zip(self.residual.iter()) {
            let diff = m - scale * r;
            dual = dual + m * m - diff * diff;
        }
        dual = dual * F::lit(0.5);
        ((self.primal() - dual).max(F::zero()), kkt)
    }

    fn run(mut self, eps: F, max_inner: usize) -> LassoResult<F> {
        let mut iterations = 0;
        let mut converged = false;
        let (mut gap, mut kkt) = self.certify();
        if gap <= eps && kkt <= eps {
            converged = true;
        }
        let mut history = vec![self.x.clone()];
        while !converged && iterations < max_inner {
            self.sweep();
            iterations += 1;
            history.push(self.x.clone());
            if history.len() > ANDERSON_MEMORY {
                self.extrapolate(&history);
                history.clear();
                history.push(self.x.clone());
            }
            (gap, kkt) = self.certify();
            if gap <= eps && kkt <= eps {
                // confirm against a freshly computed residual
                self.refresh_residual();
                (gap, kkt) = self.certify();
                converged = gap <= eps && kkt <= eps;
            }
        }
        let objective = self.primal();
        let d = self.problem.d;
        let mut x_hat = self.x;
        for i in 0..self.problem.n {
            let w = self.weights[i];
            x_hat
                .slice_mut(s![i * d..(i + 1) * d, ..])
                .mapv_inplace(|v| if w > F::zero() { v * w } else { F::zero() });
        }
        LassoResult {
            x_hat,
            objective,
            dual_gap: gap,
            kkt_violation: kkt,
            iterations,
            converged,
        }
    }
}
