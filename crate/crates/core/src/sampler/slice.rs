//! Single-coefficient conditionals and their slice sampler.

use ndarray::{s, Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Open01};

use super::truncnorm::sample_truncated_gaussian;
use crate::error::{Error, Result};
use crate::model::{Exponent, GroupIndex, MmvProblem};
use crate::scalar::Scalar;

/// Coefficients of the one-dimensional conditional
/// `exp(-quad z^2 - lin z) exp(-prior_scale (z^2 + prior_offset)^{p/2})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceCoefficients<F> {
    /// Half the squared norm of the design column.
    pub quad: F,
    /// Linear likelihood coefficient, minus the column's correlation with the
    /// partial residual.
    pub lin: F,
    /// `1 / gamma` of the enclosing group.
    pub prior_scale: F,
    /// Sum of squares of the other coefficients in the group.
    pub prior_offset: F,
    pub p: Exponent,
}

impl<F: Scalar> SliceCoefficients<F> {
    /// Unnormalized log density at `z`.
    pub fn log_density(&self, z: F) -> F {
        -self.quad * z * z - self.lin * z + self.log_prior(z)
    }

    /// Log of the prior factor `p_2(z)`.
    pub fn log_prior(&self, z: F) -> F {
        if self.prior_scale == F::zero() {
            return F::zero();
        }
        -self.prior_scale * self.p.apply((z * z + self.prior_offset).sqrt())
    }

    /// Half-width of the slice `{z : log p_2(z) >= log_y}`.
    pub fn slice_bound(&self, log_y: F) -> Result<F> {
        if self.prior_scale == F::zero() {
            return Ok(F::infinity());
        }
        let r = -log_y / self.prior_scale;
        let radius_sq = match self.p {
            Exponent::One => r * r,
            Exponent::Half => r.powi(4),
        };
        let bound_sq = radius_sq - self.prior_offset;
        // rounding can leave a tiny negative value when z sits on the boundary
        let slack = F::lit(64.0) * F::epsilon() * radius_sq.max(self.prior_offset);
        if bound_sq < -slack || bound_sq.is_nan() {
            return Err(Error::NumericalUnderflow(format!(
                "slice bound squared is {bound_sq}"
            )));
        }
        Ok(bound_sq.max(F::zero()).sqrt())
    }
}

/// `(G_(:,[l]))^T G`, the `d x q` block of the Gram matrix for group `l`.
pub fn precompute_group_gram<F: Scalar>(design: &Array2<F>, l: GroupIndex, d: usize) -> Array2<F> {
    let l = l.zero_based();
    let block = design.slice(s![.., l * d..(l + 1) * d]);
    block.t().dot(design)
}

/// Conditional coefficients for entry `(i, j)` of `x` (zero based), given the
/// group Gram block of the group containing row `i`.
pub fn sc_coefficients<F: Scalar>(
    problem: &MmvProblem<F>,
    x: &Array2<F>,
    i: usize,
    j: usize,
    gamma: &Array1<F>,
    group_gram: &Array2<F>,
) -> Result<SliceCoefficients<F>> {
    let (q, t, d) = (problem.q(), problem.t(), problem.d);
    if i >= q || j >= t {
        return Err(Error::IndexOutOfRange {
            index: i + 1,
            n: q,
        });
    }
    let l = i / d;
    let r = i - l * d;
    let g = gamma[l];
    if !(g > F::zero()) {
        return Err(Error::DegenerateGamma { group: l + 1 });
    }
    let col_sq = group_gram[[r, i]];
    let corr_m = problem
        .design
        .column(i)
        .iter()
        .zip(problem.measurements.column(j).iter())
        .map(|(&a, &b)| a * b)
        .sum::<F>();
    let gram_x = group_gram
        .row(r)
        .iter()
        .zip(x.column(j).iter())
        .map(|(&a, &b)| a * b)
        .sum::<F>();
    let lin = -corr_m + gram_x - col_sq * x[[i, j]];
    let mut offset = F::zero();
    for rr in l * d..(l + 1) * d {
        for jj in 0..t {
            if rr != i || jj != j {
                offset = offset + x[[rr, jj]] * x[[rr, jj]];
            }
        }
    }
    Ok(SliceCoefficients {
        quad: F::lit(0.5) * col_sq,
        lin,
        prior_scale: F::one() / g,
        prior_offset: offset,
        p: Exponent::One,
    })
}

/// `steps` rounds of slice sampling started at `z0`: a vertical draw under the
/// prior factor, then the likelihood Gaussian truncated to the slice.
pub fn slice_sample_coefficient<F: Scalar, R: Rng + ?Sized>(
    coeffs: &SliceCoefficients<F>,
    z0: F,
    steps: usize,
    rng: &mut R,
) -> Result<F> {
    let mut z = z0;
    for _ in 0..steps {
        let u: f64 = Open01.sample(rng);
        let log_y = coeffs.log_prior(z) + F::lit(u.ln());
        let bound = coeffs.slice_bound(log_y)?;
        z = if coeffs.quad > F::zero() {
            sample_truncated_gaussian(coeffs.quad, coeffs.lin, -bound, bound, rng)?
        } else if bound.is_finite() {
            // flat likelihood: uniform on the slice
            let v: f64 = Open01.sample(rng);
            bound * F::lit(2.0 * v - 1.0)
        } else {
            return Err(Error::InvalidParameter(
                "conditional is improper: zero design column and flat prior".into(),
            ));
        };
    }
    Ok(z)
}
