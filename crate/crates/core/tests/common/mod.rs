//! Reference computations shared by the integration tests. None of these
//! reuse library code paths: they are brute-force evaluations chosen for
//! being obviously correct rather than fast.
#![allow(dead_code)]

use mmhbm::Problem;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(StandardNormal))
}

/// Gaussian design and measurements with no planted structure.
pub fn random_problem(m: usize, n: usize, d: usize, t: usize, seed: u64) -> Problem {
    let mut r = rng(seed);
    let g = gaussian_matrix(m, n * d, &mut r);
    let mm = gaussian_matrix(m, t, &mut r);
    Problem::new(g, mm, n, d).unwrap()
}

/// Minimizer of a unimodal `f` on `[a, b]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `(mean, variance, fourth central moment)` of `exp(-c/x - x/beta)` on
/// `(0, inf)`, integrating over `u = ln x` where the integrand decays
/// doubly exponentially at both ends.
pub fn gamma_conditional_moments(c: f64, beta: f64) -> (f64, f64, f64) {
    let log_mode = (beta * c).sqrt().max(1e-300).ln();
    let (lo, hi) = (log_mode - 40.0, log_mode + 40.0);
    let log_f = |u: f64| {
        let x = u.exp();
        -c / x - x / beta + u
    };
    // shift by the peak of the log-integrand to avoid overflow
    let peak = golden_section(|u| -log_f(u), lo, hi, 1e-10);
    let shift = log_f(peak);
    let moment = |k: i32| simpson(|u| (log_f(u) - shift).exp() * u.exp().powi(k), lo, hi, 400_000);
    let z = moment(0);
    let mean = moment(1) / z;
    let m2 = moment(2) / z;
    let m3 = moment(3) / z;
    let m4 = moment(4) / z;
    let var = m2 - mean * mean;
    let mu4 = m4 - 4.0 * mean * m3 + 6.0 * mean * mean * m2 - 3.0 * mean.powi(4);
    (mean, var, mu4)
}

/// `int_0^inf exp(-c/g - g/beta) dg`, the factor left after integrating a
/// group's hyperparameter out of the joint density at `alpha = d t + 1`.
pub fn gamma_marginal_factor(c: f64, beta: f64) -> f64 {
    if c == 0.0 {
        return beta;
    }
    let log_mode = (beta * c).sqrt().ln();
    let (lo, hi) = (log_mode - 40.0, log_mode + 40.0);
    simpson(|u| (-c / u.exp() - u.exp() / beta + u).exp(), lo, hi, 20_000)
}

/// Kolmogorov-Smirnov distance of a sample to a continuous CDF.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = cdf(x);
            (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Tabulated CDF of an unnormalized density, by cumulative Simpson panels
/// on `[a, b]` with linear interpolation in between.
pub struct TabulatedCdf {
    a: f64,
    h: f64,
    values: Vec<f64>,
}

impl TabulatedCdf {
    pub fn new(density: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> Self {
        let h = (b - a) / panels as f64;
        let mut values = vec![0.0];
        let mut acc = 0.0;
        for k in 0..panels {
            let x0 = a + k as f64 * h;
            acc += h / 6.0 * (density(x0) + 4.0 * density(x0 + 0.5 * h) + density(x0 + h));
            values.push(acc);
        }
        let total = acc;
        values.iter_mut().for_each(|v| *v /= total);
        Self { a, h, values }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let pos = (x - self.a) / self.h;
        if pos <= 0.0 {
            return 0.0;
        }
        let k = pos.floor() as usize;
        if k + 1 >= self.values.len() {
            return 1.0;
        }
        let frac = pos - k as f64;
        self.values[k] * (1.0 - frac) + self.values[k + 1] * frac
    }
}

/// Least squares restricted to the columns in `cols`, by the normal
/// equations in nalgebra.
pub fn restricted_least_squares(g: &Array2<f64>, m: &Array2<f64>, cols: &[usize]) -> Array2<f64> {
    let rows = g.nrows();
    let a = nalgebra::DMatrix::from_fn(rows, cols.len(), |i, j| g[[i, cols[j]]]);
    let b = nalgebra::DMatrix::from_fn(rows, m.ncols(), |i, j| m[[i, j]]);
    let ata = a.transpose() * &a;
    let atb = a.transpose() * b;
    let sol = ata.cholesky().expect("full column rank").solve(&atb);
    let mut x = Array2::zeros((g.ncols(), m.ncols()));
    for (r, &c) in cols.iter().enumerate() {
        for j in 0..m.ncols() {
            x[[c, j]] = sol[(r, j)];
        }
    }
    x
}

/// Weighted group-lasso objective `1/2 ||M - G X||^2 + lambda sum_i w_i ||X_i||`
/// over the groups with positive weight.
pub fn weighted_l21_objective(p: &Problem, x: &Array2<f64>, w: &Array1<f64>, lambda: f64) -> f64 {
    let r = &p.measurements - &p.design.dot(x);
    let fit = 0.5 * r.iter().map(|v| v * v).sum::<f64>();
    let mut pen = 0.0;
    for i in 0..p.n {
        let norm = (i * p.d..(i + 1) * p.d)
            .flat_map(|row| x.row(row).to_vec())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        pen += w[i] * norm;
    }
    fit + lambda * pen
}

/// Minimizes the weighted group-lasso objective on the original scale by
/// proximal gradient with a fixed step, many iterations, no acceleration.
pub fn proximal_gradient_oracle(
    p: &Problem,
    w: &Array1<f64>,
    lambda: f64,
    iterations: usize,
) -> Array2<f64> {
    let gram = p.design.t().dot(&p.design);
    let lipschitz = {
        // power iteration for the largest eigenvalue of G^T G
        let mut v = Array1::from_elem(gram.nrows(), 1.0);
        let mut ev = 0.0;
        for _ in 0..2000 {
            let nv = gram.dot(&v);
            ev = nv.dot(&nv).sqrt();
            v = nv / ev;
        }
        ev
    };
    let step = 1.0 / lipschitz;
    let gtm = p.design.t().dot(&p.measurements);
    let mut x = Array2::<f64>::zeros((p.q(), p.t()));
    for _ in 0..iterations {
        let grad = gram.dot(&x) - &gtm;
        let z = &x - &(grad * step);
        for i in 0..p.n {
            let rows = i * p.d..(i + 1) * p.d;
            let norm = rows
                .clone()
                .flat_map(|r| z.row(r).to_vec())
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            let shrink = if norm > 0.0 {
                (1.0 - step * lambda * w[i] / norm).max(0.0)
            } else {
                0.0
            };
            for r in rows {
                for j in 0..p.t() {
                    x[[r, j]] = z[[r, j]] * shrink;
                }
            }
        }
    }
    x
}
