//! Seedable synthetic problems: the two 20-location toy designs and a generic
//! MMV simulation with caller-supplied source waveforms.

use std::collections::BTreeSet;

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::cholesky;
use crate::model::{group_norms, GroupIndex, MmvProblem};
use crate::scalar::Scalar;

/// Noise level of the toy examples, relative to the noiseless signal's sup-norm.
pub const DEFAULT_NOISE_LEVEL: f64 = 0.2;

/// The known source configuration behind a synthetic problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth<F> {
    #[serde(skip)]
    pub x_true: Array2<F>,
    pub active_set: BTreeSet<GroupIndex>,
    /// Noise standard deviation as a fraction of `||G X_true||_inf`.
    pub noise_level: F,
    /// Absolute noise standard deviation that was used.
    pub noise_sd: F,
    pub seed: u64,
}

/// One Toeplitz block `rho^{|i-j|}` of the row covariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovBlock<F> {
    pub size: usize,
    pub rho: F,
}

/// Draws `m` i.i.d. rows from `N(0, blkdiag(rho_k^{|i-j|}))` and normalizes
/// every column to unit Euclidean norm.
pub fn gen_block_gaussian_design<F: Scalar, R: Rng + ?Sized>(
    m: usize,
    q: usize,
    blocks: &[CovBlock<F>],
    rng: &mut R,
) -> Result<Array2<F>> {
    let total: usize = blocks.iter().map(|b| b.size).sum();
    if total != q || blocks.iter().any(|b| b.size == 0) {
        return Err(Error::InvalidBlockSpec(format!(
            "block sizes sum to {total}, expected {q}"
        )));
    }
    if let Some(b) = blocks
        .iter()
        .find(|b| !(b.rho >= F::zero() && b.rho < F::one()))
    {
        return Err(Error::InvalidBlockSpec(format!(
            "rho = {} outside [0, 1)",
            b.rho
        )));
    }
    if m == 0 {
        return Err(Error::InvalidBlockSpec("m must be positive".into()));
    }
    let factors = blocks
        .iter()
        .map(|b| cholesky(&toeplitz(b.size, b.rho)))
        .collect::<Result<Vec<_>>>()?;
    let mut g = Array2::<F>::zeros((m, q));
    for r in 0..m {
        let mut col = 0;
        for l in &factors {
            let k = l.nrows();
            let z: Vec<F> = (0..k)
                .map(|_| F::lit(rng.sample::<f64, _>(StandardNormal)))
                .collect();
            for i in 0..k {
                let mut v = F::zero();
                for j in 0..=i {
                    v = v + l[[i, j]] * z[j];
                }
                g[[r, col + i]] = v;
            }
            col += k;
        }
    }
    normalize_columns(&mut g)?;
    Ok(g)
}

/// `C_ij = rho^{|i-j|}`.
pub fn toeplitz<F: Scalar>(size: usize, rho: F) -> Array2<F> {
    Array2::from_shape_fn((size, size), |(i, j)| {
        rho.powi((i as i32 - j as i32).abs())
    })
}

fn normalize_columns<F: Scalar>(g: &mut Array2<F>) -> Result<()> {
    for (j, mut col) in g.axis_iter_mut(Axis(1)).enumerate() {
        let norm = col.iter().map(|&v| v * v).sum::<F>().sqrt();
        if !(norm > F::zero()) {
            return Err(Error::DegenerateData(format!("column {j} is zero")));
        }
        col.mapv_inplace(|v| v / norm);
    }
    Ok(())
}

/// Adds i.i.d. Gaussian noise with standard deviation `level * ||signal||_inf`.
fn add_noise<F: Scalar, R: Rng + ?Sized>(signal: &Array2<F>, level: F, rng: &mut R) -> (Array2<F>, F) {
    let sup = signal.iter().fold(F::zero(), |acc, &v| acc.max(v.abs()));
    let sd = level * sup;
    let noisy = signal.mapv(|v| v + sd * F::lit(rng.sample::<f64, _>(StandardNormal)));
    (noisy, sd)
}

fn toy_truth<F: Scalar>() -> Array2<F> {
    let mut x = Array2::zeros((20, 1));
    x[[4, 0]] = F::one();
    x[[14, 0]] = F::one();
    x
}

fn assemble<F: Scalar>(
    design: Array2<F>,
    x_true: Array2<F>,
    n: usize,
    d: usize,
    level: F,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<(MmvProblem<F>, GroundTruth<F>)> {
    if !(level >= F::zero()) {
        return Err(Error::InvalidParameter(format!(
            "noise level must be nonnegative, got {level}"
        )));
    }
    let signal = design.dot(&x_true);
    let (measurements, noise_sd) = add_noise(&signal, level, rng);
    let problem = MmvProblem::new(design, measurements, n, d)?;
    let active_set = active_groups(&x_true, d);
    Ok((
        problem,
        GroundTruth {
            x_true,
            active_set,
            noise_level: level,
            noise_sd,
            seed,
        },
    ))
}

/// Groups with nonzero norm.
pub fn active_groups<F: Scalar>(x: &Array2<F>, d: usize) -> BTreeSet<GroupIndex> {
    group_norms(x, d)
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > F::zero())
        .map(|(i, _)| GroupIndex::from_zero_based(i))
        .collect()
}

/// First toy problem: `m = 10`, `q = 20`, row covariance
/// `blkdiag(0.5^{|i-j|}, 0.95^{|i-j|})`, sources at locations 5 and 15.
pub fn gen_example1<F: Scalar>(seed: u64) -> Result<(MmvProblem<F>, GroundTruth<F>)> {
    gen_example1_with_noise(seed, F::lit(DEFAULT_NOISE_LEVEL))
}

pub fn gen_example1_with_noise<F: Scalar>(
    seed: u64,
    level: F,
) -> Result<(MmvProblem<F>, GroundTruth<F>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = [
        CovBlock { size: 10, rho: F::lit(0.5) },
        CovBlock { size: 10, rho: F::lit(0.95) },
    ];
    let g = gen_block_gaussian_design(10, 20, &blocks, &mut rng)?;
    assemble(g, toy_truth(), 20, 1, level, seed, &mut rng)
}

/// Second toy problem: a 10 x 10 design with row covariance `0.95^{|i-j|}`
/// duplicated side by side, so locations `i` and `i + 10` are indistinguishable.
pub fn gen_example2<F: Scalar>(seed: u64) -> Result<(MmvProblem<F>, GroundTruth<F>)> {
    gen_example2_with_noise(seed, F::lit(DEFAULT_NOISE_LEVEL))
}

pub fn gen_example2_with_noise<F: Scalar>(
    seed: u64,
    level: F,
) -> Result<(MmvProblem<F>, GroundTruth<F>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = gen_block_gaussian_design(10, 10, &[CovBlock { size: 10, rho: F::lit(0.95) }], &mut rng)?;
    let g = ndarray::concatenate(Axis(1), &[half.view(), half.view()])
        .expect("equal row counts");
    assemble(g, toy_truth(), 20, 1, level, seed, &mut rng)
}

/// An active source of a simulation: its location and `d x t` waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSource {
    pub group: GroupIndex,
    /// Row-major `d x t` amplitudes.
    pub waveform: Vec<Vec<f64>>,
}

/// Parameters of [`gen_mmv_simulation`]; also the `--mmv` JSON format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmvSimulationSpec {
    pub n: usize,
    pub d: usize,
    pub t: usize,
    pub m: usize,
    pub active: Vec<ActiveSource>,
    #[serde(default = "default_noise")]
    pub noise_level: f64,
    #[serde(default)]
    pub rho: f64,
}

fn default_noise() -> f64 {
    DEFAULT_NOISE_LEVEL
}

/// Random normalized Gaussian design with Toeplitz row covariance `rho`,
/// `X_true` assembled from the waveforms, and relative AWGN.
pub fn gen_mmv_simulation<F: Scalar>(
    spec: &MmvSimulationSpec,
    seed: u64,
) -> Result<(MmvProblem<F>, GroundTruth<F>)> {
    let MmvSimulationSpec { n, d, t, m, .. } = *spec;
    if n == 0 || d == 0 || t == 0 || m == 0 {
        return Err(Error::InvalidParameter("n, d, t and m must be positive".into()));
    }
    let mut x_true = Array2::<F>::zeros((n * d, t));
    for src in &spec.active {
        if src.group.0 == 0 || src.group.0 > n {
            return Err(Error::IndexOutOfRange { index: src.group.0, n });
        }
        if src.waveform.len() != d || src.waveform.iter().any(|r| r.len() != t) {
            return Err(Error::InvalidWaveformShape(format!(
                "waveform of group {} must be {d} x {t}",
                src.group
            )));
        }
        let base = src.group.zero_based() * d;
        for (r, row) in src.waveform.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                x_true[[base + r, c]] = F::lit(v);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gen_block_gaussian_design(m, n * d, &[CovBlock { size: n * d, rho: F::lit(spec.rho) }], &mut rng)?;
    assemble(g, x_true, n, d, F::lit(spec.noise_level), seed, &mut rng)
}
