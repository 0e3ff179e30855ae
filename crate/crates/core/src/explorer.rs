//! Sampler-initialized MM: every Gibbs sample's hyperparameters seed one MM
//! run, and the resulting modes are clustered by support and summarized.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array1, Array2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mm::{gamma_offset, mm_solve, weights_from_gamma, MmTrace};
use crate::model::{group_norms, Exponent, GroupIndex, MmConfig, MmvProblem, SamplerConfig};
use crate::sampler::{gibbs_sample, Chain};
use crate::scalar::Scalar;

/// Default relative support threshold.
pub const DEFAULT_TAU_SUPP: f64 = 1e-8;

/// Result of one MM run.
#[derive(Debug, Clone)]
pub struct Mode<F> {
    pub x_hat: Array2<F>,
    /// `l_{2,1/2}` objective of `x_hat`.
    pub objective: F,
    pub objective_trace: Vec<F>,
    pub converged: bool,
    pub outer_iterations: usize,
}

impl<F: Scalar> From<MmTrace<F>> for Mode<F> {
    fn from(trace: MmTrace<F>) -> Self {
        Self {
            x_hat: trace.x_hat().clone(),
            objective: trace.final_objective(),
            converged: trace.converged && trace.inner_converged,
            outer_iterations: trace.outer_iterations,
            objective_trace: trace.objective_l2half,
        }
    }
}

/// Modes reached from every retained sample, plus the uniform-start mode.
#[derive(Debug, Clone)]
pub struct ModeChain<F> {
    pub modes: Vec<Mode<F>>,
    pub sources: Chain<F>,
    /// MM started from uniform weights.
    pub uniform: Mode<F>,
    pub lambda: F,
    pub d: usize,
    pub n: usize,
}

impl<F: Scalar> ModeChain<F> {
    pub fn objectives(&self) -> Vec<F> {
        self.modes.iter().map(|m| m.objective).collect()
    }

    /// Smallest objective among the sampled modes.
    pub fn best_sampled_objective(&self) -> F {
        self.modes
            .iter()
            .map(|m| m.objective)
            .fold(F::infinity(), F::min)
    }

    /// Smallest objective among all candidates, the uniform start included.
    pub fn best_objective(&self) -> F {
        self.best_sampled_objective().min(self.uniform.objective)
    }

    pub fn supports(&self, tau_supp: F) -> Vec<BTreeSet<GroupIndex>> {
        self.modes
            .iter()
            .map(|m| extract_support(&m.x_hat, self.d, tau_supp))
            .collect()
    }
}

/// Runs the Gibbs sampler, then MM from `w0 = lambda gamma^(k)` for every
/// retained sample. The MM phase runs on `threads` workers (0 picks the
/// default) and its output order does not depend on scheduling.
pub fn explore<F: Scalar, R: Rng + ?Sized>(
    problem: &MmvProblem<F>,
    sampler_cfg: &SamplerConfig<F>,
    mm_cfg: &MmConfig<F>,
    threads: usize,
    rng: &mut R,
) -> Result<ModeChain<F>> {
    mm_cfg.validate()?;
    let lambda = mm_cfg.lambda;
    let (d, t, n) = (problem.d, problem.t(), problem.n);
    let beta = F::lit(4.0) / (lambda * lambda);
    let alpha_ok = gamma_offset(sampler_cfg.alpha, Exponent::One, d, t).abs()
        <= F::lit(1e-12) * sampler_cfg.alpha;
    let beta_ok = (sampler_cfg.beta - beta).abs() <= F::lit(1e-10) * beta;
    if !alpha_ok || !beta_ok {
        return Err(Error::InvalidParameter(format!(
            "sampler must use alpha = d t + 1 = {} and beta = 4 / lambda^2 = {beta}",
            d * t + 1
        )));
    }
    let gamma0 = Array1::from_elem(n, F::one() / lambda);
    let chain = gibbs_sample(problem, sampler_cfg, &problem.zeros(), &gamma0, rng)?;
    let uniform: Mode<F> = mm_solve(problem, mm_cfg, &Array1::ones(n))?.into();

    let solve = |gamma: &Array1<F>| -> Result<Mode<F>> {
        Ok(mm_solve(problem, mm_cfg, &weights_from_gamma(gamma, lambda))?.into())
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let modes = pool.install(|| {
        chain
            .gamma_samples
            .par_iter()
            .map(solve)
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(ModeChain {
        modes,
        sources: chain,
        uniform,
        lambda,
        d,
        n,
    })
}

/// Groups whose norm exceeds `tau_supp` times the largest group norm.
pub fn extract_support<F: Scalar>(x: &Array2<F>, d: usize, tau_supp: F) -> BTreeSet<GroupIndex> {
    let norms = group_norms(x, d);
    let top = norms.iter().copied().fold(F::zero(), F::max);
    if !(top > F::zero()) {
        return BTreeSet::new();
    }
    let cut = tau_supp * top;
    norms
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > cut)
        .map(|(i, _)| GroupIndex::from_zero_based(i))
        .collect()
}

/// Modes sharing one support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub support: Vec<GroupIndex>,
    pub count: usize,
    pub frequency: f64,
    pub best_objective: f64,
    /// Index into the mode chain of the lowest-objective member.
    pub representative: usize,
}

/// Support-based summary of a mode chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub n: usize,
    pub samples: usize,
    pub tau_supp: f64,
    pub clusters: Vec<Cluster>,
    pub mean_switch_steps: f64,
    pub cooccurrence: Vec<Vec<f64>>,
    /// Position in `clusters` of the support reached from uniform weights.
    pub marked_uniform_mode: Option<usize>,
    pub uniform_support: Vec<GroupIndex>,
    pub uniform_objective: f64,
    pub best_sampled_objective: f64,
    pub best_objective: f64,
    pub non_converged_modes: usize,
}

impl ModeSummary {
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn top_support(&self) -> Option<&[GroupIndex]> {
        self.clusters.first().map(|c| c.support.as_slice())
    }
}

/// Clusters modes by identical support, sorted by descending frequency with
/// ties broken by lexicographic support order.
pub fn cluster_modes<F: Scalar>(chain: &ModeChain<F>, tau_supp: F) -> Result<ModeSummary> {
    let k = chain.modes.len();
    if k == 0 {
        return Err(Error::EmptyChain("no modes to cluster".into()));
    }
    let supports = chain.supports(tau_supp);
    let mut groups: BTreeMap<Vec<GroupIndex>, (usize, f64, usize)> = BTreeMap::new();
    for (idx, (support, mode)) in supports.iter().zip(&chain.modes).enumerate() {
        let key: Vec<GroupIndex> = support.iter().copied().collect();
        let obj = mode.objective.as_f64();
        let entry = groups.entry(key).or_insert((0, f64::INFINITY, idx));
        entry.0 += 1;
        if obj < entry.1 {
            entry.1 = obj;
            entry.2 = idx;
        }
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|(support, (count, best, rep))| Cluster {
            support,
            count,
            frequency: count as f64 / k as f64,
            best_objective: best,
            representative: rep,
        })
        .collect();
    // BTreeMap order is lexicographic; a stable sort keeps it within ties
    clusters.sort_by(|a, b| b.count.cmp(&a.count));

    let uniform_support: Vec<GroupIndex> = extract_support(&chain.uniform.x_hat, chain.d, tau_supp)
        .into_iter()
        .collect();
    let marked_uniform_mode = clusters.iter().position(|c| c.support == uniform_support);
    let mean_switch_steps = if k >= 2 { mean_run_length(&supports) } else { k as f64 };
    let cooc = cooccurrence_from_supports(&supports, chain.n);
    Ok(ModeSummary {
        n: chain.n,
        samples: k,
        tau_supp: tau_supp.as_f64(),
        clusters,
        mean_switch_steps,
        cooccurrence: cooc.outer_iter().map(|r| r.to_vec()).collect(),
        marked_uniform_mode,
        uniform_support,
        uniform_objective: chain.uniform.objective.as_f64(),
        best_sampled_objective: chain.best_sampled_objective().as_f64(),
        best_objective: chain.best_objective().as_f64(),
        non_converged_modes: chain.modes.iter().filter(|m| !m.converged).count(),
    })
}

/// Mean length of maximal runs of equal consecutive labels.
pub fn mean_run_length<T: PartialEq>(labels: &[T]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let runs = 1 + labels.windows(2).filter(|w| w[0] != w[1]).count();
    labels.len() as f64 / runs as f64
}

/// Average number of consecutive modes sharing a support.
pub fn switch_statistics<F: Scalar>(chain: &ModeChain<F>, tau_supp: F) -> Result<f64> {
    if chain.modes.len() < 2 {
        return Err(Error::EmptyChain(format!(
            "switch statistics need at least 2 modes, got {}",
            chain.modes.len()
        )));
    }
    Ok(mean_run_length(&chain.supports(tau_supp)))
}

/// Like [`switch_statistics`] but on a coarser labelling of each support.
pub fn partition_switch_statistics<F: Scalar, L: PartialEq>(
    chain: &ModeChain<F>,
    tau_supp: F,
    label: impl Fn(&BTreeSet<GroupIndex>) -> L,
) -> Result<f64> {
    if chain.modes.len() < 2 {
        return Err(Error::EmptyChain("need at least 2 modes".into()));
    }
    let labels: Vec<L> = chain.supports(tau_supp).iter().map(label).collect();
    Ok(mean_run_length(&labels))
}

/// Which half of a split location range a support lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Half {
    Lower,
    Upper,
    Both,
    Empty,
}

/// Classifies a support relative to locations `1..=split` and `split+1..`.
pub fn half_of(support: &BTreeSet<GroupIndex>, split: usize) -> Half {
    let lower = support.iter().any(|g| g.0 <= split);
    let upper = support.iter().any(|g| g.0 > split);
    match (lower, upper) {
        (true, false) => Half::Lower,
        (false, true) => Half::Upper,
        (true, true) => Half::Both,
        (false, false) => Half::Empty,
    }
}

/// Fraction of modes whose support contains both `i` and `j`.
pub fn cooccurrence_matrix<F: Scalar>(chain: &ModeChain<F>, tau_supp: F) -> Array2<f64> {
    cooccurrence_from_supports(&chain.supports(tau_supp), chain.n)
}

fn cooccurrence_from_supports(supports: &[BTreeSet<GroupIndex>], n: usize) -> Array2<f64> {
    let mut c = Array2::<f64>::zeros((n, n));
    if supports.is_empty() {
        return c;
    }
    for s in supports {
        for a in s {
            for b in s {
                c[[a.zero_based(), b.zero_based()]] += 1.0;
            }
        }
    }
    c /= supports.len() as f64;
    c
}

/// What the posterior covariance is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CovarianceTarget {
    /// All `q t` coefficients, flattened row-major.
    Coefficients,
    /// The `n` group norms.
    GroupNorms,
}

#[derive(Debug, Clone)]
pub struct SampleCovariance {
    pub covariance: Array2<f64>,
    pub correlation: Array2<f64>,
    /// Coordinates with zero variance; their correlation rows are zero.
    pub degenerate: Vec<usize>,
}

/// Unbiased sample covariance and correlation of the chain's `X` samples.
pub fn sample_covariance<F: Scalar>(
    chain: &Chain<F>,
    d: usize,
    target: CovarianceTarget,
) -> Result<SampleCovariance> {
    let k = chain.x_samples.len();
    if k < 2 {
        return Err(Error::EmptyChain(format!(
            "covariance needs at least 2 samples, got {k}"
        )));
    }
    let rows: Vec<Vec<f64>> = chain
        .x_samples
        .iter()
        .map(|x| match target {
            CovarianceTarget::Coefficients => x.iter().map(|v| v.as_f64()).collect(),
            CovarianceTarget::GroupNorms => group_norms(x, d).iter().map(|v| v.as_f64()).collect(),
        })
        .collect();
    let dim = rows[0].len();
    let mut mean = vec![0.0; dim];
    for r in &rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= k as f64);
    let mut cov = Array2::<f64>::zeros((dim, dim));
    for r in &rows {
        let centered: Vec<f64> = r.iter().zip(&mean).map(|(v, m)| v - m).collect();
        for a in 0..dim {
            if centered[a] == 0.0 {
                continue;
            }
            for b in a..dim {
                cov[[a, b]] += centered[a] * centered[b];
            }
        }
    }
    for a in 0..dim {
        for b in a..dim {
            let v = cov[[a, b]] / (k - 1) as f64;
            cov[[a, b]] = v;
            cov[[b, a]] = v;
        }
    }
    let sd: Vec<f64> = (0..dim).map(|a| cov[[a, a]].sqrt()).collect();
    let degenerate: Vec<usize> = (0..dim).filter(|&a| !(sd[a] > 0.0)).collect();
    let correlation = Array2::from_shape_fn((dim, dim), |(a, b)| {
        if sd[a] > 0.0 && sd[b] > 0.0 {
            if a == b {
                1.0
            } else {
                cov[[a, b]] / (sd[a] * sd[b])
            }
        } else {
            0.0
        }
    });
    Ok(SampleCovariance {
        covariance: cov,
        correlation,
        degenerate,
    })
}

/// Histogram of mode objectives with the uniform-start objective as marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveHistogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub marker: f64,
    pub min: f64,
    pub max: f64,
}

pub fn objective_histogram<F: Scalar>(chain: &ModeChain<F>, bins: usize) -> Result<ObjectiveHistogram> {
    if bins == 0 {
        return Err(Error::InvalidParameter("bins must be at least 1".into()));
    }
    let values: Vec<f64> = chain.modes.iter().map(|m| m.objective.as_f64()).collect();
    if values.is_empty() {
        return Err(Error::EmptyChain("no modes".into()));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (max - min) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|b| if b == bins { max } else { min + b as f64 * width })
        .collect();
    let mut counts = vec![0usize; bins];
    for v in values {
        let b = if width > 0.0 {
            (((v - min) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[b] += 1;
    }
    Ok(ObjectiveHistogram {
        edges,
        counts,
        marker: chain.uniform.objective.as_f64(),
        min,
        max,
    })
}
