//! Acceptance criteria 1-8. Runs as a plain binary so that every criterion
//! reports a PASS/FAIL line even when the whole suite passes; the process
//! exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use mmhbm::explorer::{half_of, partition_switch_statistics, DEFAULT_TAU_SUPP};
use mmhbm::grouplasso::solve_weighted_l21;
use mmhbm::mm::{hbm_params_from_lambda, neg_log_posterior};
use mmhbm::sampler::{
    gibbs_sample, precompute_group_gram, sample_gamma_conditional_counted, sc_coefficients,
    slice_sample_coefficient, ChainRng, SliceCoefficients,
};
use mmhbm::synth::{gen_example1, gen_example2, gen_mmv_simulation, ActiveSource, MmvSimulationSpec};
use mmhbm::{
    cluster_modes, explore, full_map_alternating, gamma_map_update, lambda_max, mm_solve,
    Exponent, GroupIndex, HyperPrior, HyperState, MmConfig, ModeChain, ModeSummary, Problem,
    SamplerConfig,
};
use ndarray::{array, Array1, Array2};
use rand::{Rng, SeedableRng};

use common::*;

struct Verdict {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn run(
    id: &'static str,
    title: &'static str,
    budget_secs: u64,
    f: impl FnOnce() -> (bool, String),
) -> Verdict {
    let start = Instant::now();
    let (ok, detail) = f();
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_secs);
    let v = Verdict {
        id,
        title,
        pass: ok && elapsed <= budget,
        detail,
        elapsed,
        budget,
    };
    println!(
        "criterion {}: {} | {} | {} | {:.1}s of {}s",
        v.id,
        if v.pass { "PASS" } else { "FAIL" },
        v.title,
        v.detail,
        v.elapsed.as_secs_f64(),
        v.budget.as_secs()
    );
    v
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn criterion_1() -> (bool, String) {
    let mut worst = 0.0f64;
    let mut all_ok = true;
    for seed in 0..20 {
        let p = random_problem(10, 20, 1, 1, 1000 + seed);
        let lmax = lambda_max(&p.design, &p.measurements, p.n, p.d).unwrap();
        let ratio = 0.1 + 0.4 * rng(seed).random::<f64>();
        let lambda = ratio * lmax;
        let cfg = MmConfig::new(lambda);
        let mm = mm_solve(&p, &cfg, &Array1::ones(20)).unwrap();
        let (alpha, beta) = hbm_params_from_lambda(lambda, 1, 1);
        assert_eq!(alpha, 2.0);
        let prior = HyperPrior { alpha, beta, p: Exponent::One };
        let fm = full_map_alternating(
            &p,
            &prior,
            &Array1::from_elem(20, 1.0 / lambda),
            cfg.max_outer,
            cfg.eps,
            cfg.tau,
            cfg.max_inner,
        )
        .unwrap();
        if mm.outer_iterations != fm.trace.weights.len() {
            all_ok = false;
            continue;
        }
        for ((_, w_mm), w_fm) in mm.iterates.iter().zip(&fm.trace.weights) {
            for (&a, &b) in w_mm.iter().zip(w_fm.iter()) {
                if a != b {
                    worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
                }
                all_ok &= rel_close(a, b, 1e-8) || a == b;
            }
        }
    }
    (all_ok, format!("20 instances, max relative weight difference {worst:.2e}"))
}

fn criterion_2() -> (bool, String) {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = if r.random::<bool>() { Exponent::One } else { Exponent::Half };
        let x = 5.0 * r.random::<f64>();
        let beta = 0.1 + 4.9 * r.random::<f64>();
        let bound = 1.0 / p.value() + 1.0;
        // a quarter of the cases sit exactly on the convexity bound (nu = 0)
        let alpha = if r.random::<f64>() < 0.25 { bound } else { bound + 6.0 * r.random::<f64>() };
        let gamma = gamma_map_update(&array![[x]], alpha, beta, p, 1, 1).unwrap()[0];

        let s = match p {
            Exponent::One => x,
            Exponent::Half => x.sqrt(),
        };
        let log_coef = alpha - 1.0 - 1.0 / p.value();
        let f = |g: f64| s / g + g / beta - log_coef * g.ln();
        // bracket the minimizer in log space by doubling, then refine
        let mut hi = 0.0f64;
        while f((hi + 1.0).exp()) < f(hi.exp()) {
            hi += 1.0;
        }
        let mut lo = hi - 2.0;
        while f((lo - 1.0).exp()) < f(lo.exp()) && lo > -700.0 {
            lo -= 1.0;
        }
        let u = golden_section(|u| f(u.exp()), lo - 1.0, hi + 1.0, 1e-12);
        // f is flat at its minimum, so f(g0 e^v) - f(g0) is refined in a
        // form where every term is O(v) and nothing cancels
        let g0 = u.exp();
        let local = |v: f64| s / g0 * (-v).exp_m1() + g0 / beta * v.exp_m1() - log_coef * v;
        let v = golden_section(local, -1e-3, 1e-3, 1e-15);
        let oracle = g0 * v.exp();
        worst = worst.max((gamma - oracle).abs());
    }
    (worst <= 1e-6, format!("1000 cases, max |gamma - golden-section| {worst:.2e}"))
}

fn kkt_residual(p: &Problem, w: &Array1<f64>, lambda: f64, x_hat: &Array2<f64>) -> f64 {
    let r = &p.measurements - &p.design.dot(x_hat);
    let corr = p.design.t().dot(&r);
    let mut worst = 0.0f64;
    for i in 0..p.n {
        if w[i] == 0.0 {
            continue;
        }
        let rows = i * p.d..(i + 1) * p.d;
        let xi: Vec<f64> = rows.clone().flat_map(|k| x_hat.row(k).to_vec()).collect();
        let ci: Vec<f64> = rows.flat_map(|k| corr.row(k).to_vec()).map(|v| v * w[i]).collect();
        let xn = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        let cn = ci.iter().map(|v| v * v).sum::<f64>().sqrt();
        let res = if xn > 0.0 {
            // stationarity: w_i G_i^T R = lambda X_i / ||X_i||
            ci.iter()
                .zip(&xi)
                .map(|(c, x)| (c - lambda * x / xn).powi(2))
                .sum::<f64>()
                .sqrt()
        } else {
            (cn - lambda).max(0.0)
        };
        worst = worst.max(res);
    }
    worst
}

fn criterion_3() -> (bool, String) {
    let eps = 1e-8;
    let mut worst = 0.0f64;
    let mut boundary_ok = true;
    let mut r = rng(3);
    for seed in 0..50u64 {
        let d = 1 + (seed % 3) as usize;
        let t = 1 + (seed % 4) as usize;
        let n = 10 + (seed % 11) as usize;
        let p = random_problem(8 + (seed % 7) as usize, n, d, t, 3000 + seed);
        let lmax = lambda_max(&p.design, &p.measurements, n, d).unwrap();
        let w: Array1<f64> = Array1::from_shape_fn(n, |i| {
            if i % 7 == 3 { 0.0 } else { 0.2 + 2.0 * r.random::<f64>() }
        });
        let lambda = (0.05 + 0.8 * r.random::<f64>()) * lmax;
        let sol = solve_weighted_l21(&p, &HyperState::from_weights(w.clone()), lambda, eps, 1_000_000)
            .unwrap();
        worst = worst.max(kkt_residual(&p, &w, lambda, &sol.x_hat));

        let unit = HyperState::uniform(n);
        let at = solve_weighted_l21(&p, &unit, lmax, eps, 1_000_000).unwrap();
        let above = solve_weighted_l21(&p, &unit, 1.001 * lmax, eps, 1_000_000).unwrap();
        let below = solve_weighted_l21(&p, &unit, 0.999 * lmax, eps, 1_000_000).unwrap();
        boundary_ok &= at.x_hat.iter().all(|&v| v == 0.0)
            && above.x_hat.iter().all(|&v| v == 0.0)
            && below.x_hat.iter().any(|&v| v != 0.0);
    }
    (
        worst <= 10.0 * eps && boundary_ok,
        format!("50 instances, max KKT residual {worst:.2e}, zero-solution boundary {}", if boundary_ok { "ok" } else { "violated" }),
    )
}

fn criterion_4a() -> (bool, String, Vec<String>) {
    let cases = [(2.0, 1.0), (1.0, 4.0), (1e-3, 1.0), (10.0, 0.5), (0.5, 10.0)];
    let mut r = rng(41);
    let n = 100_000;
    let mut ok = true;
    let mut lines = Vec::new();
    for &(c, beta) in &cases {
        let mut trials = 0usize;
        let draws: Vec<f64> = (0..n)
            .map(|_| {
                let (x, k) = sample_gamma_conditional_counted(c, beta, &mut r);
                trials += k;
                x
            })
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let (qm, qv, q4) = gamma_conditional_moments(c, beta);
        let se_mean = (qv / n as f64).sqrt();
        let se_var = ((q4 - qv * qv) / n as f64).sqrt();
        let zm = (mean - qm) / se_mean;
        let zv = (var - qv) / se_var;
        let rate = n as f64 / trials as f64;
        let case_ok = zm.abs() < 3.0 && zv.abs() < 3.0 && rate > 0.2;
        ok &= case_ok;
        lines.push(format!(
            "c={c} beta={beta}: mean z={zm:+.2} var z={zv:+.2} acceptance={rate:.3}"
        ));
    }
    (ok, "5 settings x 1e5 draws within 3 s.e.".into(), lines)
}

fn criterion_4b() -> (bool, String) {
    let coeffs = SliceCoefficients {
        quad: 0.5,
        lin: 0.0,
        prior_scale: 1.0,
        prior_offset: 0.0,
        p: Exponent::One,
    };
    let mut r = ChainRng::seed_from_u64(42);
    let thin = 10;
    let mut z = 0.0;
    for _ in 0..1000 {
        z = slice_sample_coefficient(&coeffs, z, 1, &mut r).unwrap();
    }
    let mut draws = Vec::with_capacity(100_000);
    for _ in 0..100_000 {
        z = slice_sample_coefficient(&coeffs, z, thin, &mut r).unwrap();
        draws.push(z);
    }
    let table = TabulatedCdf::new(|z: f64| (-0.5 * z * z - z.abs()).exp(), -12.0, 12.0, 240_000);
    let ks = ks_distance(&mut draws, |x| table.cdf(x));
    (ks < 0.01, format!("KS distance {ks:.4} over 1e5 draws thinned by {thin}"))
}

fn criterion_4c() -> (bool, String) {
    // two coefficients, correlated columns, data pulling toward (1, 0)
    let g = array![[1.0, 0.6], [0.0, 0.8], [0.3, -0.2]];
    let m = array![[1.2], [0.1], [0.2]];
    let p = Problem::new(g.clone(), m.clone(), 2, 1).unwrap();
    let lambda = 0.5;
    let mut cfg = SamplerConfig::for_lambda(lambda, 1, 1, 43);
    let beta = cfg.beta;

    let (lo, hi, cells, sub) = (-5.0, 5.0, 30usize, 10usize);
    let h = (hi - lo) / (cells * sub) as f64;
    let axis: Vec<f64> = (0..cells * sub).map(|k| lo + (k as f64 + 0.5) * h).collect();
    let factor: Vec<f64> = axis.iter().map(|&x| gamma_marginal_factor(x.abs(), beta)).collect();
    let mut grid = Array2::<f64>::zeros((cells, cells));
    for (a, &x1) in axis.iter().enumerate() {
        for (b, &x2) in axis.iter().enumerate() {
            let mut fit = 0.0;
            for row in 0..3 {
                let rr = m[[row, 0]] - g[[row, 0]] * x1 - g[[row, 1]] * x2;
                fit += rr * rr;
            }
            grid[[a / sub, b / sub]] += (-0.5 * fit).exp() * factor[a] * factor[b];
        }
    }
    // mass outside the box, from a wider midpoint grid
    let (wlo, whi, wn) = (-40.0, 40.0, 1600usize);
    let wh = (whi - wlo) / wn as f64;
    let wide: Vec<f64> = (0..wn).map(|k| wlo + (k as f64 + 0.5) * wh).collect();
    let wfac: Vec<f64> = wide.iter().map(|&x| gamma_marginal_factor(x.abs(), beta)).collect();
    let (mut inside, mut total) = (0.0, 0.0);
    for (a, &x1) in wide.iter().enumerate() {
        for (b, &x2) in wide.iter().enumerate() {
            let mut fit = 0.0;
            for row in 0..3 {
                let rr = m[[row, 0]] - g[[row, 0]] * x1 - g[[row, 1]] * x2;
                fit += rr * rr;
            }
            let v = (-0.5 * fit).exp() * wfac[a] * wfac[b];
            total += v;
            if (lo..hi).contains(&x1) && (lo..hi).contains(&x2) {
                inside += v;
            }
        }
    }
    let outside_mass = 1.0 - inside / total;
    let grid_sum = grid.sum();
    grid.mapv_inplace(|v| v / grid_sum * (1.0 - outside_mass));

    let mut counts = Array2::<f64>::zeros((cells, cells));
    let mut outside = 0.0;
    let chunks = 10;
    cfg.sc_sweeps = 1;
    cfg.ss_steps = 1;
    cfg.burn_in = 1000;
    cfg.samples = 100_000;
    let mut r = ChainRng::seed_from_u64(cfg.seed);
    let mut x = p.zeros();
    let mut gamma = Array1::from_elem(2, 1.0 / lambda);
    for chunk in 0..chunks {
        if chunk > 0 {
            cfg.burn_in = 0;
        }
        let chain = gibbs_sample(&p, &cfg, &x, &gamma, &mut r).unwrap();
        for s in &chain.x_samples {
            let (x1, x2) = (s[[0, 0]], s[[1, 0]]);
            if (lo..hi).contains(&x1) && (lo..hi).contains(&x2) {
                let a = ((x1 - lo) / (hi - lo) * cells as f64) as usize;
                let b = ((x2 - lo) / (hi - lo) * cells as f64) as usize;
                counts[[a.min(cells - 1), b.min(cells - 1)]] += 1.0;
            } else {
                outside += 1.0;
            }
        }
        x = chain.x_samples.last().unwrap().clone();
        gamma = chain.gamma_samples.last().unwrap().clone();
    }
    let total_draws = (chunks * cfg.samples) as f64;
    let tv = 0.5
        * (counts
            .iter()
            .zip(grid.iter())
            .map(|(c, q)| (c / total_draws - q).abs())
            .sum::<f64>()
            + (outside / total_draws - outside_mass).abs());
    (tv < 0.05, format!("TV distance {tv:.4} on a {cells}x{cells} grid over 1e6 sweeps"))
}

fn criterion_5() -> (bool, String) {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    for trial in 0..100u64 {
        let d = 1 + (trial % 3) as usize;
        let t = 1 + (trial % 2) as usize;
        let n = 4 + (trial % 5) as usize;
        let p = random_problem(6, n, d, t, 5000 + trial);
        let x = gaussian_matrix(n * d, t, &mut r);
        let gamma = Array1::from_shape_fn(n, |_| 0.1 + 3.0 * r.random::<f64>());
        let (alpha, beta) = (d as f64 * t as f64 + 1.0 + 2.0 * r.random::<f64>(), 0.5 + r.random::<f64>());
        let i = r.random_range(0..n * d);
        let j = r.random_range(0..t);
        let gram = precompute_group_gram(&p.design, GroupIndex::from_zero_based(i / d), d);
        let c = sc_coefficients(&p, &x, i, j, &gamma, &gram).unwrap();
        let z: f64 = 3.0 * r.sample::<f64, _>(rand_distr::StandardNormal);
        let mut xz = x.clone();
        xz[[i, j]] = z;
        let mut x0 = x.clone();
        x0[[i, j]] = 0.0;
        let full = -(neg_log_posterior(&p, &xz, &gamma, alpha, beta, Exponent::One)
            - neg_log_posterior(&p, &x0, &gamma, alpha, beta, Exponent::One));
        let local = c.log_density(z) - c.log_density(0.0);
        worst = worst.max((full - local).abs());
    }
    (worst <= 1e-9, format!("100 triples, max log-density discrepancy {worst:.2e}"))
}

struct Exploration {
    chain: ModeChain<f64>,
    summary: ModeSummary,
}

fn run_explore(p: &Problem, ratio: f64, k: usize, k0: usize, ksc: usize, kss: usize, seed: u64) -> Exploration {
    let lmax = lambda_max(&p.design, &p.measurements, p.n, p.d).unwrap();
    let lambda = ratio * lmax;
    let mut cfg = SamplerConfig::for_lambda(lambda, p.d, p.t(), seed);
    cfg.samples = k;
    cfg.burn_in = k0;
    cfg.sc_sweeps = ksc;
    cfg.ss_steps = kss;
    let mut r = ChainRng::seed_from_u64(seed);
    let chain = explore(p, &cfg, &MmConfig::new(lambda), 0, &mut r).unwrap();
    let summary = cluster_modes(&chain, DEFAULT_TAU_SUPP).unwrap();
    Exploration { chain, summary }
}

fn fmt_support(s: &[GroupIndex]) -> String {
    let inner: Vec<String> = s.iter().map(|g| g.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

fn criterion_6(best: &mut Vec<(String, f64, f64, f64)>) -> (bool, String, Vec<String>) {
    let truth = vec![GroupIndex(5), GroupIndex(15)];
    let mut hits = 0;
    let mut ok = true;
    let mut lines = Vec::new();
    for seed in 1..=5u64 {
        let start = Instant::now();
        let (p, _) = gen_example1::<f64>(seed).unwrap();
        let e = run_explore(&p, 0.2, 10_000, 10_000, 10, 10, 100 + seed);
        let s = &e.summary;
        let top = s.top_support().unwrap_or(&[]).to_vec();
        hits += usize::from(top == truth);
        let run_ok = s.mean_switch_steps < 5.0
            && (5..=40).contains(&s.cluster_count())
            && start.elapsed() <= Duration::from_secs(900);
        ok &= run_ok;
        lines.push(format!(
            "seed {seed}: {} clusters, top {} ({:.3}), mean switch {:.2}, uniform-start support {}, {:.0}s",
            s.cluster_count(),
            fmt_support(&top),
            s.clusters[0].frequency,
            s.mean_switch_steps,
            fmt_support(&s.uniform_support),
            start.elapsed().as_secs_f64()
        ));
        if seed == 1 {
            best.push((
                "example 1".into(),
                e.chain.best_objective(),
                e.chain.best_sampled_objective(),
                e.chain.uniform.objective,
            ));
        }
    }
    (
        ok && hits >= 3,
        format!("top support = {{5,15}} in {hits}/5 runs"),
        lines,
    )
}

fn mirror(s: &[GroupIndex]) -> Vec<GroupIndex> {
    let mut m: Vec<GroupIndex> = s
        .iter()
        .map(|g| GroupIndex(if g.0 > 10 { g.0 - 10 } else { g.0 + 10 }))
        .collect();
    m.sort();
    m
}

fn criterion_7(best: &mut Vec<(String, f64, f64, f64)>) -> (bool, String, Vec<String>) {
    let (p, _) = gen_example2::<f64>(7).unwrap();
    let k = 10_000;
    let e = run_explore(&p, 0.5, k, 10_000, 10, 10, 207);
    let s = &e.summary;
    let mut lines = Vec::new();
    let mut mirror_ok = true;
    for c in s.clusters.iter().filter(|c| c.frequency >= 0.02) {
        let target = mirror(&c.support);
        let f_mirror = s
            .clusters
            .iter()
            .find(|o| o.support == target)
            .map_or(0.0, |o| o.frequency);
        let bound = 4.0 * (c.frequency / k as f64).sqrt();
        let this_ok = (c.frequency - f_mirror).abs() <= bound;
        mirror_ok &= this_ok;
        lines.push(format!(
            "{} {:.4} vs mirror {} {:.4} (bound {:.4}){}",
            fmt_support(&c.support),
            c.frequency,
            fmt_support(&target),
            f_mirror,
            bound,
            if this_ok { "" } else { " MISMATCH" }
        ));
    }
    let singletons = s.clusters.iter().all(|c| c.support.len() == 1);
    let half_steps =
        partition_switch_statistics(&e.chain, DEFAULT_TAU_SUPP, |sup: &BTreeSet<GroupIndex>| half_of(sup, 10))
            .unwrap();
    best.push((
        "example 2".into(),
        e.chain.best_objective(),
        e.chain.best_sampled_objective(),
        e.chain.uniform.objective,
    ));
    (
        mirror_ok && singletons && s.mean_switch_steps < 5.0 && half_steps < 10.0,
        format!(
            "{} clusters, all singletons: {singletons}, mirror symmetry: {mirror_ok}, mean switch {:.2}, mean half-crossing {:.2}",
            s.cluster_count(),
            s.mean_switch_steps,
            half_steps
        ),
        lines,
    )
}

fn criterion_8(best: &mut Vec<(String, f64, f64, f64)>) -> (bool, String, Vec<String>) {
    let t = 20;
    let wave = |phase: f64| -> Vec<Vec<f64>> {
        (0..3)
            .map(|r| {
                (0..t)
                    .map(|k| (1.0 + r as f64 * 0.3) * (0.4 * k as f64 + phase).sin())
                    .collect()
            })
            .collect()
    };
    let spec = MmvSimulationSpec {
        n: 200,
        d: 3,
        t,
        m: 50,
        active: vec![
            ActiveSource { group: GroupIndex(40), waveform: wave(0.0) },
            ActiveSource { group: GroupIndex(150), waveform: wave(1.3) },
        ],
        noise_level: 0.2,
        rho: 0.0,
    };
    let (p, _) = gen_mmv_simulation::<f64>(&spec, 8).unwrap();
    let e = run_explore(&p, 0.2, 100, 100, 2, 2, 308);
    best.push((
        "simulation n=200 d=3 t=20".into(),
        e.chain.best_objective(),
        e.chain.best_sampled_objective(),
        e.chain.uniform.objective,
    ));
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, b, sampled, uniform) in best.iter() {
        let this_ok = *b <= uniform + 1e-10;
        ok &= this_ok;
        lines.push(format!(
            "{name}: best {b:.6} (best sampled start {sampled:.6}) vs uniform start {uniform:.6}"
        ));
    }
    (ok, format!("{} problems", best.len()), lines)
}

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let wanted = |id: &str| filter.as_deref().is_none_or(|f| id.starts_with(f));
    let mut verdicts = Vec::new();
    let mut best = Vec::new();

    if wanted("1") {
        verdicts.push(run("1", "MM and full-MAP weight sequences agree", 10, criterion_1));
    }
    if wanted("2") {
        verdicts.push(run("2", "gamma MAP closed form vs golden section", 1, criterion_2));
    }
    if wanted("3") {
        verdicts.push(run("3", "convex solver KKT certificate and lambda_max boundary", 30, criterion_3));
    }
    if wanted("4") {
        let start = Instant::now();
        let mut extra = Vec::new();
        verdicts.push(run("4a", "accept-reject hyperparameter sampler moments", 300, || {
            let (ok, detail, lines) = criterion_4a();
            extra = lines;
            (ok, detail)
        }));
        extra.iter().for_each(|l| println!("    {l}"));
        verdicts.push(run("4b", "slice sampler stationary marginal", 300, criterion_4b));
        verdicts.push(run("4c", "two-coefficient joint posterior", 300, criterion_4c));
        let total = start.elapsed();
        let ok = total <= Duration::from_secs(300);
        println!(
            "criterion 4 total runtime {:.1}s of 300s: {}",
            total.as_secs_f64(),
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            verdicts.last_mut().unwrap().pass = false;
        }
    }
    if wanted("5") {
        verdicts.push(run("5", "single-coefficient conditional vs full posterior", 5, criterion_5));
    }
    let with_lines = |id: &'static str,
                          title: &'static str,
                          budget: u64,
                          f: &mut dyn FnMut() -> (bool, String, Vec<String>)| {
        let mut extra = Vec::new();
        let v = run(id, title, budget, || {
            let (ok, detail, lines) = f();
            extra = lines;
            (ok, detail)
        });
        extra.iter().for_each(|l| println!("    {l}"));
        v
    };
    if wanted("6") {
        verdicts.push(with_lines("6", "Example 1 mode exploration", 5 * 900, &mut || criterion_6(&mut best)));
    }
    if wanted("7") {
        verdicts.push(with_lines("7", "Example 2 mirror symmetry", 900, &mut || criterion_7(&mut best)));
    }
    if wanted("8") {
        verdicts.push(with_lines("8", "explorer never worse than uniform start", 600, &mut || criterion_8(&mut best)));
    }

    let failed: Vec<&str> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id).collect();
    println!(
        "acceptance: {} of {} criteria passed{}",
        verdicts.len() - failed.len(),
        verdicts.len(),
        if failed.is_empty() { String::new() } else { format!(", failed: {}", failed.join(", ")) }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
