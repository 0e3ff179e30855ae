use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use rand::SeedableRng;
use serde::Serialize;
use serde_json::json;

use mmhbm::explorer::{objective_histogram, sample_covariance, CovarianceTarget};
use mmhbm::grouplasso::objective_l2p;
use mmhbm::io;
use mmhbm::mm::hbm_params_from_lambda;
use mmhbm::sampler::ChainRng;
use mmhbm::synth::{gen_example1, gen_example2, gen_mmv_simulation, GroundTruth, MmvSimulationSpec};
use mmhbm::{
    cluster_modes, explore, extract_support, full_map_alternating, lambda_max, mm_solve,
    model::group_norms, solve_weighted_l21, Exponent, GroupIndex, HyperPrior, HyperState,
    MmConfig, Problem, SamplerConfig,
};

use crate::manifest::RunManifest;
use crate::{Command, ExploreArgs, GenerateArgs, RerunArgs, SolveArgs, SolveMode, OUT_ROOT_ENV};

/// Coefficient covariance is only written when it stays this small.
const MAX_COVARIANCE_DIM: usize = 400;

pub fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Explore(a) => explore_cmd(a),
        Command::Rerun(a) => rerun(a),
    }
}

fn out_root() -> PathBuf {
    std::env::var_os(OUT_ROOT_ENV).map_or_else(|| PathBuf::from("runs"), PathBuf::from)
}

fn resolve_out(explicit: &Option<PathBuf>, default_name: impl FnOnce() -> String) -> PathBuf {
    explicit.clone().unwrap_or_else(|| out_root().join(default_name()))
}

fn dir_name(p: &Path) -> String {
    p.file_name()
        .map_or_else(|| "problem".to_string(), |s| s.to_string_lossy().into_owned())
}

/// Runs `body` with a manifest that is written to `out` whether or not the
/// body succeeds.
fn recorded(
    invocation: Command,
    out: &Path,
    body: impl FnOnce(&mut RunManifest) -> Result<()>,
) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let start = Instant::now();
    let mut manifest = RunManifest::new(invocation);
    let result = body(&mut manifest);
    manifest.duration_secs = start.elapsed().as_secs_f64();
    match &result {
        Ok(()) => manifest.complete = true,
        Err(e) => manifest.error = Some(format!("{e:#}")),
    }
    manifest.write(out)?;
    result
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let out = resolve_out(&args.out, || match (args.example, &args.mmv) {
        (Some(e), _) => format!("example{e}-seed{}", args.seed),
        (None, _) => format!("mmv-seed{}", args.seed),
    });
    let invocation = Command::Generate(GenerateArgs { out: Some(out.clone()), ..args.clone() });
    recorded(invocation, &out, |man| {
        man.seeds.push(args.seed);
        let (problem, truth): (Problem, GroundTruth<f64>) = match (args.example, &args.mmv) {
            (Some(1), _) => gen_example1(args.seed)?,
            (Some(2), _) => gen_example2(args.seed)?,
            (Some(e), _) => bail!("unknown example {e}"),
            (None, Some(path)) => {
                man.inputs.push(path.clone());
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let spec: MmvSimulationSpec = serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))?;
                man.config = serde_json::to_value(&spec)?;
                gen_mmv_simulation(&spec, args.seed)?
            }
            (None, None) => bail!("either --example or --mmv is required"),
        };
        io::write_problem(&out, &problem)?;
        io::write_truth(&out, &truth)?;
        if man.config.is_null() {
            man.config = json!({ "example": args.example, "noise_level": truth.noise_level });
        }
        man.outputs = [io::PROBLEM_MANIFEST, io::DESIGN_FILE, io::MEASUREMENT_FILE, io::TRUTH_FILE]
            .iter()
            .map(|f| out.join(f))
            .collect();
        println!(
            "wrote {} (m={}, n={}, d={}, t={}, active {:?})",
            out.display(),
            problem.m(),
            problem.n,
            problem.d,
            problem.t(),
            truth.active_set.iter().map(|g| g.0).collect::<Vec<_>>()
        );
        Ok(())
    })
}

fn resolve_lambda(problem: &Problem, ratio: Option<f64>, lambda: Option<f64>) -> Result<(f64, f64)> {
    let lmax = lambda_max(&problem.design, &problem.measurements, problem.n, problem.d)?;
    let lambda = match (ratio, lambda) {
        (_, Some(l)) => l,
        (Some(r), None) => r * lmax,
        (None, None) => bail!("either --lambda-ratio or --lambda is required"),
    };
    ensure!(lambda > 0.0 && lambda.is_finite(), "lambda must be positive, got {lambda}");
    Ok((lambda, lmax))
}

#[derive(Serialize)]
struct SolveTrace {
    mode: SolveMode,
    lambda: f64,
    lambda_max: f64,
    /// What `objectives` measures.
    objective_kind: &'static str,
    objectives: Vec<f64>,
    /// l_{2,1/2} objective per iterate, for comparing modes.
    l2half_objectives: Vec<f64>,
    iterations: usize,
    converged: bool,
    inner_converged: bool,
}

#[derive(Serialize)]
struct SupportFile {
    tau_supp: f64,
    support: Vec<GroupIndex>,
    group_norms: Vec<f64>,
}

fn solve(args: &SolveArgs) -> Result<()> {
    let mode_name = match args.mode {
        SolveMode::Mm => "mm",
        SolveMode::FullMap => "full-map",
        SolveMode::L21 => "l21",
    };
    let out = resolve_out(&args.out, || format!("{}-solve-{mode_name}", dir_name(&args.problem)));
    let invocation = Command::Solve(SolveArgs { out: Some(out.clone()), ..args.clone() });
    recorded(invocation, &out, |man| {
        man.inputs.push(args.problem.clone());
        let problem: Problem = io::read_problem(&args.problem)?;
        let (lambda, lmax) = resolve_lambda(&problem, args.lambda_ratio, args.lambda)?;
        let mut cfg = MmConfig::new(lambda);
        cfg.eps = args.eps;
        cfg.tau = args.tau;
        cfg.max_outer = args.max_iter;
        cfg.validate()?;
        man.config = json!({ "lambda": lambda, "lambda_max": lmax, "mm": cfg });

        let half = |x: &ndarray::Array2<f64>| objective_l2p(&problem, x, lambda, Exponent::Half);
        let (x_hat, trace) = match args.mode {
            SolveMode::L21 => {
                let r = solve_weighted_l21(&problem, &HyperState::uniform(problem.n), lambda, cfg.eps, cfg.max_inner)?;
                let trace = SolveTrace {
                    mode: args.mode,
                    lambda,
                    lambda_max: lmax,
                    objective_kind: "l21",
                    objectives: vec![r.objective],
                    l2half_objectives: vec![half(&r.x_hat)],
                    iterations: r.iterations,
                    converged: r.converged,
                    inner_converged: r.converged,
                };
                (r.x_hat, trace)
            }
            SolveMode::Mm => {
                let r = mm_solve(&problem, &cfg, &ndarray::Array1::ones(problem.n))?;
                let trace = SolveTrace {
                    mode: args.mode,
                    lambda,
                    lambda_max: lmax,
                    objective_kind: "l2,1/2",
                    objectives: r.objective_l2half.clone(),
                    l2half_objectives: r.objective_l2half.clone(),
                    iterations: r.outer_iterations,
                    converged: r.converged,
                    inner_converged: r.inner_converged,
                };
                (r.x_hat().clone(), trace)
            }
            SolveMode::FullMap => {
                let (alpha, beta) = hbm_params_from_lambda(lambda, problem.d, problem.t());
                let prior = HyperPrior { alpha, beta, p: Exponent::One };
                man.config["prior"] = serde_json::to_value(prior)?;
                let gamma0 = ndarray::Array1::from_elem(problem.n, 1.0 / lambda);
                let r = full_map_alternating(&problem, &prior, &gamma0, cfg.max_outer, cfg.eps, cfg.tau, cfg.max_inner)?;
                let trace = SolveTrace {
                    mode: args.mode,
                    lambda,
                    lambda_max: lmax,
                    objective_kind: "neg_log_posterior",
                    objectives: r.trace.neg_log_posterior.clone(),
                    l2half_objectives: r.trace.x.iter().map(half).collect(),
                    iterations: r.trace.x.len(),
                    converged: r.trace.converged,
                    inner_converged: r.trace.inner_converged,
                };
                (r.x, trace)
            }
        };
        let support = extract_support(&x_hat, problem.d, mmhbm::explorer::DEFAULT_TAU_SUPP);
        io::write_matrix_csv(&out.join("X_hat.csv"), &x_hat)?;
        write_json(&out.join("trace.json"), &trace)?;
        write_json(
            &out.join("support.json"),
            &SupportFile {
                tau_supp: mmhbm::explorer::DEFAULT_TAU_SUPP,
                support: support.iter().copied().collect(),
                group_norms: group_norms(&x_hat, problem.d).to_vec(),
            },
        )?;
        man.outputs = ["X_hat.csv", "trace.json", "support.json"].iter().map(|f| out.join(f)).collect();
        println!(
            "{mode_name}: lambda = {lambda:.6e} ({:.4} lambda_max), {} iterations{}, support {:?}",
            lambda / lmax,
            trace.iterations,
            if trace.converged { "" } else { " (not converged)" },
            support.iter().map(|g| g.0).collect::<Vec<_>>()
        );
        Ok(())
    })
}

fn explore_cmd(args: &ExploreArgs) -> Result<()> {
    let out = resolve_out(&args.out, || format!("{}-explore-seed{}", dir_name(&args.problem), args.seed));
    let invocation = Command::Explore(ExploreArgs { out: Some(out.clone()), ..args.clone() });
    recorded(invocation, &out, |man| {
        man.inputs.push(args.problem.clone());
        man.seeds.push(args.seed);
        let problem: Problem = io::read_problem(&args.problem)?;
        let (lambda, lmax) = resolve_lambda(&problem, Some(args.lambda_ratio), None)?;
        let mut sampler = SamplerConfig::for_lambda(lambda, problem.d, problem.t(), args.seed);
        sampler.samples = args.k;
        sampler.burn_in = args.k0;
        sampler.sc_sweeps = args.ksc;
        sampler.ss_steps = args.kss;
        let mm = MmConfig::new(lambda);
        let target = if problem.q() * problem.t() <= MAX_COVARIANCE_DIM {
            CovarianceTarget::Coefficients
        } else {
            CovarianceTarget::GroupNorms
        };
        man.config = json!({
            "lambda": lambda,
            "lambda_max": lmax,
            "sampler": sampler,
            "mm": mm,
            "tau_supp": args.tau_supp,
            "covariance_target": target,
        });

        let mut rng = ChainRng::seed_from_u64(args.seed);
        let chain = explore(&problem, &sampler, &mm, args.threads, &mut rng)?;
        let mut outputs = Vec::new();
        let mut emit = |name: &str| {
            let p = out.join(name);
            outputs.push(p.clone());
            p
        };

        let records = io::chain_records(&problem, &chain.sources);
        io::write_chain_ndjson(&emit("chain.ndjson"), &records)?;
        if args.dump_samples {
            io::write_sample_dump(&emit("samples"), &chain.sources.x_samples)?;
        }

        let summary = cluster_modes(&chain, args.tau_supp)?;
        let modes_dir = emit("modes");
        fs::create_dir_all(&modes_dir)?;
        write_mode_index(&modes_dir.join("objectives.csv"), &chain, args.tau_supp)?;
        io::write_matrix_csv(&modes_dir.join("uniform.csv"), &chain.uniform.x_hat)?;
        for (rank, c) in summary.clusters.iter().enumerate() {
            let path = modes_dir.join(format!("cluster_{}.csv", rank + 1));
            io::write_matrix_csv(&path, &chain.modes[c.representative].x_hat)?;
        }

        io::write_mode_summary(&emit("mode_summary.json"), &summary)?;
        io::write_mode_table(&emit("mode_table.csv"), &summary)?;
        let cooc = ndarray::Array2::from_shape_fn((summary.n, summary.n), |(i, j)| summary.cooccurrence[i][j]);
        io::write_matrix_csv(&emit("cooccurrence.csv"), &cooc)?;
        let hist = objective_histogram(&chain, args.bins)?;
        io::write_objective_histogram(&emit("objective_hist.csv"), &hist)?;
        if chain.sources.len() >= 2 {
            let cov = sample_covariance(&chain.sources, problem.d, target)?;
            io::write_matrix_csv(&emit("covariance.csv"), &cov.covariance)?;
            io::write_matrix_csv(&emit("correlation.csv"), &cov.correlation)?;
            man.config["degenerate_coordinates"] = json!(cov.degenerate);
        }
        man.outputs = outputs;

        let top = summary.top_support().unwrap_or(&[]);
        println!(
            "{} modes in {} clusters; top support {:?} ({:.3}); mean switch steps {:.2}; best objective {:.6} (uniform start {:.6})",
            summary.samples,
            summary.cluster_count(),
            top.iter().map(|g| g.0).collect::<Vec<_>>(),
            summary.clusters[0].frequency,
            summary.mean_switch_steps,
            summary.best_objective,
            summary.uniform_objective
        );
        Ok(())
    })
}

/// One row per mode: index, objective, convergence and support.
fn write_mode_index(path: &Path, chain: &mmhbm::Modes, tau_supp: f64) -> Result<()> {
    let mut text = String::from("k,objective,converged,outer_iterations,support\n");
    for (k, (mode, support)) in chain.modes.iter().zip(chain.supports(tau_supp)).enumerate() {
        let support: Vec<String> = support.iter().map(|g| g.to_string()).collect();
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            k + 1,
            mode.objective,
            mode.converged,
            mode.outer_iterations,
            support.join(" ")
        ));
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn rerun(args: &RerunArgs) -> Result<()> {
    let manifest = RunManifest::read(&args.manifest)?;
    let mut command = manifest.invocation;
    if let Some(out) = &args.out {
        match &mut command {
            Command::Generate(a) => a.out = Some(out.clone()),
            Command::Solve(a) => a.out = Some(out.clone()),
            Command::Explore(a) => a.out = Some(out.clone()),
            Command::Rerun(_) => {}
        }
    }
    ensure!(!matches!(command, Command::Rerun(_)), "a manifest cannot record a rerun");
    dispatch(&command)
}
