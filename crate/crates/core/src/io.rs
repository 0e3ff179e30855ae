//! On-disk formats: problem directories, plain CSV matrices, chain records
//! and the plot-ready tables of an exploration.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explorer::{ModeSummary, ObjectiveHistogram};
use crate::mm::neg_log_posterior;
use crate::model::{group_norms, Exponent, GroupIndex, MmvProblem};
use crate::sampler::Chain;
use crate::scalar::Scalar;
use crate::synth::GroundTruth;

pub const PROBLEM_MANIFEST: &str = "problem.json";
pub const DESIGN_FILE: &str = "G.csv";
pub const MEASUREMENT_FILE: &str = "M.csv";
pub const TRUTH_FILE: &str = "truth.json";

/// Contents of `problem.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemManifest {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub t: usize,
    pub q: usize,
    pub files: ProblemFiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFiles {
    #[serde(rename = "G")]
    pub design: String,
    #[serde(rename = "M")]
    pub measurements: String,
}

impl ProblemManifest {
    pub fn describe<F: Scalar>(problem: &MmvProblem<F>) -> Self {
        Self {
            m: problem.m(),
            n: problem.n,
            d: problem.d,
            t: problem.t(),
            q: problem.q(),
            files: ProblemFiles {
                design: DESIGN_FILE.into(),
                measurements: MEASUREMENT_FILE.into(),
            },
        }
    }
}

/// Writes a matrix as header-less CSV using the shortest decimal text that
/// parses back to the same value.
pub fn write_matrix_csv<F: Scalar>(path: &Path, a: &Array2<F>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in a.outer_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv<F: Scalar>(path: &Path) -> Result<Array2<F>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in r.records() {
        let record = record?;
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(Error::DimensionMismatch(format!(
                    "{}: row {} has {} fields, expected {c}",
                    path.display(),
                    rows + 1,
                    record.len()
                )))
            }
            _ => {}
        }
        for field in record.iter() {
            let v = field.parse::<F>().map_err(|_| {
                Error::Parse(format!("{}: cannot parse {field:?}", path.display()))
            })?;
            data.push(v);
        }
        rows += 1;
    }
    let cols = cols.unwrap_or(0);
    Array2::from_shape_vec((rows, cols), data)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Writes `problem.json`, `G.csv` and `M.csv` into `dir`, creating it.
pub fn write_problem<F: Scalar>(dir: &Path, problem: &MmvProblem<F>) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix_csv(&dir.join(DESIGN_FILE), &problem.design)?;
    write_matrix_csv(&dir.join(MEASUREMENT_FILE), &problem.measurements)?;
    write_json(&dir.join(PROBLEM_MANIFEST), &ProblemManifest::describe(problem))
}

pub fn read_problem<F: Scalar>(dir: &Path) -> Result<MmvProblem<F>> {
    let manifest: ProblemManifest = read_json(&dir.join(PROBLEM_MANIFEST))?;
    let design = read_matrix_csv(&dir.join(&manifest.files.design))?;
    let measurements = read_matrix_csv(&dir.join(&manifest.files.measurements))?;
    let problem = MmvProblem::new(design, measurements, manifest.n, manifest.d)?;
    if (problem.m(), problem.t(), problem.q()) != (manifest.m, manifest.t, manifest.q) {
        return Err(Error::DimensionMismatch(format!(
            "{} declares m={}, t={}, q={} but the matrices are m={}, t={}, q={}",
            dir.join(PROBLEM_MANIFEST).display(),
            manifest.m,
            manifest.t,
            manifest.q,
            problem.m(),
            problem.t(),
            problem.q()
        )));
    }
    Ok(problem)
}

/// `truth.json`: active set, amplitudes, noise level and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub active_set: Vec<GroupIndex>,
    /// Row-major `q x t` amplitudes of the true sources.
    pub x_true: Vec<Vec<f64>>,
    pub noise_level: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl<F: Scalar> From<&GroundTruth<F>> for TruthFile {
    fn from(g: &GroundTruth<F>) -> Self {
        Self {
            active_set: g.active_set.iter().copied().collect(),
            x_true: g
                .x_true
                .outer_iter()
                .map(|r| r.iter().map(|v| v.as_f64()).collect())
                .collect(),
            noise_level: g.noise_level.as_f64(),
            noise_sd: g.noise_sd.as_f64(),
            seed: g.seed,
        }
    }
}

pub fn write_truth<F: Scalar>(dir: &Path, truth: &GroundTruth<F>) -> Result<()> {
    write_json(&dir.join(TRUTH_FILE), &TruthFile::from(truth))
}

pub fn read_truth(dir: &Path) -> Result<TruthFile> {
    read_json(&dir.join(TRUTH_FILE))
}

/// One line of `chain.ndjson`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    /// One-based index of the retained sample.
    pub k: usize,
    pub gamma: Vec<f64>,
    #[serde(rename = "X_norms")]
    pub x_norms: Vec<f64>,
    /// Negative log posterior of the sample.
    pub objective: f64,
}

pub fn chain_records<F: Scalar>(problem: &MmvProblem<F>, chain: &Chain<F>) -> Vec<ChainRecord> {
    let cfg = &chain.config;
    chain
        .x_samples
        .iter()
        .zip(&chain.gamma_samples)
        .enumerate()
        .map(|(k, (x, gamma))| ChainRecord {
            k: k + 1,
            gamma: gamma.iter().map(|v| v.as_f64()).collect(),
            x_norms: group_norms(x, problem.d).iter().map(|v| v.as_f64()).collect(),
            objective: neg_log_posterior(problem, x, gamma, cfg.alpha, cfg.beta, Exponent::One)
                .as_f64(),
        })
        .collect()
}

pub fn write_chain_ndjson(path: &Path, records: &[ChainRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_chain_ndjson(path: &Path) -> Result<Vec<ChainRecord>> {
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

pub fn write_mode_summary(path: &Path, summary: &ModeSummary) -> Result<()> {
    write_json(path, summary)
}

pub fn read_mode_summary(path: &Path) -> Result<ModeSummary> {
    read_json(path)
}

/// One row per cluster: a 0/1 column per location, then the frequency.
pub fn write_mode_table(path: &Path, summary: &ModeSummary) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=summary.n).map(|i| format!("loc{i}")).collect();
    header.push("frequency".into());
    w.write_record(&header)?;
    for c in &summary.clusters {
        let mut row = vec!["0".to_string(); summary.n];
        for g in &c.support {
            row[g.zero_based()] = "1".into();
        }
        row.push(c.frequency.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Histogram rows `bin_lo, bin_hi, count`, plus a final marker row holding
/// the uniform-start objective.
pub fn write_objective_histogram(path: &Path, hist: &ObjectiveHistogram) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bin_lo", "bin_hi", "count", "uniform_marker"])?;
    for (b, count) in hist.counts.iter().enumerate() {
        w.write_record([
            hist.edges[b].to_string(),
            hist.edges[b + 1].to_string(),
            count.to_string(),
            hist.marker.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Dumps each sample as `<dir>/X_<k>.csv` with one-based `k`.
pub fn write_sample_dump<F: Scalar>(dir: &Path, samples: &[Array2<F>]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    samples
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let p = dir.join(format!("X_{}.csv", k + 1));
            write_matrix_csv(&p, x).map(|_| p)
        })
        .collect()
}
