//! Replicated sampling experiments with reproducible reports.
//!
//! An experiment runs R independent chains on a built-in fixture and scores
//! each chain's posterior-mean estimate K̂ against a reference matrix:
//!
//! * **prior mode** targets the prior itself and scores against the exact
//!   mean E(K) from the closed-form normalizing constant, so the chain and
//!   the formulas check each other;
//! * **posterior mode** simulates n i.i.d. N(0, K⁻¹) observations from the
//!   fixture's true precision matrix, updates (δ, D) → (δ + n, D + nS̄·n),
//!   and scores against the true K.
//!
//! Replication j of an experiment with master seed s uses RNG streams
//! derived from (s, j) only, so a report is a pure function of its
//! configuration: running the same configuration twice yields byte-identical
//! canonical payloads. Wall-clock timing is the one volatile field and is
//! masked by [`ExperimentReport::canonical_json`].

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::exact::{exact_mean, GraphFamily, QuadControl};
use crate::fixtures::builtin_fixture;
use crate::io;
use crate::matrix::{FactorRole, SymMatrix};
use crate::sampler::{self, ChainConfig, Hyperparams, RunOptions};

/// What the chains target and what K̂ is scored against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Sample the prior; score against the exact mean E(K).
    Prior,
    /// Simulate data from the fixture's true K, sample the posterior, and
    /// score against that true K.
    Posterior,
}

fn default_replications() -> usize {
    100
}

fn default_iterations() -> usize {
    5000
}

fn default_burn_in() -> usize {
    1000
}

fn default_thin() -> usize {
    1
}

fn default_batches() -> usize {
    diagnostics::DEFAULT_BATCHES
}

fn default_acf_lags() -> usize {
    40
}

/// Full specification of a replicated experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Built-in fixture name, e.g. "fig1d" or "cycle20a".
    pub fixture: String,
    /// Prior or posterior target.
    pub mode: Mode,
    /// Observations per replication (posterior mode only).
    #[serde(default)]
    pub n_data: usize,
    /// Independent chains to run.
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Iterations per chain.
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Iterations discarded at the start of each chain.
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    /// Keep every thin-th state after burn-in.
    #[serde(default = "default_thin")]
    pub thin: usize,
    /// Seed from which every replication derives its RNG streams.
    #[serde(default)]
    pub master_seed: u64,
    /// Batch count for the batch-means standard error.
    #[serde(default = "default_batches")]
    pub batches: usize,
    /// Highest autocorrelation lag reported.
    #[serde(default = "default_acf_lags")]
    pub acf_lags: usize,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig("need at least one replication".into()));
        }
        if self.mode == Mode::Posterior && self.n_data == 0 {
            return Err(Error::InvalidConfig(
                "posterior mode needs n_data >= 1 observations per replication".into(),
            ));
        }
        self.chain(0).validate()
    }

    fn chain(&self, stream: u64) -> ChainConfig {
        ChainConfig {
            iterations: self.iterations,
            burn_in: self.burn_in,
            thin: self.thin,
            seed: self.master_seed,
            stream,
        }
    }

    /// SHA-256 of the serialized configuration, hex-encoded.
    pub fn sha256(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        format!("{:x}", Sha256::digest(&bytes))
    }
}

/// Reads an [`ExperimentConfig`] from a JSON file.
pub fn load_config<P: AsRef<Path>>(path: P) -> Result<ExperimentConfig> {
    let raw = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&raw)?)
}

/// Identifies the exact inputs behind a report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the configuration JSON.
    pub config_sha256: String,
    /// Crate version that produced the report.
    pub version: String,
}

/// Aggregated results of a replicated experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// Fixture name.
    pub fixture: String,
    /// Prior or posterior target.
    pub mode: Mode,
    /// Matrix dimension.
    pub p: usize,
    /// Observations per replication (0 in prior mode).
    pub n_data: usize,
    /// Number of chains run.
    pub replications: usize,
    /// Kept draws per chain.
    pub kept_per_replication: usize,
    /// Reference matrix the estimates are scored against, by rows.
    pub reference: Vec<Vec<f64>>,
    /// Average of the per-replication mean estimates, by rows.
    pub mean_estimate: Vec<Vec<f64>>,
    /// Mean of the per-replication normalized errors.
    pub nmse_mean: f64,
    /// Sample standard deviation of the per-replication errors.
    pub nmse_sd: f64,
    /// Normalized error of each replication.
    pub nmse_per_replication: Vec<f64>,
    /// Mean acceptance rate across replications.
    pub acceptance_mean: f64,
    /// Batch-means standard error of the first chain's log-det trace.
    pub logdet_batch_se: f64,
    /// Autocorrelation of the first chain's log-det trace, lags 0..=acf_lags.
    pub acf: Vec<f64>,
    /// Wall-clock seconds (masked in the canonical payload).
    pub timing_s: f64,
    /// Configuration hash and crate version.
    pub provenance: Provenance,
}

impl ExperimentReport {
    /// Deterministic JSON payload: the full report with timing zeroed.
    ///
    /// Two runs of the same configuration produce byte-identical canonical
    /// payloads.
    pub fn canonical_json(&self) -> String {
        let mut masked = self.clone();
        masked.timing_s = 0.0;
        serde_json::to_string_pretty(&masked).expect("report serializes")
    }
}

/// Everything an experiment produces: the report plus the first chain's raw
/// traces for plotting.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    /// Aggregated report.
    pub report: ExperimentReport,
    /// Log-determinant trace of the first chain's kept draws.
    pub logdet_trace: Vec<f64>,
    /// Kept-draw traces of selected precision entries from the first chain,
    /// keyed by 0-based entry.
    pub entry_traces: Vec<((usize, usize), Vec<f64>)>,
}

/// Sample covariance S̄ = (1/n) Σ x xᵀ of n draws from N(0, K⁻¹).
///
/// With K = ΦᵀΦ the draws are x = Φ⁻¹ z, z standard normal, so the
/// covariance of x is Φ⁻¹Φ⁻ᵀ = K⁻¹. The stream layout matches the sampler:
/// a fixed (seed, stream) pair reproduces S̄ exactly.
pub fn simulate_gaussian(k: &SymMatrix, n: usize, seed: u64, stream: u64) -> Result<SymMatrix> {
    if n == 0 {
        return Err(Error::InvalidConfig("need at least one observation".into()));
    }
    let p = k.dim();
    let phi = k.cholesky_upper(FactorRole::Phi).ok_or(Error::KNotPD)?;
    let inv = phi.invert();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut s = SymMatrix::zeros(p);
    let mut z = vec![0.0f64; p];
    let mut x = vec![0.0f64; p];
    for _ in 0..n {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        for i in 0..p {
            x[i] = (i..p).map(|j| inv.get(i, j) * z[j]).sum();
        }
        for i in 0..p {
            for j in i..p {
                s.set(i, j, s.get(i, j) + x[i] * x[j]);
            }
        }
    }
    s.scale(1.0 / n as f64);
    Ok(s)
}

/// Entries whose kept-draw traces the first chain records.
fn tracked_entries(p: usize) -> Vec<(usize, usize)> {
    let mut entries = vec![(0, 0), (0, 1), (0, p - 1), (1, 1)];
    entries.dedup();
    entries
}

/// Runs a replicated experiment described by `config`.
///
/// Prior mode needs a fixture whose colored family has a closed-form mean;
/// posterior mode needs a fixture that carries a true precision matrix.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let started = Instant::now();
    let fixture = builtin_fixture(&config.fixture)?;
    let graph = &fixture.graph;
    let p = graph.p();
    let prior = Hyperparams::new(fixture.delta, fixture.scale.clone());

    let reference = match config.mode {
        Mode::Prior => {
            let family = GraphFamily::detect(graph).ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "fixture {:?} has no closed-form mean; prior experiments need one",
                    config.fixture
                ))
            })?;
            exact_mean(graph, family, fixture.delta, &fixture.scale, &QuadControl::default())?
        }
        Mode::Posterior => fixture.true_k.clone().ok_or_else(|| {
            Error::InvalidConfig(format!(
                "fixture {:?} has no true precision matrix; posterior experiments need one",
                config.fixture
            ))
        })?,
    };

    let mut nmse_per_rep = Vec::with_capacity(config.replications);
    let mut mean_estimate = SymMatrix::zeros(p);
    let mut acceptance_sum = 0.0;
    let mut kept = 0usize;
    let mut logdet_trace = Vec::new();
    let mut entry_traces = Vec::new();

    for rep in 0..config.replications {
        let first = rep == 0;
        let opts = RunOptions {
            record_logdet: first,
            track_entries: if first { tracked_entries(p) } else { Vec::new() },
        };
        let summary = match config.mode {
            Mode::Prior => sampler::run(graph, &prior, &config.chain(rep as u64), &opts)?,
            Mode::Posterior => {
                let s = simulate_gaussian(
                    &reference,
                    config.n_data,
                    config.master_seed,
                    2 * rep as u64,
                )?;
                let post = sampler::posterior_params(&prior, config.n_data, &s)?;
                sampler::run(graph, &post, &config.chain(2 * rep as u64 + 1), &opts)?
            }
        };
        nmse_per_rep.push(diagnostics::nmse(&summary.mean_k, &reference)?);
        mean_estimate.axpy(1.0 / config.replications as f64, &summary.mean_k);
        acceptance_sum += summary.acceptance_rate;
        kept = summary.kept;
        if first {
            logdet_trace = summary.logdet_trace.clone().unwrap_or_default();
            entry_traces = tracked_entries(p)
                .into_iter()
                .zip(summary.entry_traces.iter().cloned())
                .collect();
        }
    }

    let nmse_mean = nmse_per_rep.iter().sum::<f64>() / config.replications as f64;
    let nmse_sd = if config.replications > 1 {
        let var = nmse_per_rep.iter().map(|&e| (e - nmse_mean).powi(2)).sum::<f64>()
            / (config.replications - 1) as f64;
        var.sqrt()
    } else {
        0.0
    };
    let logdet_batch_se = diagnostics::batch_standard_error(&logdet_trace, config.batches)?;
    let max_lag = config.acf_lags.min(logdet_trace.len().saturating_sub(1));
    let acf = diagnostics::autocorrelation(&logdet_trace, max_lag)?;

    let report = ExperimentReport {
        fixture: config.fixture.clone(),
        mode: config.mode,
        p,
        n_data: if config.mode == Mode::Posterior { config.n_data } else { 0 },
        replications: config.replications,
        kept_per_replication: kept,
        reference: reference.to_rows(),
        mean_estimate: mean_estimate.to_rows(),
        nmse_mean,
        nmse_sd,
        nmse_per_replication: nmse_per_rep,
        acceptance_mean: acceptance_sum / config.replications as f64,
        logdet_batch_se,
        acf,
        timing_s: started.elapsed().as_secs_f64(),
        provenance: Provenance {
            config_sha256: config.sha256(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    };
    Ok(ExperimentOutput { report, logdet_trace, entry_traces })
}

/// Writes a report and its traces into `dir`.
///
/// Produces `report.json`, `trace.csv` (log-det trace of the first chain),
/// `acf.csv`, and one `entry_I_J.csv` per tracked entry with 1-based labels.
pub fn emit_report<P: AsRef<Path>>(output: &ExperimentOutput, dir: P) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&output.report)?)?;
    io::write_series_csv(dir.join("trace.csv"), "logdet", &output.logdet_trace)?;
    io::write_series_csv(dir.join("acf.csv"), "acf", &output.report.acf)?;
    for ((i, j), trace) in &output.entry_traces {
        let name = format!("entry_{}_{}.csv", i + 1, j + 1);
        io::write_series_csv(dir.join(name), &format!("k_{}_{}", i + 1, j + 1), trace)?;
    }
    Ok(())
}
