//! Command-line interface for colored G-Wishart models.
//!
//! Models come either from a built-in fixture (`--fixture fig1d`) or from a
//! colored graph JSON plus a scale CSV and shape (`--graph g.json --scale
//! d.csv --delta 3`). Matrices are printed to stdout and, when `--out` names
//! a directory or file, written as CSV.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cgwishart::{
    autocorrelation, batch_standard_error, builtin_fixture, dual_cone_check, emit_report,
    exact_mean, fixture_names, load_config, log_norm, mc_norm_oracle, nmse, read_graph_json,
    read_matrix_csv, read_series_csv, run_experiment, sampler, simulate_gaussian,
    write_matrix_csv, write_series_csv, ChainConfig, ColoredGraph, Error, GraphFamily,
    Hyperparams, QuadControl, RunOptions, SymMatrix,
};

/// Samplers, exact means, and experiments for colored graphical models.
#[derive(Parser)]
#[command(name = "cgw", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Model selection shared by most subcommands.
#[derive(Args)]
struct ModelArgs {
    /// Built-in fixture name (see `cgw fixtures`).
    #[arg(long, conflicts_with_all = ["graph", "scale", "delta"])]
    fixture: Option<String>,
    /// Colored graph JSON (1-based labels).
    #[arg(long, requires = "scale", requires = "delta")]
    graph: Option<PathBuf>,
    /// Scale matrix CSV.
    #[arg(long)]
    scale: Option<PathBuf>,
    /// Degrees of freedom δ.
    #[arg(long)]
    delta: Option<f64>,
}

struct Model {
    graph: ColoredGraph,
    delta: f64,
    scale: SymMatrix,
}

impl ModelArgs {
    fn resolve(&self) -> Result<Model, Error> {
        match (&self.fixture, &self.graph) {
            (Some(name), None) => {
                let f = builtin_fixture(name)?;
                Ok(Model { graph: f.graph, delta: f.delta, scale: f.scale })
            }
            (None, Some(path)) => {
                let graph = read_graph_json(path)?;
                let scale = read_matrix_csv(self.scale.as_ref().expect("clap enforces --scale"))?;
                let delta = self.delta.expect("clap enforces --delta");
                Ok(Model { graph, delta, scale })
            }
            _ => Err(Error::InvalidConfig(
                "select a model with --fixture NAME or with --graph G --scale D --delta X".into(),
            )),
        }
    }
}

/// Chain length settings shared by the sampling subcommands.
#[derive(Args)]
struct ChainArgs {
    /// Total Metropolis-Hastings iterations.
    #[arg(long, default_value_t = 5000)]
    iterations: usize,
    /// Iterations discarded before averaging.
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    /// Keep every thin-th state after burn-in.
    #[arg(long, default_value_t = 1)]
    thin: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// RNG stream, for independent chains under one seed.
    #[arg(long, default_value_t = 0)]
    stream: u64,
}

impl ChainArgs {
    fn config(&self) -> ChainConfig {
        ChainConfig {
            iterations: self.iterations,
            burn_in: self.burn_in,
            thin: self.thin,
            seed: self.seed,
            stream: self.stream,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in fixtures.
    Fixtures,
    /// Sample the prior and report the mean precision matrix.
    SamplePrior {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        chain: ChainArgs,
        /// Directory for mean.csv and trace.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the posterior given a sample covariance and observation count.
    SamplePosterior {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        chain: ChainArgs,
        /// Sample covariance S̄ as CSV.
        #[arg(long)]
        data: PathBuf,
        /// Number of observations behind S̄.
        #[arg(long)]
        n: usize,
        /// Directory for mean.csv and trace.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact mean E(K) from the closed-form normalizing constant.
    ExactMean {
        #[command(flatten)]
        model: ModelArgs,
        /// Write the mean matrix to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Log normalizing constant, optionally cross-checked by Monte Carlo.
    NormConst {
        #[command(flatten)]
        model: ModelArgs,
        /// Monte-Carlo draws for an independent estimate (p <= 4).
        #[arg(long)]
        mc_draws: Option<usize>,
        /// Seed for the Monte-Carlo estimate.
        #[arg(long, default_value_t = 0)]
        mc_seed: u64,
    },
    /// Simulate a Gaussian sample covariance from a precision matrix.
    Simulate {
        /// Fixture whose true precision matrix generates the data.
        #[arg(long, conflicts_with = "k")]
        fixture: Option<String>,
        /// Precision matrix CSV, as an alternative to --fixture.
        #[arg(long)]
        k: Option<PathBuf>,
        /// Number of observations.
        #[arg(long)]
        n: usize,
        /// RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// RNG stream.
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Output CSV for the sample covariance.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a replicated experiment from a JSON configuration.
    Experiment {
        /// Experiment configuration JSON.
        #[arg(long)]
        config: PathBuf,
        /// Directory for report.json, trace.csv, acf.csv, and entry traces.
        #[arg(long)]
        out: PathBuf,
    },
    /// Series and matrix diagnostics.
    Diagnose {
        /// Scalar series CSV for autocorrelation and batch standard error.
        #[arg(long)]
        series: Option<PathBuf>,
        /// Highest autocorrelation lag.
        #[arg(long, default_value_t = 40)]
        lags: usize,
        /// Batch count for the batch-means standard error.
        #[arg(long, default_value_t = 20)]
        batches: usize,
        /// Estimate matrix CSV for a normalized error.
        #[arg(long, requires = "reference")]
        estimate: Option<PathBuf>,
        /// Reference matrix CSV the estimate is scored against.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
}

fn print_matrix(m: &SymMatrix) {
    for row in m.to_rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>12.6}")).collect();
        println!("  {}", cells.join(" "));
    }
}

fn write_summary(
    summary: &cgwishart::SampleSummary,
    out: Option<&Path>,
) -> Result<(), Error> {
    println!(
        "kept {} of {} iterations, acceptance rate {:.4}",
        summary.kept, summary.iterations, summary.acceptance_rate
    );
    println!("mean precision matrix:");
    print_matrix(&summary.mean_k);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_matrix_csv(dir.join("mean.csv"), &summary.mean_k)?;
        if let Some(trace) = &summary.logdet_trace {
            write_series_csv(dir.join("trace.csv"), "logdet", trace)?;
        }
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn detect_family(graph: &ColoredGraph) -> Result<GraphFamily, Error> {
    GraphFamily::detect(graph).ok_or_else(|| {
        Error::InvalidConfig("this colored graph is not one of the closed-form families".into())
    })
}

fn run() -> Result<(), Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Fixtures => {
            for name in fixture_names() {
                let f = builtin_fixture(name)?;
                let family = GraphFamily::detect(&f.graph)
                    .map_or("none", |fam| fam.name());
                println!(
                    "{name:<10} p = {:<3} delta = {:<4} closed form: {family}",
                    f.graph.p(),
                    f.delta
                );
            }
        }
        Command::SamplePrior { model, chain, out } => {
            let m = model.resolve()?;
            let hyper = Hyperparams::new(m.delta, m.scale);
            let opts = RunOptions { record_logdet: true, track_entries: Vec::new() };
            let summary = sampler::run(&m.graph, &hyper, &chain.config(), &opts)?;
            write_summary(&summary, out.as_deref())?;
        }
        Command::SamplePosterior { model, chain, data, n, out } => {
            let m = model.resolve()?;
            let s = read_matrix_csv(&data)?;
            let prior = Hyperparams::new(m.delta, m.scale);
            let post = sampler::posterior_params(&prior, n, &s)?;
            let opts = RunOptions { record_logdet: true, track_entries: Vec::new() };
            let summary = sampler::run(&m.graph, &post, &chain.config(), &opts)?;
            write_summary(&summary, out.as_deref())?;
        }
        Command::ExactMean { model, out } => {
            let m = model.resolve()?;
            let family = detect_family(&m.graph)?;
            let mean = exact_mean(&m.graph, family, m.delta, &m.scale, &QuadControl::default())?;
            println!("family: {}", family.name());
            println!("exact mean:");
            print_matrix(&mean);
            if let Some(path) = out {
                write_matrix_csv(&path, &mean)?;
                println!("wrote {}", path.display());
            }
        }
        Command::NormConst { model, mc_draws, mc_seed } => {
            let m = model.resolve()?;
            let family = detect_family(&m.graph)?;
            let in_cone = dual_cone_check(&m.graph, family, &m.scale)?;
            if !in_cone {
                return Err(Error::NotInDualCone);
            }
            let log_i = log_norm(&m.graph, family, m.delta, &m.scale, &QuadControl::default())?;
            println!("family: {}", family.name());
            println!("log normalizing constant: {log_i:.12}");
            if let Some(draws) = mc_draws {
                let est = mc_norm_oracle(&m.graph, m.delta, &m.scale, draws, mc_seed)?;
                let z = (est.value - log_i.exp()) / est.std_err.max(f64::MIN_POSITIVE);
                println!(
                    "monte carlo: {:.6e} +- {:.2e} ({} draws, {} valid), z = {z:.2}",
                    est.value, est.std_err, est.n_draws, est.n_valid
                );
                println!("closed form: {:.6e}", log_i.exp());
            }
        }
        Command::Simulate { fixture, k, n, seed, stream, out } => {
            let k = match (fixture, k) {
                (Some(name), None) => builtin_fixture(&name)?.true_k.ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "fixture {name:?} carries no true precision matrix"
                    ))
                })?,
                (None, Some(path)) => read_matrix_csv(&path)?,
                _ => {
                    return Err(Error::InvalidConfig(
                        "select the generating matrix with --fixture NAME or --k K.csv".into(),
                    ))
                }
            };
            let s = simulate_gaussian(&k, n, seed, stream)?;
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            write_matrix_csv(&out, &s)?;
            println!("wrote {} ({} observations, p = {})", out.display(), n, s.dim());
        }
        Command::Experiment { config, out } => {
            let cfg = load_config(&config)?;
            let output = run_experiment(&cfg)?;
            emit_report(&output, &out)?;
            let r = &output.report;
            println!(
                "{} {} replications: nmse {:.6} +- {:.6}, acceptance {:.4}, {:.1}s",
                r.fixture, r.replications, r.nmse_mean, r.nmse_sd, r.acceptance_mean, r.timing_s
            );
            println!("wrote {}", out.display());
        }
        Command::Diagnose { series, lags, batches, estimate, reference } => {
            let mut did_something = false;
            if let Some(path) = series {
                let xs = read_series_csv(&path)?;
                let max_lag = lags.min(xs.len().saturating_sub(1));
                let acf = autocorrelation(&xs, max_lag)?;
                let se = batch_standard_error(&xs, batches)?;
                println!("series length {}, batch standard error {se:.6e}", xs.len());
                println!("lag  autocorrelation");
                for (h, r) in acf.iter().enumerate() {
                    println!("{h:>3}  {r:>+.4}");
                }
                did_something = true;
            }
            if let (Some(est), Some(refer)) = (estimate, reference) {
                let a = read_matrix_csv(&est)?;
                let b = read_matrix_csv(&refer)?;
                println!("nmse: {:.6e}", nmse(&a, &b)?);
                did_something = true;
            }
            if !did_something {
                return Err(Error::InvalidConfig(
                    "nothing to diagnose: pass --series and/or --estimate with --reference".into(),
                ));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
