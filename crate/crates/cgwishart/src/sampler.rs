//! Independence Metropolis–Hastings sampler for the colored G-Wishart.
//!
//! The chain lives on the free entries Ψ_{v(𝒢)} of the scaled Cholesky factor
//! Ψ = ΦQ⁻¹ (see [`crate::completion`]). A candidate is drawn afresh at every
//! step, independently of the current state:
//!
//! * free off-diagonal entries Ψ′_ij are standard normal,
//! * a free diagonal entry Ψ′_ii is the positive square root of a chi-square
//!   draw with ν_i = p − (i+1) − v_i(𝒢) + δ degrees of freedom (0-based row
//!   i; v_i counts the non-free entries of row i including the diagonal).
//!
//! Writing h(Ψ_{v(𝒢)ᶜ}) for the density factor carried by the completed
//! non-free entries,
//!
//! ```text
//!     log h = Σ_{(i,i) non-free} (p − i − 1 − v_i + δ − 1)·log Ψ_ii
//!           − ½ Σ_{(i,j) non-free, i ≤ j} Ψ_ij²,
//! ```
//!
//! the candidate is accepted with probability min{h(Ψ′)/h(Ψ), 1}. A candidate
//! whose completion fails (no positive-definite extension with the prescribed
//! zeros and ties exists) has density zero and is rejected outright. On the
//! uncolored complete graph no entry is non-free, h ≡ 1, and the sampler
//! produces i.i.d. exact draws.
//!
//! Posterior sampling is the same algorithm with the conjugate update
//! (δ, D) → (δ + n, D + nS), where S is the sample covariance of n centered
//! Gaussian observations; Q is rebuilt from the full D + nS.
//!
//! Chains are deterministic given (seed, stream, config): replications use a
//! common seed and distinct stream numbers of the underlying counter-based
//! generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::completion::{complete_psi, is_in_cone, reconstruct_k};
use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, FreeEntryMap};
use crate::matrix::{FactorRole, SymMatrix, UpperFactor};

/// Maximum number of proposal draws tried by [`ChainState::init`] before
/// giving up with [`Error::InitFailed`].
pub const INIT_ATTEMPTS: usize = 1000;

/// Shape and scale hyperparameters (δ, D) of a colored G-Wishart.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    /// Degrees-of-freedom shape parameter, δ > 0.
    pub delta: f64,
    /// Scale matrix D; must be positive definite so that Q exists.
    pub scale: SymMatrix,
}

impl Hyperparams {
    /// Bundles shape and scale.
    pub fn new(delta: f64, scale: SymMatrix) -> Self {
        Hyperparams { delta, scale }
    }
}

/// Length and seeding of one chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainConfig {
    /// Total Metropolis–Hastings steps.
    pub iterations: usize,
    /// Discarded prefix length; must be smaller than `iterations`.
    pub burn_in: usize,
    /// Keep every `thin`-th post-burn-in state (1 keeps all).
    pub thin: usize,
    /// Seed of the counter-based generator.
    pub seed: u64,
    /// Stream number; replications share a seed and differ in stream.
    pub stream: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig { iterations: 5000, burn_in: 1000, thin: 1, seed: 0, stream: 0 }
    }
}

impl ChainConfig {
    /// Checks that the configuration keeps at least one sample.
    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be at least 1".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidConfig(format!(
                "burn-in {} must be smaller than iterations {}",
                self.burn_in, self.iterations
            )));
        }
        Ok(())
    }

    /// Number of kept states implied by the configuration.
    pub fn kept(&self) -> usize {
        (self.iterations - self.burn_in).div_ceil(self.thin)
    }
}

/// Optional per-run recordings.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Record log|K| at every kept state.
    pub record_logdet: bool,
    /// Record these entries (0-based `(i, j)`) of K at every kept state.
    pub track_entries: Vec<(usize, usize)>,
}

/// Outcome of one chain run.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSummary {
    /// Average of the kept precision matrices.
    pub mean_k: SymMatrix,
    /// Number of kept states.
    pub kept: usize,
    /// Number of accepted candidates over the whole run.
    pub accepted: usize,
    /// Total steps taken (burn-in included).
    pub iterations: usize,
    /// accepted / iterations, burn-in included.
    pub acceptance_rate: f64,
    /// log|K| per kept state when requested.
    pub logdet_trace: Option<Vec<f64>>,
    /// Tracked entry series, parallel to `RunOptions::track_entries`.
    pub entry_traces: Vec<Vec<f64>>,
}

/// The sampler state: current Ψ, the fixed Q, and the proposal layout.
#[derive(Debug, Clone)]
pub struct ChainState {
    graph: ColoredGraph,
    map: FreeEntryMap,
    q: UpperFactor,
    delta: f64,
    psi: UpperFactor,
    log_h: f64,
    step_index: usize,
    accepted: usize,
    rng: ChaCha20Rng,
    /// Chi-square generator per free coordinate; `None` marks an off-diagonal
    /// (standard normal) coordinate.
    diag_proposals: Vec<Option<Gamma<f64>>>,
}

impl ChainState {
    /// Builds Q from D, validates the proposal degrees of freedom, and draws
    /// an initial state from the proposal distribution (bounded retries).
    pub fn init(graph: &ColoredGraph, hyper: &Hyperparams, seed: u64, stream: u64) -> Result<Self> {
        let p = graph.p();
        if hyper.scale.dim() != p {
            return Err(Error::DimensionMismatch { expected: p, got: hyper.scale.dim() });
        }
        let u = hyper
            .scale
            .factor_upper_transpose(FactorRole::Q)
            .ok_or(Error::DNotPositiveDefinite)?;
        let q = u.invert();
        let map = graph.free_entry_map();
        let delta = hyper.delta;

        let mut diag_proposals = Vec::with_capacity(map.n_free());
        for &(i, j) in map.free_set() {
            if i == j {
                let nu = proposal_dof(p, map.v(i), i, delta);
                if nu <= 0.0 {
                    return Err(Error::InvalidDoF { index: i, value: nu });
                }
                let gamma = Gamma::new(nu / 2.0, 2.0)
                    .map_err(|_| Error::InvalidDoF { index: i, value: nu })?;
                diag_proposals.push(Some(gamma));
            } else {
                diag_proposals.push(None);
            }
        }

        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);

        let mut state = ChainState {
            graph: graph.clone(),
            map,
            q,
            delta,
            psi: UpperFactor::zeros(p, FactorRole::Psi),
            log_h: f64::NEG_INFINITY,
            step_index: 0,
            accepted: 0,
            rng,
            diag_proposals,
        };
        for _ in 0..INIT_ATTEMPTS {
            let free = state.propose_free();
            if let Ok(psi) = complete_psi(&free, &state.q, &state.map) {
                state.log_h = log_h(&psi, &state.map, delta);
                state.psi = psi;
                return Ok(state);
            }
        }
        Err(Error::InitFailed(INIT_ATTEMPTS))
    }

    /// Draws one independent candidate for the free coordinates, in the lex
    /// order of the free set.
    pub fn propose_free(&mut self) -> Vec<f64> {
        let mut free = Vec::with_capacity(self.diag_proposals.len());
        for dist in &self.diag_proposals {
            match dist {
                Some(gamma) => free.push(gamma.sample(&mut self.rng).sqrt()),
                None => free.push(self.rng.sample(StandardNormal)),
            }
        }
        free
    }

    /// One Metropolis–Hastings step; returns whether the candidate was
    /// accepted. Completion failure counts as rejection.
    pub fn step(&mut self) -> bool {
        let free = self.propose_free();
        self.step_index += 1;
        let candidate = match complete_psi(&free, &self.q, &self.map) {
            Ok(psi) => psi,
            Err(_) => return false,
        };
        let log_h_new = log_h(&candidate, &self.map, self.delta);
        let diff = log_h_new - self.log_h;
        let accept = if diff >= 0.0 {
            true
        } else {
            let u: f64 = self.rng.gen();
            u.ln() < diff
        };
        if accept {
            self.psi = candidate;
            self.log_h = log_h_new;
            self.accepted += 1;
        }
        accept
    }

    /// The current completed Ψ.
    pub fn psi(&self) -> &UpperFactor {
        &self.psi
    }

    /// The fixed factor Q with D⁻¹ = QᵀQ.
    pub fn q(&self) -> &UpperFactor {
        &self.q
    }

    /// The free-entry map of the underlying colored graph.
    pub fn map(&self) -> &FreeEntryMap {
        &self.map
    }

    /// Reconstructs the current precision matrix K = ΦᵀΦ, Φ = ΨQ.
    pub fn current_k(&self) -> SymMatrix {
        reconstruct_k(&self.psi, &self.q)
    }

    /// log h of the current state.
    pub fn log_h_current(&self) -> f64 {
        self.log_h
    }

    /// Number of completed steps.
    pub fn step_index(&self) -> usize {
        self.step_index
    }

    /// log|K| of the current state, via the diagonal of Φ = ΨQ.
    pub fn current_logdet(&self) -> f64 {
        let p = self.psi.dim();
        2.0 * (0..p).map(|i| (self.psi.get(i, i) * self.q.get(i, i)).ln()).sum::<f64>()
    }
}

/// Chi-square degrees of freedom ν_i = p − (i+1) − v_i + δ of the proposal
/// for the free diagonal entry in 0-based row `i`.
pub fn proposal_dof(p: usize, v_i: usize, i: usize, delta: f64) -> f64 {
    (p as f64) - ((i + 1 + v_i) as f64) + delta
}

/// log h(Ψ_{v(𝒢)ᶜ}): the density factor carried by the completed non-free
/// entries. A nonpositive non-free diagonal yields −∞ (certain rejection).
pub fn log_h(psi: &UpperFactor, map: &FreeEntryMap, delta: f64) -> f64 {
    let p = psi.dim();
    let mut total = 0.0;
    for i in 0..p {
        for j in i..p {
            if let crate::graph::EntryKind::Free { .. } = map.kind(i, j) {
                continue;
            }
            let value = psi.get(i, j);
            if i == j {
                if value <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                // Exponent may be negative for small delta; keep it in f64.
                let exponent = (p as f64) - ((i + 1 + map.v(i)) as f64) + delta - 1.0;
                total += exponent * value.ln() - 0.5 * value * value;
            } else {
                total -= 0.5 * value * value;
            }
        }
    }
    total
}

/// Runs one chain and averages the kept precision matrices.
pub fn run(
    graph: &ColoredGraph,
    hyper: &Hyperparams,
    config: &ChainConfig,
    opts: &RunOptions,
) -> Result<SampleSummary> {
    config.validate()?;
    let p = graph.p();
    for &(i, j) in &opts.track_entries {
        if i >= p || j >= p {
            return Err(Error::InvalidConfig(format!(
                "tracked entry ({i}, {j}) outside a {p}x{p} matrix"
            )));
        }
    }
    let mut state = ChainState::init(graph, hyper, config.seed, config.stream)?;
    let mut sum_k = SymMatrix::zeros(p);
    let mut kept = 0usize;
    let mut logdet_trace = if opts.record_logdet { Some(Vec::with_capacity(config.kept())) } else { None };
    let mut entry_traces: Vec<Vec<f64>> =
        vec![Vec::with_capacity(config.kept()); opts.track_entries.len()];

    for s in 1..=config.iterations {
        state.step();
        if s > config.burn_in && (s - config.burn_in - 1) % config.thin == 0 {
            let k = state.current_k();
            debug_assert!(is_in_cone(&k, &state.graph), "kept draw left the cone");
            sum_k.axpy(1.0, &k);
            kept += 1;
            if let Some(trace) = logdet_trace.as_mut() {
                trace.push(state.current_logdet());
            }
            for (trace, &(i, j)) in entry_traces.iter_mut().zip(&opts.track_entries) {
                trace.push(k.get(i, j));
            }
        }
    }

    sum_k.scale(1.0 / kept as f64);
    Ok(SampleSummary {
        mean_k: sum_k,
        kept,
        accepted: state.accepted,
        iterations: config.iterations,
        acceptance_rate: state.accepted as f64 / config.iterations as f64,
        logdet_trace,
        entry_traces,
    })
}

/// Conjugate update: (δ, D) with n observations of sample covariance S gives
/// (δ + n, D + nS). Q is later rebuilt from the full D + nS.
pub fn posterior_params(prior: &Hyperparams, n: usize, s: &SymMatrix) -> Result<Hyperparams> {
    if n == 0 {
        return Err(Error::InvalidConfig("posterior update needs n >= 1 observations".into()));
    }
    if s.dim() != prior.scale.dim() {
        return Err(Error::DimensionMismatch { expected: prior.scale.dim(), got: s.dim() });
    }
    let mut scale = prior.scale.clone();
    scale.axpy(n as f64, s);
    if !scale.is_positive_definite() {
        return Err(Error::PosteriorScaleNotPD);
    }
    Ok(Hyperparams { delta: prior.delta + n as f64, scale })
}
