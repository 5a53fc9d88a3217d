//! Colored G-Wishart distributions on colored graphical Gaussian models.
//!
//! A colored graphical Gaussian model (RCON model) restricts a precision matrix
//! K to a cone P_𝒢: K is positive definite, K_ij = 0 whenever (i,j) is not an
//! edge, diagonal entries are equal within each vertex color class, and
//! off-diagonal entries are equal within each edge color class. The colored
//! G-Wishart density on that cone is
//!
//! ```text
//!     f(K | δ, D) ∝ |K|^{(δ−2)/2} · exp(−½⟨K, D⟩),
//! ```
//!
//! with degrees of freedom δ > 0 and a scale matrix D in the dual cone.
//!
//! This crate provides:
//!
//! * colored graph validation and the free-entry map of the cone
//!   ([`graph`]),
//! * the upper-triangular reparameterizations K = ΦᵀΦ, Ψ = ΦQ⁻¹ with their
//!   completion recursions and Jacobians ([`completion`]),
//! * an independence Metropolis–Hastings sampler for the prior and posterior
//!   ([`sampler`]),
//! * closed-form normalizing constants and exact means for trees, stars,
//!   a colored triangle, and a colored decomposable four-vertex graph,
//!   plus a Monte-Carlo normalizing-constant estimator ([`exact`]),
//! * chain diagnostics ([`diagnostics`]), built-in fixtures ([`fixtures`]),
//!   and an experiment harness with deterministic reports ([`harness`]).
//!
//! Indexing convention: the public API is 0-based; serialized formats and
//! error messages are 1-based.

pub mod completion;
pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod graph;
pub mod harness;
pub mod io;
pub mod matrix;
pub mod sampler;
pub mod special;

pub use completion::{complete_phi, complete_psi, is_in_cone, project_to_colored, reconstruct_k};
pub use diagnostics::{autocorrelation, batch_standard_error, nmse};
pub use error::Error;
pub use exact::{
    dual_cone_check, exact_mean, log_norm, log_norm_tree_quadrature, mc_norm_oracle, GraphFamily,
    McEstimate, QuadControl,
};
pub use fixtures::{builtin_fixture, fixture_names, Fixture};
pub use io::{read_graph_json, read_matrix_csv, read_series_csv, write_graph_json, write_matrix_csv, write_series_csv};
pub use graph::{ColoredGraph, EntryKind, FreeEntryMap};
pub use harness::{emit_report, load_config, run_experiment, ExperimentConfig, ExperimentOutput, ExperimentReport, Mode, Provenance};
pub use harness::simulate_gaussian;
pub use matrix::{FactorRole, SymMatrix, UpperFactor};
pub use sampler::{ChainConfig, ChainState, Hyperparams, RunOptions, SampleSummary};

/// Tolerance for equality of entries that must coincide (class equality,
/// symmetry of inputs).
pub const TOL_EQ: f64 = 1e-8;

/// Tolerance for entries that must vanish and for positivity of pivots.
pub const TOL_ZERO: f64 = 1e-12;
