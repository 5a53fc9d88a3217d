//! Normalizing constants and exact means for five colored families.
//!
//! For a colored graph 𝒢 with shape δ and scale D in the dual cone, the
//! normalizing constant of the colored Wishart density is
//!
//! ```text
//!   I_𝒢(δ, D) = ∫_{P_𝒢} |K|^{(δ−2)/2} · exp(−½⟨K, D⟩) dK,
//! ```
//!
//! integrated over the free coordinates of the colored cone. Five families
//! admit tractable expressions:
//!
//! * **Tree** (distinct vertex colors, one edge color, common off-diagonal
//!   scale b′): a one-dimensional integral of Bessel functions,
//!
//!   ```text
//!   I = 2^{δ/2+p−1} Γ(δ/2) (∏_i a′_i^{deg_i−2})^{δ/4}
//!       ∫₀^∞ 2cosh((p−1)b′·t) · t^{(p−1)δ/2} ∏_{(i,j)∈E} K_{δ/2}(t·√(a′_ia′_j)) dt,
//!   ```
//!
//!   with closed forms at δ = 1 and δ = 3 in terms of S = Σ_E √(a′_ia′_j)
//!   and B = (p−1)b′:
//!
//!   ```text
//!   δ = 1:  I = (2π)^{p/2} ∏_i a′_i^{−1/2} [(S−B)^{−1} + (S+B)^{−1}],
//!   δ = 3:  I = (2π)^{p/2} ∏_i a′_i^{−3/2}
//!               Σ_{k=0}^{p−1} σ_k k! [(S−B)^{−(k+1)} + (S+B)^{−(k+1)}],
//!   ```
//!
//!   where σ_k is the k-th elementary symmetric polynomial of the edge
//!   weights √(a′_ia′_j).
//!
//! * **Star, leaves in one class** (hub scale a′, edge scales b′ ∈ Rⁿ, leaf
//!   scale c′):
//!
//!   ```text
//!   I = 2^{((n+1)δ+2)/2} π^{n/2} a′^{(δ/2−1)(n−1)}
//!       (n·a′c′ − ‖b′‖²)^{−((δ−1)n/2+1)} Γ((δ−1)n/2 + 1) Γ(δ/2).
//!   ```
//!
//! * **Star, all vertices in one class** (common diagonal scale a′, edge
//!   scales b′ ∈ Rⁿ), a Lorentz-cone model:
//!
//!   ```text
//!   I = 2^{m−1} C_n Γ(m) / ((n+1)^m a′^m) · B(δ/2, n/2)
//!       · ₂F₁(m/2, m/2 + ½; (n+δ)/2; u),
//!   ```
//!
//!   with m = (n+1)δ/2, C_n = 2π^{n/2}/Γ(n/2), u = (2‖b′‖/((n+1)a′))².
//!
//! * **Triangle** (two tied edges meeting the apex; scale entries d₁₁, d₂₂,
//!   d₃₃, d₁₂ and tied d₁₃ = d₂₃), with d = d₁₁ + d₂₂ + 2d₁₂:
//!
//!   ```text
//!   I = 2^{(3δ+4)/2} π Γ(δ/2) Γ((δ+1)/2)² d^{δ/2}
//!       (d₃₃d − 4d₁₃²)^{−(δ+1)/2} (d₁₁d₂₂ − d₁₂²)^{−(δ+1)/2}.
//!   ```
//!
//! * **Twin-pair graph on four vertices** (vertices 3, 4 tied and not
//!   adjacent, edges into each twin tied; d₁₃ = d₂₃, d₁₄ = d₂₄, d₃₃ = d₄₄):
//!
//!   ```text
//!   I = 2^{δ+2} π^{3/2} Γ(δ/2) Γ((δ+1)/2) Γ(δ) d^{δ−1}
//!       (d₁₁d₂₂ − d₁₂²)^{−(δ+1)/2} (d₃₃d − 2d₁₃² − 2d₁₄²)^{−δ}.
//!   ```
//!
//! The mean of the distribution follows from the constants by
//! differentiation: E(K) = ∂ log I / ∂(−D/2), evaluated here with central
//! finite differences taken class by class (all scale entries of a color
//! class move together, so the tied patterns above are preserved).
//!
//! [`mc_norm_oracle`] estimates the same constants by importance sampling in
//! the Cholesky parameterization and reports a standard error, providing an
//! independent numerical check of every closed form.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::completion;
use crate::error::{Error, Result};
use crate::graph::ColoredGraph;
use crate::matrix::{FactorRole, SymMatrix};
use crate::sampler;
use crate::special::{self, SeriesControl};

/// Tolerances for the numerical routes (tree quadrature, series).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadControl {
    /// Relative tolerance for the outer quadrature.
    pub rel_tol: f64,
    /// Log-scale drop below the integrand peak at which the tail is cut.
    pub peak_drop: f64,
    /// Controls for Bessel and hypergeometric evaluations.
    pub series: SeriesControl,
}

impl Default for QuadControl {
    fn default() -> Self {
        QuadControl { rel_tol: 1e-10, peak_drop: 1e-16_f64.ln(), series: SeriesControl::default() }
    }
}

/// The five colored families with tractable normalizing constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFamily {
    /// Tree, distinct vertex colors, one edge color.
    Tree,
    /// Star, hub colored separately, leaves in one class, edges distinct.
    StarLeaves,
    /// Star, all vertices in one class, edges distinct.
    StarAll,
    /// Triangle, distinct vertex colors, base edge alone, apex edges tied.
    Triangle,
    /// Four vertices, five edges, the non-adjacent pair tied, edges into
    /// each twin tied.
    Decomp4,
}

impl GraphFamily {
    /// Short identifier used in reports and messages.
    pub fn name(self) -> &'static str {
        match self {
            GraphFamily::Tree => "tree",
            GraphFamily::StarLeaves => "star-leaves",
            GraphFamily::StarAll => "star-all",
            GraphFamily::Triangle => "triangle",
            GraphFamily::Decomp4 => "twin-pair",
        }
    }

    /// Recognizes the family of a colored graph, if any.
    ///
    /// The match is on graph shape **and** coloring; the same underlying
    /// graph with a different coloring is a different model. A two-vertex
    /// graph with distinct vertex colors fits both the tree and the
    /// star-leaves pattern; detection prefers the star.
    pub fn detect(graph: &ColoredGraph) -> Option<GraphFamily> {
        if triangle_labels(graph).is_some() {
            return Some(GraphFamily::Triangle);
        }
        if decomp4_labels(graph).is_some() {
            return Some(GraphFamily::Decomp4);
        }
        if let Some((hub, leaves)) = star_labels(graph) {
            let singleton_edges = graph.edge_classes().len() == leaves.len()
                && graph.edge_classes().iter().all(|c| c.len() == 1);
            if singleton_edges {
                if graph.vertex_classes().len() == 1 {
                    return Some(GraphFamily::StarAll);
                }
                let vc = graph.vertex_classes();
                if vc.len() == 2
                    && vc.iter().any(|c| c.as_slice() == [hub])
                    && vc.iter().any(|c| c.as_slice() == leaves.as_slice())
                {
                    return Some(GraphFamily::StarLeaves);
                }
            }
        }
        if tree_pattern_ok(graph) {
            return Some(GraphFamily::Tree);
        }
        None
    }
}

/// Whether two scale entries that share a color class agree.
fn tied(x: f64, y: f64) -> bool {
    (x - y).abs() <= crate::TOL_EQ * x.abs().max(y.abs()).max(1.0)
}

fn mismatch(family: &'static str, reason: String) -> Error {
    Error::PatternMismatch { family, reason }
}

// ---------------------------------------------------------------------------
// Shape and coloring recognition
// ---------------------------------------------------------------------------

fn tree_pattern_ok(graph: &ColoredGraph) -> bool {
    graph.tree_metadata().is_ok()
        && graph.vertex_classes().len() == graph.p()
        && (graph.p() == 1 || graph.edge_classes().len() == 1)
}

/// Hub and sorted leaves of a star-shaped graph (any coloring).
fn star_labels(graph: &ColoredGraph) -> Option<(usize, Vec<usize>)> {
    let p = graph.p();
    if p < 2 || graph.edges().len() != p - 1 {
        return None;
    }
    let deg = graph.degrees();
    let hub = if p == 2 { 0 } else { deg.iter().position(|&dv| dv == p - 1)? };
    if graph.edges().iter().any(|&(i, j)| i != hub && j != hub) {
        return None;
    }
    Some((hub, (0..p).filter(|&v| v != hub).collect()))
}

/// Base endpoints and apex of a triangle whose coloring ties the two apex
/// edges: returns (i, j, apex) with the base edge (i, j) alone in its class.
fn triangle_labels(graph: &ColoredGraph) -> Option<(usize, usize, usize)> {
    if graph.p() != 3 || graph.edges().len() != 3 || graph.vertex_classes().len() != 3 {
        return None;
    }
    let ec = graph.edge_classes();
    if ec.len() != 2 {
        return None;
    }
    let (single, pair) = match (ec[0].len(), ec[1].len()) {
        (1, 2) => (&ec[0], &ec[1]),
        (2, 1) => (&ec[1], &ec[0]),
        _ => return None,
    };
    let (i, j) = single[0];
    let apex = 3 - i - j;
    let mut expected = [(i.min(apex), i.max(apex)), (j.min(apex), j.max(apex))];
    expected.sort_unstable();
    let mut got = [pair[0], pair[1]];
    got.sort_unstable();
    (expected == got).then_some((i, j, apex))
}

/// Labels (v₁, v₂, t₁, t₂) of the twin-pair graph: t₁, t₂ are the tied,
/// non-adjacent twins, v₁, v₂ the singleton vertices.
fn decomp4_labels(graph: &ColoredGraph) -> Option<(usize, usize, usize, usize)> {
    if graph.p() != 4 || graph.edges().len() != 5 {
        return None;
    }
    let mut non_edges = (0..4).flat_map(|i| ((i + 1)..4).map(move |j| (i, j)))
        .filter(|&(i, j)| !graph.is_edge(i, j));
    let (t1, t2) = non_edges.next()?;
    debug_assert!(non_edges.next().is_none(), "six pairs minus five edges");
    let twins = [t1, t2];
    let vc = graph.vertex_classes();
    if vc.len() != 3 || !vc.iter().any(|c| c.as_slice() == twins) {
        return None;
    }
    let mut singles: Vec<usize> = (0..4).filter(|v| !twins.contains(v)).collect();
    singles.sort_unstable();
    let (v1, v2) = (singles[0], singles[1]);
    if !vc.iter().any(|c| c.as_slice() == [v1]) || !vc.iter().any(|c| c.as_slice() == [v2]) {
        return None;
    }
    let ec = graph.edge_classes();
    if ec.len() != 3 {
        return None;
    }
    let base = (v1.min(v2), v1.max(v2));
    if !ec.iter().any(|c| c.as_slice() == [base]) {
        return None;
    }
    for &t in &twins {
        let mut expected = [(v1.min(t), v1.max(t)), (v2.min(t), v2.max(t))];
        expected.sort_unstable();
        if !ec.iter().any(|c| {
            let mut got: Vec<(usize, usize)> = c.clone();
            got.sort_unstable();
            got == expected
        }) {
            return None;
        }
    }
    Some((v1, v2, t1, t2))
}

// ---------------------------------------------------------------------------
// Scale-parameter extraction
// ---------------------------------------------------------------------------

struct TreeParams {
    a: Vec<f64>,
    b: f64,
}

fn tree_params(graph: &ColoredGraph, d: &SymMatrix) -> Result<TreeParams> {
    if !tree_pattern_ok(graph) {
        return Err(mismatch(
            "tree",
            "expected a tree with distinct vertex colors and one edge color".into(),
        ));
    }
    let a: Vec<f64> = (0..graph.p()).map(|i| d.get(i, i)).collect();
    let b = graph.edges().first().map_or(0.0, |&(i, j)| d.get(i, j));
    for &(i, j) in graph.edges() {
        if !tied(d.get(i, j), b) {
            return Err(mismatch(
                "tree",
                format!("scale at edge ({}, {}) deviates from the common value", i + 1, j + 1),
            ));
        }
    }
    Ok(TreeParams { a, b })
}

struct StarParams {
    /// Hub diagonal scale a′ (equals the leaf scale for the one-class star).
    a_hub: f64,
    /// Common leaf diagonal scale c′.
    c_leaf: f64,
    /// Edge scales in leaf order.
    b: Vec<f64>,
}

fn star_leaves_params(graph: &ColoredGraph, d: &SymMatrix) -> Result<StarParams> {
    let fam = "star-leaves";
    let (hub, leaves) = star_labels(graph)
        .ok_or_else(|| mismatch(fam, "graph is not a star".into()))?;
    let vc = graph.vertex_classes();
    let coloring_ok = vc.len() == 2
        && vc.iter().any(|c| c.as_slice() == [hub])
        && vc.iter().any(|c| c.as_slice() == leaves.as_slice())
        && graph.edge_classes().len() == leaves.len()
        && graph.edge_classes().iter().all(|c| c.len() == 1);
    if !coloring_ok {
        return Err(mismatch(fam, "expected hub alone, leaves in one class, edges distinct".into()));
    }
    let c_leaf = d.get(leaves[0], leaves[0]);
    for &l in &leaves {
        if !tied(d.get(l, l), c_leaf) {
            return Err(mismatch(fam, format!("leaf {} scale deviates from the common value", l + 1)));
        }
    }
    let b = leaves.iter().map(|&l| d.get(hub, l)).collect();
    Ok(StarParams { a_hub: d.get(hub, hub), c_leaf, b })
}

fn star_all_params(graph: &ColoredGraph, d: &SymMatrix) -> Result<StarParams> {
    let fam = "star-all";
    let (hub, leaves) = star_labels(graph)
        .ok_or_else(|| mismatch(fam, "graph is not a star".into()))?;
    let coloring_ok = graph.vertex_classes().len() == 1
        && graph.edge_classes().len() == leaves.len()
        && graph.edge_classes().iter().all(|c| c.len() == 1);
    if !coloring_ok {
        return Err(mismatch(fam, "expected all vertices in one class and distinct edges".into()));
    }
    let a = d.get(hub, hub);
    for v in 0..graph.p() {
        if !tied(d.get(v, v), a) {
            return Err(mismatch(fam, format!("diagonal {} deviates from the common value", v + 1)));
        }
    }
    let b = leaves.iter().map(|&l| d.get(hub, l)).collect();
    Ok(StarParams { a_hub: a, c_leaf: a, b })
}

struct TriangleParams {
    d11: f64,
    d22: f64,
    d33: f64,
    d12: f64,
    d13: f64,
}

fn triangle_params(graph: &ColoredGraph, d: &SymMatrix) -> Result<TriangleParams> {
    let fam = "triangle";
    let (i, j, apex) = triangle_labels(graph)
        .ok_or_else(|| mismatch(fam, "expected a triangle with tied apex edges".into()))?;
    let d13 = d.get(i, apex);
    if !tied(d13, d.get(j, apex)) {
        return Err(mismatch(fam, "apex edge scales are not tied".into()));
    }
    Ok(TriangleParams {
        d11: d.get(i, i),
        d22: d.get(j, j),
        d33: d.get(apex, apex),
        d12: d.get(i, j),
        d13,
    })
}

struct Decomp4Params {
    d11: f64,
    d22: f64,
    d33: f64,
    d12: f64,
    d13: f64,
    d14: f64,
}

fn decomp4_params(graph: &ColoredGraph, d: &SymMatrix) -> Result<Decomp4Params> {
    let fam = "twin-pair";
    let (v1, v2, t1, t2) = decomp4_labels(graph)
        .ok_or_else(|| mismatch(fam, "expected the twin-pair graph on four vertices".into()))?;
    let d13 = d.get(v1, t1);
    let d14 = d.get(v1, t2);
    let d33 = d.get(t1, t1);
    if !tied(d13, d.get(v2, t1)) || !tied(d14, d.get(v2, t2)) {
        return Err(mismatch(fam, "edge scales into a twin are not tied".into()));
    }
    if !tied(d33, d.get(t2, t2)) {
        return Err(mismatch(fam, "twin diagonal scales are not tied".into()));
    }
    Ok(Decomp4Params { d11: d.get(v1, v1), d22: d.get(v2, v2), d33, d12: d.get(v1, v2), d13, d14 })
}

// ---------------------------------------------------------------------------
// Dual cones
// ---------------------------------------------------------------------------

fn tree_edge_weights(graph: &ColoredGraph, a: &[f64]) -> Vec<f64> {
    graph.edges().iter().map(|&(i, j)| (a[i] * a[j]).sqrt()).collect()
}

fn tree_in_cone(tp: &TreeParams, graph: &ColoredGraph) -> bool {
    if !tp.a.iter().all(|&a| a > 0.0) {
        return false;
    }
    let p = tp.a.len();
    if p == 1 {
        return true;
    }
    let s: f64 = tree_edge_weights(graph, &tp.a).iter().sum();
    ((p - 1) as f64 * tp.b).abs() < s
}

fn norm_sq(b: &[f64]) -> f64 {
    b.iter().map(|x| x * x).sum()
}

fn star_leaves_in_cone(sp: &StarParams) -> bool {
    sp.a_hub > 0.0
        && sp.c_leaf > 0.0
        && norm_sq(&sp.b) < sp.b.len() as f64 * sp.a_hub * sp.c_leaf
}

fn star_all_in_cone(sp: &StarParams) -> bool {
    sp.a_hub > 0.0 && norm_sq(&sp.b) < sp.a_hub * sp.a_hub
}

fn triangle_in_cone(t: &TriangleParams) -> bool {
    let d = t.d11 + t.d22 + 2.0 * t.d12;
    t.d11 > 0.0
        && t.d22 > 0.0
        && t.d33 > 0.0
        && t.d12 * t.d12 < t.d11 * t.d22
        && 4.0 * t.d13 * t.d13 < d * t.d33
}

fn decomp4_in_cone(t: &Decomp4Params) -> bool {
    let d = t.d11 + t.d22 + 2.0 * t.d12;
    t.d11 > 0.0
        && t.d22 > 0.0
        && t.d33 > 0.0
        && t.d12 * t.d12 < t.d11 * t.d22
        && 2.0 * (t.d13 * t.d13 + t.d14 * t.d14) < d * t.d33
}

/// Whether the scale matrix lies in the open dual cone of the family.
///
/// Fails with [`Error::PatternMismatch`] when the graph or the scale does
/// not carry the family's tie pattern at all.
pub fn dual_cone_check(graph: &ColoredGraph, family: GraphFamily, d: &SymMatrix) -> Result<bool> {
    if d.dim() != graph.p() {
        return Err(Error::DimensionMismatch { expected: graph.p(), got: d.dim() });
    }
    match family {
        GraphFamily::Tree => Ok(tree_in_cone(&tree_params(graph, d)?, graph)),
        GraphFamily::StarLeaves => Ok(star_leaves_in_cone(&star_leaves_params(graph, d)?)),
        GraphFamily::StarAll => Ok(star_all_in_cone(&star_all_params(graph, d)?)),
        GraphFamily::Triangle => Ok(triangle_in_cone(&triangle_params(graph, d)?)),
        GraphFamily::Decomp4 => Ok(decomp4_in_cone(&decomp4_params(graph, d)?)),
    }
}

// ---------------------------------------------------------------------------
// Normalizing constants
// ---------------------------------------------------------------------------

/// log I_𝒢(δ, D) for a recognized family.
///
/// Dispatches to the closed forms where available (trees at δ = 1 and
/// δ = 3, both stars, the triangle, the twin-pair graph) and to adaptive
/// quadrature for trees at other δ ≥ 1.
pub fn log_norm(
    graph: &ColoredGraph,
    family: GraphFamily,
    delta: f64,
    d: &SymMatrix,
    ctrl: &QuadControl,
) -> Result<f64> {
    if d.dim() != graph.p() {
        return Err(Error::DimensionMismatch { expected: graph.p(), got: d.dim() });
    }
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::UnsupportedOrder(delta));
    }
    match family {
        GraphFamily::Tree => log_norm_tree(graph, delta, d, ctrl),
        GraphFamily::StarLeaves => log_norm_star_leaves(graph, delta, d),
        GraphFamily::StarAll => log_norm_star_all(graph, delta, d, &ctrl.series),
        GraphFamily::Triangle => log_norm_triangle(graph, delta, d),
        GraphFamily::Decomp4 => log_norm_decomp4(graph, delta, d),
    }
}

/// log(eˣ + eʸ) without overflow.
fn lse2(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let m = x.max(y);
    m + ((x - m).exp() + (y - m).exp()).ln()
}

/// Shape values this close to a closed-form δ use the closed form.
const DELTA_SNAP: f64 = 1e-9;

fn log_norm_tree(graph: &ColoredGraph, delta: f64, d: &SymMatrix, ctrl: &QuadControl) -> Result<f64> {
    let tp = tree_params(graph, d)?;
    if !tree_in_cone(&tp, graph) {
        return Err(Error::NotInDualCone);
    }
    let p = graph.p();
    let lam = 0.5 * delta;
    if p == 1 {
        // Single Gamma integral: ∫₀^∞ k^{δ/2−1} e^{−ka/2} dk = 2^{δ/2} Γ(δ/2) a^{−δ/2}.
        return Ok(lam * LN_2 + special::ln_gamma(lam) - lam * tp.a[0].ln());
    }
    let weights = tree_edge_weights(graph, &tp.a);
    let s: f64 = weights.iter().sum();
    let big_b = (p - 1) as f64 * tp.b;
    let ln_a_sum: f64 = tp.a.iter().map(|&a| a.ln()).sum();
    if (delta - 1.0).abs() < DELTA_SNAP {
        let tail = lse2(-(s - big_b).ln(), -(s + big_b).ln());
        return Ok(0.5 * p as f64 * (2.0 * PI).ln() - 0.5 * ln_a_sum + tail);
    }
    if (delta - 3.0).abs() < DELTA_SNAP {
        let sigma = special::elementary_symmetric(&weights);
        let mut acc = f64::NEG_INFINITY;
        for (k, &sg) in sigma.iter().enumerate() {
            let kp1 = (k + 1) as f64;
            let term = sg.ln() + special::ln_gamma(kp1);
            acc = lse2(acc, term - kp1 * (s - big_b).ln());
            acc = lse2(acc, term - kp1 * (s + big_b).ln());
        }
        return Ok(0.5 * p as f64 * (2.0 * PI).ln() - 1.5 * ln_a_sum + acc);
    }
    tree_quadrature_inner(&tp, &weights, s, big_b, delta, ctrl)
}

/// log I for a tree by adaptive quadrature, for any δ ≥ 1.
///
/// Exposed separately so the closed forms at δ = 1 and δ = 3 can be
/// cross-checked against the integral they were derived from.
pub fn log_norm_tree_quadrature(
    graph: &ColoredGraph,
    delta: f64,
    d: &SymMatrix,
    ctrl: &QuadControl,
) -> Result<f64> {
    let tp = tree_params(graph, d)?;
    if !tree_in_cone(&tp, graph) {
        return Err(Error::NotInDualCone);
    }
    if graph.p() < 2 {
        return Err(Error::InvalidConfig(
            "the quadrature route needs at least one edge; the single-vertex constant is closed form"
                .into(),
        ));
    }
    let weights = tree_edge_weights(graph, &tp.a);
    let s: f64 = weights.iter().sum();
    let big_b = (graph.p() - 1) as f64 * tp.b;
    tree_quadrature_inner(&tp, &weights, s, big_b, delta, ctrl)
}

/// ln[z^λ K_λ(z)], smooth through z → 0 where it tends to (λ−1)ln2 + lnΓ(λ).
///
/// Large arguments use the asymptotic expansion of K_λ in log scale so the
/// value stays finite long after e^{−z} underflows.
fn ln_zk(lam: f64, z: f64, series: &SeriesControl) -> f64 {
    if z < 1e-8 {
        return (lam - 1.0) * LN_2 + special::ln_gamma(lam);
    }
    if z > 30.0 {
        // K_λ(z) ≈ √(π/2z) e^{−z} Σ_m ∏_{k≤m}(4λ²−(2k−1)²)/(m! (8z)^m),
        // truncated at the smallest term (half-integer λ terminates exactly).
        let mu = 4.0 * lam * lam;
        let mut sum = 1.0;
        let mut term = 1.0;
        let mut prev = f64::INFINITY;
        for m in 1..=40u32 {
            let odd = (2 * m - 1) as f64;
            term *= (mu - odd * odd) / (m as f64 * 8.0 * z);
            if term.abs() >= prev {
                break;
            }
            sum += term;
            prev = term.abs();
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return lam * z.ln() + 0.5 * (PI / (2.0 * z)).ln() - z + sum.ln();
    }
    match special::bessel_k(lam, z, series) {
        Ok(k) if k > 0.0 => lam * z.ln() + k.ln(),
        Ok(_) => f64::NEG_INFINITY,
        Err(_) => f64::NAN,
    }
}

fn tree_quadrature_inner(
    tp: &TreeParams,
    weights: &[f64],
    s: f64,
    big_b: f64,
    delta: f64,
    ctrl: &QuadControl,
) -> Result<f64> {
    if delta < 1.0 {
        return Err(Error::UnsupportedOrder(delta));
    }
    let p = tp.a.len();
    let lam = 0.5 * delta;
    // After absorbing t^{(p−1)δ/2} into the Bessel factors, the integrand is
    //   exp(g(t)),  g(t) = ln 2cosh(B t) + Σ_e ln[(t w_e)^λ K_λ(t w_e)],
    // and the a-dependent prefactor collapses to ∏ a_i^{−δ/2}.
    let series = ctrl.series;
    let ln_g = |t: f64| -> f64 {
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let mut acc = special::ln_two_cosh(big_b * t);
        for &w in weights {
            acc += ln_zk(lam, t * w, &series);
        }
        acc
    };
    // The tail decays like e^{−(S−|B|)t}; scan geometrically for the peak and
    // cut where the integrand has dropped peak_drop below it.
    let scale = 1.0 / (s - big_b.abs());
    let mut t = scale * 1e-9;
    let mut ln_peak = f64::NEG_INFINITY;
    let t_hi = loop {
        let v = ln_g(t);
        if v.is_nan() {
            return Err(Error::QuadratureFailure("integrand not finite during peak scan".into()));
        }
        if v > ln_peak {
            ln_peak = v;
        }
        if v < ln_peak + ctrl.peak_drop {
            break t;
        }
        t *= 1.2;
        if t > scale * 1e12 {
            return Err(Error::QuadratureFailure(
                "no tail decay found while scanning the integrand".into(),
            ));
        }
    };
    let f = |x: f64| (ln_g(x) - ln_peak).exp();
    let (val, _err) = special::integrate(&f, 0.0, t_hi, ctrl.rel_tol, 1e-300)?;
    if !(val > 0.0) || !val.is_finite() {
        return Err(Error::QuadratureFailure(format!("integral evaluated to {val}")));
    }
    Ok((lam + (p - 1) as f64) * LN_2 + special::ln_gamma(lam)
        - lam * tp.a.iter().map(|&a| a.ln()).sum::<f64>()
        + ln_peak
        + val.ln())
}

fn log_norm_star_leaves(graph: &ColoredGraph, delta: f64, d: &SymMatrix) -> Result<f64> {
    let sp = star_leaves_params(graph, d)?;
    if delta < 1.0 {
        return Err(Error::UnsupportedOrder(delta));
    }
    if !star_leaves_in_cone(&sp) {
        return Err(Error::NotInDualCone);
    }
    let n = sp.b.len() as f64;
    let gap = n * sp.a_hub * sp.c_leaf - norm_sq(&sp.b);
    let e = 0.5 * (delta - 1.0) * n + 1.0;
    Ok(0.5 * ((n + 1.0) * delta + 2.0) * LN_2
        + 0.5 * n * PI.ln()
        + (0.5 * delta - 1.0) * (n - 1.0) * sp.a_hub.ln()
        - e * gap.ln()
        + special::ln_gamma(e)
        + special::ln_gamma(0.5 * delta))
}

fn log_norm_star_all(
    graph: &ColoredGraph,
    delta: f64,
    d: &SymMatrix,
    series: &SeriesControl,
) -> Result<f64> {
    let sp = star_all_params(graph, d)?;
    if !star_all_in_cone(&sp) {
        return Err(Error::NotInDualCone);
    }
    let n = sp.b.len() as f64;
    let a = sp.a_hub;
    let m = 0.5 * (n + 1.0) * delta;
    let u = 4.0 * norm_sq(&sp.b) / ((n + 1.0) * a * (n + 1.0) * a);
    let f = special::gauss_2f1(0.5 * m, 0.5 * m + 0.5, 0.5 * (n + delta), u, series)?;
    // The C_n = 2π^{n/2}/Γ(n/2) prefactor cancels the Γ(n/2) of the Beta
    // factor B(δ/2, n/2), leaving Γ(δ/2)/Γ((n+δ)/2).
    Ok(m * LN_2 + 0.5 * n * PI.ln() + special::ln_gamma(m) - m * ((n + 1.0) * a).ln()
        + special::ln_gamma(0.5 * delta)
        - special::ln_gamma(0.5 * (n + delta))
        + f.ln())
}

fn log_norm_triangle(graph: &ColoredGraph, delta: f64, d: &SymMatrix) -> Result<f64> {
    let t = triangle_params(graph, d)?;
    if !triangle_in_cone(&t) {
        return Err(Error::NotInDualCone);
    }
    let dd = t.d11 + t.d22 + 2.0 * t.d12;
    let e = 0.5 * (delta + 1.0);
    Ok(0.5 * (3.0 * delta + 4.0) * LN_2
        + PI.ln()
        + special::ln_gamma(0.5 * delta)
        + 2.0 * special::ln_gamma(e)
        + 0.5 * delta * dd.ln()
        - e * (t.d33 * dd - 4.0 * t.d13 * t.d13).ln()
        - e * (t.d11 * t.d22 - t.d12 * t.d12).ln())
}

fn log_norm_decomp4(graph: &ColoredGraph, delta: f64, d: &SymMatrix) -> Result<f64> {
    let t = decomp4_params(graph, d)?;
    if !decomp4_in_cone(&t) {
        return Err(Error::NotInDualCone);
    }
    let dd = t.d11 + t.d22 + 2.0 * t.d12;
    Ok((delta + 2.0) * LN_2
        + 1.5 * PI.ln()
        + special::ln_gamma(0.5 * delta)
        + special::ln_gamma(0.5 * (delta + 1.0))
        + special::ln_gamma(delta)
        + (delta - 1.0) * dd.ln()
        - 0.5 * (delta + 1.0) * (t.d11 * t.d22 - t.d12 * t.d12).ln()
        - delta * (t.d33 * dd - 2.0 * (t.d13 * t.d13 + t.d14 * t.d14)).ln())
}

// ---------------------------------------------------------------------------
// Exact means by class-wise differentiation
// ---------------------------------------------------------------------------

/// E(K) under the colored Wishart (δ, D) for a recognized family.
///
/// Differentiates log I with respect to −D/2 by central finite differences,
/// one color class at a time: all scale entries of the class move together,
/// so every class of size r contributes r equal coordinates and the mean
/// entry is −2g/r for a vertex class and −g/r for an edge class (off-diagonal
/// entries appear twice in ⟨K, D⟩), where g is the directional derivative.
///
/// Steps start at 1e−5 times the representative entry magnitude and halve
/// while a stencil point leaves the dual cone; [`Error::StepTooLarge`] is
/// returned if no admissible step above 1e−12 times the magnitude exists.
pub fn exact_mean(
    graph: &ColoredGraph,
    family: GraphFamily,
    delta: f64,
    d: &SymMatrix,
    ctrl: &QuadControl,
) -> Result<SymMatrix> {
    if d.dim() != graph.p() {
        return Err(Error::DimensionMismatch { expected: graph.p(), got: d.dim() });
    }
    if !dual_cone_check(graph, family, d)? {
        return Err(Error::NotInDualCone);
    }
    let mut mean = SymMatrix::zeros(graph.p());
    for class in graph.vertex_classes() {
        let positions: Vec<(usize, usize)> = class.iter().map(|&v| (v, v)).collect();
        let label: Vec<usize> = class.iter().map(|&v| v + 1).collect();
        let g = class_log_derivative(graph, family, delta, d, ctrl, &positions, &format!("vertex class {label:?}"))?;
        let value = -2.0 * g / class.len() as f64;
        for &v in class {
            mean.set(v, v, value);
        }
    }
    for class in graph.edge_classes() {
        let label: Vec<(usize, usize)> = class.iter().map(|&(i, j)| (i + 1, j + 1)).collect();
        let g = class_log_derivative(graph, family, delta, d, ctrl, class, &format!("edge class {label:?}"))?;
        let value = -g / class.len() as f64;
        for &(i, j) in class {
            mean.set(i, j, value);
        }
    }
    Ok(mean)
}

fn shifted(d: &SymMatrix, positions: &[(usize, usize)], h: f64) -> SymMatrix {
    let mut out = d.clone();
    for &(i, j) in positions {
        out.set(i, j, d.get(i, j) + h);
    }
    out
}

fn class_log_derivative(
    graph: &ColoredGraph,
    family: GraphFamily,
    delta: f64,
    d: &SymMatrix,
    ctrl: &QuadControl,
    positions: &[(usize, usize)],
    label: &str,
) -> Result<f64> {
    let rep = positions
        .iter()
        .map(|&(i, j)| d.get(i, j).abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let mut h = 1e-5 * rep;
    let h_min = 1e-12 * rep;
    loop {
        let plus = log_norm(graph, family, delta, &shifted(d, positions, h), ctrl);
        let minus = log_norm(graph, family, delta, &shifted(d, positions, -h), ctrl);
        match (plus, minus) {
            (Ok(lp), Ok(lm)) => return Ok((lp - lm) / (2.0 * h)),
            (Err(Error::NotInDualCone), _) | (_, Err(Error::NotInDualCone)) => {
                h *= 0.5;
                if h < h_min {
                    return Err(Error::StepTooLarge(format!(
                        "differentiation step for {label} reaches the dual-cone boundary even at its minimum size"
                    )));
                }
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
}

// ---------------------------------------------------------------------------
// Monte-Carlo reference for the normalizing constant
// ---------------------------------------------------------------------------

/// Importance-sampling estimate of I_𝒢(δ, D) with a standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    /// Estimated normalizing constant.
    pub value: f64,
    /// Standard error of `value`.
    pub std_err: f64,
    /// Log of the deterministic envelope constant.
    pub log_const: f64,
    /// Mean importance weight (invalid draws count as zero).
    pub mean_h: f64,
    /// Standard error of the mean weight.
    pub se_h: f64,
    /// Draws whose completion stayed valid.
    pub n_valid: usize,
    /// Total draws.
    pub n_draws: usize,
}

impl McEstimate {
    /// Whether `target` lies within `n_se` standard errors of the estimate.
    ///
    /// A small relative floor keeps the check meaningful when the sampler is
    /// exact and the standard error collapses to zero.
    pub fn agrees_with(&self, target: f64, n_se: f64) -> bool {
        let floor = 1e-12 * self.value.abs().max(target.abs());
        (self.value - target).abs() <= n_se * self.std_err + floor
    }
}

/// Draws per independent RNG stream; estimates are reproducible for a fixed
/// seed regardless of thread count because each chunk owns a stream and the
/// chunk summaries are merged in index order.
const MC_CHUNK: usize = 1 << 18;

/// Estimates I_𝒢(δ, D) by importance sampling in Ψ-space.
///
/// Free off-diagonal coordinates are drawn standard normal and free diagonal
/// coordinates as χ-distributed with the row degrees of freedom, which is
/// exactly the free-coordinate factor of the density; the weight of a draw is
/// then h(Ψ) from the completed non-free entries, and
///
/// ```text
///   I = 2^{|V_c|} ∏_i Q_ii^{p−v_i−d_i+δ−1} ∏_{free diag} 2^{ν_i/2−1}Γ(ν_i/2)
///       · (2π)^{m/2} · E[h],
/// ```
///
/// with m the number of free off-diagonal coordinates. Draws whose
/// completion fails contribute zero weight. Restricted to p ≤ 4, where the
/// estimator is accurate at modest draw counts; the reported standard error
/// assumes the weights have finite variance, which holds for the shapes used
/// here (δ ≥ 1).
pub fn mc_norm_oracle(
    graph: &ColoredGraph,
    delta: f64,
    d: &SymMatrix,
    n_draws: usize,
    seed: u64,
) -> Result<McEstimate> {
    let p = graph.p();
    if d.dim() != p {
        return Err(Error::DimensionMismatch { expected: p, got: d.dim() });
    }
    if p > 4 {
        return Err(Error::InvalidConfig(format!(
            "the Monte-Carlo reference is restricted to p <= 4, got p = {p}"
        )));
    }
    if n_draws == 0 {
        return Err(Error::InvalidConfig("need at least one draw".into()));
    }
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::UnsupportedOrder(delta));
    }
    let map = graph.free_entry_map();
    let q = d
        .factor_upper_transpose(FactorRole::Q)
        .ok_or(Error::DNotPositiveDefinite)?
        .invert();
    let mut log_const = map.n_vertex_classes() as f64 * LN_2;
    for i in 0..p {
        let exponent = p as f64 - (map.v(i) + map.d(i)) as f64 + delta - 1.0;
        log_const += exponent * q.get(i, i).ln();
    }
    let mut diag_dists: Vec<Option<Gamma<f64>>> = vec![None; map.n_free()];
    for (row, idx) in map.free_diagonals() {
        let nu = sampler::proposal_dof(p, map.v(row), row, delta);
        if nu <= 0.0 {
            return Err(Error::InvalidDoF { index: row, value: nu });
        }
        log_const += (0.5 * nu - 1.0) * LN_2 + special::ln_gamma(0.5 * nu);
        diag_dists[idx] = Some(Gamma::new(0.5 * nu, 2.0).expect("positive shape and scale"));
    }
    log_const += 0.5 * map.n_free_offdiag() as f64 * (2.0 * PI).ln();

    let n_chunks = n_draws.div_ceil(MC_CHUNK);
    let stats: Vec<(usize, usize, f64, f64)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * MC_CHUNK;
            let hi = ((c + 1) * MC_CHUNK).min(n_draws);
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(c as u64 + 1);
            let mut free = vec![0.0f64; map.n_free()];
            let mut count = 0usize;
            let mut valid = 0usize;
            let mut mean = 0.0f64;
            let mut m2 = 0.0f64;
            for _ in lo..hi {
                for (idx, &(i, j)) in map.free_set().iter().enumerate() {
                    free[idx] = if i == j {
                        let x: f64 =
                            diag_dists[idx].as_ref().expect("diagonal proposal").sample(&mut rng);
                        x.sqrt()
                    } else {
                        rng.sample(StandardNormal)
                    };
                }
                let h = match completion::complete_psi(&free, &q, &map) {
                    Ok(psi) => {
                        valid += 1;
                        sampler::log_h(&psi, &map, delta).exp()
                    }
                    Err(_) => 0.0,
                };
                count += 1;
                let step = h - mean;
                mean += step / count as f64;
                m2 += step * (h - mean);
            }
            (count, valid, mean, m2)
        })
        .collect();

    let mut count = 0usize;
    let mut valid = 0usize;
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for &(c2, v2, mean2, m22) in &stats {
        if c2 == 0 {
            continue;
        }
        let n1 = count as f64;
        let n2 = c2 as f64;
        let gap = mean2 - mean;
        mean += gap * n2 / (n1 + n2);
        m2 += m22 + gap * gap * n1 * n2 / (n1 + n2);
        count += c2;
        valid += v2;
    }
    if valid == 0 {
        return Err(Error::DegenerateEnvelope);
    }
    let variance = if count > 1 { m2 / (count as f64 - 1.0) } else { 0.0 };
    let se_h = (variance / count as f64).sqrt();
    let envelope = log_const.exp();
    Ok(McEstimate {
        value: envelope * mean,
        std_err: envelope * se_h,
        log_const,
        mean_h: mean,
        se_h,
        n_valid: valid,
        n_draws,
    })
}
