//! Completion recursions for the upper-triangular reparameterizations.
//!
//! With D⁻¹ = QᵀQ (Q upper, positive diagonal), every precision matrix in
//! the colored cone factors as K = ΦᵀΦ and standardizes to Ψ = ΦQ⁻¹. The
//! free coordinates of Ψ (one per color class, at the class representatives)
//! determine every other entry of Ψ and Φ through recursions that visit the
//! upper triangle in lexicographic row-major order:
//!
//! * free entry: Ψ_ij given, Φ_ij = Σ_{k=i..j} Ψ_ik Q_kj;
//! * structural zero (non-edge): Φ_1j = 0 on the first row, otherwise
//!   Φ_ij = −(Σ_{k<i} Φ_ki Φ_kj)/Φ_ii, forcing K_ij = 0;
//! * tied edge with representative (a, b):
//!   Φ_ij = (Φ_ab Φ_aa + Σ_{k<a} Φ_ka Φ_kb − Σ_{k<i} Φ_ki Φ_kj)/Φ_ii,
//!   forcing K_ij = K_ab;
//! * tied diagonal with representative a: Φ_ii is the square root of
//!   Φ_aa² + Σ_{k<a} Φ_ka² − Σ_{k<i} Φ_ki², forcing K_ii = K_aa; a
//!   nonpositive radicand means no positive definite completion exists.
//!
//! Every non-free Φ entry then yields the matching Ψ entry by triangular
//! substitution in Φ = ΨQ. Each recursion only reads entries that precede
//! the current position (class representatives are lexicographic minima, so
//! they always precede the entries they determine); the loop asserts this at
//! run time with a computed-entry bitmap.

use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, EntryKind, FreeEntryMap};
use crate::matrix::{FactorRole, SymMatrix, UpperFactor};
use crate::{TOL_EQ, TOL_ZERO};

/// Both factors produced by a completion.
#[derive(Debug, Clone)]
pub struct Completion {
    /// Standardized factor Ψ.
    pub psi: UpperFactor,
    /// Cholesky-type factor Φ = ΨQ.
    pub phi: UpperFactor,
}

/// Completes Ψ and Φ from the free Ψ coordinates (lexicographic class
/// representative order) and the factor Q of the inverse scale.
///
/// Free diagonal coordinates must be positive. Fails with
/// [`Error::NonpositiveDiagonal`] when a tied diagonal has a nonpositive
/// radicand, i.e. the free values admit no positive definite completion.
pub fn complete_both(free_psi: &[f64], q: &UpperFactor, map: &FreeEntryMap) -> Result<Completion> {
    let p = map.p();
    if q.dim() != p {
        return Err(Error::DimensionMismatch { expected: p, got: q.dim() });
    }
    if free_psi.len() != map.n_free() {
        return Err(Error::DimensionMismatch { expected: map.n_free(), got: free_psi.len() });
    }
    let mut psi = UpperFactor::zeros(p, FactorRole::Psi);
    let mut phi = UpperFactor::zeros(p, FactorRole::Phi);
    let mut done = vec![false; p * p];
    for i in 0..p {
        for j in i..p {
            match map.kind(i, j) {
                EntryKind::Free { idx } => {
                    let value = free_psi[idx];
                    if i == j && value <= TOL_ZERO {
                        return Err(Error::NonpositiveDiagonal { index: i + 1 });
                    }
                    psi.set(i, j, value);
                    let mut s = 0.0;
                    for k in i..=j {
                        debug_assert!(k == j || done[i * p + k], "psi ({i},{k}) not computed");
                        s += psi.get(i, k) * q.get(k, j);
                    }
                    phi.set(i, j, s);
                }
                EntryKind::StructuralZero => {
                    let value = if i == 0 {
                        0.0
                    } else {
                        let mut s = 0.0;
                        for k in 0..i {
                            debug_assert!(done[k * p + i] && done[k * p + j]);
                            s += phi.get(k, i) * phi.get(k, j);
                        }
                        -s / phi.get(i, i)
                    };
                    phi.set(i, j, value);
                    psi.set(i, j, psi_from_phi(&psi, &phi, q, i, j));
                }
                EntryKind::NonfreeEdge { rep: (a, b) } => {
                    debug_assert!((a, b) < (i, j), "representative must precede");
                    debug_assert!(done[a * p + b] && done[a * p + a]);
                    let mut s = phi.get(a, b) * phi.get(a, a);
                    for k in 0..a {
                        debug_assert!(done[k * p + a] && done[k * p + b]);
                        s += phi.get(k, a) * phi.get(k, b);
                    }
                    for k in 0..i {
                        debug_assert!(done[k * p + i] && done[k * p + j]);
                        s -= phi.get(k, i) * phi.get(k, j);
                    }
                    phi.set(i, j, s / phi.get(i, i));
                    psi.set(i, j, psi_from_phi(&psi, &phi, q, i, j));
                }
                EntryKind::NonfreeDiag { rep: a } => {
                    debug_assert!(a < i, "representative must precede");
                    debug_assert!(done[a * p + a]);
                    let mut rad = phi.get(a, a) * phi.get(a, a);
                    for k in 0..a {
                        debug_assert!(done[k * p + a]);
                        rad += phi.get(k, a) * phi.get(k, a);
                    }
                    for k in 0..i {
                        debug_assert!(done[k * p + i]);
                        rad -= phi.get(k, i) * phi.get(k, i);
                    }
                    if rad <= TOL_ZERO {
                        return Err(Error::NonpositiveDiagonal { index: i + 1 });
                    }
                    let value = rad.sqrt();
                    phi.set(i, i, value);
                    psi.set(i, i, value / q.get(i, i));
                }
            }
            done[i * p + j] = true;
        }
    }
    Ok(Completion { psi, phi })
}

/// Ψ_ij from Φ_ij by triangular substitution in Φ = ΨQ (off-diagonal case).
#[inline]
fn psi_from_phi(psi: &UpperFactor, phi: &UpperFactor, q: &UpperFactor, i: usize, j: usize) -> f64 {
    let mut s = phi.get(i, j);
    for k in i..j {
        s -= psi.get(i, k) * q.get(k, j);
    }
    s / q.get(j, j)
}

/// Completes Ψ from its free coordinates; see [`complete_both`].
pub fn complete_psi(free_psi: &[f64], q: &UpperFactor, map: &FreeEntryMap) -> Result<UpperFactor> {
    Ok(complete_both(free_psi, q, map)?.psi)
}

/// Completes Φ directly from its free coordinates (no Q involved).
///
/// Same recursions as [`complete_both`] with the free entries interpreted
/// as Φ values.
pub fn complete_phi(free_phi: &[f64], map: &FreeEntryMap) -> Result<UpperFactor> {
    let p = map.p();
    if free_phi.len() != map.n_free() {
        return Err(Error::DimensionMismatch { expected: map.n_free(), got: free_phi.len() });
    }
    let mut phi = UpperFactor::zeros(p, FactorRole::Phi);
    for i in 0..p {
        for j in i..p {
            match map.kind(i, j) {
                EntryKind::Free { idx } => {
                    let value = free_phi[idx];
                    if i == j && value <= TOL_ZERO {
                        return Err(Error::NonpositiveDiagonal { index: i + 1 });
                    }
                    phi.set(i, j, value);
                }
                EntryKind::StructuralZero => {
                    let value = if i == 0 {
                        0.0
                    } else {
                        let mut s = 0.0;
                        for k in 0..i {
                            s += phi.get(k, i) * phi.get(k, j);
                        }
                        -s / phi.get(i, i)
                    };
                    phi.set(i, j, value);
                }
                EntryKind::NonfreeEdge { rep: (a, b) } => {
                    let mut s = phi.get(a, b) * phi.get(a, a);
                    for k in 0..a {
                        s += phi.get(k, a) * phi.get(k, b);
                    }
                    for k in 0..i {
                        s -= phi.get(k, i) * phi.get(k, j);
                    }
                    phi.set(i, j, s / phi.get(i, i));
                }
                EntryKind::NonfreeDiag { rep: a } => {
                    let mut rad = phi.get(a, a) * phi.get(a, a);
                    for k in 0..a {
                        rad += phi.get(k, a) * phi.get(k, a);
                    }
                    for k in 0..i {
                        rad -= phi.get(k, i) * phi.get(k, i);
                    }
                    if rad <= TOL_ZERO {
                        return Err(Error::NonpositiveDiagonal { index: i + 1 });
                    }
                    phi.set(i, i, rad.sqrt());
                }
            }
        }
    }
    Ok(phi)
}

/// Reconstructs K = ΦᵀΦ with Φ = ΨQ.
pub fn reconstruct_k(psi: &UpperFactor, q: &UpperFactor) -> SymMatrix {
    psi.mul_upper(q, FactorRole::Phi).gram()
}

/// Log absolute Jacobian determinant of the free-coordinate map K → Φ:
/// log|∂K^v/∂Φ^v| = |𝒱_classes|·log 2 + Σ_i (p − i − v(i))·log Φ_ii
/// (0-based rows).
pub fn log_jacobian_phi(phi: &UpperFactor, map: &FreeEntryMap) -> f64 {
    let p = map.p();
    let mut s = map.n_vertex_classes() as f64 * std::f64::consts::LN_2;
    for i in 0..p {
        let e = (p - i - map.v(i)) as f64;
        s += e * phi.get(i, i).ln();
    }
    s
}

/// Log absolute Jacobian determinant of the free-coordinate map Φ → Ψ:
/// log|∂Φ^v/∂Ψ^v| = Σ_i (i + 1 − d(i))·log Q_ii (0-based columns).
pub fn log_jacobian_psi(q: &UpperFactor, map: &FreeEntryMap) -> f64 {
    let p = map.p();
    let mut s = 0.0;
    for i in 0..p {
        let e = (i + 1 - map.d(i)) as f64;
        s += e * q.get(i, i).ln();
    }
    s
}

/// Unnormalized log density of the free Ψ coordinates under the colored
/// G-Wishart law with degrees of freedom `delta`, evaluated on the completed
/// factor:
///
/// ```text
///   |𝒱_classes|·log 2 + Σ_i (p − v(i) − d(i) + δ − 1)·log Q_ii
///   + Σ_i (p − i − 1 − v(i) + δ − 1)·log Ψ_ii − ½·Σ_{i≤j} Ψ_ij²
/// ```
///
/// (0-based rows; the Ψ sum runs over the whole upper triangle).
pub fn log_density_psi(psi: &UpperFactor, q: &UpperFactor, map: &FreeEntryMap, delta: f64) -> f64 {
    let p = map.p();
    let mut s = map.n_vertex_classes() as f64 * std::f64::consts::LN_2;
    for i in 0..p {
        // Exponents may be negative for small delta; keep the arithmetic in f64.
        let eq = p as f64 - (map.v(i) + map.d(i)) as f64 + delta - 1.0;
        s += eq * q.get(i, i).ln();
        let epsi = (p as f64 - (i + 1 + map.v(i)) as f64) + delta - 1.0;
        s += epsi * psi.get(i, i).ln();
        for j in i..p {
            let x = psi.get(i, j);
            s -= 0.5 * x * x;
        }
    }
    s
}

/// Whether K lies in the colored cone: positive definite, zero at
/// non-edges (within [`TOL_ZERO`] scaled by the largest entry), and
/// class-constant (within [`TOL_EQ`]).
pub fn is_in_cone(k: &SymMatrix, g: &ColoredGraph) -> bool {
    let p = g.p();
    if k.dim() != p {
        return false;
    }
    let scale = (0..p).map(|i| k.get(i, i).abs()).fold(1.0f64, f64::max);
    for i in 0..p {
        for j in (i + 1)..p {
            if !g.is_edge(i, j) && k.get(i, j).abs() > TOL_ZERO * scale {
                return false;
            }
        }
    }
    for class in g.vertex_classes() {
        let rep = k.get(class[0], class[0]);
        for &v in class {
            if (k.get(v, v) - rep).abs() > TOL_EQ * rep.abs().max(1.0) {
                return false;
            }
        }
    }
    for class in g.edge_classes() {
        let (a, b) = class[0];
        let rep = k.get(a, b);
        for &(i, j) in class {
            if (k.get(i, j) - rep).abs() > TOL_EQ * rep.abs().max(1.0) {
                return false;
            }
        }
    }
    // Factor in K's native orientation (K = ΦᵀΦ): on ill-conditioned draws
    // the reversed factorization can lose a tiny pivot to rounding that the
    // forward one resolves.
    k.cholesky_upper(FactorRole::Phi).is_some()
}

/// Orthogonal projection of a symmetric matrix onto the linear span of the
/// colored pattern: class entries are averaged, non-edges are zeroed.
pub fn project_to_colored(s: &SymMatrix, g: &ColoredGraph) -> SymMatrix {
    let p = g.p();
    assert_eq!(s.dim(), p, "dimension mismatch");
    let mut out = SymMatrix::zeros(p);
    for class in g.vertex_classes() {
        let mean = class.iter().map(|&v| s.get(v, v)).sum::<f64>() / class.len() as f64;
        for &v in class {
            out.set(v, v, mean);
        }
    }
    for class in g.edge_classes() {
        let mean = class.iter().map(|&(i, j)| s.get(i, j)).sum::<f64>() / class.len() as f64;
        for &(i, j) in class {
            out.set(i, j, mean);
        }
    }
    out
}

/// Reads the free coordinates of a matrix in the colored cone (values at the
/// class representatives, lexicographic order).
pub fn extract_free(k: &SymMatrix, map: &FreeEntryMap) -> Vec<f64> {
    map.free_set().iter().map(|&(i, j)| k.get(i, j)).collect()
}
