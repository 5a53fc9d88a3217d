//! Dense symmetric matrices and upper-triangular factors.
//!
//! The sampler works with three upper-triangular factors: Q (from the scale
//! matrix, QᵀQ = D⁻¹), Φ (Cholesky-type factor of K = ΦᵀΦ), and Ψ = ΦQ⁻¹.
//! [`FactorRole`] tags which role a factor plays; the tag is advisory and
//! carries no behavior.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TOL_EQ;

/// Dense symmetric matrix, stored as a full row-major `p × p` buffer.
///
/// `set` writes both mirror entries, so the buffer stays exactly symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    p: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Zero matrix of dimension `p`.
    pub fn zeros(p: usize) -> Self {
        SymMatrix { p, data: vec![0.0; p * p] }
    }

    /// Identity matrix of dimension `p`.
    pub fn identity(p: usize) -> Self {
        let mut m = Self::zeros(p);
        for i in 0..p {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds from square rows; off-diagonal mirrors must agree within
    /// [`TOL_EQ`] and are averaged.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        for row in rows {
            if row.len() != p {
                return Err(Error::DimensionMismatch { expected: p, got: row.len() });
            }
        }
        let mut m = Self::zeros(p);
        for i in 0..p {
            for j in i..p {
                let a = rows[i][j];
                let b = rows[j][i];
                if (a - b).abs() > TOL_EQ * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::Parse(format!(
                        "matrix not symmetric at ({}, {}): {} vs {}",
                        i + 1,
                        j + 1,
                        a,
                        b
                    )));
                }
                m.set(i, j, 0.5 * (a + b));
            }
        }
        Ok(m)
    }

    /// Dimension `p`.
    pub fn dim(&self) -> usize {
        self.p
    }

    /// Entry `(i, j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.p + j]
    }

    /// Sets entry `(i, j)` and its mirror.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.p + j] = v;
        self.data[j * self.p + i] = v;
    }

    /// Rows as nested vectors (for serialization).
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.p).map(|i| self.data[i * self.p..(i + 1) * self.p].to_vec()).collect()
    }

    /// Adds `c · other` in place.
    pub fn axpy(&mut self, c: f64, other: &SymMatrix) {
        assert_eq!(self.p, other.p, "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    /// Scales every entry in place.
    pub fn scale(&mut self, c: f64) {
        for a in &mut self.data {
            *a *= c;
        }
    }

    /// Frobenius norm over all `p²` entries.
    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Squared Frobenius distance to `other` over all `p²` entries.
    pub fn frob_dist_sq(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.p, other.p, "dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// Inner product ⟨A, B⟩ = tr(AB) = Σ_ij A_ij B_ij.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.p, other.p, "dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// Factors `self = U Uᵀ` with `U` upper triangular and positive diagonal.
    ///
    /// Returns `None` when `self` is not positive definite. This is the
    /// reversed-order analogue of the usual lower Cholesky factorization:
    /// with J the index-reversal permutation, `J·self·J = L̃ L̃ᵀ` and
    /// `U = J L̃ J`. The factor exists iff `self` is positive definite.
    pub fn factor_upper_transpose(&self, role: FactorRole) -> Option<UpperFactor> {
        let p = self.p;
        // Lower Cholesky of the index-reversed matrix.
        let rev = |i: usize| p - 1 - i;
        let mut l = vec![0.0f64; p * p];
        for i in 0..p {
            for j in 0..=i {
                let mut s = self.get(rev(i), rev(j));
                for k in 0..j {
                    s -= l[i * p + k] * l[j * p + k];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return None;
                    }
                    l[i * p + i] = s.sqrt();
                } else {
                    l[i * p + j] = s / l[j * p + j];
                }
            }
        }
        let mut u = UpperFactor::zeros(p, role);
        for i in 0..p {
            for j in 0..=i {
                u.set(rev(i), rev(j), l[i * p + j]);
            }
        }
        Some(u)
    }

    /// Factors `self = Φᵀ Φ` with `Φ` upper triangular and positive
    /// diagonal (the transpose of the usual lower Cholesky factor).
    ///
    /// Returns `None` when `self` is not positive definite.
    pub fn cholesky_upper(&self, role: FactorRole) -> Option<UpperFactor> {
        let p = self.p;
        let mut u = UpperFactor::zeros(p, role);
        for j in 0..p {
            for i in 0..=j {
                let mut s = self.get(i, j);
                for k in 0..i {
                    s -= u.get(k, i) * u.get(k, j);
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return None;
                    }
                    u.set(i, i, s.sqrt());
                } else {
                    u.set(i, j, s / u.get(i, i));
                }
            }
        }
        Some(u)
    }

    /// Whether `self` is positive definite.
    pub fn is_positive_definite(&self) -> bool {
        self.factor_upper_transpose(FactorRole::Phi).is_some()
    }

    /// Inverse via the `U Uᵀ` factorization; `None` when not positive
    /// definite. Used only by tests and small reference computations.
    pub fn inverse(&self) -> Option<SymMatrix> {
        let u = self.factor_upper_transpose(FactorRole::Phi)?;
        let uinv = u.invert();
        // self⁻¹ = U⁻ᵀ U⁻¹ = (U⁻¹)ᵀ? No: self = U Uᵀ ⇒ self⁻¹ = U⁻ᵀ U⁻¹.
        let p = self.p;
        let mut out = SymMatrix::zeros(p);
        for i in 0..p {
            for j in i..p {
                // (U⁻ᵀ U⁻¹)_ij = Σ_k (U⁻¹)_ki (U⁻¹)_kj, k ≤ min(i, j).
                let mut s = 0.0;
                for k in 0..=i.min(j) {
                    s += uinv.get(k, i) * uinv.get(k, j);
                }
                out.set(i, j, s);
            }
        }
        Some(out)
    }
}

/// Role an upper-triangular factor plays in the reparameterization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorRole {
    /// Factor of the inverse scale: QᵀQ = D⁻¹.
    Q,
    /// Factor of the precision: K = ΦᵀΦ.
    Phi,
    /// Standardized factor Ψ = ΦQ⁻¹.
    Psi,
}

/// Upper-triangular matrix with a role tag; strictly lower entries are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperFactor {
    p: usize,
    role: FactorRole,
    data: Vec<f64>,
}

impl UpperFactor {
    /// Zero factor of dimension `p`.
    pub fn zeros(p: usize, role: FactorRole) -> Self {
        UpperFactor { p, role, data: vec![0.0; p * p] }
    }

    /// Dimension `p`.
    pub fn dim(&self) -> usize {
        self.p
    }

    /// Role tag.
    pub fn role(&self) -> FactorRole {
        self.role
    }

    /// Entry `(i, j)` with `i ≤ j`; strictly lower reads return 0.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.p + j]
    }

    /// Sets entry `(i, j)`; panics on strictly lower writes.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i <= j, "write below the diagonal");
        self.data[i * self.p + j] = v;
    }

    /// Product `self · rhs` of upper-triangular factors (upper triangular).
    pub fn mul_upper(&self, rhs: &UpperFactor, role: FactorRole) -> UpperFactor {
        assert_eq!(self.p, rhs.p, "dimension mismatch");
        let p = self.p;
        let mut out = UpperFactor::zeros(p, role);
        for i in 0..p {
            for j in i..p {
                let mut s = 0.0;
                for k in i..=j {
                    s += self.get(i, k) * rhs.get(k, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    /// Gram matrix `selfᵀ · self` (symmetric).
    pub fn gram(&self) -> SymMatrix {
        let p = self.p;
        let mut out = SymMatrix::zeros(p);
        for i in 0..p {
            for j in i..p {
                let mut s = 0.0;
                // Column i and column j share lead entries up to row min(i,j) = i.
                for k in 0..=i {
                    s += self.get(k, i) * self.get(k, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    /// Inverse by back substitution; panics on zero diagonal (callers check
    /// positive-definiteness when constructing factors).
    pub fn invert(&self) -> UpperFactor {
        let p = self.p;
        let mut out = UpperFactor::zeros(p, self.role);
        for j in (0..p).rev() {
            let djj = self.get(j, j);
            assert!(djj != 0.0, "singular triangular factor");
            out.set(j, j, 1.0 / djj);
            for i in (0..j).rev() {
                let mut s = 0.0;
                for k in (i + 1)..=j {
                    s += self.get(i, k) * out.get(k, j);
                }
                out.set(i, j, -s / self.get(i, i));
            }
        }
        out
    }

    /// Solves `selfᵀ · x = b` in place (forward substitution on the lower
    /// triangular transpose).
    pub fn solve_transpose_in_place(&self, b: &mut [f64]) {
        let p = self.p;
        assert_eq!(b.len(), p, "dimension mismatch");
        for i in 0..p {
            let mut s = b[i];
            for k in 0..i {
                s -= self.get(k, i) * b[k];
            }
            b[i] = s / self.get(i, i);
        }
    }

    /// Sum of logs of the diagonal.
    pub fn log_det(&self) -> f64 {
        (0..self.p).map(|i| self.get(i, i).ln()).sum()
    }
}

/// Determinant of a dense square matrix by LU with partial pivoting.
///
/// `a` is row-major `n × n` and is destroyed. Used by finite-difference
/// Jacobian checks; not on any sampling path.
pub fn determinant_dense(n: usize, a: &mut [f64]) -> f64 {
    assert_eq!(a.len(), n * n, "dimension mismatch");
    let mut det = 1.0f64;
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in (col + 1)..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for r in (col + 1)..n {
            let f = a[r * n + col] / d;
            if f != 0.0 {
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
            }
        }
    }
    det
}
