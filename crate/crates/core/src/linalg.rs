//! Symmetric tridiagonal matrices and the handful of factorizations the
//! P1 assembly needs: LDLᵀ pivot counting (Sylvester inertia) and a
//! partially pivoted LU solve for indefinite systems.

use nalgebra::{DMatrix, DVector};

/// Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            diag: vec![1.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut y = DVector::zeros(n);
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    /// `xᵀ T y`.
    pub fn bilinear(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&self.mul_vec(y))
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &SymTridiag) -> SymTridiag {
        assert_eq!(self.dim(), other.dim());
        SymTridiag {
            diag: self
                .diag
                .iter()
                .zip(&other.diag)
                .map(|(a, b)| a + alpha * b)
                .collect(),
            off: self
                .off
                .iter()
                .zip(&other.off)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> SymTridiag {
        SymTridiag {
            diag: self.diag.iter().map(|d| c * d).collect(),
            off: self.off.iter().map(|o| c * o).collect(),
        }
    }

    pub fn shifted(&self, sigma: f64) -> SymTridiag {
        SymTridiag {
            diag: self.diag.iter().map(|d| d + sigma).collect(),
            off: self.off.clone(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.off)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.off[i];
                m[(i + 1, i)] = self.off[i];
            }
        }
        m
    }

    /// Number of negative pivots of the LDLᵀ recurrence, or `None` when a
    /// pivot is exactly zero and the count is undefined.
    pub fn negative_pivots(&self) -> Option<usize> {
        let mut count = 0;
        let mut d = 0.0;
        for i in 0..self.dim() {
            d = if i == 0 {
                self.diag[0]
            } else {
                self.diag[i] - self.off[i - 1] * self.off[i - 1] / d
            };
            if d == 0.0 {
                return None;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        Some(count)
    }

    /// Sturm count: number of eigenvalues of the pencil `(self, mass)` below
    /// `sigma`. Exact zero pivots are nudged so the count is always defined.
    pub fn count_below(&self, mass: &SymTridiag, sigma: f64) -> usize {
        let n = self.dim();
        let tiny = f64::EPSILON * (self.max_abs() + sigma.abs() * mass.max_abs()).max(1e-300);
        let mut count = 0;
        let mut d = 0.0;
        for i in 0..n {
            let a = self.diag[i] - sigma * mass.diag[i];
            d = if i == 0 {
                a
            } else {
                let b = self.off[i - 1] - sigma * mass.off[i - 1];
                a - b * b / d
            };
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }
}

/// Error raised by [`TridiagLu`] on an exactly singular pivot.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("tridiagonal system is singular at row {row}")]
pub struct SingularPivot {
    pub row: usize,
}

/// LU factorization with partial pivoting of a tridiagonal matrix (the
/// `gttrf`/`gttrs` scheme). Works for indefinite symmetric matrices.
#[derive(Debug, Clone)]
pub struct TridiagLu {
    l: Vec<f64>,
    d: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    pub fn factor(t: &SymTridiag) -> Result<Self, SingularPivot> {
        let n = t.dim();
        let mut d = t.diag.clone();
        let mut u1 = t.off.clone();
        let mut sub = t.off.clone();
        let mut u2 = vec![0.0; n.saturating_sub(2)];
        let mut l = vec![0.0; n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= sub[i].abs() {
                if d[i] == 0.0 {
                    return Err(SingularPivot { row: i });
                }
                let f = sub[i] / d[i];
                l[i] = f;
                d[i + 1] -= f * u1[i];
            } else {
                let f = d[i] / sub[i];
                swapped[i] = true;
                l[i] = f;
                d[i] = sub[i];
                let tmp = u1[i];
                u1[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 1 < n - 1 {
                    u2[i] = u1[i + 1];
                    u1[i + 1] = -f * u1[i + 1];
                }
            }
            sub[i] = 0.0;
        }
        if n > 0 && d[n - 1] == 0.0 {
            return Err(SingularPivot { row: n - 1 });
        }
        Ok(Self {
            l,
            d,
            u1,
            u2,
            swapped,
        })
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let n = self.d.len();
        let mut x = rhs.clone();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let tmp = x[i];
                x[i] = x[i + 1];
                x[i + 1] = tmp - self.l[i] * x[i];
            } else {
                x[i + 1] -= self.l[i] * x[i];
            }
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            if i + 1 < n {
                v -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                v -= self.u2[i] * x[i + 2];
            }
            x[i] = v / self.d[i];
        }
        x
    }
}

/// Modified Gram–Schmidt with one reorthogonalization pass; returns the
/// orthonormalized columns, dropping those that fall below `drop_tol` after
/// projection.
pub fn orthonormal_columns(cols: &[DVector<f64>], drop_tol: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(cols.len());
    for c in cols {
        let mut v = c.clone();
        let norm0 = v.norm();
        for _ in 0..2 {
            for q in &out {
                let proj = q.dot(&v);
                v.axpy(-proj, q, 1.0);
            }
        }
        let norm = v.norm();
        if norm > drop_tol * norm0.max(1.0) {
            out.push(v / norm);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SymTridiag {
        SymTridiag {
            diag: vec![2.0, -1.0, 0.5, 3.0, -2.0],
            off: vec![1.0, 0.3, -2.0, 0.7],
        }
    }

    #[test]
    fn lu_solves_indefinite_system() {
        let t = sample();
        let lu = TridiagLu::factor(&t).unwrap();
        let b = DVector::from_vec(vec![1.0, 2.0, -1.0, 0.5, 4.0]);
        let x = lu.solve(&b);
        let r = t.mul_vec(&x) - &b;
        assert!(r.amax() < 1e-12, "residual {}", r.amax());
    }

    #[test]
    fn lu_handles_zero_leading_pivot() {
        let t = SymTridiag {
            diag: vec![0.0, 0.0, 1.0],
            off: vec![1.0, 1.0],
        };
        let lu = TridiagLu::factor(&t).unwrap();
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = lu.solve(&b);
        assert!((t.mul_vec(&x) - b).amax() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let t = SymTridiag {
            diag: vec![1.0, 1.0],
            off: vec![1.0],
        };
        assert!(TridiagLu::factor(&t).is_err());
    }

    #[test]
    fn pivot_count_matches_dense_eigenvalues() {
        let t = sample();
        let eig = t.to_dense().symmetric_eigenvalues();
        let neg = eig.iter().filter(|&&e| e < 0.0).count();
        assert_eq!(t.negative_pivots(), Some(neg));
        let id = SymTridiag::identity(5);
        for sigma in [-3.0, -0.5, 0.1, 1.7, 4.0] {
            let below = eig.iter().filter(|&&e| e < sigma).count();
            assert_eq!(t.count_below(&id, sigma), below);
        }
    }

    #[test]
    fn gram_schmidt_drops_dependent_columns() {
        let a = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let b = DVector::from_vec(vec![2.0, 0.0, 0.0]);
        let c = DVector::from_vec(vec![1.0, 1.0, 0.0]);
        let q = orthonormal_columns(&[a, b, c], 1e-12);
        assert_eq!(q.len(), 2);
        assert!(q[0].dot(&q[1]).abs() < 1e-15);
    }
}
