//! Eigenvalues of the one-dimensional p-Laplacian and symmetric
//! tridiagonal pencil queries (inertia, lowest eigenpairs).
//!
//! On `(0, L)` the Dirichlet spectrum of `−Δ_p` is exactly the sequence
//! `λ_m = (p−1)(m π_p / L)^p`. The minimax sequence built from the
//! cohomological index is taken to coincide with it; reports restate this
//! modelling assumption.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::discretization::{AssembledQuadratic, DiscreteField};
use crate::error::{Error, Result};
use crate::linalg::SymTridiag;

/// Relative tolerance used to decide that `λ` sits on the spectrum.
pub const RESONANCE_RTOL: f64 = 1e-8;
/// Zero band of the inertia count, relative to `‖A − M‖_max`.
pub const ZERO_PIVOT_RTOL: f64 = 1e-10;

/// Stated in every report that relies on [`SpectrumTable`].
pub const SPECTRUM_NOTE: &str = "variational eigenvalues taken equal to the 1-D Dirichlet spectrum (p-1)(m*pi_p/L)^p";

/// `π_p = 2π / (p sin(π/p))`.
pub fn pi_p(p: f64) -> f64 {
    2.0 * PI / (p * (PI / p).sin())
}

/// `λ_m = (p − 1)(m π_p / L)^p`.
pub fn eigenvalue_1d(p: f64, length: f64, m: usize) -> f64 {
    (p - 1.0) * (m as f64 * pi_p(p) / length).powf(p)
}

/// `λ₁ < … < λ_M` with the convention `λ₀ = −∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub p: f64,
    pub length: f64,
    values: Vec<f64>,
}

impl SpectrumTable {
    pub fn new(p: f64, length: f64, count: usize) -> Self {
        Self {
            p,
            length,
            values: (1..=count).map(|m| eigenvalue_1d(p, length, m)).collect(),
        }
    }

    /// Smallest table (at least `min_count` entries) whose last value exceeds
    /// `lambda`, so that `lambda` is bracketed.
    pub fn covering(p: f64, length: f64, lambda: f64, min_count: usize) -> Self {
        let mut count = min_count.max(1);
        while eigenvalue_1d(p, length, count) <= lambda.abs() && count < 1 << 20 {
            count *= 2;
        }
        Self::new(p, length, count)
    }

    /// `λ_m`, with `λ₀ = −∞`.
    pub fn get(&self, m: usize) -> f64 {
        if m == 0 {
            f64::NEG_INFINITY
        } else {
            self.values[m - 1]
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `m,lambda_m` plain-text table.
    pub fn to_table(&self) -> String {
        let mut out = String::from("m,lambda_m\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{:.15e}\n", i + 1, v));
        }
        out
    }

    fn nearest(&self, lambda: f64) -> Option<(usize, f64)> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i + 1, (lambda - v).abs() / v.abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Which end of the bracket `λ_m ? λ ? λ_{m+1}` is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `λ_m < λ < λ_{m+1}`
    Strict,
    /// `λ_m ≤ λ < λ_{m+1}`
    LeftClosed,
    /// `λ_m < λ ≤ λ_{m+1}`
    RightClosed,
}

/// Position `m_∞` of `lambda` in the table.
pub fn locate_m_infinity(table: &SpectrumTable, lambda: f64, side: Side) -> Result<usize> {
    let last = *table.values.last().ok_or(Error::TableTooShort {
        lambda,
        len: 0,
    })?;
    if lambda >= last * (1.0 - RESONANCE_RTOL) {
        return Err(Error::TableTooShort {
            lambda,
            len: table.len(),
        });
    }
    let on = |m: usize| m >= 1 && (lambda - table.get(m)).abs() <= RESONANCE_RTOL * table.get(m).abs();
    // Largest m with λ_m strictly below λ (outside the resonance band).
    let below = table
        .values
        .iter()
        .take_while(|&&v| v < lambda && !((lambda - v).abs() <= RESONANCE_RTOL * v.abs()))
        .count();
    if on(below + 1) {
        return match side {
            Side::Strict => Err(Error::Resonant {
                lambda,
                index: below + 1,
                eigenvalue: table.get(below + 1),
            }),
            Side::LeftClosed => Ok(below + 1),
            Side::RightClosed => Ok(below),
        };
    }
    Ok(below)
}

/// `true` iff `λ` is at relative distance `> tol` from every `λ_m`.
pub fn check_nonresonance(table: &SpectrumTable, lambda: f64, tol: f64) -> Result<bool> {
    let last = *table.values.last().ok_or(Error::TableTooShort { lambda, len: 0 })?;
    if lambda >= last {
        return Err(Error::TableTooShort {
            lambda,
            len: table.len(),
        });
    }
    Ok(table.nearest(lambda).is_none_or(|(_, d)| d > tol))
}

/// Sylvester inertia of a symmetric form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InertiaResult {
    pub negatives: usize,
    pub zeros: usize,
    pub positives: usize,
}

/// Inertia of `A − M` by LDLᵀ pivot counts of `A − M ± τI`, with
/// `τ = 1e−10·‖A − M‖_max`; eigenvalues in `[−τ, τ)` are counted as zero.
pub fn generalized_inertia(q: &AssembledQuadratic) -> Result<InertiaResult> {
    inertia_with_tolerance(&q.form(), ZERO_PIVOT_RTOL)
}

pub fn inertia_with_tolerance(form: &SymTridiag, rtol: f64) -> Result<InertiaResult> {
    let n = form.dim();
    if n == 0 {
        return Ok(InertiaResult {
            negatives: 0,
            zeros: 0,
            positives: 0,
        });
    }
    let tau = rtol * form.max_abs();
    let below_neg = form
        .shifted(tau)
        .negative_pivots()
        .ok_or(Error::FactorizationBreakdown)?;
    let below_pos = form
        .shifted(-tau)
        .negative_pivots()
        .ok_or(Error::FactorizationBreakdown)?;
    Ok(InertiaResult {
        negatives: below_neg,
        zeros: below_pos - below_neg,
        positives: n - below_pos,
    })
}

/// Eigenpair of the pencil `(A − M, B)`.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    /// Coordinates in the unknowns of the form (reduced if constrained).
    pub coords: DVector<f64>,
    pub field: DiscreteField,
}

const MAX_INVERSE_ITER: usize = 50;

/// The `k` algebraically smallest eigenpairs of `(A − M) v = θ B v`:
/// bisection on Sturm counts, then inverse iteration. Eigenvectors are
/// B-orthonormal with their first nonnegligible component positive.
pub fn lowest_eigenpairs(q: &AssembledQuadratic, k: usize) -> Result<Vec<Eigenpair>> {
    let form = q.form();
    let b = &q.b;
    let n = form.dim();
    assert!(k <= n, "requested {k} eigenpairs of a {n}-dimensional pencil");
    if k == 0 {
        return Ok(Vec::new());
    }
    // Bracket the whole spectrum.
    let scale = form.max_abs() / b.diag.iter().cloned().fold(f64::INFINITY, f64::min).max(1e-300);
    let mut lo = -scale.max(1.0);
    while form.count_below(b, lo) > 0 {
        lo *= 2.0;
    }
    let mut hi = scale.max(1.0);
    while form.count_below(b, hi) < k {
        hi *= 2.0;
    }
    let span = hi - lo;

    let mut pairs: Vec<Eigenpair> = Vec::with_capacity(k);
    for idx in 0..k {
        // θ_idx is the smallest σ with count_below(σ) > idx.
        let (mut a, mut c) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + c);
            if form.count_below(b, mid) > idx {
                c = mid;
            } else {
                a = mid;
            }
            if c - a <= 4.0 * f64::EPSILON * (a.abs().max(c.abs()) + f64::EPSILON * span) {
                break;
            }
        }
        let theta = 0.5 * (a + c);
        let (value, coords) = inverse_iteration(&form, b, theta, &pairs, idx)?;
        let field = q.expand(&coords);
        pairs.push(Eigenpair { value, coords, field });
    }
    Ok(pairs)
}

fn inverse_iteration(
    form: &SymTridiag,
    b: &SymTridiag,
    theta: f64,
    previous: &[Eigenpair],
    index: usize,
) -> Result<(f64, DVector<f64>)> {
    use crate::linalg::TridiagLu;
    let n = form.dim();
    // Nudge off the eigenvalue so the shifted matrix stays factorizable.
    let mut shift = theta;
    let nudge = 1e-13 * (theta.abs() + form.max_abs() * 1e-3).max(1e-300);
    let lu = loop {
        match TridiagLu::factor(&form.axpy(-shift, b)) {
            Ok(lu) => break lu,
            Err(_) => shift -= nudge,
        }
    };
    let b_orth = |mut x: DVector<f64>| {
        for pair in previous {
            let c = b.bilinear(&pair.coords, &x);
            x.axpy(-c, &pair.coords, 1.0);
        }
        let norm = b.bilinear(&x, &x).sqrt();
        x / norm
    };
    let mut x = b_orth(DVector::from_iterator(
        n,
        (0..n).map(|i| 1.0 + 0.1 * ((i * 7 + index * 13) % 11) as f64),
    ));
    for _ in 0..MAX_INVERSE_ITER {
        let y = b_orth(lu.solve(&b.mul_vec(&x)));
        let change = (&y - &x).amax().min((&y + &x).amax());
        x = y;
        if change <= 1e-14 * x.amax().max(1e-300) {
            break;
        }
    }
    // Residual check: ‖(A−M)x − θBx‖ against the pencil scale.
    let rayleigh = form.bilinear(&x, &x) / b.bilinear(&x, &x);
    let res = (form.mul_vec(&x) - b.mul_vec(&x) * rayleigh).amax();
    let scale = form.max_abs() + rayleigh.abs() * b.max_abs();
    if !(res <= 1e-8 * scale * x.amax()) {
        return Err(Error::ConvergenceFailure { index });
    }
    // Sign convention: first component above noise positive.
    let cut = 1e-8 * x.amax();
    if let Some(first) = x.iter().find(|v| v.abs() > cut) {
        if *first < 0.0 {
            x = -x;
        }
    }
    Ok((rayleigh, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{Mesh1D, MassKind};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn laplace_form(n: usize, weight: f64) -> AssembledQuadratic {
        let mesh = Arc::new(Mesh1D::uniform(1.0, n).unwrap());
        let b = mesh.mass(MassKind::default());
        AssembledQuadratic {
            a: mesh.stiffness(),
            m: b.scaled(weight),
            b,
            mesh,
            dofs: None,
        }
    }

    #[test]
    fn pi_p_examples() {
        assert_relative_eq!(pi_p(2.0), PI, epsilon = 1e-15);
        assert_relative_eq!(pi_p(3.0), 2.0 * PI / (3.0 * (PI / 3.0).sin()), epsilon = 1e-15);
        assert!((pi_p(3.0) - 2.4184).abs() < 1e-4);
        for p in [1.0 + 1e-9, 1.001, 50.0, 1e6] {
            let v = pi_p(p);
            assert!(v.is_finite() && v > 0.0);
        }
    }

    #[test]
    fn eigenvalue_examples() {
        assert_relative_eq!(eigenvalue_1d(2.0, 1.0, 1), PI * PI, epsilon = 1e-15);
        assert_relative_eq!(eigenvalue_1d(2.0, 1.0, 3), 9.0 * PI * PI, epsilon = 1e-14);
        assert_relative_eq!(eigenvalue_1d(3.0, 1.0, 1), 2.0 * pi_p(3.0).powi(3), epsilon = 1e-14);
        // L^{-p} scaling and monotonicity
        assert_relative_eq!(eigenvalue_1d(1.5, 2.0, 2), eigenvalue_1d(1.5, 1.0, 2) * 2f64.powf(-1.5), epsilon = 1e-14);
        assert!(eigenvalue_1d(3.0, 1.0, 4) > eigenvalue_1d(3.0, 1.0, 3));
        assert!(eigenvalue_1d(3.0, 0.5, 1) > eigenvalue_1d(3.0, 1.0, 1));
    }

    #[test]
    fn locate_examples() {
        let t = SpectrumTable::new(2.0, 1.0, 10);
        assert_eq!(locate_m_infinity(&t, 50.0, Side::Strict).unwrap(), 2);
        assert_eq!(locate_m_infinity(&t, 5.0, Side::Strict).unwrap(), 0);
        let pi2 = PI * PI;
        assert!(matches!(
            locate_m_infinity(&t, pi2, Side::Strict),
            Err(Error::Resonant { index: 1, .. })
        ));
        assert_eq!(locate_m_infinity(&t, pi2, Side::RightClosed).unwrap(), 0);
        assert_eq!(locate_m_infinity(&t, pi2, Side::LeftClosed).unwrap(), 1);
        assert_eq!(locate_m_infinity(&t, 4.0 * pi2, Side::LeftClosed).unwrap(), 2);
        assert!(matches!(
            locate_m_infinity(&t, 1e6, Side::Strict),
            Err(Error::TableTooShort { .. })
        ));
    }

    #[test]
    fn nonresonance_examples() {
        let t = SpectrumTable::new(2.0, 1.0, 10);
        let pi2 = PI * PI;
        assert!(check_nonresonance(&t, 50.0, RESONANCE_RTOL).unwrap());
        assert!(!check_nonresonance(&t, 4.0 * pi2, RESONANCE_RTOL).unwrap());
        assert!(!check_nonresonance(&t, pi2 * (1.0 + 1e-12), 1e-8).unwrap());
        assert!(check_nonresonance(&t, 1e5, 1e-8).is_err());
    }

    #[test]
    fn covering_table_brackets_lambda() {
        let t = SpectrumTable::covering(2.0, 1.0, 5000.0, 4);
        assert!(*t.values().last().unwrap() > 5000.0);
        assert!(locate_m_infinity(&t, 5000.0, Side::Strict).is_ok());
    }

    #[test]
    fn inertia_examples() {
        let r = generalized_inertia(&laplace_form(255, 50.0)).unwrap();
        assert_eq!((r.negatives, r.zeros, r.positives), (2, 0, 253));
        let r = generalized_inertia(&laplace_form(255, 5.0)).unwrap();
        assert_eq!((r.negatives, r.zeros), (0, 0));
        let r = generalized_inertia(&laplace_form(63, 0.0)).unwrap();
        assert_eq!((r.negatives, r.zeros, r.positives), (0, 0, 63));
    }

    #[test]
    fn inertia_counts_exact_kernel() {
        let form = SymTridiag {
            diag: vec![1.0, 2.0, 1.0],
            off: vec![-1.0, -1.0],
        }; // eigenvalues 0, 1, 3
        let r = inertia_with_tolerance(&form, ZERO_PIVOT_RTOL).unwrap();
        assert_eq!((r.negatives, r.zeros, r.positives), (0, 1, 2));
    }

    #[test]
    fn inertia_is_scale_invariant() {
        let q = laplace_form(40, 45.0);
        let base = generalized_inertia(&q).unwrap();
        for c in [1e-6, 0.3, 7.0, 1e8] {
            let scaled = inertia_with_tolerance(&q.form().scaled(c), ZERO_PIVOT_RTOL).unwrap();
            assert_eq!(scaled, base);
        }
    }

    #[test]
    fn negatives_monotone_in_weight() {
        let mut last = 0;
        for w in (0..40).map(|i| 10.0 * i as f64) {
            let r = generalized_inertia(&laplace_form(63, w)).unwrap();
            assert!(r.negatives >= last);
            last = r.negatives;
        }
    }

    #[test]
    fn lowest_pair_is_first_sine() {
        let q = laplace_form(255, 0.0);
        let pairs = lowest_eigenpairs(&q, 1).unwrap();
        let h = 1.0 / 256.0;
        assert!((pairs[0].value - PI * PI).abs() / (PI * PI) <= 10.0 * h * h);
        let v = &pairs[0].coords;
        let s = DVector::from_iterator(255, (1..=255).map(|i| (PI * i as f64 * h).sin()));
        let c = v.dot(&s) / s.dot(&s);
        assert!(c > 0.0);
        assert!((v - s * c).amax() < 1e-6);
    }

    #[test]
    fn eigenvectors_are_b_orthonormal() {
        let q = laplace_form(127, 50.0);
        let pairs = lowest_eigenpairs(&q, 4).unwrap();
        for (i, a) in pairs.iter().enumerate() {
            for (j, b) in pairs.iter().enumerate() {
                let ip = q.b.bilinear(&a.coords, &b.coords);
                let delta = if i == j { 1.0 } else { 0.0 };
                assert!((ip - delta).abs() <= 1e-10, "({i},{j}) {ip}");
            }
        }
    }

    #[test]
    fn shifted_pairs_follow_laplace_spectrum() {
        let q = laplace_form(255, 50.0);
        let pairs = lowest_eigenpairs(&q, 2).unwrap();
        let pi2 = PI * PI;
        assert!((pairs[0].value - (pi2 - 50.0)).abs() < 1e-4);
        assert!((pairs[1].value - (4.0 * pi2 - 50.0)).abs() < 1e-4);
        // cross-oracle with the inertia count
        let neg = pairs.iter().filter(|p| p.value < 0.0).count();
        assert_eq!(neg, generalized_inertia(&q).unwrap().negatives);
    }

    #[test]
    fn consistent_mass_error_is_second_order() {
        // Why the averaged mass is the default: the consistent matrix is
        // O(m²h²) off, which exceeds 10h² for m = 5 at n = 255.
        let mesh = Arc::new(Mesh1D::uniform(1.0, 255).unwrap());
        let q = AssembledQuadratic {
            a: mesh.stiffness(),
            m: SymTridiag::zeros(255),
            b: mesh.mass(MassKind::Consistent),
            mesh,
            dofs: None,
        };
        let pairs = lowest_eigenpairs(&q, 5).unwrap();
        let h = 1.0 / 256.0;
        let rel = (pairs[4].value - 25.0 * PI * PI) / (25.0 * PI * PI);
        assert!(rel > 10.0 * h * h);
        let predicted = (5.0 * PI * h).powi(2) / 12.0;
        assert!((rel - predicted).abs() < 0.01 * predicted);
    }
}
