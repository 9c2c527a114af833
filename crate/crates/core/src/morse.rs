//! The quadratic form `Q_{u₀}(v) = ∫Ψ″(u₀′)|v′|² − ∫g′(u₀)v²` at a critical
//! point, Morse indices `m(f,u₀) ≤ m*(f,u₀)`, and the critical-group
//! statements that the index data certifies.
//!
//! For `κ = 0`, `1 < p < 2` the form lives on `X_{u₀} = {v : v′ = 0 on Z_{u₀}}`,
//! `Z_{u₀}` being where `u₀′` vanishes. Discretely, nodes joined by degenerate
//! elements are merged into one unknown; clusters touching the boundary are
//! pinned to zero. Merging contiguous nodes keeps the form tridiagonal.

use std::fmt;

use crate::discretization::{residual_norm, AssembledQuadratic, DiscreteField, DofMap};
use crate::energy::EnergySpec;
use crate::error::{Error, Result};
use crate::linalg::SymTridiag;
use crate::spectrum::{inertia_with_tolerance, InertiaResult, ZERO_PIVOT_RTOL};

/// Relative slope band for membership in `Z_{u₀}`.
pub const ZERO_SLOPE_RTOL: f64 = 1e-8;
/// Gradient sup norm above which a field is not accepted as critical.
pub const CRITICAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `κ > 0`, or `p = 2` where `κ` plays no role.
    KappaPositive,
    /// `κ = 0`, `1 < p < 2`.
    KappaZeroSubquadratic,
    /// `κ = 0`, `p > 2`.
    KappaZeroSuperquadratic,
}

impl Regime {
    pub fn of(spec: &EnergySpec) -> Self {
        if spec.kappa() > 0.0 || spec.p() == 2.0 {
            Regime::KappaPositive
        } else if spec.p() < 2.0 {
            Regime::KappaZeroSubquadratic
        } else {
            Regime::KappaZeroSuperquadratic
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::KappaPositive => "kappaPositive",
            Regime::KappaZeroSubquadratic => "kappaZeroSubquadratic",
            Regime::KappaZeroSuperquadratic => "kappaZeroSuperquadratic",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Elements whose slope is within the band `tol·(1 + max|slope|)` of zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateSet {
    pub elements: Vec<usize>,
    pub n_elements: usize,
    pub tol: f64,
}

impl DegenerateSet {
    pub fn detect(u: &DiscreteField, tol: f64) -> Self {
        let slopes = u.slopes();
        let max = slopes.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
        let band = tol * (1.0 + max);
        Self {
            elements: (0..slopes.len()).filter(|&e| slopes[e].abs() <= band).collect(),
            n_elements: slopes.len(),
            tol,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `Z_{u₀}` is the whole interval.
    pub fn is_everything(&self) -> bool {
        self.elements.len() == self.n_elements
    }
}

/// A Morse index, possibly `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MorseCount {
    Finite(usize),
    Infinite,
}

impl MorseCount {
    pub fn finite(&self) -> Option<usize> {
        match self {
            MorseCount::Finite(k) => Some(*k),
            MorseCount::Infinite => None,
        }
    }

    pub fn contains_in_band(lo: MorseCount, hi: MorseCount, k: usize) -> bool {
        lo <= MorseCount::Finite(k) && MorseCount::Finite(k) <= hi
    }
}

impl fmt::Display for MorseCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorseCount::Finite(k) => write!(f, "{k}"),
            MorseCount::Infinite => f.write_str("+inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MorseData {
    pub m: MorseCount,
    pub m_star: MorseCount,
    /// `m* − m` when both are finite.
    pub kernel_dim: Option<usize>,
    pub regime: Regime,
}

impl MorseData {
    fn finite(inertia: InertiaResult, regime: Regime) -> Self {
        Self {
            m: MorseCount::Finite(inertia.negatives),
            m_star: MorseCount::Finite(inertia.negatives + inertia.zeros),
            kernel_dim: Some(inertia.zeros),
            regime,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.m_star, MorseCount::Finite(_))
    }
}

impl fmt::Display for MorseData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.m_star)
    }
}

/// `Q_{u₀}` restricted to `X_{u₀}` where applicable.
pub fn assemble_q(spec: &EnergySpec, u0: &DiscreteField) -> Result<(AssembledQuadratic, DegenerateSet, Regime)> {
    let residual = residual_norm(spec, u0);
    if !(residual <= CRITICAL_TOL) {
        return Err(Error::NotCritical { residual });
    }
    let regime = Regime::of(spec);
    let deg = DegenerateSet::detect(u0, ZERO_SLOPE_RTOL);
    let slopes = u0.slopes();
    let weights: Vec<f64> = slopes
        .iter()
        .enumerate()
        .map(|(e, &s)| {
            if regime != Regime::KappaPositive && deg.elements.binary_search(&e).is_ok() {
                0.0
            } else {
                // Off Z_{u₀} the slope is nonzero, so Ψ″ is defined.
                spec.principal.hess(s).unwrap_or(0.0)
            }
        })
        .collect();
    let mesh = u0.mesh();
    let full = {
        let weights_g: Vec<[f64; 2]> = (0..mesh.n_elements())
            .map(|e| u0.gauss_values(e).map(|s| spec.nonlinearity.dg(s)))
            .collect();
        AssembledQuadratic {
            a: mesh.weighted_stiffness(&weights),
            m: mesh.weighted_mass(&weights_g),
            b: mesh.mass(Default::default()),
            mesh: mesh.clone(),
            dofs: None,
        }
    };
    if regime != Regime::KappaZeroSubquadratic || deg.is_empty() {
        return Ok((full, deg, regime));
    }
    let dofs = merge_degenerate(mesh.n_interior(), &deg);
    let q = AssembledQuadratic {
        a: restrict(&full.a, &dofs),
        m: restrict(&full.m, &dofs),
        b: restrict(&full.b, &dofs),
        mesh: full.mesh,
        dofs: Some(dofs),
    };
    Ok((q, deg, regime))
}

/// Union of nodes across degenerate elements; global node `j` sits between
/// elements `j − 1` and `j`, interior node `i` is global node `i + 1`.
fn merge_degenerate(n_interior: usize, deg: &DegenerateSet) -> DofMap {
    let n_global = n_interior + 2;
    let mut is_deg = vec![false; n_global - 1];
    for &e in &deg.elements {
        is_deg[e] = true;
    }
    // Cluster id per global node; contiguous by construction.
    let mut cluster = vec![0usize; n_global];
    for j in 1..n_global {
        cluster[j] = if is_deg[j - 1] { cluster[j - 1] } else { cluster[j - 1] + 1 };
    }
    let first = cluster[0];
    let last = cluster[n_global - 1];
    let mut owner = Vec::with_capacity(n_interior);
    for j in 1..=n_interior {
        let c = cluster[j];
        owner.push(if c == first || c == last { None } else { Some(c - first - 1) });
    }
    let n_reduced = owner.iter().flatten().max().map_or(0, |m| m + 1);
    DofMap { owner, n_reduced }
}

/// `Pᵀ T P` for the aggregation `P` of `dofs`.
fn restrict(t: &SymTridiag, dofs: &DofMap) -> SymTridiag {
    let k = dofs.n_reduced;
    let mut out = SymTridiag::zeros(k);
    let n = t.dim();
    for i in 0..n {
        let Some(oi) = dofs.owner[i] else { continue };
        out.diag[oi] += t.diag[i];
        if i + 1 < n {
            if let Some(oj) = dofs.owner[i + 1] {
                if oi == oj {
                    out.diag[oi] += 2.0 * t.off[i];
                } else {
                    out.off[oi.min(oj)] += t.off[i];
                }
            }
        }
    }
    out
}

/// `(m, m*)` from the inertia of `Q`, or in closed form where the index is
/// infinite.
pub fn morse_indices(q: &AssembledQuadratic, deg: &DegenerateSet, regime: Regime, spec: &EnergySpec) -> Result<MorseData> {
    if regime == Regime::KappaZeroSuperquadratic && deg.is_everything() {
        // u₀ = 0: Q₀(v) = −g′(0)∫v² has no principal part.
        let c = spec.slope_at_zero();
        let (m, m_star) = if c < 0.0 {
            (MorseCount::Finite(0), MorseCount::Finite(0))
        } else if c == 0.0 {
            (MorseCount::Finite(0), MorseCount::Infinite)
        } else {
            (MorseCount::Infinite, MorseCount::Infinite)
        };
        return Ok(MorseData {
            m,
            m_star,
            kernel_dim: if c < 0.0 { Some(0) } else { None },
            regime,
        });
    }
    let form = q.form();
    let mut rtol = ZERO_PIVOT_RTOL;
    for _ in 0..8 {
        match inertia_with_tolerance(&form, rtol) {
            Ok(inertia) => return Ok(MorseData::finite(inertia, regime)),
            Err(Error::FactorizationBreakdown) => rtol *= 1.0 + 1e-3,
            Err(e) => return Err(e),
        }
    }
    Err(Error::FactorizationBreakdown)
}

/// Which statement a verdict line restates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremTag {
    /// `κ > 0`: vanishing below `m` and above `m*`.
    KappaPositiveBand,
    /// `κ > 0`, `m = m*`: isolated, `C_m ≅ G`, zero elsewhere.
    Nondegenerate,
    /// `κ > 0`, isolated, `m < m*`: exactly one of three alternatives.
    Trichotomy,
    /// `κ = 0`, `p < 2`: vanishing above `m*`.
    SubquadraticUpperVanishing,
    /// `κ = 0`, `p < 2`, `u₀ = 0`: strict local minimum, `C_0 ≅ G`.
    SubquadraticOriginMinimum,
    /// Autonomous `g`, isolated origin, any `κ`, `p`: vanishing outside
    /// `[m(f,0), m*(f,0)]`.
    OriginBand,
    /// Nothing certified.
    NoTheorem,
}

impl TheoremTag {
    pub fn name(&self) -> &'static str {
        match self {
            TheoremTag::KappaPositiveBand => "kappa-positive band",
            TheoremTag::Nondegenerate => "nondegenerate",
            TheoremTag::Trichotomy => "trichotomy",
            TheoremTag::SubquadraticUpperVanishing => "subquadratic upper vanishing",
            TheoremTag::SubquadraticOriginMinimum => "subquadratic origin minimum",
            TheoremTag::OriginBand => "origin band",
            TheoremTag::NoTheorem => "no theorem",
        }
    }
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub tag: TheoremTag,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalGroupVerdict {
    pub statements: Vec<Statement>,
}

impl CriticalGroupVerdict {
    pub fn tags(&self) -> Vec<TheoremTag> {
        self.statements.iter().map(|s| s.tag).collect()
    }
}

impl fmt::Display for CriticalGroupVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "[{}] {}", s.tag, s.text)?;
        }
        Ok(())
    }
}

fn band_text(m: MorseCount, m_star: MorseCount) -> String {
    match (m, m_star) {
        (MorseCount::Finite(0), MorseCount::Finite(b)) => format!("C_q = 0 for q > {b}"),
        (MorseCount::Finite(a), MorseCount::Finite(b)) => format!("C_q = 0 for q < {a} and for q > {b}"),
        (MorseCount::Finite(0), MorseCount::Infinite) => "no degree is excluded (band [0, +inf))".into(),
        (MorseCount::Finite(a), MorseCount::Infinite) => format!("C_q = 0 for q < {a}"),
        (MorseCount::Infinite, _) => "C_q = 0 for every q".into(),
    }
}

fn only_degree(k: impl fmt::Display) -> String {
    format!("C_{k} = G, C_q = 0 for q != {k}")
}

/// Degree-wise statements certified by the index data; never more.
pub fn classify_critical_groups(md: &MorseData, isolated: bool, is_zero: bool, spec: &EnergySpec) -> CriticalGroupVerdict {
    let mut out = Vec::new();
    let mut push = |tag, text: String| out.push(Statement { tag, text });
    match md.regime {
        Regime::KappaPositive => {
            push(TheoremTag::KappaPositiveBand, band_text(md.m, md.m_star));
            if let (MorseCount::Finite(a), MorseCount::Finite(b)) = (md.m, md.m_star) {
                if a == b {
                    push(TheoremTag::Nondegenerate, format!("isolated; {}", only_degree(a)));
                } else if isolated {
                    push(TheoremTag::Trichotomy, format!("(a) {}", only_degree(a)));
                    push(TheoremTag::Trichotomy, format!("(b) {}", only_degree(b)));
                    push(TheoremTag::Trichotomy, format!("(c) C_q = 0 for q <= {a} and for q >= {b}"));
                }
            }
        }
        Regime::KappaZeroSubquadratic => {
            if is_zero {
                push(
                    TheoremTag::SubquadraticOriginMinimum,
                    format!("strict local minimum, isolated; {}", only_degree(0)),
                );
            } else if let MorseCount::Finite(b) = md.m_star {
                push(TheoremTag::SubquadraticUpperVanishing, format!("C_q = 0 for q > {b}"));
            }
        }
        Regime::KappaZeroSuperquadratic => {}
    }
    let autonomous = true; // g = g(s) throughout
    if is_zero && isolated && autonomous && md.regime != Regime::KappaZeroSubquadratic {
        push(TheoremTag::OriginBand, band_text(md.m, md.m_star));
    }
    if out.is_empty() {
        out.push(Statement {
            tag: TheoremTag::NoTheorem,
            text: format!(
                "no critical-group statement available for kappa = {}, p = {} at this point",
                spec.kappa(),
                spec.p()
            ),
        });
    }
    CriticalGroupVerdict { statements: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Mesh1D;
    use crate::energy::{Nonlinearity, PrincipalPart};
    use crate::spectrum::{eigenvalue_1d, generalized_inertia};
    use std::sync::Arc;

    fn spec(p: f64, kappa: f64, nl: Nonlinearity) -> EnergySpec {
        EnergySpec::new(PrincipalPart::new(p, kappa).unwrap(), nl)
    }

    fn mesh(n: usize) -> Arc<Mesh1D> {
        Arc::new(Mesh1D::uniform(1.0, n).unwrap())
    }

    fn at_zero(s: &EnergySpec, n: usize) -> MorseData {
        let u = DiscreteField::zeros(mesh(n));
        let (q, d, r) = assemble_q(s, &u).unwrap();
        morse_indices(&q, &d, r, s).unwrap()
    }

    #[test]
    fn origin_form_kappa_one() {
        // κ = 1, p = 3 at u₀ = 0: A = stiffness, M = g′(0)·mass.
        let s = spec(3.0, 1.0, Nonlinearity::pure_power(3.0, 4.0, 7.0, 2.0).unwrap());
        let m = mesh(31);
        let (q, deg, regime) = assemble_q(&s, &DiscreteField::zeros(m.clone())).unwrap();
        assert_eq!(regime, Regime::KappaPositive);
        assert_eq!(deg.elements.len(), 32);
        assert!((q.a.to_dense() - m.stiffness().to_dense()).amax() < 1e-12);
        let c = s.slope_at_zero();
        let exact = m.weighted_mass(&vec![[c, c]; 32]);
        assert!((q.m.to_dense() - exact.to_dense()).amax() < 1e-12);
    }

    #[test]
    fn subquadratic_origin_has_trivial_x() {
        let s = spec(1.5, 0.0, Nonlinearity::smooth_power(1.5, 10.0, 1.0, 1.0).unwrap());
        let (q, deg, regime) = assemble_q(&s, &DiscreteField::zeros(mesh(63))).unwrap();
        assert_eq!(regime, Regime::KappaZeroSubquadratic);
        assert!(deg.is_everything());
        assert_eq!(q.dim(), 0);
        let md = morse_indices(&q, &deg, regime, &s).unwrap();
        assert_eq!((md.m, md.m_star), (MorseCount::Finite(0), MorseCount::Finite(0)));
    }

    #[test]
    fn nowhere_flat_field_keeps_full_form() {
        let u = DiscreteField::interpolate(mesh(15), |x| x * (3.0 - x));
        let deg = DegenerateSet::detect(&u, ZERO_SLOPE_RTOL);
        assert!(deg.is_empty());
    }

    #[test]
    fn merged_dofs_follow_plateaus() {
        // Plateau in the middle: interior nodes 2..=4 share one unknown.
        let m = mesh(7);
        let vals = [0.1, 0.3, 0.5, 0.5, 0.5, 0.2, 0.1];
        let u = DiscreteField::new(m, nalgebra::DVector::from_row_slice(&vals)).unwrap();
        let deg = DegenerateSet::detect(&u, ZERO_SLOPE_RTOL);
        assert_eq!(deg.elements, vec![3, 4]);
        let dofs = merge_degenerate(7, &deg);
        assert_eq!(dofs.owner, vec![Some(0), Some(1), Some(2), Some(2), Some(2), Some(3), Some(4)]);
        // Flat piece touching the boundary is pinned.
        let u = DiscreteField::new(mesh(5), nalgebra::DVector::from_row_slice(&[0.0, 0.0, 0.4, 0.2, 0.1])).unwrap();
        let deg = DegenerateSet::detect(&u, ZERO_SLOPE_RTOL);
        let dofs = merge_degenerate(5, &deg);
        assert_eq!(dofs.owner, vec![None, None, Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn restriction_matches_dense_congruence() {
        let t = SymTridiag {
            diag: vec![2.0, 3.0, 4.0, 5.0, 6.0],
            off: vec![-1.0, 0.5, -0.7, 0.2],
        };
        let dofs = DofMap {
            owner: vec![None, Some(0), Some(0), Some(1), None],
            n_reduced: 2,
        };
        let mut p = nalgebra::DMatrix::zeros(5, 2);
        for (i, o) in dofs.owner.iter().enumerate() {
            if let Some(c) = o {
                p[(i, *c)] = 1.0;
            }
        }
        let dense = p.transpose() * t.to_dense() * &p;
        assert!((restrict(&t, &dofs).to_dense() - dense).amax() < 1e-14);
    }

    #[test]
    fn morse_examples() {
        let s = spec(2.0, 0.0, Nonlinearity::rational(2.0, 50.0, 0.0).unwrap());
        let md = at_zero(&s, 255);
        assert_eq!((md.m, md.m_star), (MorseCount::Finite(2), MorseCount::Finite(2)));
        let plus = spec(3.0, 0.0, Nonlinearity::pure_power(3.0, 40.0, 2.0, 2.0).unwrap());
        let md = at_zero(&plus, 63);
        assert_eq!((md.m, md.m_star), (MorseCount::Infinite, MorseCount::Infinite));
        let minus = spec(3.0, 0.0, Nonlinearity::pure_power(3.0, 40.0, -2.0, 2.0).unwrap());
        let md = at_zero(&minus, 63);
        assert_eq!((md.m, md.m_star), (MorseCount::Finite(0), MorseCount::Finite(0)));
        let flat = spec(3.0, 0.0, Nonlinearity::pure_power(3.0, 40.0, 0.0, 2.0).unwrap());
        let md = at_zero(&flat, 63);
        assert_eq!((md.m, md.m_star), (MorseCount::Finite(0), MorseCount::Infinite));
    }

    #[test]
    fn not_critical_is_rejected() {
        let s = spec(2.0, 0.0, Nonlinearity::rational(2.0, 50.0, 0.0).unwrap());
        let u = DiscreteField::interpolate(mesh(31), |x| (std::f64::consts::PI * x).sin());
        assert!(matches!(assemble_q(&s, &u), Err(Error::NotCritical { .. })));
    }

    #[test]
    fn index_at_origin_counts_eigenvalues_below_slope() {
        // κ^{p−2}(mπ)² < g′(0): κ = 2, p = 3, so eigenvalues 2m²π².
        for c in [5.0, 25.0, 100.0, 400.0] {
            let s = spec(3.0, 2.0, Nonlinearity::pure_power(3.0, 1.0, c, 2.0).unwrap());
            let md = at_zero(&s, 255);
            let expected = (1..50).filter(|&m| 2.0 * eigenvalue_1d(2.0, 1.0, m) < c).count();
            assert_eq!(md.m, MorseCount::Finite(expected), "c = {c}");
            assert_eq!(md.kernel_dim, Some(0));
        }
    }

    #[test]
    fn indices_are_mesh_stable() {
        let s = spec(2.0, 0.0, Nonlinearity::rational(2.0, 50.0, 0.0).unwrap());
        for n in [64, 128] {
            assert_eq!(at_zero(&s, n), at_zero(&s, 2 * n + 1));
        }
    }

    #[test]
    fn scaling_leaves_inertia_unchanged() {
        let s = spec(2.0, 0.0, Nonlinearity::rational(2.0, 50.0, 0.0).unwrap());
        let (q, _, _) = assemble_q(&s, &DiscreteField::zeros(mesh(63))).unwrap();
        let base = generalized_inertia(&q).unwrap();
        let scaled = inertia_with_tolerance(&q.form().scaled(1e-3), ZERO_PIVOT_RTOL).unwrap();
        assert_eq!(base, scaled);
    }

    fn md(m: MorseCount, ms: MorseCount, regime: Regime) -> MorseData {
        MorseData {
            m,
            m_star: ms,
            kernel_dim: None,
            regime,
        }
    }

    #[test]
    fn verdict_examples() {
        use MorseCount::*;
        let s = spec(2.0, 1.0, Nonlinearity::rational(2.0, 50.0, 0.0).unwrap());
        let v = classify_critical_groups(&md(Finite(2), Finite(2), Regime::KappaPositive), true, false, &s);
        assert!(v.tags().contains(&TheoremTag::Nondegenerate));
        assert!(v.to_string().contains("C_2 = G, C_q = 0 for q != 2"));

        let s15 = spec(1.5, 0.0, Nonlinearity::smooth_power(1.5, 10.0, 1.0, 1.0).unwrap());
        let v = classify_critical_groups(&md(Finite(0), Finite(0), Regime::KappaZeroSubquadratic), true, true, &s15);
        assert_eq!(v.tags(), vec![TheoremTag::SubquadraticOriginMinimum]);
        assert!(v.to_string().contains("C_0 = G"));

        let v = classify_critical_groups(&md(Finite(1), Finite(3), Regime::KappaPositive), true, false, &s);
        assert_eq!(v.tags().iter().filter(|t| **t == TheoremTag::Trichotomy).count(), 3);

        let s3 = spec(3.0, 0.0, Nonlinearity::pure_power(3.0, 40.0, 2.0, 2.0).unwrap());
        let v = classify_critical_groups(&md(Infinite, Infinite, Regime::KappaZeroSuperquadratic), true, true, &s3);
        assert_eq!(v.tags(), vec![TheoremTag::OriginBand]);
        let v = classify_critical_groups(&md(Finite(1), Finite(1), Regime::KappaZeroSuperquadratic), true, false, &s3);
        assert_eq!(v.tags(), vec![TheoremTag::NoTheorem]);
    }

    #[test]
    fn verdict_never_contradicts_indices() {
        use MorseCount::*;
        let s = spec(2.0, 1.0, Nonlinearity::rational(2.0, 50.0, 0.0).unwrap());
        for a in 0..4 {
            for b in a..5 {
                let v = classify_critical_groups(&md(Finite(a), Finite(b), Regime::KappaPositive), true, false, &s);
                assert_eq!(v.tags().contains(&TheoremTag::Nondegenerate), a == b);
                assert_eq!(v.tags().contains(&TheoremTag::Trichotomy), a < b);
            }
        }
    }
}
