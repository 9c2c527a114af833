//! P1 finite elements on `(0, L)` with homogeneous Dirichlet data.
//!
//! Unknowns are the interior nodal values; slopes are constant per element,
//! so the Ψ-terms are integrated exactly and only the `G`-term needs a rule
//! (two-point Gauss per element). The gradient and Hessian are the exact
//! derivatives of the discrete energy.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DVector;

use crate::energy::{EnergySpec, PrincipalPart};
use crate::error::{Error, Result};
use crate::linalg::SymTridiag;

/// Reference Gauss points on `[0, 1]`, equal weights ½.
const GAUSS: [f64; 2] = [
    0.5 - 0.288_675_134_594_812_9, // ½ − 1/(2√3)
    0.5 + 0.288_675_134_594_812_9,
];

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    length: f64,
    /// All nodes, endpoints included.
    nodes: Vec<f64>,
}

impl Mesh1D {
    /// Uniform mesh with `n` interior nodes, `h = L/(n+1)`.
    pub fn uniform(length: f64, n: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::BadConfig(format!("domain length must be > 0, got {length}")));
        }
        if n == 0 {
            return Err(Error::BadConfig("mesh needs at least one interior node".into()));
        }
        let h = length / (n + 1) as f64;
        let mut nodes: Vec<f64> = (0..=n + 1).map(|i| i as f64 * h).collect();
        nodes[n + 1] = length;
        Ok(Self { length, nodes })
    }

    /// Mesh through explicit nodes `0 = x₀ < … < x_{n+1} = L`.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::BadConfig("mesh needs at least one interior node".into()));
        }
        if nodes[0] != 0.0 {
            return Err(Error::BadConfig("first node must be 0".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::BadConfig("nodes must be strictly increasing".into()));
        }
        Ok(Self {
            length: *nodes.last().unwrap(),
            nodes,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of interior nodes (unknowns).
    pub fn n_interior(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn interior_nodes(&self) -> &[f64] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    pub fn element_length(&self, e: usize) -> f64 {
        self.nodes[e + 1] - self.nodes[e]
    }

    pub fn max_element_length(&self) -> f64 {
        (0..self.n_elements())
            .map(|e| self.element_length(e))
            .fold(0.0, f64::max)
    }

    /// Stiffness matrix `∫ φᵢ′ φⱼ′` scaled elementwise by `weights[e]`.
    pub fn weighted_stiffness(&self, weights: &[f64]) -> SymTridiag {
        let n = self.n_interior();
        let mut k = SymTridiag::zeros(n);
        for (e, &w) in weights.iter().enumerate() {
            let c = w / self.element_length(e);
            // element e joins global nodes e and e+1 = interior e−1 and e
            if e >= 1 {
                k.diag[e - 1] += c;
            }
            if e < n {
                k.diag[e] += c;
            }
            if e >= 1 && e < n {
                k.off[e - 1] -= c;
            }
        }
        k
    }

    pub fn stiffness(&self) -> SymTridiag {
        self.weighted_stiffness(&vec![1.0; self.n_elements()])
    }

    /// Mass matrix `∫ w φᵢ φⱼ` with the weight sampled at the two Gauss
    /// points of each element (`weights[e] = [w(x_{e,1}), w(x_{e,2})]`).
    pub fn weighted_mass(&self, weights: &[[f64; 2]]) -> SymTridiag {
        let n = self.n_interior();
        let mut m = SymTridiag::zeros(n);
        for (e, w) in weights.iter().enumerate() {
            let h = self.element_length(e);
            let (mut ll, mut lr, mut rr) = (0.0, 0.0, 0.0);
            for (q, &t) in GAUSS.iter().enumerate() {
                let wq = 0.5 * h * w[q];
                ll += wq * (1.0 - t) * (1.0 - t);
                lr += wq * (1.0 - t) * t;
                rr += wq * t * t;
            }
            if e >= 1 {
                m.diag[e - 1] += ll;
            }
            if e < n {
                m.diag[e] += rr;
            }
            if e >= 1 && e < n {
                m.off[e - 1] += lr;
            }
        }
        m
    }

    pub fn mass(&self, kind: MassKind) -> SymTridiag {
        let consistent = self.weighted_mass(&vec![[1.0, 1.0]; self.n_elements()]);
        let n = self.n_interior();
        let mut lumped = SymTridiag::zeros(n);
        for i in 0..n {
            lumped.diag[i] = 0.5 * (self.element_length(i) + self.element_length(i + 1));
        }
        match kind {
            MassKind::Consistent => consistent,
            MassKind::Lumped => lumped,
            MassKind::Averaged => consistent.scaled(0.5).axpy(0.5, &lumped),
        }
    }
}

/// Discrete `L²` Gram matrix used for eigenproblems and orthogonality.
///
/// `Averaged` (the mean of the consistent and lumped matrices) has
/// fourth-order eigenvalue error on uniform meshes; the other two are
/// second order with opposite signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassKind {
    Consistent,
    Lumped,
    #[default]
    Averaged,
}

/// A P1 function vanishing at both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    mesh: Arc<Mesh1D>,
    values: DVector<f64>,
}

impl DiscreteField {
    pub fn new(mesh: Arc<Mesh1D>, values: DVector<f64>) -> Result<Self> {
        if values.len() != mesh.n_interior() {
            return Err(Error::BadField(format!(
                "{} values for {} interior nodes",
                values.len(),
                mesh.n_interior()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: Arc<Mesh1D>) -> Self {
        let n = mesh.n_interior();
        Self {
            mesh,
            values: DVector::zeros(n),
        }
    }

    /// Nodal interpolant of `f` (endpoint values are ignored).
    pub fn interpolate(mesh: Arc<Mesh1D>, f: impl Fn(f64) -> f64) -> Self {
        let values = DVector::from_iterator(mesh.n_interior(), mesh.interior_nodes().iter().map(|&x| f(x)));
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut DVector<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> DVector<f64> {
        self.values
    }

    pub fn with_values(&self, values: DVector<f64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self {
            mesh: self.mesh.clone(),
            values,
        }
    }

    /// Value at global node `j` (`0..=n+1`), zero at the endpoints.
    #[inline]
    pub fn node_value(&self, j: usize) -> f64 {
        if j == 0 || j > self.values.len() {
            0.0
        } else {
            self.values[j - 1]
        }
    }

    pub fn slope(&self, e: usize) -> f64 {
        (self.node_value(e + 1) - self.node_value(e)) / self.mesh.element_length(e)
    }

    pub fn slopes(&self) -> Vec<f64> {
        (0..self.mesh.n_elements()).map(|e| self.slope(e)).collect()
    }

    /// Values at the two Gauss points of element `e`.
    pub fn gauss_values(&self, e: usize) -> [f64; 2] {
        let (a, b) = (self.node_value(e), self.node_value(e + 1));
        [a + GAUSS[0] * (b - a), a + GAUSS[1] * (b - a)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.amax()
    }

    pub fn scale(&self, c: f64) -> Self {
        self.with_values(&self.values * c)
    }

    /// Number of sign changes of the nodal values (zeros skipped).
    pub fn sign_changes(&self) -> usize {
        let mut last = 0.0;
        let mut count = 0;
        for &v in self.values.iter() {
            if v != 0.0 {
                if last != 0.0 && v.signum() != last {
                    count += 1;
                }
                last = v.signum();
            }
        }
        count
    }

    /// `x,u` table with header, endpoints included.
    pub fn to_table(&self) -> String {
        let mut out = String::from("x,u\n");
        for (j, x) in self.mesh.nodes().iter().enumerate() {
            let _ = writeln!(out, "{:.17e},{:.17e}", x, self.node_value(j));
        }
        out
    }

    /// Parse an `x,u` table. Endpoint values must be zero.
    pub fn from_table(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim().replace(' ', "") == "x,u" => {}
            other => return Err(Error::BadField(format!("expected header `x,u`, got {other:?}"))),
        }
        let mut xs = Vec::new();
        let mut us = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.map(str::trim)
                    .ok_or_else(|| Error::BadField(format!("row {}: missing column", i + 1)))?
                    .parse::<f64>()
                    .map_err(|e| Error::BadField(format!("row {}: {e}", i + 1)))
            };
            xs.push(parse(parts.next())?);
            us.push(parse(parts.next())?);
        }
        if us.len() < 3 {
            return Err(Error::BadField("need at least three rows".into()));
        }
        if us[0] != 0.0 || *us.last().unwrap() != 0.0 {
            return Err(Error::BadField("endpoint values must be zero".into()));
        }
        let mesh = Arc::new(Mesh1D::from_nodes(xs).map_err(|e| Error::BadField(e.to_string()))?);
        let values = DVector::from_vec(us[1..us.len() - 1].to_vec());
        Self::new(mesh, values)
    }
}

/// Discrete quadratic form `Q(v) = vᵀ A v − vᵀ M v` together with the plain
/// mass matrix `B` used as the `L²` inner product.
///
/// When the form lives on a constrained subspace, `dofs` maps each reduced
/// unknown back to the interior nodes it controls.
#[derive(Debug, Clone)]
pub struct AssembledQuadratic {
    pub a: SymTridiag,
    pub m: SymTridiag,
    pub b: SymTridiag,
    pub mesh: Arc<Mesh1D>,
    pub dofs: Option<DofMap>,
}

impl AssembledQuadratic {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// The symmetric matrix `A − M` whose inertia gives the Morse data.
    pub fn form(&self) -> SymTridiag {
        self.a.axpy(-1.0, &self.m)
    }

    /// Expand reduced coordinates to a nodal field.
    pub fn expand(&self, coords: &DVector<f64>) -> DiscreteField {
        let values = match &self.dofs {
            None => coords.clone(),
            Some(map) => map.expand(coords),
        };
        DiscreteField {
            mesh: self.mesh.clone(),
            values,
        }
    }
}

/// Aggregation of interior nodes into reduced unknowns: node `i` takes the
/// value of reduced unknown `owner[i]`, or zero when `owner[i]` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub owner: Vec<Option<usize>>,
    pub n_reduced: usize,
}

impl DofMap {
    pub fn expand(&self, coords: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.owner.len(),
            self.owner.iter().map(|o| o.map_or(0.0, |c| coords[c])),
        )
    }
}

fn check_mesh(spec_mesh: &Arc<Mesh1D>, u: &DiscreteField) -> Result<()> {
    if Arc::ptr_eq(spec_mesh, &u.mesh) || **spec_mesh == *u.mesh {
        Ok(())
    } else {
        Err(Error::MeshMismatch)
    }
}

/// `f(u) = Σₑ hₑ Ψ(slopeₑ) − Σₑ Σ_q (hₑ/2) G(u(x_q))`.
pub fn assemble_energy(spec: &EnergySpec, u: &DiscreteField) -> f64 {
    let mesh = &u.mesh;
    let mut principal = 0.0;
    let mut lower = 0.0;
    for e in 0..mesh.n_elements() {
        let h = mesh.element_length(e);
        principal += h * spec.principal.value(u.slope(e));
        let [a, b] = u.gauss_values(e);
        lower += 0.5 * h * (spec.nonlinearity.antiderivative(a) + spec.nonlinearity.antiderivative(b));
    }
    principal - lower
}

/// Exact gradient of [`assemble_energy`] with respect to the interior values.
pub fn assemble_gradient(spec: &EnergySpec, u: &DiscreteField) -> DVector<f64> {
    let mesh = &u.mesh;
    let n = mesh.n_interior();
    let mut grad = DVector::zeros(n);
    for e in 0..mesh.n_elements() {
        let h = mesh.element_length(e);
        let flux = spec.principal.grad(u.slope(e));
        let [ga, gb] = u.gauss_values(e).map(|s| spec.nonlinearity.g(s));
        let left = 0.5 * h * (ga * (1.0 - GAUSS[0]) + gb * (1.0 - GAUSS[1]));
        let right = 0.5 * h * (ga * GAUSS[0] + gb * GAUSS[1]);
        if e >= 1 {
            grad[e - 1] += -flux - left;
        }
        if e < n {
            grad[e] += flux - right;
        }
    }
    grad
}

/// `sup |∇f(u)|`, the solver residual.
pub fn residual_norm(spec: &EnergySpec, u: &DiscreteField) -> f64 {
    assemble_gradient(spec, u).amax()
}

fn lower_order_mass(spec: &EnergySpec, u: &DiscreteField) -> SymTridiag {
    let weights: Vec<[f64; 2]> = (0..u.mesh.n_elements())
        .map(|e| u.gauss_values(e).map(|s| spec.nonlinearity.dg(s)))
        .collect();
    u.mesh.weighted_mass(&weights)
}

fn build_quadratic(spec: &EnergySpec, u: &DiscreteField, weights: &[f64]) -> AssembledQuadratic {
    AssembledQuadratic {
        a: u.mesh.weighted_stiffness(weights),
        m: lower_order_mass(spec, u),
        b: u.mesh.mass(MassKind::default()),
        mesh: u.mesh.clone(),
        dofs: None,
    }
}

/// Exact Hessian of the discrete energy: `A` from `Ψ″(slopeₑ)`, `M` from
/// `g′(u)` at the Gauss points.
pub fn assemble_hessian(spec: &EnergySpec, u: &DiscreteField) -> Result<AssembledQuadratic> {
    let slopes = u.slopes();
    let mut weights = Vec::with_capacity(slopes.len());
    let mut bad = Vec::new();
    for (e, &s) in slopes.iter().enumerate() {
        match spec.principal.hess(s) {
            Ok(w) => weights.push(w),
            Err(_) => bad.push(e),
        }
    }
    if !bad.is_empty() {
        return Err(Error::DegenerateElement { elements: bad });
    }
    Ok(build_quadratic(spec, u, &weights))
}

/// Hessian with element slopes floored at `eps` in magnitude before `Ψ″` is
/// evaluated; total for every principal part.
pub fn assemble_hessian_regularized(spec: &EnergySpec, u: &DiscreteField, eps: f64) -> AssembledQuadratic {
    let weights: Vec<f64> = u
        .slopes()
        .iter()
        .map(|&s| regularized_curvature(&spec.principal, s, eps))
        .collect();
    build_quadratic(spec, u, &weights)
}

pub(crate) fn regularized_curvature(pp: &PrincipalPart, slope: f64, eps: f64) -> f64 {
    let s = if slope.abs() < eps { eps } else { slope };
    pp.hess(s).unwrap_or(0.0)
}

/// `(W^{1,p} seminorm, Lᵖ norm, sup norm)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub seminorm: f64,
    pub lp: f64,
    pub sup: f64,
}

/// Gauss–Legendre points for `∫|u|ᵖ` on nearly constant pieces.
const LP_POINTS: usize = 8;

pub fn norms(u: &DiscreteField, p: f64) -> Norms {
    let mesh = &u.mesh;
    let mut semi = 0.0;
    let mut lp = 0.0;
    let (gx, gw) = gauss_legendre_unit(LP_POINTS);
    for e in 0..mesh.n_elements() {
        let h = mesh.element_length(e);
        semi += h * u.slope(e).abs().powf(p);
        let (a, b) = (u.node_value(e), u.node_value(e + 1));
        lp += h * mean_abs_power(a, b, p, &gx, &gw);
    }
    Norms {
        seminorm: semi.powf(1.0 / p),
        lp: lp.powf(1.0 / p),
        sup: u.sup_norm(),
    }
}

/// `∫₀¹ |a + t(b − a)|ᵖ dt`, exact through the antiderivative `|y|ᵖy/(p+1)`;
/// Gauss–Legendre when `a ≈ b` (same sign, integrand smooth) to avoid the
/// cancellation.
fn mean_abs_power(a: f64, b: f64, p: f64, gx: &[f64], gw: &[f64]) -> f64 {
    let d = b - a;
    if a * b > 0.0 && d.abs() <= 1e-3 * a.abs().max(b.abs()) {
        return gx
            .iter()
            .zip(gw)
            .map(|(t, w)| w * (a + t * d).abs().powf(p))
            .sum();
    }
    if d == 0.0 {
        return 0.0;
    }
    let anti = |y: f64| y.abs().powf(p) * y;
    (anti(b) - anti(a)) / ((p + 1.0) * d)
}

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = 0.5 * (1.0 - x);
        ws[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// W^{1,p} seminorm of `u − v`.
pub fn seminorm_distance(u: &DiscreteField, v: &DiscreteField, p: f64) -> f64 {
    let d = u.with_values(u.values() - v.values());
    norms(&d, p).seminorm
}

pub(crate) fn ensure_same_mesh(a: &DiscreteField, b: &DiscreteField) -> Result<()> {
    check_mesh(&a.mesh, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{Nonlinearity, PrincipalPart};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn spec(p: f64, kappa: f64, nl: Nonlinearity) -> EnergySpec {
        EnergySpec::new(PrincipalPart::new(p, kappa).unwrap(), nl)
    }

    fn zero_g(p: f64) -> Nonlinearity {
        Nonlinearity::rational(p.max(2.0), 0.0, 0.0).unwrap()
    }

    /// `g(s) = c·s` for any `p`, via a hook.
    fn linear_g(p: f64, c: f64) -> Nonlinearity {
        Nonlinearity::custom(
            p,
            crate::energy::CustomHook::new("linear", move |s, o| match o {
                crate::energy::GOrder::Value => c * s,
                crate::energy::GOrder::Derivative => c,
                crate::energy::GOrder::Antiderivative => 0.5 * c * s * s,
            }),
        )
    }

    #[test]
    fn build_mesh_examples() {
        let m = Mesh1D::uniform(1.0, 3).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let m = Mesh1D::uniform(2.0, 1).unwrap();
        assert_eq!(m.nodes(), &[0.0, 1.0, 2.0]);
        assert!(matches!(Mesh1D::uniform(0.0, 5), Err(Error::BadConfig(_))));
        assert!(matches!(Mesh1D::uniform(1.0, 0), Err(Error::BadConfig(_))));
        assert!(Mesh1D::from_nodes(vec![0.0, 0.5, 0.4, 1.0]).is_err());
    }

    #[test]
    fn element_lengths_sum_to_length() {
        let m = Mesh1D::from_nodes(vec![0.0, 0.1, 0.35, 0.9, 1.3]).unwrap();
        let total: f64 = (0..m.n_elements()).map(|e| m.element_length(e)).sum();
        assert_relative_eq!(total, 1.3, epsilon = 1e-15);
    }

    #[test]
    fn energy_examples() {
        let mesh = Arc::new(Mesh1D::uniform(1.0, 255).unwrap());
        let s = spec(2.0, 0.0, zero_g(2.0));
        assert_eq!(assemble_energy(&s, &DiscreteField::zeros(mesh.clone())), 0.0);

        let u = DiscreteField::interpolate(mesh.clone(), |x| (PI * x).sin());
        let e = assemble_energy(&s, &u);
        let h = mesh.element_length(0);
        assert!((e - PI * PI / 4.0).abs() <= PI * PI * h * h, "{e}");

        let mesh1 = Arc::new(Mesh1D::uniform(1.0, 1).unwrap());
        let hat = DiscreteField::new(mesh1, DVector::from_vec(vec![1.0])).unwrap();
        let s3 = spec(3.0, 0.0, zero_g(3.0));
        assert_relative_eq!(assemble_energy(&s3, &hat), 8.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn energy_converges_at_second_order_for_p2() {
        let s = spec(2.0, 0.0, zero_g(2.0));
        let err = |n: usize| {
            let mesh = Arc::new(Mesh1D::uniform(1.0, n).unwrap());
            let u = DiscreteField::interpolate(mesh, |x| (PI * x).sin());
            (assemble_energy(&s, &u) - PI * PI / 4.0).abs()
        };
        let rate = (err(31) / err(63)).log2();
        assert!((rate - 2.0).abs() < 0.1, "rate {rate}");
    }

    #[test]
    fn gradient_at_zero_vanishes() {
        let mesh = Arc::new(Mesh1D::uniform(1.0, 20).unwrap());
        let s = spec(1.5, 0.0, Nonlinearity::smooth_power(1.5, 4.0, 1.0, 1.0).unwrap());
        assert_eq!(assemble_gradient(&s, &DiscreteField::zeros(mesh)).amax(), 0.0);
    }

    #[test]
    fn p2_gradient_is_stiffness_product() {
        let mesh = Arc::new(Mesh1D::uniform(1.0, 30).unwrap());
        let s = spec(2.0, 0.0, zero_g(2.0));
        let u = DiscreteField::interpolate(mesh.clone(), |x| x * (1.0 - x));
        let grad = assemble_gradient(&s, &u);
        let ku = mesh.stiffness().mul_vec(u.values());
        assert!((grad - ku).amax() < 1e-12);
    }

    fn random_field(mesh: &Arc<Mesh1D>, rng: &mut ChaCha8Rng) -> DiscreteField {
        let n = mesh.n_interior();
        DiscreteField::new(
            mesh.clone(),
            DVector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..1.0))),
        )
        .unwrap()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mesh = Arc::new(Mesh1D::uniform(1.0, 24).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, kappa) in [(1.5, 0.0), (1.5, 1.0), (2.0, 0.0), (3.0, 0.0), (3.0, 1.0)] {
            let nl = linear_g(p, 3.0);
            let s = spec(p, kappa, nl);
            for _ in 0..5 {
                let u = random_field(&mesh, &mut rng);
                let d = random_field(&mesh, &mut rng);
                let h = 1e-5;
                let fp = assemble_energy(&s, &u.with_values(u.values() + d.values() * h));
                let fm = assemble_energy(&s, &u.with_values(u.values() - d.values() * h));
                let fd = (fp - fm) / (2.0 * h);
                let exact = assemble_gradient(&s, &u).dot(d.values());
                let f = assemble_energy(&s, &u);
                assert!((fd - exact).abs() <= 1e-6 * (1.0 + f.abs()), "p={p} k={kappa}");
            }
        }
    }

    #[test]
    fn hessian_is_symmetric_and_p2_weight_is_one() {
        let mesh = Arc::new(Mesh1D::uniform(1.0, 10).unwrap());
        let s = spec(2.0, 3.0, Nonlinearity::rational(2.0, 2.0, 1.0).unwrap());
        let u = DiscreteField::interpolate(mesh.clone(), |x| (3.0 * x).sin());
        let q = assemble_hessian(&s, &u).unwrap();
        assert!((q.a.to_dense() - mesh.stiffness().to_dense()).amax() < 1e-12);
        let (a, m) = (q.a.to_dense(), q.m.to_dense());
        assert_eq!(&a - a.transpose(), a.clone() * 0.0);
        assert_eq!(&m - m.transpose(), m.clone() * 0.0);
        assert!(q.m.diag.iter().all(|&d| d > 0.0));
    }

    #[test]
    fn degenerate_hessian_reports_all_elements() {
        let mesh = Arc::new(Mesh1D::uniform(1.0, 5).unwrap());
        let s = spec(1.5, 0.0, Nonlinearity::smooth_power(1.5, 1.0, 1.0, 1.0).unwrap());
        match assemble_hessian(&s, &DiscreteField::zeros(mesh)) {
            Err(Error::DegenerateElement { elements }) => assert_eq!(elements, (0..6).collect::<Vec<_>>()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn norm_examples() {
        let mesh = Arc::new(Mesh1D::uniform(1.0, 1).unwrap());
        let zero = DiscreteField::zeros(mesh.clone());
        assert_eq!(norms(&zero, 2.0), Norms { seminorm: 0.0, lp: 0.0, sup: 0.0 });
        let hat = DiscreteField::new(mesh, DVector::from_vec(vec![1.0])).unwrap();
        let n = norms(&hat, 2.0);
        assert_relative_eq!(n.seminorm, 2.0, epsilon = 1e-14);
        // ∫ hat² = 1/3
        assert_relative_eq!(n.lp, (1.0f64 / 3.0).sqrt(), epsilon = 1e-14);
        assert_eq!(n.sup, 1.0);
        // ∫ |hat|^1.5 = 2 · ½ · 1/2.5
        assert_relative_eq!(norms(&hat, 1.5).lp, 0.4f64.powf(1.0 / 1.5), epsilon = 1e-12);
    }

    #[test]
    fn mass_kinds_have_unit_total() {
        // 1ᵀ B 1 over all nodes is L; interior part is L − (boundary halves).
        let mesh = Mesh1D::uniform(1.0, 9).unwrap();
        let ones = DVector::from_element(9, 1.0);
        for kind in [MassKind::Consistent, MassKind::Lumped, MassKind::Averaged] {
            let b = mesh.mass(kind);
            assert!(b.bilinear(&ones, &ones) < 1.0);
            assert!(b.diag.iter().all(|&d| d > 0.0));
        }
    }

    #[test]
    fn table_round_trip() {
        let mesh = Arc::new(Mesh1D::from_nodes(vec![0.0, 0.2, 0.7, 1.0]).unwrap());
        let u = DiscreteField::new(mesh, DVector::from_vec(vec![0.3, -1.25e-7])).unwrap();
        let back = DiscreteField::from_table(&u.to_table()).unwrap();
        assert_eq!(back, u);
        assert!(DiscreteField::from_table("x,v\n0,0\n").is_err());
        assert!(DiscreteField::from_table("x,u\n0,1\n0.5,1\n1,0\n").is_err());
    }

    proptest::proptest! {
        #[test]
        fn norms_are_homogeneous(c in -5.0f64..5.0, seed in 0u64..1000) {
            let mesh = Arc::new(Mesh1D::uniform(1.0, 15).unwrap());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_field(&mesh, &mut rng);
            for p in [1.5, 2.0, 3.0] {
                let a = norms(&u, p);
                let b = norms(&u.scale(c), p);
                proptest::prop_assert!((b.seminorm - c.abs() * a.seminorm).abs() <= 1e-12 * (1.0 + a.seminorm));
                proptest::prop_assert!((b.lp - c.abs() * a.lp).abs() <= 1e-12 * (1.0 + a.lp));
                proptest::prop_assert!((b.sup - c.abs() * a.sup).abs() <= 1e-15 * (1.0 + a.sup));
            }
        }

        #[test]
        fn principal_energy_is_convex(seed in 0u64..1000) {
            let mesh = Arc::new(Mesh1D::uniform(1.0, 12).unwrap());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for (p, kappa) in [(1.5, 0.0), (2.0, 0.0), (3.0, 1.0)] {
                let s = spec(p, kappa, zero_g(p));
                let u = random_field(&mesh, &mut rng);
                let v = random_field(&mesh, &mut rng);
                let mid = u.with_values((u.values() + v.values()) * 0.5);
                let lhs = assemble_energy(&s, &mid);
                let rhs = 0.5 * (assemble_energy(&s, &u) + assemble_energy(&s, &v));
                proptest::prop_assert!(lhs < rhs);
            }
        }
    }
}
