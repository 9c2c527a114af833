//! Finite-dimensional reduction at a critical point `u₀`.
//!
//! `V` is spanned by the eigenfields of `Q_{u₀}` with eigenvalue `≤ 0`
//! (B-orthonormal), `W` is its L²-orthogonal complement. For `v ∈ V`,
//! `ψ(v)` minimizes `w ↦ f(u₀ + v + w)` over `W` near 0 and
//! `φ(v) = f(u₀ + v + ψ(v))`. Because `∇f(u₀+v+ψ(v))` annihilates `W`,
//! `∂φ/∂vᵢ = ⟨∇f(u₀+v+ψ(v)), eᵢ⟩` exactly; `φ″(0)` is the `V`-block of
//! `Q_{u₀}`, i.e. `diag(θᵢ)`.
//!
//! `ψ′` is only reached through finite differences of `φ`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::discretization::{assemble_energy, assemble_gradient, norms, DiscreteField, MassKind};
use crate::energy::EnergySpec;
use crate::error::{Error, Result};
use crate::linalg::SymTridiag;
use crate::morse::{assemble_q, MorseData, Regime};
use crate::solvers::{minimize_over_subspace, SolverConfig, Subspace};
use crate::spectrum::lowest_eigenpairs;

/// Eigenvalues up to `+V_INCLUSION_RTOL·scale` count as nonpositive.
pub const V_INCLUSION_RTOL: f64 = 1e-10;
/// Radius halvings allowed after a failed inner minimization.
pub const MAX_HALVINGS: usize = 4;

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub u0: DiscreteField,
    /// B-orthonormal nodal fields spanning `V`.
    pub v_basis: Vec<DiscreteField>,
    /// `θᵢ` with `Q_{u₀} eᵢ = θᵢ B eᵢ`.
    pub eigenvalues: Vec<f64>,
    /// `B eᵢ`: `w ∈ W ⟺ cᵢᵀ w = 0` for all `i`.
    pub constraints: Vec<DVector<f64>>,
    /// The L² Gram matrix on nodal vectors.
    pub mass: SymTridiag,
    /// Radius of the `V`-ball.
    pub rho: f64,
    /// Radius of the `W`-ball.
    pub r: f64,
}

impl Decomposition {
    pub fn dim_v(&self) -> usize {
        self.v_basis.len()
    }

    /// A decomposition along prescribed B-orthonormal directions.
    pub fn from_basis(u0: &DiscreteField, basis: Vec<DiscreteField>, eigenvalues: Vec<f64>, rho: f64, r: f64) -> Self {
        let mass = u0.mesh().mass(MassKind::default());
        let constraints = basis.iter().map(|e| mass.mul_vec(e.values())).collect();
        Self {
            u0: u0.clone(),
            v_basis: basis,
            eigenvalues,
            constraints,
            mass,
            rho,
            r,
        }
    }

    /// `Σ vᵢ eᵢ`.
    pub fn embed(&self, v: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.u0.values().len());
        for (c, e) in v.iter().zip(&self.v_basis) {
            out.axpy(*c, e.values(), 1.0);
        }
        out
    }

    /// `x − Σ eᵢ (eᵢᵀ B x)`.
    pub fn project_w(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = x.clone();
        for (e, c) in self.v_basis.iter().zip(&self.constraints) {
            out.axpy(-c.dot(x), e.values(), 1.0);
        }
        out
    }

    fn halve(&mut self) {
        self.rho *= 0.5;
        self.r *= 0.5;
    }
}

/// Default radius `0.1·(1 + ‖u₀‖_{W^{1,p}})`.
pub fn default_radius(u0: &DiscreteField, p: f64) -> f64 {
    0.1 * (1.0 + norms(u0, p).seminorm)
}

/// `V` from the lowest `m*` eigenpairs of `Q_{u₀}`; `W` its L² complement.
pub fn build_decomposition(
    spec: &EnergySpec,
    u0: &DiscreteField,
    md: &MorseData,
    radii: Option<(f64, f64)>,
) -> Result<Decomposition> {
    let k = md.m_star.finite().ok_or(Error::InfiniteIndex)?;
    let (q, _, _) = assemble_q(spec, u0)?;
    let default = default_radius(u0, spec.p());
    let (rho, r) = radii.unwrap_or((default, default));
    let pairs = lowest_eigenpairs(&q, k.min(q.dim()))?;
    let scale = q.form().max_abs() / q.b.max_abs().max(f64::MIN_POSITIVE);
    let mut basis = Vec::new();
    let mut eigenvalues = Vec::new();
    for pair in pairs {
        if pair.value <= V_INCLUSION_RTOL * scale {
            eigenvalues.push(pair.value);
            basis.push(pair.field);
        }
    }
    Ok(Decomposition::from_basis(u0, basis, eigenvalues, rho, r))
}

/// One evaluation of the reduced functional.
#[derive(Debug, Clone)]
pub struct ReducedSample {
    pub v: Vec<f64>,
    /// `ψ(v) ∈ W`.
    pub psi: DiscreteField,
    pub phi: f64,
    pub grad_phi: Vec<f64>,
}

impl ReducedSample {
    pub fn grad_norm(&self) -> f64 {
        self.grad_phi.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// `ψ(v)` by minimization over `W` from `w = 0`.
pub fn psi_map(spec: &EnergySpec, dec: &Decomposition, v: &[f64], cfg: &SolverConfig) -> Result<ReducedSample> {
    psi_map_from(spec, dec, v, &DiscreteField::zeros(dec.u0.mesh().clone()), cfg)
}

/// `ψ(v)` from an explicit start in `W`.
pub fn psi_map_from(
    spec: &EnergySpec,
    dec: &Decomposition,
    v: &[f64],
    start: &DiscreteField,
    cfg: &SolverConfig,
) -> Result<ReducedSample> {
    assert_eq!(v.len(), dec.dim_v(), "coordinate count must equal dim V");
    let base = dec.u0.with_values(dec.u0.values() + dec.embed(v));
    let w = minimize_over_subspace(spec, &base, &Subspace::Annihilator(dec.constraints.clone()), start, cfg)
        .map_err(|e| Error::SolverFailure(e.to_string()))?;
    let size = norms(&w, spec.p()).seminorm;
    if size > dec.r {
        return Err(Error::SolverFailure(format!(
            "minimizer left the W-ball (|w| = {size:.3e} > r = {:.3e})",
            dec.r
        )));
    }
    let u = base.with_values(base.values() + w.values());
    let grad = assemble_gradient(spec, &u);
    Ok(ReducedSample {
        v: v.to_vec(),
        phi: assemble_energy(spec, &u),
        grad_phi: dec.v_basis.iter().map(|e| grad.dot(e.values())).collect(),
        psi: w,
    })
}

/// Retry `run` with halved radii while it fails in the inner minimization.
pub fn with_backoff<T>(dec: &mut Decomposition, mut run: impl FnMut(&Decomposition) -> Result<T>) -> Result<T> {
    let mut halvings = 0;
    loop {
        match run(dec) {
            Err(Error::SolverFailure(msg)) if halvings < MAX_HALVINGS => {
                let _ = msg;
                dec.halve();
                halvings += 1;
            }
            other => return other,
        }
    }
}

fn random_ball_point(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    let mut x: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let scale = radius * rng.random::<f64>().powf(1.0 / dim as f64) / n;
    x.iter_mut().for_each(|v| *v *= scale);
    x
}

/// Largest `|∂φ/∂vᵢ − central difference|` over random points of the
/// `ρ`-ball (step `1e−4·ρ`, kept inside the ball).
pub fn reduced_gradient_check(
    spec: &EnergySpec,
    dec: &Decomposition,
    samples: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let k = dec.dim_v();
    if k == 0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta = 1e-4 * dec.rho;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let z = random_ball_point(&mut rng, k, dec.rho - delta);
        let at = psi_map(spec, dec, &z, cfg)?;
        for i in 0..k {
            let mut plus = z.clone();
            let mut minus = z.clone();
            plus[i] += delta;
            minus[i] -= delta;
            let fd = (psi_map(spec, dec, &plus, cfg)?.phi - psi_map(spec, dec, &minus, cfg)?.phi) / (2.0 * delta);
            worst = worst.max((fd - at.grad_phi[i]).abs());
        }
    }
    Ok(worst)
}

/// Central-difference Hessian of `φ` at 0 from the exact `∇φ`, symmetrized.
pub fn reduced_hessian_at_zero(spec: &EnergySpec, dec: &Decomposition, cfg: &SolverConfig) -> Result<DMatrix<f64>> {
    if Regime::of(spec) != Regime::KappaPositive {
        return Err(Error::RegimeExcluded(format!(
            "the reduced Hessian needs kappa > 0 or p = 2 (kappa = {}, p = {})",
            spec.kappa(),
            spec.p()
        )));
    }
    let k = dec.dim_v();
    let delta = 1e-3 * dec.rho;
    let mut h = DMatrix::zeros(k, k);
    for j in 0..k {
        let mut plus = vec![0.0; k];
        let mut minus = vec![0.0; k];
        plus[j] = delta;
        minus[j] = -delta;
        let gp = psi_map(spec, dec, &plus, cfg)?.grad_phi;
        let gm = psi_map(spec, dec, &minus, cfg)?.grad_phi;
        for i in 0..k {
            h[(i, j)] = (gp[i] - gm[i]) / (2.0 * delta);
        }
    }
    Ok((&h + h.transpose()) * 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OriginClass {
    LocalMin,
    LocalMax,
    Saddle,
    Degenerate,
}

impl OriginClass {
    pub fn name(&self) -> &'static str {
        match self {
            OriginClass::LocalMin => "localMin",
            OriginClass::LocalMax => "localMax",
            OriginClass::Saddle => "saddle",
            OriginClass::Degenerate => "degenerate",
        }
    }
}

impl std::fmt::Display for OriginClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub const GRID_DIRECTIONS: usize = 16;
pub const GRID_RADII: usize = 8;

/// Polar grid in `V` (the two rays `±e₁` when `dim V = 1`), radii
/// `ρ·k/8`, `k = 1..8`, ordered by direction then radius.
pub fn polar_grid(dim: usize, rho: f64) -> Result<Vec<Vec<f64>>> {
    let radii: Vec<f64> = (1..=GRID_RADII).map(|k| rho * k as f64 / GRID_RADII as f64).collect();
    Ok(match dim {
        0 => Vec::new(),
        1 => [1.0, -1.0]
            .iter()
            .flat_map(|s| radii.iter().map(move |r| vec![s * r]))
            .collect(),
        2 => (0..GRID_DIRECTIONS)
            .flat_map(|d| {
                let t = 2.0 * std::f64::consts::PI * d as f64 / GRID_DIRECTIONS as f64;
                radii.iter().map(move |r| vec![r * t.cos(), r * t.sin()])
            })
            .collect(),
        k => return Err(Error::DimTooHigh(k)),
    })
}

/// `φ` on the polar grid, plus `φ(0)`.
pub fn sample_grid(spec: &EnergySpec, dec: &Decomposition, cfg: &SolverConfig) -> Result<(ReducedSample, Vec<ReducedSample>)> {
    let grid = polar_grid(dec.dim_v(), dec.rho)?;
    let origin = psi_map(spec, dec, &vec![0.0; dec.dim_v()], cfg)?;
    let samples = grid.iter().map(|v| psi_map(spec, dec, v, cfg)).collect::<Result<Vec<_>>>()?;
    Ok((origin, samples))
}

/// Sign pattern of `φ(v) − φ(0)` over the grid. `dim V = 0` is a minimum
/// along `W` by construction.
pub fn classify_origin(origin: &ReducedSample, samples: &[ReducedSample]) -> OriginClass {
    if samples.is_empty() {
        return OriginClass::LocalMin;
    }
    let floor = 1e-12 * (1.0 + origin.phi.abs());
    let diffs: Vec<f64> = samples.iter().map(|s| s.phi - origin.phi).collect();
    if diffs.iter().any(|d| d.abs() <= floor) {
        return OriginClass::Degenerate;
    }
    let up = diffs.iter().any(|d| *d > 0.0);
    let down = diffs.iter().any(|d| *d < 0.0);
    match (up, down) {
        (true, false) => OriginClass::LocalMin,
        (false, true) => OriginClass::LocalMax,
        _ => OriginClass::Saddle,
    }
}
