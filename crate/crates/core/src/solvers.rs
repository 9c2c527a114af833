//! Critical points of the discrete energy: damped Newton, deflated
//! multistart, a max-point mountain-pass descent, minimization over a
//! subspace, and the cone predicates of the saddle geometry.
//!
//! The discrete problem is finite dimensional, so the Cerami–Palais–Smale
//! compactness condition holds automatically; nothing here tests it.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::discretization::{
    assemble_energy, assemble_gradient, assemble_hessian, assemble_hessian_regularized, ensure_same_mesh, norms,
    seminorm_distance, DiscreteField, MassKind,
};
use crate::energy::EnergySpec;
use crate::error::{Error, Result};
use crate::linalg::{orthonormal_columns, SymTridiag, TridiagLu};
use crate::morse::MorseData;
use crate::spectrum::SpectrumTable;

/// Newton gives up when the residual has not dropped by 10% over this many
/// iterations.
const STAGNATION_WINDOW: usize = 30;

/// Two fields closer than this in the W^{1,p} seminorm are the same root.
pub const DISTINCT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Sup norm of the gradient at convergence.
    pub tol_residual: f64,
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo_c: f64,
    /// Step reduction factor of the backtracking line search.
    pub backtrack: f64,
    /// Deflation `(‖u − u*‖^{−power} + shift)`.
    pub deflation_power: f64,
    pub deflation_shift: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_residual: 1e-10,
            max_iter: 200,
            armijo_c: 1e-4,
            backtrack: 0.5,
            deflation_power: 2.0,
            deflation_shift: 1.0,
            seed: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_residual > 0.0) {
            return Err(Error::BadConfig(format!("tolResidual must be > 0, got {}", self.tol_residual)));
        }
        if self.max_iter == 0 {
            return Err(Error::BadConfig("maxIter must be >= 1".into()));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) || !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::BadConfig("line search parameters must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// A verified critical point.
#[derive(Debug, Clone)]
pub struct CriticalPointRecord {
    pub field: DiscreteField,
    pub energy: f64,
    /// `sup |∇f|` recomputed at `field`.
    pub residual: f64,
    pub iterations: usize,
    /// Which finder produced it.
    pub source: String,
    pub morse: Option<MorseData>,
}

impl CriticalPointRecord {
    pub fn new(spec: &EnergySpec, field: DiscreteField, iterations: usize, source: impl Into<String>) -> Self {
        let residual = assemble_gradient(spec, &field).amax();
        Self {
            energy: assemble_energy(spec, &field),
            residual,
            field,
            iterations,
            source: source.into(),
            morse: None,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.field.sup_norm()
    }
}

/// Slope floor for the κ = 0, p < 2 curvature.
pub fn regularization_eps(u: &DiscreteField) -> f64 {
    let max = u.slopes().iter().fold(0.0_f64, |m, s| m.max(s.abs()));
    1e-8 * (1.0 + max)
}

/// `A − M` at `u`, with the slope floor applied where Ψ″ is undefined.
pub fn newton_form(spec: &EnergySpec, u: &DiscreteField) -> SymTridiag {
    match assemble_hessian(spec, u) {
        Ok(q) => q.form(),
        Err(_) => assemble_hessian_regularized(spec, u, regularization_eps(u)).form(),
    }
}

/// Positive definite Riesz map for gradient steps: the principal-part block
/// of the Hessian (slope-floored), plus a small mass shift.
pub fn sobolev_preconditioner(spec: &EnergySpec, u: &DiscreteField) -> SymTridiag {
    let q = assemble_hessian_regularized(spec, u, regularization_eps(u).max(1e-3));
    let mass = u.mesh().mass(MassKind::Lumped);
    let shift = 1e-8 * q.a.max_abs() / mass.max_abs();
    q.a.axpy(shift, &mass)
}

/// How an iterate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMode {
    Newton,
    /// Preconditioned steepest descent on `f` with Armijo control.
    Descent,
}

#[derive(Debug, Clone, Default)]
pub struct NewtonTrace {
    pub residuals: Vec<f64>,
    pub energies: Vec<f64>,
    pub modes: Vec<StepMode>,
}

/// Damped Newton on `∇f = 0`. Saddles are admissible: the line search
/// controls the residual, not the energy.
pub fn newton_solve(spec: &EnergySpec, u0: &DiscreteField, cfg: &SolverConfig) -> Result<CriticalPointRecord> {
    newton_core(spec, u0, cfg, &[], None)
}

pub fn newton_solve_traced(
    spec: &EnergySpec,
    u0: &DiscreteField,
    cfg: &SolverConfig,
) -> Result<(CriticalPointRecord, NewtonTrace)> {
    let mut trace = NewtonTrace::default();
    let rec = newton_core(spec, u0, cfg, &[], Some(&mut trace))?;
    Ok((rec, trace))
}

/// Deflation factor `Π (‖u − uᵢ‖^{−q} + σ)` and the gradient of its log.
struct Deflation<'a> {
    roots: &'a [DiscreteField],
    power: f64,
    shift: f64,
    p: f64,
}

impl Deflation<'_> {
    fn factor(&self, u: &DiscreteField) -> f64 {
        self.roots
            .iter()
            .map(|r| seminorm_distance(u, r, self.p).powf(-self.power) + self.shift)
            .product()
    }

    /// `∇ log M(u)`.
    fn log_gradient(&self, u: &DiscreteField) -> DVector<f64> {
        let n = u.values().len();
        let mut out = DVector::zeros(n);
        for r in self.roots {
            let e = u.with_values(u.values() - r.values());
            let p = self.p;
            let nrm = norms(&e, p).seminorm;
            if nrm == 0.0 {
                continue;
            }
            // ∂‖e‖/∂u_j = ‖e‖^{1−p} Σₑ hₑ|sₑ|^{p−2}sₑ ∂sₑ/∂u_j, and hₑ ∂sₑ/∂u_j = ±1
            let mut dn = DVector::zeros(n);
            for el in 0..e.mesh().n_elements() {
                let s = e.slope(el);
                let t = s.abs().powf(p - 1.0) * s.signum();
                if el >= 1 {
                    dn[el - 1] -= t;
                }
                if el < n {
                    dn[el] += t;
                }
            }
            dn *= nrm.powf(1.0 - p);
            let m = nrm.powf(-self.power) + self.shift;
            let dm = -self.power * nrm.powf(-self.power - 1.0);
            out.axpy(dm / m, &dn, 1.0);
        }
        out
    }
}

fn newton_core(
    spec: &EnergySpec,
    u0: &DiscreteField,
    cfg: &SolverConfig,
    deflate: &[DiscreteField],
    mut trace: Option<&mut NewtonTrace>,
) -> Result<CriticalPointRecord> {
    let defl = Deflation {
        roots: deflate,
        power: cfg.deflation_power,
        shift: cfg.deflation_shift,
        p: spec.p(),
    };
    let merit = |u: &DiscreteField, r: &DVector<f64>| -> f64 {
        let m = if deflate.is_empty() { 1.0 } else { defl.factor(u) };
        m * r.norm()
    };
    let mut u = u0.clone();
    let mut r = assemble_gradient(spec, &u);
    let mut history = Vec::new();
    for it in 0..=cfg.max_iter {
        let res = r.amax();
        if let Some(t) = trace.as_deref_mut() {
            t.residuals.push(res);
            t.energies.push(assemble_energy(spec, &u));
        }
        if !res.is_finite() {
            return Err(Error::MaxIterExceeded {
                iterations: it,
                residual: res,
            });
        }
        if res <= cfg.tol_residual {
            return Ok(CriticalPointRecord::new(spec, u, it, "newton"));
        }
        history.push(res);
        let stagnant = it >= STAGNATION_WINDOW && res > 0.9 * history[it - STAGNATION_WINDOW];
        if it == cfg.max_iter || stagnant {
            return Err(Error::MaxIterExceeded {
                iterations: it,
                residual: res,
            });
        }
        let newton_dir = TridiagLu::factor(&newton_form(spec, &u))
            .or_else(|_| {
                TridiagLu::factor(&assemble_hessian_regularized(spec, &u, regularization_eps(&u).max(1e-6)).form())
            })
            .ok()
            .map(|lu| {
                let mut d = lu.solve(&(-&r));
                if !deflate.is_empty() {
                    let eta = defl.log_gradient(&u);
                    let tau = 1.0 / (1.0 - eta.dot(&d));
                    if tau.is_finite() {
                        d *= tau;
                    }
                }
                d
            });

        // Newton with backtracking on the (deflated) residual norm.
        let mut accepted = None;
        if let Some(d) = newton_dir.as_ref().filter(|d| d.iter().all(|v| v.is_finite())) {
            let m0 = merit(&u, &r);
            let mut alpha = 1.0;
            for _ in 0..40 {
                let trial = u.with_values(u.values() + d * alpha);
                let rt = assemble_gradient(spec, &trial);
                let mt = merit(&trial, &rt);
                if mt.is_finite() && mt <= (1.0 - cfg.armijo_c * alpha) * m0 {
                    accepted = Some((trial, rt));
                    break;
                }
                alpha *= cfg.backtrack;
            }
        }
        let mode = if accepted.is_some() {
            StepMode::Newton
        } else {
            StepMode::Descent
        };
        // Descending f would lead back to the deflated roots.
        if accepted.is_none() && deflate.is_empty() {
            accepted = descent_step(spec, &u, &r, cfg);
        }
        match accepted {
            Some((next, rn)) => {
                if let Some(t) = trace.as_deref_mut() {
                    t.modes.push(mode);
                }
                u = next;
                r = rn;
            }
            None => {
                return Err(if newton_dir.is_none() {
                    Error::SingularHessian
                } else {
                    Error::MaxIterExceeded {
                        iterations: it,
                        residual: res,
                    }
                })
            }
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// One Armijo-controlled step along the Sobolev gradient; `None` when no
/// decrease is found.
fn descent_step(
    spec: &EnergySpec,
    u: &DiscreteField,
    r: &DVector<f64>,
    cfg: &SolverConfig,
) -> Option<(DiscreteField, DVector<f64>)> {
    let lu = TridiagLu::factor(&sobolev_preconditioner(spec, u)).ok()?;
    let d = -lu.solve(r);
    let slope = r.dot(&d);
    if !(slope < 0.0) {
        return None;
    }
    let f0 = assemble_energy(spec, u);
    let mut alpha = 1.0;
    for _ in 0..60 {
        let trial = u.with_values(u.values() + &d * alpha);
        let ft = assemble_energy(spec, &trial);
        if ft <= f0 + cfg.armijo_c * alpha * slope {
            let rt = assemble_gradient(spec, &trial);
            return Some((trial, rt));
        }
        alpha *= cfg.backtrack;
    }
    None
}

/// Newton runs from deterministic starts with deflation of every root
/// found so far. Start 0 is the zero field, then low eigenmode multiples,
/// then seeded random smooth fields. Runs are sequential so the deflation
/// set, and hence the output, depends only on the seed.
pub fn multistart_deflated(spec: &EnergySpec, mesh: &std::sync::Arc<crate::discretization::Mesh1D>, starts: usize, cfg: &SolverConfig) -> Vec<CriticalPointRecord> {
    let mut found: Vec<CriticalPointRecord> = Vec::new();
    let mut roots: Vec<DiscreteField> = Vec::new();
    let p = spec.p();
    let length = mesh.length();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let eigen_starts: Vec<(usize, f64)> = [1usize, 2, 3]
        .iter()
        .flat_map(|&k| [0.5, 2.0, 8.0].map(|a| (k, a)))
        .collect();
    for idx in 0..starts {
        let start = if idx == 0 {
            DiscreteField::zeros(mesh.clone())
        } else if idx <= eigen_starts.len() {
            let (k, a) = eigen_starts[idx - 1];
            DiscreteField::interpolate(mesh.clone(), |x| a * (k as f64 * std::f64::consts::PI * x / length).sin())
        } else {
            random_start(mesh, &mut rng)
        };
        let Ok(mut rec) = newton_core(spec, &start, cfg, &roots, None) else {
            continue;
        };
        if rec.residual > cfg.tol_residual {
            continue;
        }
        if roots.iter().any(|r| seminorm_distance(&rec.field, r, p) <= DISTINCT_TOL) {
            continue;
        }
        rec.source = format!("multistart #{idx}");
        roots.push(rec.field.clone());
        found.push(rec);
    }
    // For odd g, f is even and −u is critical whenever u is.
    if spec.g_is_odd() {
        let mut mirrored = Vec::new();
        for rec in &found {
            let neg = rec.field.scale(-1.0);
            if roots.iter().any(|r| seminorm_distance(&neg, r, p) <= DISTINCT_TOL) {
                continue;
            }
            let mut m = CriticalPointRecord::new(spec, neg, 0, format!("reflection of {}", rec.source));
            if m.residual <= cfg.tol_residual {
                roots.push(m.field.clone());
                m.morse = None;
                mirrored.push(m);
            }
        }
        found.extend(mirrored);
    }
    found
}

fn random_start(mesh: &std::sync::Arc<crate::discretization::Mesh1D>, rng: &mut ChaCha8Rng) -> DiscreteField {
    let coeffs: Vec<f64> = (1..=6)
        .map(|j| {
            let c: f64 = rng.sample(StandardNormal);
            c / j as f64
        })
        .collect();
    let amp = 10f64.powf(rng.random_range(-1.0..1.5));
    let length = mesh.length();
    let field = DiscreteField::interpolate(mesh.clone(), |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * ((j + 1) as f64 * std::f64::consts::PI * x / length).sin())
            .sum()
    });
    let sup = field.sup_norm();
    if sup == 0.0 {
        field
    } else {
        field.scale(amp / sup)
    }
}

/// Default number of path segments.
pub const MOUNTAIN_PASS_SEGMENTS: usize = 21;
/// Samples of the straight segment used to locate the barrier.
const FINE_SAMPLES: usize = 400;
/// Max-point residual below which Newton is tried from the max point.
const POLISH_THRESHOLD: f64 = 1e-4;
/// Sweeps without a 1% residual improvement before Newton is tried anyway.
const STALL_SWEEPS: usize = 100;

/// Max-point descent along a discretized path from `a` to `b`, with
/// equal-arclength reparametrization after every sweep and a Newton polish
/// once the max point is nearly critical.
pub fn mountain_pass(
    spec: &EnergySpec,
    a: &DiscreteField,
    b: &DiscreteField,
    segments: usize,
    cfg: &SolverConfig,
) -> Result<CriticalPointRecord> {
    ensure_same_mesh(a, b)?;
    let p = spec.p();
    let span = seminorm_distance(a, b, p);
    if span <= 1e-12 * (1.0 + norms(a, p).seminorm) || segments < 2 {
        return Err(Error::PathCollapse);
    }
    let field = |v: &DVector<f64>| a.with_values(v.clone());
    let on_segment = |t: f64| a.values() * (1.0 - t) + b.values() * t;
    let fa = assemble_energy(spec, a);
    let fb = assemble_energy(spec, b);
    let level = fa.max(fb);
    let margin = 1e-12 * (1.0 + fa.abs().max(fb.abs()));

    // The barrier may be narrower than one path segment: locate it on a fine
    // sampling of the segment and cut the path at the first point beyond it
    // that is back below both endpoint levels.
    let fine: Vec<f64> = (0..=FINE_SAMPLES)
        .map(|i| assemble_energy(spec, &field(&on_segment(i as f64 / FINE_SAMPLES as f64))))
        .collect();
    let peak = (1..FINE_SAMPLES).max_by(|&i, &j| fine[i].total_cmp(&fine[j])).unwrap();
    if !(fine[peak] > level + margin) {
        return Err(Error::NoBarrier);
    }
    let cut = (peak + 1..=FINE_SAMPLES)
        .find(|&i| fine[i] <= level)
        .unwrap_or(FINE_SAMPLES);
    let t_end = cut as f64 / FINE_SAMPLES as f64;
    let b_end = field(&on_segment(t_end));

    let mut path: Vec<DVector<f64>> = (0..=segments)
        .map(|k| on_segment(t_end * k as f64 / segments as f64))
        .collect();
    let mut energies: Vec<f64> = path.iter().map(|v| assemble_energy(spec, &field(v))).collect();
    let interior_max = energies[1..segments].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(interior_max > level + margin) {
        return Err(Error::NoBarrier);
    }
    let b = &b_end;

    let mut polish_at = POLISH_THRESHOLD;
    let mut step: f64 = 1.0;
    let sweeps = 20 * cfg.max_iter;
    let mut last_res = f64::INFINITY;
    let mut best_res = f64::INFINITY;
    let mut stalled = 0;
    for sweep in 0..sweeps {
        let k = (1..segments)
            .max_by(|&i, &j| energies[i].total_cmp(&energies[j]))
            .unwrap();
        let uk = field(&path[k]);
        if seminorm_distance(&uk, a, p).min(seminorm_distance(&uk, b, p)) <= 1e-8 * span {
            return Err(Error::PathCollapse);
        }
        let r = assemble_gradient(spec, &uk);
        let res = r.amax();
        last_res = res;
        if res < 0.99 * best_res {
            best_res = res;
            stalled = 0;
        } else {
            stalled += 1;
        }
        // The polygon only resolves the saddle to O(spacing²); once the
        // descent stops improving, Newton takes over from the max point.
        if res <= cfg.tol_residual || res <= polish_at || stalled >= STALL_SWEEPS {
            stalled = 0;
            if let Ok(rec) = newton_solve(spec, &uk, cfg) {
                let near_end = seminorm_distance(&rec.field, a, p).min(seminorm_distance(&rec.field, b, p))
                    <= DISTINCT_TOL;
                if !near_end {
                    return Ok(CriticalPointRecord {
                        iterations: sweep,
                        source: "mountain pass".into(),
                        ..rec
                    });
                }
            }
            polish_at *= 0.1;
        }
        let Ok(lu) = TridiagLu::factor(&sobolev_preconditioner(spec, &uk)) else {
            return Err(Error::SingularHessian);
        };
        let d = -lu.solve(&r);
        let slope = r.dot(&d);
        let f0 = energies[k];
        let mut alpha = (2.0 * step).min(1.0);
        let mut moved = false;
        for _ in 0..60 {
            let trial = &path[k] + &d * alpha;
            let ft = assemble_energy(spec, &field(&trial));
            if ft <= f0 + cfg.armijo_c * alpha * slope {
                path[k] = trial;
                energies[k] = ft;
                moved = true;
                break;
            }
            alpha *= cfg.backtrack;
        }
        if !moved {
            return Err(Error::MaxIterExceeded {
                iterations: sweep,
                residual: res,
            });
        }
        step = alpha;
        reparametrize(&mut path, spec, a);
        for (e, v) in energies.iter_mut().zip(&path) {
            *e = assemble_energy(spec, &field(v));
        }
    }
    Err(Error::MaxIterExceeded {
        iterations: sweeps,
        residual: last_res,
    })
}

/// Redistribute path points to equal spacing in the W^{1,p} seminorm,
/// by piecewise-linear interpolation along the current polygon.
fn reparametrize(path: &mut [DVector<f64>], spec: &EnergySpec, template: &DiscreteField) {
    let p = spec.p();
    let n = path.len();
    let mut cum = vec![0.0; n];
    for i in 1..n {
        let d = template.with_values(&path[i] - &path[i - 1]);
        cum[i] = cum[i - 1] + norms(&d, p).seminorm;
    }
    let total = cum[n - 1];
    if !(total > 0.0) {
        return;
    }
    let old: Vec<DVector<f64>> = path.to_vec();
    let mut seg = 0;
    for (i, slot) in path.iter_mut().enumerate().take(n - 1).skip(1) {
        let target = total * i as f64 / (n - 1) as f64;
        while seg + 1 < n - 1 && cum[seg + 1] < target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 { (target - cum[seg]) / len } else { 0.0 };
        *slot = &old[seg] * (1.0 - t) + &old[seg + 1] * t;
    }
}

/// The subspace `W` for [`minimize_over_subspace`].
#[derive(Debug, Clone)]
pub enum Subspace {
    /// Span of the given fields (linearly independent).
    Span(Vec<DiscreteField>),
    /// `{w : cᵢᵀ w = 0}` for the given covectors.
    Annihilator(Vec<DVector<f64>>),
}

/// Minimize `w ↦ f(base + w)` over `w ∈ W`, starting from `start`
/// (projected onto `W` first). Newton steps on the restricted problem with
/// Armijo control of `f`; a preconditioned gradient step replaces Newton
/// when the restricted Hessian is not positive definite.
pub fn minimize_over_subspace(
    spec: &EnergySpec,
    base: &DiscreteField,
    subspace: &Subspace,
    start: &DiscreteField,
    cfg: &SolverConfig,
) -> Result<DiscreteField> {
    ensure_same_mesh(base, start)?;
    let n = base.values().len();
    let restricted = Restriction::new(subspace, n);
    if restricted.is_trivial() {
        return Ok(start.clone());
    }
    let mut w = restricted.project(start.values());
    let at = |w: &DVector<f64>| base.with_values(base.values() + w);
    for it in 0..=cfg.max_iter {
        let u = at(&w);
        let r = assemble_gradient(spec, &u);
        let pr = restricted.project(&r);
        let res = pr.amax();
        if res <= cfg.tol_residual {
            return Ok(base.with_values(w));
        }
        if it == cfg.max_iter || !res.is_finite() {
            return Err(Error::MaxIterExceeded {
                iterations: it,
                residual: res,
            });
        }
        let f0 = assemble_energy(spec, &u);
        let newton = restricted.solve(&newton_form(spec, &u), &r);
        if let Some(d) = &newton {
            // Below the rounding level of f only the residual can steer.
            if r.dot(d).abs() <= 1e3 * f64::EPSILON * (1.0 + f0.abs()) {
                let trial = &w + d;
                let next = restricted.project(&assemble_gradient(spec, &at(&trial))).amax();
                if next < res {
                    w = trial;
                    continue;
                }
            }
        }
        let d = match newton.filter(|d| r.dot(d) < 0.0) {
            Some(d) => d,
            None => restricted
                .solve(&sobolev_preconditioner(spec, &u), &r)
                .ok_or(Error::SingularHessian)?,
        };
        let slope = r.dot(&d);
        let mut alpha = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let trial = &w + &d * alpha;
            if assemble_energy(spec, &at(&trial)) <= f0 + cfg.armijo_c * alpha * slope {
                w = trial;
                moved = true;
                break;
            }
            alpha *= cfg.backtrack;
        }
        if !moved {
            // Already at the floating-point floor of f along d.
            let u = at(&w);
            let res = restricted.project(&assemble_gradient(spec, &u)).amax();
            return Err(Error::MaxIterExceeded {
                iterations: it,
                residual: res,
            });
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// Linear algebra of a subspace restriction.
enum Restriction {
    /// Euclidean-orthonormal basis columns.
    Span(Vec<DVector<f64>>),
    /// Constraint covectors, with their Euclidean-orthonormal basis.
    Annihilator { cons: Vec<DVector<f64>>, ortho: Vec<DVector<f64>> },
}

impl Restriction {
    fn new(sub: &Subspace, n: usize) -> Self {
        match sub {
            Subspace::Span(fields) => {
                let cols: Vec<DVector<f64>> = fields.iter().map(|f| f.values().clone()).collect();
                Restriction::Span(orthonormal_columns(&cols, 1e-12))
            }
            Subspace::Annihilator(cons) => {
                let cons: Vec<DVector<f64>> = cons.iter().filter(|c| c.len() == n).cloned().collect();
                let ortho = orthonormal_columns(&cons, 1e-12);
                Restriction::Annihilator { cons, ortho }
            }
        }
    }

    fn is_trivial(&self) -> bool {
        matches!(self, Restriction::Span(b) if b.is_empty())
    }

    /// Euclidean projection onto `W`.
    fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Restriction::Span(basis) => {
                let mut out = DVector::zeros(x.len());
                for q in basis {
                    out.axpy(q.dot(x), q, 1.0);
                }
                out
            }
            Restriction::Annihilator { ortho, .. } => {
                let mut out = x.clone();
                for q in ortho {
                    out.axpy(-q.dot(x), q, 1.0);
                }
                out
            }
        }
    }

    /// Minimizer direction of `½dᵀHd + rᵀd` over `d ∈ W`; `None` if the
    /// restricted system is singular or not positive definite.
    fn solve(&self, h: &SymTridiag, r: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            Restriction::Span(basis) => {
                let k = basis.len();
                let hb: Vec<DVector<f64>> = basis.iter().map(|q| h.mul_vec(q)).collect();
                let hc = DMatrix::from_fn(k, k, |i, j| basis[i].dot(&hb[j]));
                let rc = DVector::from_fn(k, |i, _| -basis[i].dot(r));
                let c = hc.cholesky()?.solve(&rc);
                let mut d = DVector::zeros(r.len());
                for (q, ci) in basis.iter().zip(c.iter()) {
                    d.axpy(*ci, q, 1.0);
                }
                Some(d)
            }
            Restriction::Annihilator { cons, .. } => kkt_solve(h, cons, r),
        }
    }
}

/// `[H C; Cᵀ 0][d; μ] = [−r; 0]`, bordered through the tridiagonal LU of
/// `H` when it factors, dense otherwise. Rejects directions along which
/// `H` is not positive.
fn kkt_solve(h: &SymTridiag, cons: &[DVector<f64>], r: &DVector<f64>) -> Option<DVector<f64>> {
    let k = cons.len();
    let n = r.len();
    let bordered = TridiagLu::factor(h).ok().and_then(|lu| {
        let hr = lu.solve(r);
        let hc: Vec<DVector<f64>> = cons.iter().map(|c| lu.solve(c)).collect();
        let s = DMatrix::from_fn(k, k, |i, j| cons[i].dot(&hc[j]));
        let rhs = DVector::from_fn(k, |i, _| -cons[i].dot(&hr));
        let mu = s.lu().solve(&rhs)?;
        let mut d = -hr;
        for (j, c) in hc.iter().enumerate() {
            d.axpy(-mu[j], c, 1.0);
        }
        Some(d)
    });
    let d = match bordered {
        Some(d) if d.iter().all(|v| v.is_finite()) => d,
        _ => {
            let dense = h.to_dense();
            let mut kkt = DMatrix::zeros(n + k, n + k);
            kkt.view_mut((0, 0), (n, n)).copy_from(&dense);
            for (j, c) in cons.iter().enumerate() {
                kkt.view_mut((0, n + j), (n, 1)).copy_from(c);
                kkt.view_mut((n + j, 0), (1, n)).copy_from(&c.transpose());
            }
            let mut rhs = DVector::zeros(n + k);
            rhs.rows_mut(0, n).copy_from(&(-r));
            let sol = kkt.lu().solve(&rhs)?;
            sol.rows(0, n).into_owned()
        }
    };
    let curvature = h.bilinear(&d, &d);
    (curvature > 0.0 || d.amax() == 0.0).then_some(d)
}

/// The cones `X_− = {∫|u′|ᵖ ≤ λ_m ∫|u|ᵖ}` and `X_+ = {∫|u′|ᵖ ≥ λ_{m+1} ∫|u|ᵖ}`.
/// For `m = 0`, `X_− = {0}` and `X_+` is the whole space.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeGeometry {
    pub m: usize,
    pub p: f64,
    pub lambda_m: f64,
    pub lambda_m1: f64,
    pub radius: f64,
    /// Relative slack on the Rayleigh-quotient comparisons; the discrete
    /// quotient of an interpolated eigenfunction sits `O(h²)` above `λ_m`.
    pub slack: f64,
}

impl ConeGeometry {
    pub fn new(table: &SpectrumTable, m: usize, radius: f64) -> Result<Self> {
        if m + 1 > table.len() {
            return Err(Error::TableTooShort {
                lambda: f64::NAN,
                len: table.len(),
            });
        }
        Ok(Self {
            m,
            p: table.p,
            lambda_m: table.get(m),
            lambda_m1: table.get(m + 1),
            radius,
            slack: 1e-3,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeMembership {
    /// Only `u = 0` lies in both cones.
    Both,
    InXminus,
    InXplus,
    Neither,
}

pub fn cone_membership(geom: &ConeGeometry, u: &DiscreteField) -> ConeMembership {
    let nrm = norms(u, geom.p);
    if nrm.sup == 0.0 {
        return ConeMembership::Both;
    }
    let grad = nrm.seminorm.powf(geom.p);
    let mass = nrm.lp.powf(geom.p);
    let minus = geom.m >= 1 && grad <= geom.lambda_m * (1.0 + geom.slack) * mass;
    let plus = grad >= geom.lambda_m1 * (1.0 - geom.slack) * mass;
    match (minus, plus) {
        (true, true) => ConeMembership::Both,
        (true, false) => ConeMembership::InXminus,
        (false, true) => ConeMembership::InXplus,
        (false, false) => ConeMembership::Neither,
    }
}
