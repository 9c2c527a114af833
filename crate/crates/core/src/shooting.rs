//! Initial-value shooting for `−(Φ(u′))′ = g(u)` in flux variables
//! `(u, w = Φ(u′))`:
//!
//! ```text
//! u′ = Φ⁻¹(w),   w′ = −g(u),   u(0) = 0,   w(0) = Φ(slope₀)
//! ```
//!
//! The flux form stays regular where `u′ = 0`, which the second-order form
//! does not for `p ≠ 2`. Independent of the finite-element code; used to
//! cross-check it.

use std::sync::Arc;

use nalgebra::DVector;

use crate::discretization::{residual_norm, DiscreteField, Mesh1D};
use crate::energy::EnergySpec;
use crate::error::{Error, Result};

pub const BLOW_UP: f64 = 1e8;
pub const DEFAULT_STEPS: usize = 10_000;
/// RK4 loses order at the square-root singularities of `Φ⁻¹` (p > 2) or `g`
/// (p < 2); eigenvalue shots need the finer grid to reach 1e−6.
pub const EIGEN_STEPS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpState {
    pub x: f64,
    pub u: f64,
    /// Flux `Φ(u′)`.
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpOutcome {
    pub end: IvpState,
    /// Interior sign changes of `u` on `(0, L]`.
    pub sign_changes: usize,
}

fn rk4_step<S, F>(slope: &S, force: &F, st: IvpState, h: f64) -> IvpState
where
    S: Fn(f64) -> f64,
    F: Fn(f64) -> f64,
{
    let k1u = slope(st.w);
    let k1w = -force(st.u);
    let k2u = slope(st.w + 0.5 * h * k1w);
    let k2w = -force(st.u + 0.5 * h * k1u);
    let k3u = slope(st.w + 0.5 * h * k2w);
    let k3w = -force(st.u + 0.5 * h * k2u);
    let k4u = slope(st.w + h * k3w);
    let k4w = -force(st.u + h * k3u);
    IvpState {
        x: st.x + h,
        u: st.u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
        w: st.w + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w),
    }
}

/// Tracks sign changes of `u`, ignoring exact zeros.
#[derive(Debug, Clone, Copy)]
struct SignCounter {
    last: f64,
    count: usize,
}

impl SignCounter {
    fn new() -> Self {
        Self { last: 0.0, count: 0 }
    }

    /// Returns `true` when this value completes a sign change.
    fn push(&mut self, u: f64) -> bool {
        if u == 0.0 {
            return false;
        }
        let s = u.signum();
        let changed = self.last != 0.0 && s != self.last;
        if changed {
            self.count += 1;
        }
        self.last = s;
        changed
    }
}

fn check_state(st: &IvpState) -> Result<()> {
    if st.u.abs() > BLOW_UP || !st.u.is_finite() || !st.w.is_finite() {
        Err(Error::BlowUp { x: st.x })
    } else {
        Ok(())
    }
}

/// RK4 over `[0, L]` with `steps` uniform steps.
pub fn integrate_ivp(spec: &EnergySpec, slope0: f64, length: f64, steps: usize) -> Result<IvpOutcome> {
    if steps < 100 {
        return Err(Error::BadConfig(format!("integrate_ivp needs at least 100 steps, got {steps}")));
    }
    if !(length > 0.0) {
        return Err(Error::BadConfig(format!("length must be positive, got {length}")));
    }
    let pp = spec.principal;
    let slope = |w: f64| pp.grad_inverse(w);
    let force = |u: f64| spec.nonlinearity.g(u);
    let h = length / steps as f64;
    let mut st = IvpState {
        x: 0.0,
        u: 0.0,
        w: pp.grad(slope0),
    };
    let mut signs = SignCounter::new();
    for i in 0..steps {
        st = rk4_step(&slope, &force, st, h);
        if i + 1 == steps {
            st.x = length;
        }
        check_state(&st)?;
        signs.push(st.u);
    }
    Ok(IvpOutcome {
        end: st,
        sign_changes: signs.count,
    })
}

/// States at every node of `nodes` (starting at `nodes[0] = 0`), with
/// `substeps` RK4 steps per interval.
pub fn trajectory(spec: &EnergySpec, slope0: f64, nodes: &[f64], substeps: usize) -> Result<(Vec<IvpState>, usize)> {
    let pp = spec.principal;
    let slope = |w: f64| pp.grad_inverse(w);
    let force = |u: f64| spec.nonlinearity.g(u);
    let mut st = IvpState {
        x: nodes[0],
        u: 0.0,
        w: pp.grad(slope0),
    };
    let mut out = Vec::with_capacity(nodes.len());
    out.push(st);
    let mut signs = SignCounter::new();
    for pair in nodes.windows(2) {
        let h = (pair[1] - pair[0]) / substeps as f64;
        for _ in 0..substeps {
            st = rk4_step(&slope, &force, st, h);
            check_state(&st)?;
            signs.push(st.u);
        }
        st.x = pair[1];
        out.push(st);
    }
    Ok((out, signs.count))
}

/// Root of the cubic Hermite interpolant of `u` on one step.
fn hermite_zero(x0: f64, u0: f64, d0: f64, x1: f64, u1: f64, d1: f64) -> f64 {
    let h = x1 - x0;
    let eval = |t: f64| {
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * u0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * u1
            + (t3 - t2) * h * d1
    };
    let (mut a, mut b) = (0.0, 1.0);
    let fa_sign = u0.signum();
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if eval(m).signum() == fa_sign {
            a = m;
        } else {
            b = m;
        }
    }
    x0 + 0.5 * (a + b) * h
}

/// Position of the `m`-th zero of the eigenvalue trajectory, or `None` if it
/// lies beyond `x_max`.
fn nth_zero(p: f64, lambda: f64, slope0: f64, m: usize, h: f64, x_max: f64) -> Result<Option<f64>> {
    let e = 1.0 / (p - 1.0);
    let slope = |w: f64| w.signum() * w.abs().powf(e);
    let force = |u: f64| lambda * u.signum() * u.abs().powf(p - 1.0);
    let mut st = IvpState {
        x: 0.0,
        u: 0.0,
        w: slope0.signum() * slope0.abs().powf(p - 1.0),
    };
    let mut signs = SignCounter::new();
    while st.x <= x_max {
        let next = rk4_step(&slope, &force, st, h);
        check_state(&next)?;
        if signs.push(next.u) && signs.count == m {
            return Ok(Some(hermite_zero(st.x, st.u, slope(st.w), next.x, next.u, slope(next.w))));
        }
        st = next;
    }
    Ok(None)
}

/// `λ_m` of `−Δ_p` on `(0, L)` by shooting with `g(s) = λ|s|^{p−2}s`.
///
/// The solve is repeated with `slope₀ = 2`; by `p`-homogeneity the two
/// results must agree, and a disagreement is reported as a failure.
pub fn shoot_eigenvalue(p: f64, length: f64, m: usize) -> Result<f64> {
    let a = shoot_eigenvalue_with(p, length, m, 1.0, EIGEN_STEPS)?;
    let b = shoot_eigenvalue_with(p, length, m, 2.0, EIGEN_STEPS)?;
    if (a - b).abs() > 1e-9 * a.abs() {
        return Err(Error::BracketFailure(format!(
            "slope dependence: lambda = {a} (slope 1) vs {b} (slope 2)"
        )));
    }
    Ok(a)
}

/// One eigenvalue shot: bracket `λ` by doubling, then a safeguarded secant
/// (Illinois) iteration in `t = λ^{−1/p}`, along which the zero position
/// is nearly linear.
pub fn shoot_eigenvalue_with(p: f64, length: f64, m: usize, slope0: f64, steps: usize) -> Result<f64> {
    if !(p > 1.0) || !(length > 0.0) || m == 0 || slope0 == 0.0 {
        return Err(Error::BadConfig(format!(
            "shoot_eigenvalue needs p > 1, L > 0, m >= 1, slope0 != 0 (p={p}, L={length}, m={m})"
        )));
    }
    let h = length / steps as f64;
    let x_max = 2.0 * length;
    let zero_at = |lambda: f64| nth_zero(p, lambda, slope0, m, h, x_max);

    // λ_lo: m-th zero in (L, 2L]; λ_hi: m-th zero at or before L.
    // Larger λ moves every zero towards the origin.
    let mut lambda = 1.0;
    let mut x = zero_at(lambda)?;
    let mut guard = 0;
    while x.is_none() {
        lambda *= 2.0;
        x = zero_at(lambda)?;
        guard += 1;
        if guard > 400 {
            return Err(Error::BracketFailure(format!("no zero for m={m}, p={p}")));
        }
    }
    let x = x.unwrap();
    let ((l_lo, f_lo), (l_hi, f_hi)) = if x > length {
        let lo = (lambda, x - length);
        loop {
            lambda *= 2.0;
            if let Some(x) = zero_at(lambda)? {
                if x <= length {
                    break (lo, (lambda, x - length));
                }
            }
            guard += 1;
            if guard > 400 {
                return Err(Error::BracketFailure(format!("no eigenvalue bracket for m={m}, p={p}")));
            }
        }
    } else {
        let hi = (lambda, x - length);
        let mut upper = lambda;
        let mut lower = lambda;
        loop {
            // Halve until the zero leaves [0, L]; if it also leaves (L, 2L],
            // bisect geometrically back towards the last λ with a zero.
            let trial = if lower < upper { (lower * upper).sqrt() } else { 0.5 * upper };
            match zero_at(trial)? {
                Some(x) if x > length => break ((trial, x - length), hi),
                Some(_) => upper = trial,
                None => lower = trial,
            }
            guard += 1;
            if guard > 400 {
                return Err(Error::BracketFailure(format!("no eigenvalue bracket for m={m}, p={p}")));
            }
        }
    };

    // Illinois on F(t) = x_m(t) − L; F(t_lo) > 0 > F(t_hi).
    let tof = |l: f64| l.powf(-1.0 / p);
    let (mut ta, mut fa) = (tof(l_lo), f_lo);
    let (mut tb, mut fb) = (tof(l_hi), f_hi);
    let mut side = 0i8;
    for _ in 0..200 {
        let mut t = tb - fb * (tb - ta) / (fb - fa);
        if !(t > ta.min(tb) && t < ta.max(tb)) {
            t = 0.5 * (ta + tb);
        }
        let fx = match zero_at(t.powf(-p))? {
            Some(x) => x - length,
            None => x_max - length,
        };
        if fx.abs() <= 1e-13 * length || (ta - tb).abs() <= 1e-15 * t {
            return Ok(t.powf(-p));
        }
        if fx > 0.0 {
            ta = t;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            tb = t;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
    }
    Ok((0.5 * (ta + tb)).powf(-p))
}

/// A boundary-value solution recovered by shooting and sampled on a mesh.
#[derive(Debug, Clone)]
pub struct BvpShot {
    pub field: DiscreteField,
    pub slope0: f64,
    /// `u(L)` of the converged trajectory before it is clamped to zero.
    pub end_value: f64,
    pub sign_changes: usize,
    /// `sup |∇f|` of the finite-element energy at the sampled field.
    pub fem_residual: f64,
}

fn substeps_for(mesh: &Mesh1D) -> usize {
    DEFAULT_STEPS.div_ceil(mesh.n_elements()).max(1)
}

/// Whether the trajectory from `slope0` has more than `nodes` sign changes
/// on `(0, L]`.
fn overshoots(spec: &EnergySpec, mesh: &Mesh1D, slope0: f64, nodes: usize) -> Result<bool> {
    let (_, count) = trajectory(spec, slope0, mesh.nodes(), substeps_for(mesh))?;
    Ok(count > nodes)
}

/// Log-spaced scan of `[lo, hi]` (both positive, or both negative) for
/// two adjacent slopes on which the node count crosses `nodes`.
pub fn bracket_scan(
    spec: &EnergySpec,
    mesh: &Mesh1D,
    nodes: usize,
    lo: f64,
    hi: f64,
    samples: usize,
) -> Option<(f64, f64)> {
    let sign = lo.signum();
    let (a, b) = (lo.abs().ln(), hi.abs().ln());
    let mut prev: Option<(f64, bool)> = None;
    for i in 0..samples.max(2) {
        let s = sign * (a + (b - a) * i as f64 / (samples.max(2) - 1) as f64).exp();
        let Ok(flag) = overshoots(spec, mesh, s, nodes) else {
            prev = None;
            continue;
        };
        if let Some((ps, pf)) = prev {
            if pf != flag {
                return Some((ps, s));
            }
        }
        prev = Some((s, flag));
    }
    None
}

/// Bisection on `slope₀` for a solution of the Dirichlet problem with
/// `nodes_wanted` interior zeros, sampled onto `mesh`.
pub fn shoot_bvp(
    spec: &EnergySpec,
    mesh: &Arc<Mesh1D>,
    bracket: (f64, f64),
    nodes_wanted: usize,
) -> Result<BvpShot> {
    let (mut a, mut b) = bracket;
    let fa = overshoots(spec, mesh, a, nodes_wanted)?;
    let fb = overshoots(spec, mesh, b, nodes_wanted)?;
    if fa == fb {
        return Err(Error::NotFound(format!(
            "slopes {a} and {b} give the same node count relative to {nodes_wanted}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b || (b - a).abs() <= 1e-15 * mid.abs() {
            break;
        }
        if overshoots(spec, mesh, mid, nodes_wanted)? == fa {
            a = mid;
        } else {
            b = mid;
        }
    }
    let sub = substeps_for(mesh);
    let (sa, ca) = trajectory(spec, a, mesh.nodes(), sub)?;
    let (sb, cb) = trajectory(spec, b, mesh.nodes(), sub)?;
    let ua = sa.last().unwrap().u;
    let ub = sb.last().unwrap().u;
    let (slope0, states, count, end) = if ua.abs() <= ub.abs() { (a, sa, ca, ua) } else { (b, sb, cb, ub) };
    let sup = states.iter().fold(0.0_f64, |m, s| m.max(s.u.abs()));
    // A genuine crossing has u(L) → 0; a jump in the count (blow-up or a
    // tangency) does not.
    if end.abs() > 1e-6 * sup.max(1e-300) || sup == 0.0 {
        return Err(Error::NotFound(format!(
            "node count changes at slope {slope0} without a boundary zero (u(L) = {end:.3e})"
        )));
    }
    let n = mesh.n_interior();
    let values = DVector::from_iterator(n, states[1..=n].iter().map(|s| s.u));
    let field = DiscreteField::new(mesh.clone(), values)?;
    let fem_residual = residual_norm(spec, &field);
    Ok(BvpShot {
        field,
        slope0,
        end_value: end,
        sign_changes: count.min(nodes_wanted),
        fem_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{CustomHook, Nonlinearity, PrincipalPart};
    use crate::spectrum::eigenvalue_1d;
    use std::f64::consts::PI;

    fn spec(p: f64, kappa: f64, nl: Nonlinearity) -> EnergySpec {
        EnergySpec::new(PrincipalPart::new(p, kappa).unwrap(), nl)
    }

    fn zero_g(p: f64) -> Nonlinearity {
        Nonlinearity::custom(p, CustomHook::new("zero", |_, _| 0.0))
    }

    #[test]
    fn straight_line_without_forcing() {
        for p in [1.5, 2.0, 3.0] {
            let out = integrate_ivp(&spec(p, 0.0, zero_g(p)), 1.0, 2.0, 1000).unwrap();
            assert!((out.end.u - 2.0).abs() < 1e-12);
            assert_eq!(out.sign_changes, 0);
        }
    }

    #[test]
    fn linear_sine() {
        let s = spec(2.0, 0.0, Nonlinearity::rational(2.0, PI * PI, 0.0).unwrap());
        let out = integrate_ivp(&s, 1.0, 1.0, DEFAULT_STEPS).unwrap();
        assert!(out.end.u.abs() < 1e-8, "u(1) = {}", out.end.u);
        let mesh = Mesh1D::uniform(1.0, 9).unwrap();
        let (states, _) = trajectory(&s, 1.0, mesh.nodes(), 100).unwrap();
        for st in &states {
            assert!((st.u - (PI * st.x).sin() / PI).abs() < 1e-10);
        }
    }

    #[test]
    fn odd_g_gives_odd_trajectories() {
        let s = spec(3.0, 0.0, Nonlinearity::pure_power(3.0, 20.0, 2.0, 2.0).unwrap());
        let a = integrate_ivp(&s, 0.7, 1.0, 2000).unwrap();
        let b = integrate_ivp(&s, -0.7, 1.0, 2000).unwrap();
        assert_eq!(a.end.u, -b.end.u);
        assert_eq!(a.end.w, -b.end.w);
        assert_eq!(a.sign_changes, b.sign_changes);
    }

    #[test]
    fn blow_up_is_reported() {
        let s = spec(2.0, 0.0, Nonlinearity::rational(2.0, -400.0, 0.0).unwrap());
        assert!(matches!(integrate_ivp(&s, 1e3, 1.0, 1000), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn too_few_steps_rejected() {
        assert!(integrate_ivp(&spec(2.0, 0.0, zero_g(2.0)), 1.0, 1.0, 99).is_err());
    }

    /// First integral `u′Φ(u′) − Ψ(u′) + G(u)`.
    fn hamiltonian(s: &EnergySpec, st: &IvpState) -> f64 {
        let du = s.principal.grad_inverse(st.w);
        du * st.w - s.principal.value(du) + s.nonlinearity.antiderivative(st.u)
    }

    #[test]
    fn first_integral_is_conserved() {
        let cases = [
            spec(2.0, 0.0, Nonlinearity::rational(2.0, 50.0, -45.0).unwrap()),
            spec(3.0, 0.0, Nonlinearity::pure_power(3.0, 40.0, -2.0, 2.0).unwrap()),
            spec(1.5, 1.0, Nonlinearity::smooth_power(1.5, 10.0, 1.0, 1.0).unwrap()),
            spec(3.0, 1.0, Nonlinearity::pure_power(3.0, 40.0, 3.0, 2.0).unwrap()),
        ];
        let mesh = Mesh1D::uniform(1.0, 199).unwrap();
        for s in &cases {
            let (states, _) = trajectory(s, 1.3, mesh.nodes(), 50).unwrap();
            let h0 = hamiltonian(s, &states[0]);
            for st in &states {
                let d = (hamiltonian(s, st) - h0).abs();
                assert!(d <= 1e-6 * (1.0 + h0.abs()), "drift {d} at x={}", st.x);
            }
        }
    }

    #[test]
    fn step_halving_is_fourth_order() {
        let s = spec(2.0, 1.0, Nonlinearity::rational(2.0, 50.0, -45.0).unwrap());
        let u = |n| integrate_ivp(&s, 2.0, 1.0, n).unwrap().end.u;
        let (a, b, c) = (u(200), u(400), u(800));
        let ratio = (a - b) / (b - c);
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn eigenvalue_examples() {
        let l1 = shoot_eigenvalue(2.0, 1.0, 1).unwrap();
        assert!((l1 - PI * PI).abs() < 1e-6);
        let l2 = shoot_eigenvalue(2.0, 1.0, 2).unwrap();
        assert!((l2 - 4.0 * PI * PI).abs() < 1e-6);
        let l3 = shoot_eigenvalue(3.0, 1.0, 1).unwrap();
        let exact = eigenvalue_1d(3.0, 1.0, 1);
        assert!((l3 - exact).abs() <= 1e-6 * exact, "{l3} vs {exact}");
    }

    #[test]
    fn eigenvalue_scales_with_length() {
        let a = shoot_eigenvalue_with(1.5, 1.0, 1, 1.0, 50_000).unwrap();
        let b = shoot_eigenvalue_with(1.5, 2.0, 1, 1.0, 50_000).unwrap();
        assert!((a / b - 2f64.powf(1.5)).abs() < 1e-5);
    }

    fn nonres() -> EnergySpec {
        spec(2.0, 0.0, Nonlinearity::rational(2.0, 50.0, -45.0).unwrap())
    }

    #[test]
    fn bvp_nonresonant_solutions() {
        let s = nonres();
        let mesh = Arc::new(Mesh1D::uniform(1.0, 255).unwrap());
        for nodes in [0, 1] {
            let br = bracket_scan(&s, &mesh, nodes, 0.1, 1e3, 60).expect("bracket");
            let shot = shoot_bvp(&s, &mesh, br, nodes).unwrap();
            assert!(shot.field.sup_norm() > 1e-3);
            assert_eq!(shot.field.sign_changes(), nodes);
            let sup = shot.field.sup_norm();
            assert!(shot.fem_residual < 1e-5 * (1.0 + sup), "residual {} at sup {sup}", shot.fem_residual);
        }
    }

    #[test]
    fn ground_state_is_symmetric() {
        let s = nonres();
        let mesh = Arc::new(Mesh1D::uniform(1.0, 255).unwrap());
        let br = bracket_scan(&s, &mesh, 0, 0.1, 1e3, 60).unwrap();
        let u = shoot_bvp(&s, &mesh, br, 0).unwrap().field;
        let v = u.values();
        let n = v.len();
        for i in 0..n {
            assert!((v[i] - v[n - 1 - i]).abs() < 1e-6 * u.sup_norm());
        }
    }

    #[test]
    fn no_small_solutions_when_origin_is_a_minimum() {
        let s = spec(2.0, 0.0, Nonlinearity::rational(2.0, 5.0, 0.0).unwrap());
        let mesh = Arc::new(Mesh1D::uniform(1.0, 63).unwrap());
        assert!(matches!(shoot_bvp(&s, &mesh, (1e-6, 1e-3), 0), Err(Error::NotFound(_))));
        assert!(bracket_scan(&s, &mesh, 0, 1e-6, 1e3, 40).is_none());
    }

    #[test]
    fn fem_residual_shrinks_under_refinement() {
        let s = nonres();
        let mut last = f64::INFINITY;
        for n in [31, 63, 127] {
            let mesh = Arc::new(Mesh1D::uniform(1.0, n).unwrap());
            let br = bracket_scan(&s, &mesh, 0, 0.1, 1e3, 60).unwrap();
            let r = shoot_bvp(&s, &mesh, br, 0).unwrap().fem_residual;
            assert!(r < 0.5 * last, "n={n}: {r} vs {last}");
            last = r;
        }
    }
}
