//! Scenario harness: plain-text scenario files with annotated
//! expectations, the independent oracles they are checked against, and a
//! deterministic summary.
//!
//! A scenario file holds `scenario.*` keys (name, kind, parameters),
//! optional problem keys as in a config file, and expectation lines
//!
//! ```text
//! expect.mInfinity = 2 @ oracle: 4 pi^2 < 50 < 9 pi^2
//! ```
//!
//! Every expectation must name its oracle. Keys starting with `max` are
//! upper bounds, keys starting with `min` strict lower bounds, everything
//! else is compared as text.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::az::run_az_check;
use crate::config::{from_pairs, parse_pairs, ProblemConfig};
use crate::discretization::{assemble_energy, assemble_gradient, assemble_hessian, norms, DiscreteField, Mesh1D};
use crate::energy::EnergySpec;
use crate::error::{Error, Result};
use crate::morse::{assemble_q, morse_indices, MorseData};
use crate::reduction::{
    build_decomposition, classify_origin, psi_map, reduced_gradient_check, reduced_hessian_at_zero, sample_grid,
};
use crate::shooting::shoot_eigenvalue;
use crate::solvers::multistart_deflated;
use crate::spectrum::{eigenvalue_1d, lowest_eigenpairs};

/// Central-difference step for directional derivatives of the energy.
pub const FD_GRADIENT_STEP: f64 = 1e-5;
/// Central-difference step for Hessian-vector products.
pub const FD_HESSIAN_STEP: f64 = 1e-6;
/// Minimum clearance, in stencil widths, between an element slope and the
/// zero-slope kink when `κ = 0`, `p < 2`.
pub const DEGENERATE_STENCIL_RATIO: f64 = 1e3;
/// Smallest step before a point counts as degenerate.
pub const MIN_FD_STEP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Az,
    Multistart,
    StrictMin,
    SpectrumCross,
    SpectrumFem,
    Differentiation,
    Reduction,
    MorseZero,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Az => "az",
            ScenarioKind::Multistart => "multistart",
            ScenarioKind::StrictMin => "strictMin",
            ScenarioKind::SpectrumCross => "spectrumCross",
            ScenarioKind::SpectrumFem => "spectrumFem",
            ScenarioKind::Differentiation => "differentiation",
            ScenarioKind::Reduction => "reduction",
            ScenarioKind::MorseZero => "morseZero",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            ScenarioKind::Az,
            ScenarioKind::Multistart,
            ScenarioKind::StrictMin,
            ScenarioKind::SpectrumCross,
            ScenarioKind::SpectrumFem,
            ScenarioKind::Differentiation,
            ScenarioKind::Reduction,
            ScenarioKind::MorseZero,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }

    fn needs_config(&self) -> bool {
        !matches!(
            self,
            ScenarioKind::SpectrumCross | ScenarioKind::SpectrumFem | ScenarioKind::Differentiation
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub key: String,
    pub expected: String,
    pub oracle: String,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    pub config: Option<ProblemConfig>,
    pub params: BTreeMap<String, String>,
    pub expectations: Vec<Expectation>,
}

const PARAM_KEYS: &[&str] = &["samples", "radius", "exponents", "kappas", "modes", "fields", "n"];

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut expectations = Vec::new();
    let mut body = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(rest) = line.strip_prefix("expect.") {
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| Error::BadConfig(format!("line {}: malformed expectation", idx + 1)))?;
            let (expected, oracle) = value.split_once("@ oracle:").ok_or_else(|| {
                Error::BadConfig(format!("line {}: expectation `{}` names no oracle", idx + 1, key.trim()))
            })?;
            expectations.push(Expectation {
                key: key.trim().to_string(),
                expected: expected.trim().to_string(),
                oracle: oracle.trim().to_string(),
            });
            body.push('\n');
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let pairs = parse_pairs(&body, &|k| {
        k == "scenario.name" || k == "scenario.kind" || k.strip_prefix("scenario.").is_some_and(|p| PARAM_KEYS.contains(&p))
    })?;
    let mut problem = BTreeMap::new();
    let mut params = BTreeMap::new();
    for (k, v) in pairs {
        match k.strip_prefix("scenario.") {
            Some(p) => {
                params.insert(p.to_string(), v.1);
            }
            None => {
                problem.insert(k, v);
            }
        }
    }
    let name = params
        .remove("name")
        .ok_or_else(|| Error::BadConfig("scenario.name is required".into()))?;
    let kind_name = params
        .remove("kind")
        .ok_or_else(|| Error::BadConfig(format!("{name}: scenario.kind is required")))?;
    let kind = ScenarioKind::parse(&kind_name)
        .ok_or_else(|| Error::BadConfig(format!("{name}: unknown scenario.kind `{kind_name}`")))?;
    let config = if problem.is_empty() {
        None
    } else {
        Some(from_pairs(&problem)?)
    };
    if kind.needs_config() && config.is_none() {
        return Err(Error::BadConfig(format!("{name}: kind {kind_name} needs problem keys")));
    }
    Ok(Scenario {
        name,
        kind,
        config,
        params,
        expectations,
    })
}

const BUILTIN: &[(&str, &str)] = &[
    ("diff-consistency.scn", include_str!("../scenarios/diff-consistency.scn")),
    ("infinite-index-p3.scn", include_str!("../scenarios/infinite-index-p3.scn")),
    ("negative-control-multistart.scn", include_str!("../scenarios/negative-control-multistart.scn")),
    ("negative-control-p2.scn", include_str!("../scenarios/negative-control-p2.scn")),
    ("nonres-p1.5.scn", include_str!("../scenarios/nonres-p1.5.scn")),
    ("nonres-p2.scn", include_str!("../scenarios/nonres-p2.scn")),
    ("nonres-p3.scn", include_str!("../scenarios/nonres-p3.scn")),
    ("notapplicable-p3.scn", include_str!("../scenarios/notapplicable-p3.scn")),
    ("origin-min-p3.scn", include_str!("../scenarios/origin-min-p3.scn")),
    ("reduction-p2.scn", include_str!("../scenarios/reduction-p2.scn")),
    ("resonant-bminus-p2.scn", include_str!("../scenarios/resonant-bminus-p2.scn")),
    ("resonant-bplus-p2.scn", include_str!("../scenarios/resonant-bplus-p2.scn")),
    ("spectrum-cross.scn", include_str!("../scenarios/spectrum-cross.scn")),
    ("spectrum-fem-p2.scn", include_str!("../scenarios/spectrum-fem-p2.scn")),
    ("strictmin-p1.5.scn", include_str!("../scenarios/strictmin-p1.5.scn")),
];

/// The shipped scenarios, sorted by name.
pub fn builtin_scenarios() -> Result<Vec<Scenario>> {
    let mut out = BUILTIN
        .iter()
        .map(|(file, text)| parse_scenario(text).map_err(|e| Error::BadConfig(format!("{file}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Observed {
    Text(String),
    Num(f64),
}

impl std::fmt::Display for Observed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Observed::Text(s) => f.write_str(s),
            Observed::Num(v) => write!(f, "{v:.3e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub key: String,
    pub expected: String,
    pub actual: Option<Observed>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub name: String,
    pub kind: ScenarioKind,
    pub checks: Vec<Check>,
    pub error: Option<String>,
}

impl ScenarioResult {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }
}

fn compare(key: &str, expected: &str, actual: Option<&Observed>) -> bool {
    let Some(actual) = actual else {
        return false;
    };
    let bound = || expected.parse::<f64>().ok();
    match actual {
        Observed::Num(v) if key.starts_with("max") => bound().is_some_and(|b| *v <= b),
        Observed::Num(v) if key.starts_with("min") => bound().is_some_and(|b| *v > b),
        Observed::Num(v) => bound().is_some_and(|b| *v == b),
        Observed::Text(s) => s == expected,
    }
}

pub fn run_scenario(s: &Scenario, seed: u64) -> ScenarioResult {
    let observed = observe(s, seed);
    let (checks, error) = match observed {
        Ok(obs) => (
            s.expectations
                .iter()
                .map(|e| {
                    let actual = obs.get(&e.key).cloned();
                    Check {
                        pass: compare(&e.key, &e.expected, actual.as_ref()),
                        key: e.key.clone(),
                        expected: e.expected.clone(),
                        actual,
                    }
                })
                .collect(),
            None,
        ),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    ScenarioResult {
        name: s.name.clone(),
        kind: s.kind,
        checks,
        error,
    }
}

#[derive(Debug, Clone)]
pub struct Summary {
    pub results: Vec<ScenarioResult>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let _ = writeln!(
                out,
                "scenario {} [{}]: {}",
                r.name,
                r.kind.name(),
                if r.passed() { "PASS" } else { "FAIL" }
            );
            if let Some(e) = &r.error {
                let _ = writeln!(out, "  error: {e}");
            }
            for c in &r.checks {
                let _ = writeln!(
                    out,
                    "  {}: expected {}, got {} {}",
                    c.key,
                    c.expected,
                    c.actual.as_ref().map_or("(missing)".to_string(), |a| a.to_string()),
                    if c.pass { "ok" } else { "MISMATCH" }
                );
            }
        }
        let failed = self.results.iter().filter(|r| !r.passed()).count();
        let _ = writeln!(
            out,
            "summary: {} scenarios, {} passed, {} failed",
            self.results.len(),
            self.results.len() - failed,
            failed
        );
        out
    }
}

/// Runs the shipped scenarios whose names match `filter` (a glob).
pub fn run_all(seed: u64, filter: &str) -> Result<Summary> {
    let pattern = glob::Pattern::new(filter).map_err(|e| Error::BadConfig(format!("bad filter `{filter}`: {e}")))?;
    let scenarios = builtin_scenarios()?;
    Ok(run_selected(scenarios.iter().filter(|s| pattern.matches(&s.name)), seed))
}

pub fn run_selected<'a>(scenarios: impl IntoIterator<Item = &'a Scenario>, seed: u64) -> Summary {
    let mut results: Vec<ScenarioResult> = scenarios.into_iter().map(|s| run_scenario(s, seed)).collect();
    results.sort_by(|a, b| a.name.cmp(&b.name));
    Summary { results }
}

fn param<T: std::str::FromStr>(s: &Scenario, key: &str, default: T) -> Result<T> {
    match s.params.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::BadConfig(format!("{}: cannot parse scenario.{key} = {v}", s.name))),
    }
}

fn param_list(s: &Scenario, key: &str, default: &[f64]) -> Result<Vec<f64>> {
    match s.params.get(key) {
        None => Ok(default.to_vec()),
        Some(v) => v
            .split(',')
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|_| Error::BadConfig(format!("{}: cannot parse scenario.{key} = {v}", s.name)))
            })
            .collect(),
    }
}

type Observations = BTreeMap<String, Observed>;

fn text(v: impl ToString) -> Observed {
    Observed::Text(v.to_string())
}

fn observe(s: &Scenario, seed: u64) -> Result<Observations> {
    let mut obs = Observations::new();
    match s.kind {
        ScenarioKind::Az => {
            let mut cfg = s.config.clone().expect("checked at parse");
            cfg.seed = seed;
            let r = run_az_check(&cfg)?;
            obs.insert("verdict".into(), text(r.verdict.name()));
            obs.insert("exitCode".into(), text(r.exit_code()));
            obs.insert("hypothesisClass".into(), text(r.hypothesis_class.name()));
            obs.insert("resonant".into(), text(r.resonant));
            obs.insert("conditionHolds".into(), text(r.condition_holds));
            if let Some(b) = r.b_class {
                obs.insert("bClass".into(), text(b));
            }
            if let Some(m) = r.m_infinity {
                obs.insert("mInfinity".into(), text(m));
            }
            if let Some(md) = r.morse_at_zero {
                obs.insert("morseAtZero".into(), text(md));
            }
            if let Some(w) = r.witness() {
                obs.insert("maxWitnessResidual".into(), Observed::Num(w.residual));
                obs.insert("minWitnessSup".into(), Observed::Num(w.record.sup_norm()));
                if let Some(d) = w.shooting_distance {
                    obs.insert("maxShootingDistance".into(), Observed::Num(d));
                }
            }
        }
        ScenarioKind::Multistart => {
            let mut cfg = s.config.clone().expect("checked at parse");
            cfg.seed = seed;
            let (spec, mesh) = (cfg.energy_spec()?, cfg.mesh()?);
            let found = multistart_deflated(&spec, &mesh, cfg.starts, &cfg.solver_config());
            let nontrivial = found.iter().filter(|r| r.sup_norm() > crate::az::NONTRIVIAL_SUP).count();
            obs.insert("nontrivialCount".into(), text(nontrivial));
            obs.insert("rootCount".into(), text(found.len()));
            obs.insert(
                "maxSupNorm".into(),
                Observed::Num(found.iter().map(|r| r.sup_norm()).fold(0.0, f64::max)),
            );
        }
        ScenarioKind::StrictMin => {
            let cfg = s.config.clone().expect("checked at parse");
            let (spec, mesh) = (cfg.energy_spec()?, cfg.mesh()?);
            let samples = param(s, "samples", 100usize)?;
            let radius = param(s, "radius", 1e-2)?;
            let min_energy = strict_min_probe(&spec, &mesh, samples, radius, seed);
            obs.insert("minEnergy".into(), Observed::Num(min_energy));
            let (md, class) = origin_data(&spec, &mesh, &cfg)?;
            obs.insert("morseAtZero".into(), text(md));
            if let Some(c) = class {
                obs.insert("originClass".into(), text(c));
            }
        }
        ScenarioKind::MorseZero => {
            let cfg = s.config.clone().expect("checked at parse");
            let (spec, mesh) = (cfg.energy_spec()?, cfg.mesh()?);
            let (md, class) = origin_data(&spec, &mesh, &cfg)?;
            obs.insert("morseAtZero".into(), text(md));
            obs.insert("originClass".into(), text(class.map_or("n/a".to_string(), |c| c.to_string())));
        }
        ScenarioKind::SpectrumCross => {
            let exponents = param_list(s, "exponents", &[1.5, 2.0, 3.0])?;
            let modes = param(s, "modes", 3usize)?;
            let mut gap: f64 = 0.0;
            for &p in &exponents {
                for m in 1..=modes {
                    let closed = eigenvalue_1d(p, 1.0, m);
                    let shot = shoot_eigenvalue(p, 1.0, m)?;
                    gap = gap.max((closed - shot).abs() / closed);
                }
            }
            obs.insert("maxRelativeGap".into(), Observed::Num(gap));
        }
        ScenarioKind::SpectrumFem => {
            let modes = param(s, "modes", 5usize)?;
            let n = param(s, "n", 255usize)?;
            let (closed, fem) = fem_spectrum_errors(n, modes)?;
            obs.insert("maxClosedFormError".into(), Observed::Num(closed));
            obs.insert("maxScaledFemError".into(), Observed::Num(fem));
        }
        ScenarioKind::Differentiation => {
            let exponents = param_list(s, "exponents", &[1.5, 2.0, 3.0])?;
            let kappas = param_list(s, "kappas", &[0.0, 1.0])?;
            let fields = param(s, "fields", 50usize)?;
            let n = param(s, "n", 255usize)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mesh = Arc::new(Mesh1D::uniform(1.0, n)?);
            let (mut ge, mut he, mut checked, mut grad_checked) = (0.0f64, 0.0f64, 0usize, 0usize);
            for &p in &exponents {
                for &kappa in &kappas {
                    let spec = sample_spec(p, kappa)?;
                    for _ in 0..fields {
                        let amp = 10f64.powf(rng.random_range(-1.0..1.0));
                        let u = smooth_random_field(&mesh, &mut rng).scale(amp);
                        let d = smooth_random_field(&mesh, &mut rng);
                        let (g, h) = differentiation_errors(&spec, &u, &d);
                        if let Some(g) = g {
                            ge = ge.max(g);
                            grad_checked += 1;
                        }
                        if let Some(h) = h {
                            he = he.max(h);
                            checked += 1;
                        }
                    }
                }
            }
            obs.insert("maxGradientError".into(), Observed::Num(ge));
            obs.insert("maxHessianError".into(), Observed::Num(he));
            obs.insert("minHessianChecked".into(), Observed::Num(checked as f64));
            obs.insert("minGradientChecked".into(), Observed::Num(grad_checked as f64));
        }
        ScenarioKind::Reduction => {
            let cfg = s.config.clone().expect("checked at parse");
            let (spec, mesh) = (cfg.energy_spec()?, cfg.mesh()?);
            let scfg = cfg.solver_config();
            let u0 = DiscreteField::zeros(mesh.clone());
            let (q, d, r) = assemble_q(&spec, &u0)?;
            let md = morse_indices(&q, &d, r, &spec)?;
            let radii = cfg.rho.map(|rho| (rho, cfg.r.unwrap_or(rho)));
            let dec = build_decomposition(&spec, &u0, &md, radii)?;
            obs.insert("dimV".into(), text(dec.dim_v()));
            let at_zero = psi_map(&spec, &dec, &vec![0.0; dec.dim_v()], &scfg)?;
            obs.insert("maxPsiAtZero".into(), Observed::Num(at_zero.psi.sup_norm()));
            obs.insert(
                "maxGradPhiAtZero".into(),
                Observed::Num(at_zero.grad_phi.iter().fold(0.0, |m, g| m.max(g.abs()))),
            );
            let samples = param(s, "samples", 20usize)?;
            obs.insert(
                "maxGradientDiscrepancy".into(),
                Observed::Num(reduced_gradient_check(&spec, &dec, samples, seed, &scfg)?),
            );
            let hess = reduced_hessian_at_zero(&spec, &dec, &scfg)?;
            let mut rel: f64 = 0.0;
            for i in 0..dec.dim_v() {
                for j in 0..dec.dim_v() {
                    let want = if i == j { dec.eigenvalues[i] } else { 0.0 };
                    let scale = dec.eigenvalues[i].abs().max(dec.eigenvalues[j].abs());
                    rel = rel.max((hess[(i, j)] - want).abs() / scale);
                }
            }
            obs.insert("maxHessianRelError".into(), Observed::Num(rel));
            // At the origin Q_0 = Ψ″(0)·stiffness − g′(0)·mass, so θ_i = Ψ″(0)(iπ/L)² − g′(0).
            let lead = spec.principal.hess(0.0)?;
            let mut exact_rel: f64 = 0.0;
            for i in 0..dec.dim_v() {
                let k = (i + 1) as f64 * PI / cfg.length;
                let want = lead * k * k - spec.slope_at_zero();
                exact_rel = exact_rel.max((hess[(i, i)] - want).abs() / want.abs());
            }
            obs.insert("maxHessianExactRelError".into(), Observed::Num(exact_rel));
            let names = ["theta1", "theta2", "theta3"];
            for (i, th) in dec.eigenvalues.iter().enumerate().take(names.len()) {
                obs.insert(names[i].into(), Observed::Num(*th));
            }
            let (o, grid) = sample_grid(&spec, &dec, &scfg)?;
            obs.insert("originClass".into(), text(classify_origin(&o, &grid)));
        }
    }
    Ok(obs)
}

/// Morse data at the origin and, when `m*` is finite and at most 2, the
/// grid classification of the reduced functional.
fn origin_data(
    spec: &EnergySpec,
    mesh: &Arc<Mesh1D>,
    cfg: &ProblemConfig,
) -> Result<(MorseData, Option<crate::reduction::OriginClass>)> {
    let u0 = DiscreteField::zeros(mesh.clone());
    let (q, d, r) = assemble_q(spec, &u0)?;
    let md = morse_indices(&q, &d, r, spec)?;
    if !md.is_finite() || md.m_star.finite().is_some_and(|k| k > 2) {
        return Ok((md, None));
    }
    let dec = build_decomposition(spec, &u0, &md, cfg.rho.map(|rho| (rho, cfg.r.unwrap_or(rho))))?;
    let (o, grid) = sample_grid(spec, &dec, &cfg.solver_config())?;
    Ok((md, Some(classify_origin(&o, &grid))))
}

/// A representative nonlinearity for each exponent, used by the
/// differentiation checks.
pub fn sample_spec(p: f64, kappa: f64) -> Result<EnergySpec> {
    use crate::energy::{Nonlinearity, PrincipalPart};
    let nl = if p < 2.0 {
        Nonlinearity::smooth_power(p, 10.0, 1.0, 1.0)?
    } else if p == 2.0 {
        Nonlinearity::rational(2.0, 50.0, -45.0)?
    } else {
        Nonlinearity::pure_power(p, 40.0, 2.0, 2.0)?
    };
    Ok(EnergySpec::new(PrincipalPart::new(p, kappa)?, nl))
}

/// `Σ_{k≤6} c_k sin(kπx/L)/k` with `c_k ~ U(−1, 1)`.
pub fn smooth_random_field(mesh: &Arc<Mesh1D>, rng: &mut ChaCha8Rng) -> DiscreteField {
    let c: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
    let l = mesh.length();
    DiscreteField::interpolate(mesh.clone(), |x| {
        c.iter()
            .enumerate()
            .map(|(k, ck)| {
                let k = (k + 1) as f64;
                ck * (k * PI * x / l).sin() / k
            })
            .sum()
    })
}

/// Central-difference step for `u + t·d`: `base`, shrunk for `κ = 0`,
/// `p < 2` so that every element slope stays [`DEGENERATE_STENCIL_RATIO`]
/// stencil widths away from the kink of `Ψ` at zero. `None` below
/// [`MIN_FD_STEP`].
pub fn stencil_step(spec: &EnergySpec, u: &DiscreteField, d: &DiscreteField, base: f64) -> Option<f64> {
    if !spec.principal.is_singular_at_zero() {
        return Some(base);
    }
    let room = (0..u.mesh().n_elements())
        .filter(|&e| d.slope(e) != 0.0)
        .map(|e| u.slope(e).abs() / (DEGENERATE_STENCIL_RATIO * d.slope(e).abs()))
        .fold(f64::INFINITY, f64::min);
    let h = base.min(room);
    (h >= MIN_FD_STEP).then_some(h)
}

/// Normalized errors of the gradient (against a central difference of the
/// energy) and of the Hessian-vector product (against a central difference
/// of the gradient) in direction `d`. `None` where the Hessian is undefined
/// or no admissible stencil exists.
pub fn differentiation_errors(spec: &EnergySpec, u: &DiscreteField, d: &DiscreteField) -> (Option<f64>, Option<f64>) {
    let shifted = |t: f64| u.with_values(u.values() + d.values() * t);
    let grad_err = stencil_step(spec, u, d, FD_GRADIENT_STEP).map(|h| {
        let f = assemble_energy(spec, u);
        let fd = (assemble_energy(spec, &shifted(h)) - assemble_energy(spec, &shifted(-h))) / (2.0 * h);
        let exact = assemble_gradient(spec, u).dot(d.values());
        (fd - exact).abs() / 1f64.max(exact.abs()).max(f.abs())
    });
    let hess_err = stencil_step(spec, u, d, FD_HESSIAN_STEP).and_then(|h| {
        let q = assemble_hessian(spec, u).ok()?;
        let hd = q.form().mul_vec(d.values());
        let fdg = (assemble_gradient(spec, &shifted(h)) - assemble_gradient(spec, &shifted(-h))) / (2.0 * h);
        Some((&hd - fdg).amax() / hd.amax().max(1.0))
    });
    (grad_err, hess_err)
}

/// Smallest `f(u) − f(0)` over random smooth fields with `W^{1,p}`
/// seminorm in `(0, radius]`.
pub fn strict_min_probe(spec: &EnergySpec, mesh: &Arc<Mesh1D>, samples: usize, radius: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f0 = assemble_energy(spec, &DiscreteField::zeros(mesh.clone()));
    let mut lowest = f64::INFINITY;
    for _ in 0..samples {
        let u = smooth_random_field(mesh, &mut rng);
        let size = norms(&u, spec.p()).seminorm;
        if size == 0.0 {
            continue;
        }
        let target = radius * (1.0 - rng.random::<f64>());
        let u = u.scale(target / size);
        lowest = lowest.min(assemble_energy(spec, &u) - f0);
    }
    lowest
}

/// For `p = 2`, `L = 1`: the largest relative gap between `eigenvalue_1d`
/// and `m²π²`, and the largest relative FEM error divided by `h²`.
pub fn fem_spectrum_errors(n: usize, modes: usize) -> Result<(f64, f64)> {
    use crate::energy::{CustomHook, Nonlinearity, PrincipalPart};
    let mesh = Arc::new(Mesh1D::uniform(1.0, n)?);
    let free = Nonlinearity::custom(2.0, CustomHook::new("zero", |_, _| 0.0));
    let spec = EnergySpec::new(PrincipalPart::new(2.0, 0.0)?, free);
    let q = assemble_hessian(&spec, &DiscreteField::zeros(mesh.clone()))?;
    let pairs = lowest_eigenpairs(&q, modes)?;
    let h = mesh.max_element_length();
    let (mut closed, mut fem) = (0.0f64, 0.0f64);
    for (i, pair) in pairs.iter().enumerate() {
        let m = (i + 1) as f64;
        let exact = m * m * PI * PI;
        closed = closed.max((eigenvalue_1d(2.0, 1.0, i + 1) - exact).abs() / exact);
        fem = fem.max((pair.value - exact).abs() / exact / (h * h));
    }
    Ok((closed, fem))
}
