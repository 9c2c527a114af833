//! Line-oriented problem files: `section.key = value`, `#` comments.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::discretization::Mesh1D;
use crate::energy::{EnergySpec, Nonlinearity, PrincipalPart};
use crate::error::{Error, Result};
use crate::solvers::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    SmoothPower,
    PurePower,
    /// `λ|s|^{p−2}s + μ s/(1+s²)`, `p ≥ 2`.
    Rational,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::SmoothPower => "smoothPower",
            FamilyKind::PurePower => "purePower",
            FamilyKind::Rational => "rational",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "smoothPower" => Some(FamilyKind::SmoothPower),
            "purePower" => Some(FamilyKind::PurePower),
            "rational" => Some(FamilyKind::Rational),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub p: f64,
    pub kappa: f64,
    pub length: f64,
    pub n: usize,
    pub family: FamilyKind,
    pub lambda: f64,
    pub mu: f64,
    /// Unused by `rational`.
    pub q: f64,
    pub tol_residual: f64,
    pub max_iter: usize,
    pub starts: usize,
    pub seed: u64,
    pub spectrum_count: usize,
    pub rho: Option<f64>,
    pub r: Option<f64>,
}

pub const KEYS: &[&str] = &[
    "problem.p",
    "problem.kappa",
    "domain.length",
    "mesh.n",
    "nonlinearity.family",
    "nonlinearity.lambda",
    "nonlinearity.mu",
    "nonlinearity.q",
    "solver.tolResidual",
    "solver.maxIter",
    "solver.starts",
    "solver.seed",
    "spectrum.count",
    "reduction.rho",
    "reduction.r",
];

/// Raw `key → (line, value)` pairs, duplicates and unknown keys rejected.
pub(crate) fn parse_pairs(text: &str, extra: &dyn Fn(&str) -> bool) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::BadConfig(format!("line {line_no}: expected `section.key = value`")))?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) && !extra(key) {
            return Err(Error::BadConfig(format!("line {line_no}: unknown key `{key}`")));
        }
        if value.is_empty() {
            return Err(Error::BadConfig(format!("line {line_no}: empty value for `{key}`")));
        }
        if out.insert(key.to_string(), (line_no, value.to_string())).is_some() {
            return Err(Error::BadConfig(format!("line {line_no}: duplicate key `{key}`")));
        }
    }
    Ok(out)
}

struct Fields<'a>(&'a BTreeMap<String, (usize, String)>);

impl Fields<'_> {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::BadConfig(format!("line {line}: cannot parse `{v}` for `{key}`"))),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::BadConfig(format!("missing required key `{key}`")))
    }
}

pub fn parse_config(path: &Path) -> Result<ProblemConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::BadConfig(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ProblemConfig> {
    let pairs = parse_pairs(text, &|_| false)?;
    from_pairs(&pairs)
}

pub(crate) fn from_pairs(pairs: &BTreeMap<String, (usize, String)>) -> Result<ProblemConfig> {
    let f = Fields(pairs);
    let family_name: String = f.require("nonlinearity.family")?;
    let family = FamilyKind::parse(&family_name).ok_or_else(|| {
        Error::BadConfig(format!(
            "unknown nonlinearity.family `{family_name}` (smoothPower, purePower, rational)"
        ))
    })?;
    let q = match family {
        FamilyKind::Rational => f.get("nonlinearity.q")?.unwrap_or(f64::NAN),
        _ => f.require("nonlinearity.q")?,
    };
    let cfg = ProblemConfig {
        p: f.require("problem.p")?,
        kappa: f.get("problem.kappa")?.unwrap_or(0.0),
        length: f.get("domain.length")?.unwrap_or(1.0),
        n: f.get("mesh.n")?.unwrap_or(255),
        family,
        lambda: f.require("nonlinearity.lambda")?,
        mu: f.get("nonlinearity.mu")?.unwrap_or(0.0),
        q,
        tol_residual: f.get("solver.tolResidual")?.unwrap_or(1e-10),
        max_iter: f.get("solver.maxIter")?.unwrap_or(200),
        starts: f.get("solver.starts")?.unwrap_or(64),
        seed: f.get("solver.seed")?.unwrap_or(1),
        spectrum_count: f.get("spectrum.count")?.unwrap_or(16),
        rho: f.get("reduction.rho")?,
        r: f.get("reduction.r")?,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl ProblemConfig {
    /// Re-runs every constructor check of the underlying types.
    pub fn validate(&self) -> Result<()> {
        self.energy_spec()?;
        self.mesh()?;
        self.solver_config().validate()?;
        if self.spectrum_count == 0 {
            return Err(Error::BadConfig("spectrum.count must be positive".into()));
        }
        for (key, v) in [("reduction.rho", self.rho), ("reduction.r", self.r)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::BadConfig(format!("{key} must be positive, got {v}")));
                }
            }
        }
        if self.starts == 0 {
            return Err(Error::BadConfig("solver.starts must be positive".into()));
        }
        Ok(())
    }

    pub fn energy_spec(&self) -> Result<EnergySpec> {
        let principal = PrincipalPart::new(self.p, self.kappa)?;
        let nl = match self.family {
            FamilyKind::SmoothPower => Nonlinearity::smooth_power(self.p, self.lambda, self.mu, self.q)?,
            FamilyKind::PurePower => Nonlinearity::pure_power(self.p, self.lambda, self.mu, self.q)?,
            FamilyKind::Rational => Nonlinearity::rational(self.p, self.lambda, self.mu)?,
        };
        if !self.lambda.is_finite() || !self.mu.is_finite() {
            return Err(Error::BadConfig("lambda and mu must be finite".into()));
        }
        Ok(EnergySpec::new(principal, nl))
    }

    pub fn mesh(&self) -> Result<Arc<Mesh1D>> {
        Ok(Arc::new(Mesh1D::uniform(self.length, self.n)?))
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            tol_residual: self.tol_residual,
            max_iter: self.max_iter,
            seed: self.seed,
            ..SolverConfig::default()
        }
    }
}

/// Canonical form, parseable by [`parse_config_str`].
impl fmt::Display for ProblemConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "problem.p = {}", self.p)?;
        writeln!(f, "problem.kappa = {}", self.kappa)?;
        writeln!(f, "domain.length = {}", self.length)?;
        writeln!(f, "mesh.n = {}", self.n)?;
        writeln!(f, "nonlinearity.family = {}", self.family.name())?;
        writeln!(f, "nonlinearity.lambda = {}", self.lambda)?;
        writeln!(f, "nonlinearity.mu = {}", self.mu)?;
        if !self.q.is_nan() {
            writeln!(f, "nonlinearity.q = {}", self.q)?;
        }
        writeln!(f, "solver.tolResidual = {:e}", self.tol_residual)?;
        writeln!(f, "solver.maxIter = {}", self.max_iter)?;
        writeln!(f, "solver.starts = {}", self.starts)?;
        writeln!(f, "solver.seed = {}", self.seed)?;
        writeln!(f, "spectrum.count = {}", self.spectrum_count)?;
        if let Some(rho) = self.rho {
            writeln!(f, "reduction.rho = {rho}")?;
        }
        if let Some(r) = self.r {
            writeln!(f, "reduction.r = {r}")?;
        }
        Ok(())
    }
}
