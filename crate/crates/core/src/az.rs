//! The asymptotically linear existence check: hypotheses, `m_∞`, Morse
//! data at the origin, the disjointness condition, and the search for a
//! nontrivial solution.

use std::sync::Arc;

use crate::config::ProblemConfig;
use crate::discretization::{residual_norm, DiscreteField, Mesh1D};
use crate::energy::{check_growth_a, classify_b, BClass, EnergySpec};
use crate::error::Result;
use crate::morse::{assemble_q, classify_critical_groups, morse_indices, CriticalGroupVerdict, MorseCount, MorseData};
use crate::shooting::{bracket_scan, shoot_bvp};
use crate::solvers::{mountain_pass, multistart_deflated, newton_solve, CriticalPointRecord, SolverConfig, MOUNTAIN_PASS_SEGMENTS};
use crate::spectrum::{check_nonresonance, locate_m_infinity, Side, SpectrumTable, RESONANCE_RTOL};

/// `‖u‖_∞` above which a solution counts as nontrivial.
pub const NONTRIVIAL_SUP: f64 = 1e-3;
/// Sup distance allowed between a solution and its shooting replica.
pub const SHOOTING_SUP_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypothesisClass {
    Nonresonant,
    ResonantBMinus,
    ResonantBPlus,
    NotApplicable,
}

impl HypothesisClass {
    pub fn name(&self) -> &'static str {
        match self {
            HypothesisClass::Nonresonant => "nonresonant",
            HypothesisClass::ResonantBMinus => "resonantBminus",
            HypothesisClass::ResonantBPlus => "resonantBplus",
            HypothesisClass::NotApplicable => "notApplicable",
        }
    }

    /// The side of the bracket `λ_{m_∞} ? λ ? λ_{m_∞+1}` this branch uses.
    pub fn side(&self) -> Option<Side> {
        match self {
            HypothesisClass::Nonresonant => Some(Side::Strict),
            HypothesisClass::ResonantBMinus => Some(Side::RightClosed),
            HypothesisClass::ResonantBPlus => Some(Side::LeftClosed),
            HypothesisClass::NotApplicable => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    NontrivialFound,
    HypothesisFails,
    SolverFailed,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::NontrivialFound => "nontrivialFound",
            Verdict::HypothesisFails => "hypothesisFails",
            Verdict::SolverFailed => "solverFailed",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::NontrivialFound => 0,
            Verdict::HypothesisFails => 1,
            Verdict::SolverFailed => 2,
        }
    }
}

/// Exit code for configuration errors.
pub const EXIT_BAD_CONFIG: i32 = 3;

/// A candidate together with its independent checks.
#[derive(Debug, Clone)]
pub struct CheckedSolution {
    pub record: CriticalPointRecord,
    /// Recomputed `sup |∇f|`.
    pub residual: f64,
    pub nodes: usize,
    /// Sup distance to the nearest shooting solution, if one was found.
    pub shooting_distance: Option<f64>,
    pub groups: Option<CriticalGroupVerdict>,
    pub verified: bool,
}

#[derive(Debug, Clone)]
pub struct AzReport {
    pub config: ProblemConfig,
    pub hypothesis_class: HypothesisClass,
    pub lambda_infinity: Option<f64>,
    pub slope_at_zero: f64,
    pub resonant: bool,
    pub b_class: Option<BClass>,
    pub m_infinity: Option<usize>,
    pub morse_at_zero: Option<MorseData>,
    pub zero_groups: Option<CriticalGroupVerdict>,
    pub condition_holds: bool,
    pub solutions: Vec<CheckedSolution>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl AzReport {
    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    /// The first verified nontrivial solution.
    pub fn witness(&self) -> Option<&CheckedSolution> {
        self.solutions.iter().find(|s| s.verified)
    }
}

/// Only `BadConfig` escapes; every other failure is folded into the verdict.
pub fn run_az_check(cfg: &ProblemConfig) -> Result<AzReport> {
    cfg.validate()?;
    let spec = cfg.energy_spec()?;
    let mesh = cfg.mesh()?;
    let (p, kappa) = (spec.p(), spec.kappa());
    let growth = check_growth_a(&spec.nonlinearity, p);
    let mut report = AzReport {
        config: cfg.clone(),
        hypothesis_class: HypothesisClass::NotApplicable,
        lambda_infinity: growth.slope_at_infinity,
        slope_at_zero: growth.slope_at_zero,
        resonant: false,
        b_class: None,
        m_infinity: None,
        morse_at_zero: None,
        zero_groups: None,
        condition_holds: false,
        solutions: Vec::new(),
        verdict: Verdict::HypothesisFails,
        notes: Vec::new(),
    };

    let Some(lambda) = growth.slope_at_infinity else {
        report.notes.push("g(s)/(|s|^(p-2)s) has no detectable limit".into());
        return Ok(report);
    };
    let table = SpectrumTable::covering(p, cfg.length, lambda, cfg.spectrum_count);
    report.resonant = !check_nonresonance(&table, lambda, RESONANCE_RTOL)?;
    report.hypothesis_class = if !report.resonant {
        HypothesisClass::Nonresonant
    } else {
        let b = classify_b(&spec.nonlinearity, p, kappa);
        report.b_class = b.b_class;
        match b.b_class {
            Some(BClass::BMinus) => HypothesisClass::ResonantBMinus,
            Some(BClass::BPlus) if b.admissible == Some(true) => HypothesisClass::ResonantBPlus,
            Some(BClass::BPlus) => {
                report.notes.push("the bPlus branch needs p <= 2, or p > 2 with kappa = 0".into());
                HypothesisClass::NotApplicable
            }
            _ => {
                report.notes.push("resonant, and pG(s) - g(s)s diverges to neither side".into());
                HypothesisClass::NotApplicable
            }
        }
    };
    let Some(side) = report.hypothesis_class.side() else {
        return Ok(report);
    };
    let m_inf = locate_m_infinity(&table, lambda, side)?;
    report.m_infinity = Some(m_inf);

    let zero = DiscreteField::zeros(mesh.clone());
    let md = match assemble_q(&spec, &zero).and_then(|(q, d, r)| morse_indices(&q, &d, r, &spec)) {
        Ok(md) => md,
        Err(e) => {
            report.notes.push(format!("Morse data at zero unavailable: {e}"));
            report.verdict = Verdict::SolverFailed;
            return Ok(report);
        }
    };
    report.morse_at_zero = Some(md);
    report.zero_groups = Some(classify_critical_groups(&md, true, true, &spec));
    report.condition_holds = !MorseCount::contains_in_band(md.m, md.m_star, m_inf);
    if !report.condition_holds {
        report.notes.push(format!("m_inf = {m_inf} lies in [m, m*] = [{}, {}]", md.m, md.m_star));
        return Ok(report);
    }

    let scfg = cfg.solver_config();
    report.solutions = hunt(&spec, &mesh, cfg.starts, &scfg, &mut report.notes);
    report.verdict = if report.witness().is_some() {
        Verdict::NontrivialFound
    } else {
        Verdict::SolverFailed
    };
    Ok(report)
}

/// Multistart first, then mountain passes from the origin, then shooting;
/// each stage runs only if the previous ones produced no verified witness.
fn hunt(
    spec: &EnergySpec,
    mesh: &Arc<Mesh1D>,
    starts: usize,
    cfg: &SolverConfig,
    notes: &mut Vec<String>,
) -> Vec<CheckedSolution> {
    let mut out: Vec<CheckedSolution> = Vec::new();
    let admit = |rec: CriticalPointRecord, out: &mut Vec<CheckedSolution>| {
        if rec.sup_norm() <= NONTRIVIAL_SUP {
            return;
        }
        let p = spec.p();
        if out
            .iter()
            .any(|s| crate::discretization::seminorm_distance(&s.record.field, &rec.field, p) <= crate::solvers::DISTINCT_TOL)
        {
            return;
        }
        out.push(check_solution(spec, mesh, rec, cfg.tol_residual));
    };

    for rec in multistart_deflated(spec, mesh, starts, cfg) {
        admit(rec, &mut out);
    }
    if out.iter().any(|s| s.verified) {
        return sorted(out);
    }

    let zero = DiscreteField::zeros(mesh.clone());
    let f0 = crate::discretization::assemble_energy(spec, &zero);
    'modes: for k in 1..=3 {
        let shape = DiscreteField::interpolate(mesh.clone(), |x| (k as f64 * std::f64::consts::PI * x / mesh.length()).sin());
        for s in (0..12).map(|i| 10f64.powf(-1.0 + 0.5 * i as f64)) {
            let b = shape.scale(s);
            if crate::discretization::assemble_energy(spec, &b) < f0 {
                match mountain_pass(spec, &zero, &b, MOUNTAIN_PASS_SEGMENTS, cfg) {
                    Ok(rec) => admit(rec, &mut out),
                    Err(e) => notes.push(format!("mountain pass along mode {k}: {e}")),
                }
                if out.iter().any(|s| s.verified) {
                    break 'modes;
                }
                continue 'modes;
            }
        }
    }
    if out.iter().any(|s| s.verified) {
        return sorted(out);
    }

    'nodes: for nodes in 0..=3 {
        for sign in [1.0, -1.0] {
            let Some(bracket) = bracket_scan(spec, mesh, nodes, sign * 1e-3, sign * 1e3, 120) else {
                continue;
            };
            let Ok(shot) = shoot_bvp(spec, mesh, bracket, nodes) else {
                continue;
            };
            match newton_solve(spec, &shot.field, cfg) {
                Ok(mut rec) => {
                    rec.source = format!("shooting ({nodes} interior zeros)");
                    admit(rec, &mut out);
                }
                Err(e) => notes.push(format!("polishing the {nodes}-zero shooting solution: {e}")),
            }
            if out.iter().any(|s| s.verified) {
                break 'nodes;
            }
        }
    }
    sorted(out)
}

fn sorted(mut v: Vec<CheckedSolution>) -> Vec<CheckedSolution> {
    v.sort_by(|a, b| {
        b.verified
            .cmp(&a.verified)
            .then(a.record.energy.total_cmp(&b.record.energy))
            .then(a.record.sup_norm().total_cmp(&b.record.sup_norm()))
    });
    v
}

/// Residual recomputation, Morse data, and the shooting cross-check.
pub fn check_solution(spec: &EnergySpec, mesh: &Arc<Mesh1D>, mut record: CriticalPointRecord, tol: f64) -> CheckedSolution {
    let residual = residual_norm(spec, &record.field);
    let nodes = record.field.sign_changes();
    let md = assemble_q(spec, &record.field).and_then(|(q, d, r)| morse_indices(&q, &d, r, spec)).ok();
    record.morse = md;
    let groups = md.map(|md| classify_critical_groups(&md, true, false, spec));
    let shooting_distance = shooting_distance(spec, mesh, &record.field);
    let verified = residual <= tol
        && record.sup_norm() > NONTRIVIAL_SUP
        && shooting_distance.is_some_and(|d| d <= SHOOTING_SUP_TOL);
    CheckedSolution {
        record,
        residual,
        nodes,
        shooting_distance,
        groups,
        verified,
    }
}

/// Sup distance from `u` to the closest shooting solution with the same
/// number of interior zeros, searched in widening slope brackets around
/// the field's own initial slope.
pub fn shooting_distance(spec: &EnergySpec, mesh: &Arc<Mesh1D>, u: &DiscreteField) -> Option<f64> {
    let nodes = u.sign_changes();
    let s0 = u.slope(0);
    if s0 == 0.0 || !s0.is_finite() {
        return None;
    }
    let mut best: Option<f64> = None;
    for delta in [0.02, 0.1, 0.3, 0.6] {
        let Some(bracket) = bracket_scan(spec, mesh, nodes, s0 * (1.0 - delta), s0 * (1.0 + delta), 24) else {
            continue;
        };
        let Ok(shot) = shoot_bvp(spec, mesh, bracket, nodes) else {
            continue;
        };
        let d = (shot.field.values() - u.values()).amax();
        best = Some(best.map_or(d, |b: f64| b.min(d)));
        if d <= SHOOTING_SUP_TOL {
            break;
        }
    }
    best
}
