//! Text and table renderings of an [`AzReport`].

use std::fmt::Write as _;
use std::str::FromStr;

use crate::az::AzReport;
use crate::error::Error;
use crate::spectrum::SPECTRUM_NOTE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Table,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "table" => Ok(ReportFormat::Table),
            other => Err(Error::BadConfig(format!("unknown format `{other}` (text, table)"))),
        }
    }
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// Deterministic for a given report; `timestamp` adds one leading line.
pub fn emit_report(report: &AzReport, format: ReportFormat, timestamp: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(ts) = timestamp {
        let _ = writeln!(out, "# generated: {ts}");
    }
    match format {
        ReportFormat::Text => text(report, &mut out),
        ReportFormat::Table => table(report, &mut out),
    }
    out
}

fn text(r: &AzReport, out: &mut String) {
    let c = &r.config;
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k}: {v}");
    };
    kv("p", c.p.to_string());
    kv("kappa", c.kappa.to_string());
    kv("length", c.length.to_string());
    kv("meshN", c.n.to_string());
    kv("family", c.family.name().to_string());
    kv("lambda", c.lambda.to_string());
    kv("mu", c.mu.to_string());
    kv("seed", c.seed.to_string());
    kv("spectrumNote", SPECTRUM_NOTE.to_string());
    kv("hypothesisClass", r.hypothesis_class.name().to_string());
    kv("lambdaInfinity", opt(r.lambda_infinity));
    kv("slopeAtZero", r.slope_at_zero.to_string());
    kv("resonant", r.resonant.to_string());
    kv("bClass", opt(r.b_class));
    kv("mInfinity", opt(r.m_infinity));
    kv("morseAtZero", opt(r.morse_at_zero));
    kv("morseRegime", opt(r.morse_at_zero.map(|m| m.regime)));
    if let (Some(md), Some(m_inf)) = (r.morse_at_zero, r.m_infinity) {
        kv("interval", format!("mInfinity {m_inf} vs [m, m*] = [{}, {}]", md.m, md.m_star));
    }
    kv("conditionHolds", r.condition_holds.to_string());
    if let Some(g) = &r.zero_groups {
        for s in &g.statements {
            kv("zeroGroups", format!("[{}] {}", s.tag, s.text));
        }
    }
    kv("solutions", r.solutions.len().to_string());
    for (i, s) in r.solutions.iter().enumerate() {
        let key = |k: &str| format!("solution.{}.{k}", i + 1);
        let _ = writeln!(out, "{}: {:.10e}", key("energy"), s.record.energy);
        let _ = writeln!(out, "{}: {:.3e}", key("residual"), s.residual);
        let _ = writeln!(out, "{}: {:.10e}", key("supNorm"), s.record.sup_norm());
        let _ = writeln!(out, "{}: {:.10e}", key("initialSlope"), s.record.field.slope(0));
        let _ = writeln!(out, "{}: {}", key("interiorZeros"), s.nodes);
        let _ = writeln!(out, "{}: {}", key("source"), s.record.source);
        let _ = writeln!(out, "{}: {}", key("morse"), opt(s.record.morse));
        let _ = writeln!(
            out,
            "{}: {}",
            key("shootingDistance"),
            s.shooting_distance.map_or("-".to_string(), |d| format!("{d:.3e}"))
        );
        if let Some(g) = &s.groups {
            for st in &g.statements {
                let _ = writeln!(out, "{}: [{}] {}", key("groups"), st.tag, st.text);
            }
        }
        let _ = writeln!(out, "{}: {}", key("verified"), s.verified);
    }
    for n in &r.notes {
        let _ = writeln!(out, "note: {n}");
    }
    let _ = writeln!(out, "verdict: {}", r.verdict.name());
    let _ = writeln!(out, "exitCode: {}", r.exit_code());
}

fn table(r: &AzReport, out: &mut String) {
    out.push_str("index,energy,residual,supnorm,m,mStar,verified\n");
    for (i, s) in r.solutions.iter().enumerate() {
        let (m, ms) = s
            .record
            .morse
            .map_or(("-".to_string(), "-".to_string()), |md| (md.m.to_string(), md.m_star.to_string()));
        let _ = writeln!(
            out,
            "{},{:.10e},{:.3e},{:.10e},{m},{ms},{}",
            i + 1,
            s.record.energy,
            s.residual,
            s.record.sup_norm(),
            s.verified
        );
    }
}
