//! `azmorse` command-line front end.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use azmorse::az::{check_solution, run_az_check, EXIT_BAD_CONFIG};
use azmorse::config::{parse_config, ProblemConfig};
use azmorse::discretization::{residual_norm, DiscreteField};
use azmorse::error::Error;
use azmorse::morse::{assemble_q, classify_critical_groups, morse_indices};
use azmorse::reduction::{build_decomposition, classify_origin, sample_grid, with_backoff};
use azmorse::report::{emit_report, ReportFormat};
use azmorse::shooting::{bracket_scan, shoot_bvp, shoot_eigenvalue};
use azmorse::solvers::{mountain_pass, multistart_deflated, MOUNTAIN_PASS_SEGMENTS};
use azmorse::spectrum::{eigenvalue_1d, SpectrumTable, SPECTRUM_NOTE};
use azmorse::verify::run_all;

#[derive(Parser, Debug)]
#[command(name = "azmorse", version, about = "Critical points and Morse data for 1-D quasilinear Dirichlet problems")]
struct Cli {
    /// Problem file (`section.key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for report and table files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `solver.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "text")]
    format: String,
    /// Prefix reports with the generation time.
    #[arg(long, global = true)]
    timestamps: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form eigenvalues (p-1)(m pi_p/L)^p.
    Spectrum {
        /// Overrides `spectrum.count`.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Deflated multistart plus a mountain pass from the origin.
    Solve,
    /// Morse indices and critical-group statements at a field.
    Morse {
        /// `x,u` table of a critical point.
        #[arg(long)]
        field: PathBuf,
    },
    /// Reduced functional on a polar grid around a critical point.
    Reduce {
        /// `x,u` table; the origin when omitted.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Full existence check with report.
    AzCheck,
    /// Shooting oracles: eigenvalues, and boundary-value solutions if a
    /// problem file is given.
    Oracle {
        /// Highest eigenvalue index.
        #[arg(long, default_value_t = 3)]
        modes: usize,
        /// Exponents for the eigenvalue table (defaults to problem.p).
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        /// Highest interior-zero count for boundary-value shooting.
        #[arg(long, default_value_t = 2)]
        nodes: usize,
    },
    /// Run the shipped scenarios.
    Verify {
        #[arg(long, default_value = "*")]
        filter: String,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BadConfig(_) | Error::BadField(_) | Error::Io(_) | Error::MeshMismatch => EXIT_BAD_CONFIG as u8,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn bad_input(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_BAD_CONFIG as u8,
        message: msg.into(),
    }
}

struct Ctx {
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    format: ReportFormat,
    timestamp: Option<String>,
}

impl Ctx {
    fn problem(&self) -> Result<ProblemConfig, Failure> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| bad_input("this command needs --config <path>"))?;
        let mut cfg = parse_config(path)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }

    /// Print `body` and, with `--out`, also write it to `name`.
    fn emit(&self, name: &str, body: &str) -> Result<(), Failure> {
        print!("{body}");
        if let Some(dir) = &self.out {
            write_file(dir, name, body)?;
        }
        Ok(())
    }

    fn stamp(&self, body: String) -> String {
        match &self.timestamp {
            Some(ts) => format!("# generated: {ts}\n{body}"),
            None => body,
        }
    }
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::from(Error::from(e)))?;
    std::fs::write(dir.join(name), body).map_err(|e| Failure::from(Error::from(e)))
}

fn read_field(path: &Path) -> Result<DiscreteField, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| bad_input(format!("cannot read {}: {e}", path.display())))?;
    Ok(DiscreteField::from_table(&text)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = match cli.format.parse::<ReportFormat>() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_BAD_CONFIG as u8);
        }
    };
    let timestamp = cli.timestamps.then(|| {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        format!("unix {secs}")
    });
    let ctx = Ctx {
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        format,
        timestamp,
    };
    let result = match cli.command {
        Command::Spectrum { count } => spectrum(&ctx, count),
        Command::Solve => solve(&ctx),
        Command::Morse { field } => morse(&ctx, &field),
        Command::Reduce { field } => reduce(&ctx, field.as_deref()),
        Command::AzCheck => az_check(&ctx),
        Command::Oracle { modes, p, nodes } => oracle(&ctx, modes, &p, nodes),
        Command::Verify { filter } => verify(&ctx, &filter),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn spectrum(ctx: &Ctx, count: Option<usize>) -> Result<u8, Failure> {
    let cfg = ctx.problem()?;
    let table = SpectrumTable::new(cfg.p, cfg.length, count.unwrap_or(cfg.spectrum_count));
    let body = ctx.stamp(format!("# {SPECTRUM_NOTE}\n{}", table.to_table()));
    ctx.emit("spectrum.csv", &body)?;
    Ok(0)
}

fn solve(ctx: &Ctx) -> Result<u8, Failure> {
    let cfg = ctx.problem()?;
    let (spec, mesh) = (cfg.energy_spec()?, cfg.mesh()?);
    let scfg = cfg.solver_config();
    let mut records = multistart_deflated(&spec, &mesh, cfg.starts, &scfg);
    let zero = DiscreteField::zeros(mesh.clone());
    if let Some(low) = records.iter().filter(|r| r.sup_norm() > 1e-3).min_by(|a, b| a.energy.total_cmp(&b.energy)) {
        if let Ok(rec) = mountain_pass(&spec, &zero, &low.field, MOUNTAIN_PASS_SEGMENTS, &scfg) {
            if records.iter().all(|r| (r.field.values() - rec.field.values()).amax() > 1e-6) {
                records.push(rec);
            }
        }
    }
    let mut body = String::new();
    let solutions: Vec<_> = records
        .into_iter()
        .map(|r| check_solution(&spec, &mesh, r, cfg.tol_residual))
        .collect();
    match ctx.format {
        ReportFormat::Text => {
            let _ = writeln!(body, "solutions: {}", solutions.len());
            for (i, s) in solutions.iter().enumerate() {
                let k = i + 1;
                let _ = writeln!(body, "solution.{k}.energy: {:.10e}", s.record.energy);
                let _ = writeln!(body, "solution.{k}.residual: {:.3e}", s.residual);
                let _ = writeln!(body, "solution.{k}.supNorm: {:.10e}", s.record.sup_norm());
                let _ = writeln!(body, "solution.{k}.interiorZeros: {}", s.nodes);
                let _ = writeln!(body, "solution.{k}.source: {}", s.record.source);
                let _ = writeln!(
                    body,
                    "solution.{k}.morse: {}",
                    s.record.morse.map_or("-".into(), |m| m.to_string())
                );
            }
        }
        ReportFormat::Table => {
            body.push_str("index,energy,residual,supnorm,m,mStar\n");
            for (i, s) in solutions.iter().enumerate() {
                let (m, ms) = s
                    .record
                    .morse
                    .map_or(("-".into(), "-".into()), |md| (md.m.to_string(), md.m_star.to_string()));
                let _ = writeln!(
                    body,
                    "{},{:.10e},{:.3e},{:.10e},{m},{ms}",
                    i + 1,
                    s.record.energy,
                    s.residual,
                    s.record.sup_norm()
                );
            }
        }
    }
    ctx.emit("solutions.txt", &ctx.stamp(body))?;
    if let Some(dir) = &ctx.out {
        for (i, s) in solutions.iter().enumerate() {
            write_file(dir, &format!("solution_{}.csv", i + 1), &s.record.field.to_table())?;
        }
    }
    Ok(if solutions.is_empty() { 2 } else { 0 })
}

fn morse(ctx: &Ctx, field: &Path) -> Result<u8, Failure> {
    let cfg = ctx.problem()?;
    let spec = cfg.energy_spec()?;
    let u = read_field(field)?;
    let (q, deg, regime) = assemble_q(&spec, &u)?;
    let md = morse_indices(&q, &deg, regime, &spec)?;
    let is_zero = u.sup_norm() == 0.0;
    let verdict = classify_critical_groups(&md, true, is_zero, &spec);
    let mut body = String::new();
    let _ = writeln!(body, "residual: {:.3e}", residual_norm(&spec, &u));
    let _ = writeln!(body, "regime: {regime}");
    let _ = writeln!(body, "degenerateElements: {}", deg.elements.len());
    let _ = writeln!(body, "m: {}", md.m);
    let _ = writeln!(body, "mStar: {}", md.m_star);
    let _ = writeln!(body, "kernelDim: {}", md.kernel_dim.map_or("-".into(), |k| k.to_string()));
    for s in &verdict.statements {
        let _ = writeln!(body, "groups: [{}] {}", s.tag, s.text);
    }
    ctx.emit("morse.txt", &ctx.stamp(body))?;
    Ok(0)
}

fn reduce(ctx: &Ctx, field: Option<&Path>) -> Result<u8, Failure> {
    let cfg = ctx.problem()?;
    let spec = cfg.energy_spec()?;
    let u0 = match field {
        Some(path) => read_field(path)?,
        None => DiscreteField::zeros(cfg.mesh()?),
    };
    let (q, deg, regime) = assemble_q(&spec, &u0)?;
    let md = morse_indices(&q, &deg, regime, &spec)?;
    let radii = cfg.rho.map(|rho| (rho, cfg.r.unwrap_or(rho)));
    let mut dec = build_decomposition(&spec, &u0, &md, radii)?;
    let scfg = cfg.solver_config();
    let (origin, grid) = with_backoff(&mut dec, |d| sample_grid(&spec, d, &scfg))?;
    let mut body = String::from("v1,v2,phi,|gradPhi|\n");
    let _ = writeln!(body, "0,0,{:.12e},{:.3e}", origin.phi, origin.grad_norm());
    for s in &grid {
        let v1 = s.v.first().copied().unwrap_or(0.0);
        let v2 = s.v.get(1).copied().unwrap_or(0.0);
        let _ = writeln!(body, "{v1:.6e},{v2:.6e},{:.12e},{:.3e}", s.phi, s.grad_norm());
    }
    let _ = writeln!(body, "# dimV: {}", dec.dim_v());
    let _ = writeln!(body, "# rho: {:.6e}", dec.rho);
    let _ = writeln!(body, "# classification: {}", classify_origin(&origin, &grid));
    ctx.emit("reduce.csv", &ctx.stamp(body))?;
    Ok(0)
}

fn az_check(ctx: &Ctx) -> Result<u8, Failure> {
    let cfg = ctx.problem()?;
    let report = run_az_check(&cfg)?;
    let body = emit_report(&report, ctx.format, ctx.timestamp.as_deref());
    ctx.emit("report.txt", &body)?;
    if let Some(dir) = &ctx.out {
        for (i, s) in report.solutions.iter().enumerate() {
            write_file(dir, &format!("solution_{}.csv", i + 1), &s.record.field.to_table())?;
        }
    }
    Ok(report.exit_code() as u8)
}

fn oracle(ctx: &Ctx, modes: usize, exponents: &[f64], nodes: usize) -> Result<u8, Failure> {
    let cfg = match &ctx.config {
        Some(_) => Some(ctx.problem()?),
        None => None,
    };
    let ps: Vec<f64> = match (exponents.is_empty(), &cfg) {
        (false, _) => exponents.to_vec(),
        (true, Some(c)) => vec![c.p],
        (true, None) => vec![1.5, 2.0, 3.0],
    };
    let length = cfg.as_ref().map_or(1.0, |c| c.length);
    let mut body = String::from("p,m,closed_form,shooting,relative_gap\n");
    for &p in &ps {
        if !(p > 1.0) {
            return Err(bad_input(format!("exponent must exceed 1, got {p}")));
        }
        for m in 1..=modes {
            let closed = eigenvalue_1d(p, length, m);
            let shot = shoot_eigenvalue(p, length, m)?;
            let _ = writeln!(body, "{p},{m},{closed:.12e},{shot:.12e},{:.3e}", (closed - shot).abs() / closed);
        }
    }
    if let Some(cfg) = &cfg {
        let (spec, mesh) = (cfg.energy_spec()?, cfg.mesh()?);
        body.push_str("interior_zeros,initial_slope,sup_norm,fem_residual\n");
        for k in 0..=nodes {
            let found = bracket_scan(&spec, &mesh, k, 1e-3, 1e3, 120).and_then(|b| shoot_bvp(&spec, &mesh, b, k).ok());
            match found {
                Some(shot) => {
                    let _ = writeln!(
                        body,
                        "{k},{:.12e},{:.12e},{:.3e}",
                        shot.slope0,
                        shot.field.sup_norm(),
                        shot.fem_residual
                    );
                    if let Some(dir) = &ctx.out {
                        write_file(dir, &format!("shooting_{k}.csv"), &shot.field.to_table())?;
                    }
                }
                None => {
                    let _ = writeln!(body, "{k},-,-,-");
                }
            }
        }
    }
    ctx.emit("oracle.csv", &ctx.stamp(body))?;
    Ok(0)
}

fn verify(ctx: &Ctx, filter: &str) -> Result<u8, Failure> {
    let summary = run_all(ctx.seed.unwrap_or(1), filter)?;
    ctx.emit("verify.txt", &ctx.stamp(summary.render()))?;
    Ok(if summary.passed() { 0 } else { 1 })
}
