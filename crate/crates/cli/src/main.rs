//! Command-line frontend: equilibrium reports, stability spectra, series
//! audits, parameter-grid maps, critical-mass bisection, and trajectory
//! integration.
//!
//! Data goes to stdout (or `--out`); diagnostics go to stderr. Exit codes:
//! 0 success, 2 invalid input, 3 convergence failure, 4 bracketing
//! failure, 5 close approach to a primary.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use tripoint::equilibria::{refine_equilibrium, triangular_closed_form};
use tripoint::jets::{audit_series, AUDIT_ABS_TOL, AUDIT_REL_TOL};
use tripoint::normalization::stability_verdict;
use tripoint::sweep::{critical_mass, run_sweep, Axis, AxisName};
use tripoint::{
    integrator, Branch, DragSpec, EquilibriaError, EquilibriumPoint, GridSpec, IntegrateError,
    NormalizationError, SeriesAudit, SweepError, SystemParams,
};

const EXIT_INVALID: u8 = 2;
const EXIT_NO_CONVERGENCE: u8 = 3;
const EXIT_NO_BRACKET: u8 = 4;
const EXIT_CLOSE_APPROACH: u8 = 5;

#[derive(Parser)]
#[command(
    name = "tripoint",
    version,
    about = "Stability toolkit for the triangular points of a radiating, oblate three-body system"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Locate the triangular equilibrium: closed form and refined.
    Equilibria(EquilibriaCmd),
    /// Linear stability report at the triangular point.
    Spectrum(SpectrumCmd),
    /// Audit the hand-derived series tables against the expansion oracle.
    SeriesCheck(SeriesCheckCmd),
    /// Stability verdicts over a parameter grid, as CSV.
    StabilityMap(MapCmd),
    /// Bisect the stability boundary in the mass ratio.
    CriticalMass(CriticalCmd),
    /// Integrate a trajectory near the triangular point, as CSV.
    Integrate(IntegrateCmd),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, ValueEnum)]
enum BranchArg {
    L4,
    L5,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Branch {
        match b {
            BranchArg::L4 => Branch::L4,
            BranchArg::L5 => Branch::L5,
        }
    }
}

/// Parameter flags shared by every subcommand. Values omitted here fall
/// back to the `--config` file, then to the classical defaults.
#[derive(Args)]
struct ParamOpts {
    /// Mass ratio of the smaller primary, in (0, 0.5].
    #[arg(long)]
    mu: Option<f64>,
    /// Radiation factor of the larger primary, in (0, 1].
    #[arg(long)]
    q1: Option<f64>,
    /// Oblateness coefficient of the smaller primary.
    #[arg(long)]
    a2: Option<f64>,
    /// Drag parameter, directly.
    #[arg(long)]
    w1: Option<f64>,
    /// Dimensionless light-speed constant; derives the drag parameter.
    #[arg(long, conflicts_with = "w1")]
    cd: Option<f64>,
    /// Which triangular point to work at.
    #[arg(long, value_enum)]
    branch: Option<BranchArg>,
    /// JSON file with default parameter values; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    mu: Option<f64>,
    q1: Option<f64>,
    a2: Option<f64>,
    w1: Option<f64>,
    cd: Option<f64>,
    branch: Option<String>,
}

#[derive(Args)]
struct EquilibriaCmd {
    #[command(flatten)]
    params: ParamOpts,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SpectrumCmd {
    #[command(flatten)]
    params: ParamOpts,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SeriesCheckCmd {
    #[command(flatten)]
    params: ParamOpts,
    /// Relative tolerance for coefficient agreement.
    #[arg(long, default_value_t = AUDIT_REL_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct MapCmd {
    #[command(flatten)]
    params: ParamOpts,
    /// Swept axis as name=min:max:count over mu, q1, a2, or w1.
    /// Repeat for more axes; the first one varies slowest.
    #[arg(long = "grid", required = true, value_parser = parse_grid)]
    grid: Vec<Axis>,
    /// Thread count for the sweep; defaults to all cores.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct CriticalCmd {
    #[command(flatten)]
    params: ParamOpts,
    /// Mass-ratio bracket lo:hi to bisect; the verdict must differ at
    /// the two ends.
    #[arg(long, value_parser = parse_bracket, default_value = "1e-4:0.4999")]
    bracket: (f64, f64),
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct IntegrateCmd {
    #[command(flatten)]
    params: ParamOpts,
    /// Integration span; negative runs backward.
    #[arg(long = "t-end", allow_hyphen_values = true)]
    t_end: f64,
    /// Absolute and relative step tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Absolute initial coordinates; each defaults to the refined
    /// equilibrium at rest.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    vx0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    vy0: Option<f64>,
    /// Offset added to the initial x after the absolute values apply.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    dx: f64,
    /// Offset added to the initial y.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    dy: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

struct Failure {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure {
        code,
        msg: msg.into(),
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        fail(EXIT_INVALID, format!("i/o: {e}"))
    }
}

fn equilibria_failure(e: EquilibriaError) -> Failure {
    let code = match e {
        EquilibriaError::NoConvergence { .. } | EquilibriaError::SingularJacobian { .. } => {
            EXIT_NO_CONVERGENCE
        }
        _ => EXIT_INVALID,
    };
    fail(code, e.to_string())
}

fn normalization_failure(e: NormalizationError) -> Failure {
    match e {
        NormalizationError::Equilibria(inner) => equilibria_failure(inner),
        NormalizationError::DegenerateFrequencies { .. }
        | NormalizationError::UnstableInput { .. } => fail(EXIT_NO_CONVERGENCE, e.to_string()),
        _ => fail(EXIT_INVALID, e.to_string()),
    }
}

fn sweep_failure(e: SweepError) -> Failure {
    match e {
        SweepError::NoTransition { .. } => fail(EXIT_NO_BRACKET, e.to_string()),
        SweepError::Normalization(inner) => normalization_failure(inner),
        _ => fail(EXIT_INVALID, e.to_string()),
    }
}

fn parse_grid(s: &str) -> Result<Axis, String> {
    let (name, rest) = s
        .split_once('=')
        .ok_or("expected name=min:max:count, e.g. mu=0.01:0.05:41")?;
    let name = match name {
        "mu" => AxisName::Mu,
        "q1" => AxisName::Q1,
        "a2" => AxisName::A2,
        "w1" => AxisName::W1,
        other => return Err(format!("unknown axis {other:?}; use mu, q1, a2, or w1")),
    };
    let parts: Vec<&str> = rest.split(':').collect();
    let [min, max, count] = parts[..] else {
        return Err("expected name=min:max:count, e.g. mu=0.01:0.05:41".into());
    };
    let min: f64 = min.parse().map_err(|_| format!("bad axis minimum {min:?}"))?;
    let max: f64 = max.parse().map_err(|_| format!("bad axis maximum {max:?}"))?;
    let count: usize = count
        .parse()
        .map_err(|_| format!("bad axis count {count:?}"))?;
    Ok(Axis {
        name,
        min,
        max,
        count,
    })
}

fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi, e.g. 0.01:0.05")?;
    let lo: f64 = lo.parse().map_err(|_| format!("bad bracket bound {lo:?}"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("bad bracket bound {hi:?}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err("bracket needs finite lo < hi".into());
    }
    Ok((lo, hi))
}

fn load_config(path: &Option<PathBuf>) -> Result<ConfigFile, Failure> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| fail(EXIT_INVALID, format!("config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| fail(EXIT_INVALID, format!("config {}: {e}", path.display())))
}

fn resolve_branch(po: &ParamOpts, cfg: &ConfigFile) -> Result<Branch, Failure> {
    if let Some(b) = po.branch {
        return Ok(b.into());
    }
    match cfg.branch.as_deref() {
        None => Ok(Branch::L4),
        Some("l4") | Some("L4") => Ok(Branch::L4),
        Some("l5") | Some("L5") => Ok(Branch::L5),
        Some(other) => Err(fail(
            EXIT_INVALID,
            format!("config branch {other:?}; use \"l4\" or \"l5\""),
        )),
    }
}

/// Merges flags over the config file and validates the parameter set.
fn resolve_params(po: &ParamOpts) -> Result<(SystemParams, Branch), Failure> {
    let cfg = load_config(&po.config)?;
    let branch = resolve_branch(po, &cfg)?;
    let mu = po
        .mu
        .or(cfg.mu)
        .ok_or_else(|| fail(EXIT_INVALID, "mass ratio required: pass --mu or set it in --config"))?;
    let q1 = po.q1.or(cfg.q1).unwrap_or(1.0);
    let a2 = po.a2.or(cfg.a2).unwrap_or(0.0);
    let drag = match (po.w1, po.cd) {
        (Some(w1), None) => DragSpec::W1(w1),
        (None, Some(cd)) => DragSpec::Cd(cd),
        (Some(_), Some(_)) => return Err(fail(EXIT_INVALID, "pass --w1 or --cd, not both")),
        (None, None) => match (cfg.w1, cfg.cd) {
            (Some(_), Some(_)) => {
                return Err(fail(EXIT_INVALID, "config sets both w1 and cd; keep one"))
            }
            (Some(w1), None) => DragSpec::W1(w1),
            (None, Some(cd)) => DragSpec::Cd(cd),
            (None, None) => DragSpec::W1(0.0),
        },
    };
    let p = SystemParams::new(mu, q1, a2, drag).map_err(|e| fail(EXIT_INVALID, e.to_string()))?;
    Ok((p, branch))
}

fn open_sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    match out {
        Some(path) => {
            let file = fs::File::create(path)
                .map_err(|e| fail(EXIT_INVALID, format!("{}: {e}", path.display())))?;
            Ok(Box::new(io::BufWriter::new(file)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn require_format(got: Format, want: Format) -> Result<(), Failure> {
    if got != want {
        let name = match want {
            Format::Json => "json",
            Format::Csv => "csv",
        };
        return Err(fail(
            EXIT_INVALID,
            format!("this command only emits {name}"),
        ));
    }
    Ok(())
}

fn write_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<(), Failure> {
    let mut sink = open_sink(out)?;
    serde_json::to_writer_pretty(&mut sink, value)
        .map_err(|e| fail(EXIT_INVALID, format!("serialize: {e}")))?;
    writeln!(sink)?;
    sink.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct EquilibriaOut {
    params: SystemParams,
    branch: Branch,
    closed_form: EquilibriumPoint,
    refined: EquilibriumPoint,
    gap: f64,
}

fn cmd_equilibria(cmd: &EquilibriaCmd) -> Result<(), Failure> {
    require_format(cmd.format, Format::Json)?;
    let (p, branch) = resolve_params(&cmd.params)?;
    let closed = triangular_closed_form(&p, branch).map_err(equilibria_failure)?;
    let refined = refine_equilibrium(&p, &closed).map_err(equilibria_failure)?;
    let gap = (closed.x_star - refined.x_star)
        .abs()
        .max((closed.y_star - refined.y_star).abs());
    write_json(
        &cmd.out,
        &EquilibriaOut {
            params: p,
            branch,
            closed_form: closed,
            refined,
            gap,
        },
    )?;
    eprintln!("closed-to-refined gap {gap:.3e}, residual {:.3e}", refined.residual_norm);
    Ok(())
}

fn cmd_spectrum(cmd: &SpectrumCmd) -> Result<(), Failure> {
    require_format(cmd.format, Format::Json)?;
    let (p, branch) = resolve_params(&cmd.params)?;
    let report = stability_verdict(&p, branch).map_err(normalization_failure)?;
    write_json(&cmd.out, &report)?;
    eprintln!(
        "verdict {:?}, discriminant {:.6e}",
        report.verdict, report.discriminant
    );
    Ok(())
}

#[derive(Serialize)]
struct SeriesCheckOut {
    params: SystemParams,
    equilibrium: EquilibriumPoint,
    audit: SeriesAudit,
}

fn cmd_series_check(cmd: &SeriesCheckCmd) -> Result<(), Failure> {
    require_format(cmd.format, Format::Json)?;
    let (p, branch) = resolve_params(&cmd.params)?;
    let eq = tripoint::equilibria::refined_triangular_point(&p, branch)
        .map_err(equilibria_failure)?;
    let audit = audit_series(&p, &eq, cmd.tol, AUDIT_ABS_TOL)
        .map_err(|e| fail(EXIT_INVALID, e.to_string()))?;
    eprintln!(
        "{} of {} rows flagged, worst relative gap {:.3e}",
        audit.n_mismatches,
        audit.entries.len(),
        audit.max_rel_diff
    );
    write_json(
        &cmd.out,
        &SeriesCheckOut {
            params: p,
            equilibrium: eq,
            audit,
        },
    )
}

fn cmd_stability_map(cmd: &MapCmd) -> Result<(), Failure> {
    require_format(cmd.format, Format::Csv)?;
    let cfg = load_config(&cmd.params.config)?;
    let branch = resolve_branch(&cmd.params, &cfg)?;
    if cmd.params.cd.or(cfg.cd).is_some() {
        return Err(fail(
            EXIT_INVALID,
            "grid sweeps fix the drag parameter directly; use --w1",
        ));
    }
    let swept = |name: AxisName| cmd.grid.iter().any(|a| a.name == name);
    let mu = match cmd.params.mu.or(cfg.mu) {
        Some(v) => v,
        None if swept(AxisName::Mu) => 0.1,
        None => {
            return Err(fail(
                EXIT_INVALID,
                "mass ratio required: pass --mu or sweep a mu axis",
            ))
        }
    };
    let spec = GridSpec {
        mu,
        q1: cmd.params.q1.or(cfg.q1).unwrap_or(1.0),
        a2: cmd.params.a2.or(cfg.a2).unwrap_or(0.0),
        w1: cmd.params.w1.or(cfg.w1).unwrap_or(0.0),
        axes: cmd.grid.clone(),
    };
    let result = match cmd.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| fail(EXIT_INVALID, format!("thread pool: {e}")))?
            .install(|| run_sweep(&spec, branch)),
        None => run_sweep(&spec, branch),
    }
    .map_err(sweep_failure)?;
    let mut sink = open_sink(&cmd.out)?;
    result.write_csv(&mut sink)?;
    sink.flush()?;
    let errors = result.rows.iter().filter(|r| r.error.is_some()).count();
    eprintln!("{} rows, {} errored", result.rows.len(), errors);
    Ok(())
}

fn cmd_critical_mass(cmd: &CriticalCmd) -> Result<(), Failure> {
    require_format(cmd.format, Format::Json)?;
    let cfg = load_config(&cmd.params.config)?;
    let branch = resolve_branch(&cmd.params, &cfg)?;
    if cmd.params.mu.or(cfg.mu).is_some() {
        eprintln!("note: the bracket sets the mass range; --mu is ignored");
    }
    if cmd.params.cd.or(cfg.cd).is_some() {
        return Err(fail(
            EXIT_INVALID,
            "the bisection fixes the drag parameter directly; use --w1",
        ));
    }
    let q1 = cmd.params.q1.or(cfg.q1).unwrap_or(1.0);
    let a2 = cmd.params.a2.or(cfg.a2).unwrap_or(0.0);
    let w1 = cmd.params.w1.or(cfg.w1).unwrap_or(0.0);
    let (lo, hi) = cmd.bracket;
    let result = critical_mass(q1, a2, w1, branch, lo, hi).map_err(sweep_failure)?;
    write_json(&cmd.out, &result)?;
    eprintln!(
        "boundary at mu = {:.12e} after {} bisections",
        result.mu_c, result.iterations
    );
    Ok(())
}

fn cmd_integrate(cmd: &IntegrateCmd) -> Result<(), Failure> {
    require_format(cmd.format, Format::Csv)?;
    let (p, branch) = resolve_params(&cmd.params)?;
    let eq = tripoint::equilibria::refined_triangular_point(&p, branch)
        .map_err(equilibria_failure)?;
    let mut s = eq.state();
    if let Some(v) = cmd.x0 {
        s.x = v;
    }
    if let Some(v) = cmd.y0 {
        s.y = v;
    }
    if let Some(v) = cmd.vx0 {
        s.vx = v;
    }
    if let Some(v) = cmd.vy0 {
        s.vy = v;
    }
    s.x += cmd.dx;
    s.y += cmd.dy;
    let write_csv = |traj: &integrator::Trajectory| -> Result<(), Failure> {
        let mut sink = open_sink(&cmd.out)?;
        integrator::write_trajectory_csv(traj, &mut sink)?;
        sink.flush()?;
        Ok(())
    };
    match integrator::integrate(&p, &s, cmd.t_end, cmd.tol, cmd.tol) {
        Ok(traj) => {
            write_csv(&traj)?;
            eprintln!(
                "{} samples, {} steps, {} rejected",
                traj.states.len(),
                traj.n_steps,
                traj.n_rejected
            );
            Ok(())
        }
        Err(IntegrateError::CloseApproach { t, r1, r2, partial }) => {
            write_csv(&partial)?;
            Err(fail(
                EXIT_CLOSE_APPROACH,
                format!("close approach at t = {t:.6e} (r1 = {r1:.3e}, r2 = {r2:.3e}); partial trajectory written"),
            ))
        }
        Err(IntegrateError::StepUnderflow { t, partial }) => {
            write_csv(&partial)?;
            Err(fail(
                EXIT_NO_CONVERGENCE,
                format!("step size underflow at t = {t:.6e}; partial trajectory written"),
            ))
        }
        Err(e @ IntegrateError::InvalidTolerance { .. }) => {
            Err(fail(EXIT_INVALID, e.to_string()))
        }
        Err(IntegrateError::Dynamics(e)) => Err(fail(EXIT_INVALID, e.to_string())),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.cmd {
        Cmd::Equilibria(c) => cmd_equilibria(c),
        Cmd::Spectrum(c) => cmd_spectrum(c),
        Cmd::SeriesCheck(c) => cmd_series_check(c),
        Cmd::StabilityMap(c) => cmd_stability_map(c),
        Cmd::CriticalMass(c) => cmd_critical_mass(c),
        Cmd::Integrate(c) => cmd_integrate(c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, msg }) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
