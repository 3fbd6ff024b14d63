//! `threshold-lab` subcommands.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 undecided
//! classification, 4 verify-suite failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::discrete::{FieldPair, Model};
use crate::elliptic::{
    shooting_oracle, solve_monotone, solve_seeded, Equilibrium, MonotoneOptions, NewtonOptions, ShootingOptions,
    STEADY_TOL,
};
use crate::parabolic::{evolve, Outcome};
use crate::problem::{BoundarySpec, ForcingSpec, Geometry};

use super::config::{Format, GeometryKind, RunConfig};
use super::format::{self, Check, ExperimentResult, Provenance, RunRecord, Snapshot};
use super::{
    lambda_star_experiment, robin_experiment, threshold_experiment, verify_suite, ClassifiedRun, LabError,
    ThresholdOptions, ThresholdReport, VerifyOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "threshold-lab", version, about = "Equilibria, decay and blow-up experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute an equilibrium (the minimal solution when λ > 0).
    Steady(Shared),
    /// Evolve from α·(U,V), or from zero when no α is given.
    Evolve(Shared),
    /// Classify α·(U,V) runs and bisect for the threshold.
    Threshold(Shared),
    /// Bracket the extremal forcing scale for f = g = 1.
    LambdaStar(Shared),
    /// Threshold runs against a Robin equilibrium.
    Robin(Shared),
    /// Run the property checks over a resolution ladder.
    Verify(VerifyArgs),
}

/// Flags shared by every subcommand; each also accepts `key = value` in
/// the file given by `--config`, with flags taking precedence.
#[derive(Args, Debug, Default)]
struct Shared {
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    /// radial | rect
    #[arg(long)]
    geometry: Option<String>,
    #[arg(long)]
    resolution: Option<String>,
    /// dirichlet | robin:<beta>
    #[arg(long)]
    bc: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// One value, or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<String>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    dt0: Option<String>,
    #[arg(long)]
    tmax: Option<String>,
    /// Target α-bracket width; 0 disables bisection.
    #[arg(long)]
    width: Option<String>,
    /// Initial λ bracket `lo,hi`.
    #[arg(long)]
    bracket: Option<String>,
    #[arg(long = "rel-tol")]
    rel_tol: Option<String>,
    /// Comma-separated resolutions.
    #[arg(long)]
    ladder: Option<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    shared: Shared,
    /// Perturb the operator so that the duality check must fail.
    #[arg(long)]
    negative_control: bool,
}

impl Shared {
    fn resolve(&self) -> Result<RunConfig, LabError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        let flags = [
            ("p", &self.p),
            ("q", &self.q),
            ("dim", &self.dim),
            ("geometry", &self.geometry),
            ("resolution", &self.resolution),
            ("bc", &self.bc),
            ("lambda", &self.lambda),
            ("alpha", &self.alpha),
            ("out", &self.out),
            ("format", &self.format),
            ("seed", &self.seed),
            ("dt0", &self.dt0),
            ("tmax", &self.tmax),
            ("width", &self.width),
            ("bracket", &self.bracket),
            ("rel-tol", &self.rel_tol),
            ("ladder", &self.ladder),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut impl Write, stderr: &mut impl Write) -> Result<i32, LabError> {
    match cmd {
        Command::Steady(s) => steady(&s.resolve()?, stdout, stderr),
        Command::Evolve(s) => evolve_cmd(&s.resolve()?, stdout, stderr),
        Command::Threshold(s) => threshold(&s.resolve()?, stdout, stderr),
        Command::LambdaStar(s) => lambda_star_cmd(&s.resolve()?, stdout, stderr),
        Command::Robin(s) => robin(&s.resolve()?, stdout, stderr),
        Command::Verify(v) => verify(&v.shared.resolve()?, v.negative_control, stdout),
    }
}

fn provenance(cfg: &RunConfig, command: &str) -> Provenance {
    let config = cfg.canonical_text();
    let digest = Sha256::digest(config.as_bytes());
    Provenance {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        spec_digest: digest.iter().map(|b| format!("{b:02x}")).collect(),
        config,
        resolution: cfg.resolution,
        dt0: cfg.dt0,
        seed: cfg.seed,
    }
}

fn model(cfg: &RunConfig, stderr: &mut impl Write) -> Result<Model, LabError> {
    let (m, report) = Model::with_report(cfg.problem_spec()?, cfg.resolution)?;
    for w in &report.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    Ok(m)
}

fn out_dir(cfg: &RunConfig) -> Result<Option<&Path>, LabError> {
    match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Ok(Some(dir.as_path()))
        }
        None => Ok(None),
    }
}

fn write_file(dir: Option<&Path>, name: &str, bytes: &[u8]) -> Result<(), LabError> {
    if let Some(dir) = dir {
        fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

fn homogeneous_equilibrium(m: &Model) -> Result<Equilibrium, LabError> {
    Ok(solve_seeded(&m.with_lambda(0.0), &[], &NewtonOptions::default())?)
}

fn residual_check(eq: &Equilibrium) -> Check {
    Check {
        name: "equilibrium_residual".into(),
        resolution: None,
        value: eq.residual_norm,
        tol: STEADY_TOL,
        pass: eq.residual_norm <= STEADY_TOL,
    }
}

fn emit(
    cfg: &RunConfig,
    result: &ExperimentResult,
    csv: Vec<u8>,
    csv_name: &str,
    stdout: &mut impl Write,
) -> Result<(), LabError> {
    let json = result.to_json();
    let dir = out_dir(cfg)?;
    write_file(dir, "result.json", json.as_bytes())?;
    write_file(dir, csv_name, &csv)?;
    match cfg.format {
        Format::Json => stdout.write_all(json.as_bytes())?,
        Format::Csv => stdout.write_all(&csv)?,
    }
    Ok(())
}

fn steady(cfg: &RunConfig, stdout: &mut impl Write, stderr: &mut impl Write) -> Result<i32, LabError> {
    let m = model(cfg, stderr)?;
    let eq = if m.lambda() == 0.0 {
        solve_seeded(&m, &[], &NewtonOptions::default())?
    } else {
        solve_monotone(&m, &FieldPair::zeros(m.len()), &MonotoneOptions::default())?.0
    };
    let mut result = ExperimentResult::new("steady", "equilibrium", provenance(cfg, "steady"));
    result.lambda = (m.lambda() != 0.0).then_some(m.lambda());
    result.checks.push(residual_check(&eq));
    result.values.insert("sup_u".into(), eq.pair.sup_u());
    result.values.insert("sup_v".into(), eq.pair.sup_v());
    result.values.insert("iterations".into(), eq.iterations as f64);
    if let (Geometry::RadialBall { dimension, radius }, 0.0) = (m.spec().domain.geometry, m.lambda()) {
        let sol = shooting_oracle(m.spec().exponents, dimension, radius, m.spec().boundary, &ShootingOptions::default())?;
        let err = (eq.sup_norm() - sol.sup_norm()).abs() / sol.sup_norm();
        result.values.insert("oracle_sup".into(), sol.sup_norm());
        result.checks.push(Check {
            name: "oracle_relative_error".into(),
            resolution: Some(cfg.resolution),
            value: err,
            tol: 1e-3,
            pass: err <= 1e-3,
        });
    }
    let mut snap = Vec::new();
    Snapshot::of(&m, &eq.pair).write(&mut snap)?;
    write_file(out_dir(cfg)?, "equilibrium.snap", &snap)?;
    let mut csv = Vec::new();
    writeln!(csv, "node,distance,u,v")?;
    for i in 0..m.len() {
        writeln!(
            csv,
            "{i},{:.16e},{:.16e},{:.16e}",
            m.grid().distance_from_center(i),
            eq.pair.u[i],
            eq.pair.v[i]
        )?;
    }
    emit(cfg, &result, csv, "equilibrium.csv", stdout)?;
    Ok(if result.passed() { EXIT_OK } else { EXIT_NUMERICAL })
}

fn run_record(run: &ClassifiedRun, alpha: bool) -> RunRecord {
    let mut r = RunRecord::new(&run.outcome, run.steps);
    if alpha {
        r.alpha = Some(run.parameter);
    } else {
        r.lambda = Some(run.parameter);
    }
    r
}

fn evolve_cmd(cfg: &RunConfig, stdout: &mut impl Write, stderr: &mut impl Write) -> Result<i32, LabError> {
    let m = model(cfg, stderr)?;
    let initial = match cfg.alpha[..] {
        [] => FieldPair::zeros(m.len()),
        [a] => homogeneous_equilibrium(&m)?.pair.scaled(a),
        _ => return Err(LabError::Config("evolve takes a single --alpha".into())),
    };
    let run = evolve(&m, &initial, &cfg.integrator()?)?;
    let rec = RunRecord::new(&run.outcome, run.steps);
    let mut result = ExperimentResult::new("evolve", &rec.outcome, provenance(cfg, "evolve"));
    result.t_end = Some(rec.t_end);
    result.t_blowup_est = rec.t_blowup_est;
    result.alpha = cfg.alpha.first().copied();
    result.lambda = (m.lambda() != 0.0).then_some(m.lambda());
    result.values.insert("steps".into(), run.steps as f64);
    result.values.insert("final_sup".into(), run.final_state.sup_norm());
    if let Outcome::BlowUp { sup_at_stop, .. } = run.outcome {
        result.values.insert("sup_at_stop".into(), sup_at_stop);
    }
    let mut csv = Vec::new();
    format::write_trajectory_csv(&mut csv, &run.record)?;
    let mut snap = Vec::new();
    Snapshot::of(&m, &run.final_state).write(&mut snap)?;
    write_file(out_dir(cfg)?, "final.snap", &snap)?;
    emit(cfg, &result, csv, "trajectory.csv", stdout)?;
    Ok(if run.outcome.is_undecided() { EXIT_UNDECIDED } else { EXIT_OK })
}

fn threshold_options(cfg: &RunConfig) -> Result<ThresholdOptions, LabError> {
    Ok(ThresholdOptions {
        alphas: if cfg.alpha.is_empty() { vec![0.5, 1.5] } else { cfg.alpha.clone() },
        width: (cfg.width > 0.0).then_some(cfg.width),
        config: cfg.integrator()?,
        ..ThresholdOptions::default()
    })
}

fn fill_threshold(result: &mut ExperimentResult, rep: &ThresholdReport) -> Result<Vec<u8>, LabError> {
    result.runs = rep.runs.iter().map(|r| run_record(r, true)).collect();
    if let Some((lo, hi)) = rep.bracket {
        result.brackets = Some(BTreeMap::from([("alpha".to_string(), [lo, hi])]));
        result.values.insert("alpha_width".into(), hi - lo);
    }
    result.values.insert("undecided_inside".into(), if rep.undecided_inside { 1.0 } else { 0.0 });
    let mut csv = Vec::new();
    format::write_runs_csv(&mut csv, &result.runs)?;
    Ok(csv)
}

fn threshold(cfg: &RunConfig, stdout: &mut impl Write, stderr: &mut impl Write) -> Result<i32, LabError> {
    let m = model(cfg, stderr)?;
    let eq = solve_seeded(&m, &[], &NewtonOptions::default())?;
    let rep = threshold_experiment(&m, &eq, &threshold_options(cfg)?)?;
    let outcome = if rep.bracket.is_some() { "bracketed" } else { "unbracketed" };
    let mut result = ExperimentResult::new("threshold", outcome, provenance(cfg, "threshold"));
    result.checks.push(residual_check(&eq));
    let csv = fill_threshold(&mut result, &rep)?;
    emit(cfg, &result, csv, "runs.csv", stdout)?;
    Ok(if rep.bracket.is_some() { EXIT_OK } else { EXIT_UNDECIDED })
}

fn lambda_star_cmd(cfg: &RunConfig, stdout: &mut impl Write, stderr: &mut impl Write) -> Result<i32, LabError> {
    let mut c = cfg.clone();
    // The family is f = g = 1 scaled by λ; the scale itself is searched.
    c.lambda = 1.0;
    let m = model(&c, stderr)?;
    debug_assert_eq!(m.spec().forcing, ForcingSpec::uniform(1.0));
    let rep = lambda_star_experiment(&m, cfg.bracket, cfg.rel_tol, &cfg.integrator()?)?;
    let mut result = ExperimentResult::new("lambda-star", "bracketed", provenance(cfg, "lambda-star"));
    let (lo, hi) = rep.search.bracket;
    result.brackets = Some(BTreeMap::from([("lambda".to_string(), [lo, hi])]));
    result.lambda = Some(rep.search.estimate);
    result.values.insert("relative_width".into(), rep.search.relative_width());
    result.values.insert("evaluations".into(), rep.search.evaluations.len() as f64);
    result.runs = vec![run_record(&rep.below, false), run_record(&rep.above, false)];
    let below_ok = matches!(rep.below.outcome, Outcome::SteadyConvergence { .. });
    let above_ok = rep.above.outcome.is_blow_up();
    let dist = rep.distance_to_minimal.unwrap_or(f64::INFINITY);
    result.checks = vec![
        Check {
            name: "spot_checks_consistent".into(),
            resolution: None,
            value: if rep.search.spot_checks_consistent() { 0.0 } else { 1.0 },
            tol: 0.0,
            pass: rep.search.spot_checks_consistent(),
        },
        Check {
            name: "below_distance_to_minimal".into(),
            resolution: None,
            value: dist,
            tol: 1e-4,
            pass: below_ok && dist <= 1e-4,
        },
        Check {
            name: "above_blowup".into(),
            resolution: None,
            value: if above_ok { 0.0 } else { 1.0 },
            tol: 0.0,
            pass: above_ok,
        },
    ];
    let mut csv = Vec::new();
    format::write_runs_csv(&mut csv, &result.runs)?;
    emit(cfg, &result, csv, "runs.csv", stdout)?;
    Ok(if below_ok && above_ok { EXIT_OK } else { EXIT_UNDECIDED })
}

fn robin(cfg: &RunConfig, stdout: &mut impl Write, stderr: &mut impl Write) -> Result<i32, LabError> {
    if !matches!(cfg.bc, BoundarySpec::Robin { .. }) {
        return Err(LabError::Config("robin needs --bc robin:<beta>".into()));
    }
    let m = model(cfg, stderr)?;
    let rep = robin_experiment(&m, &threshold_options(cfg)?)?;
    let prov = provenance(cfg, "robin");
    let (Some(eq), Some(th)) = (&rep.equilibrium, &rep.threshold) else {
        let mut result = ExperimentResult::new("robin", "skipped", prov);
        let reason = rep.skipped.clone().unwrap_or_default();
        let _ = writeln!(stderr, "equilibrium not found: {reason}");
        result.checks.push(Check {
            name: format!("equilibrium: {reason}"),
            resolution: None,
            value: f64::NAN,
            tol: 0.0,
            pass: false,
        });
        emit(cfg, &result, Vec::new(), "runs.csv", stdout)?;
        return Ok(EXIT_NUMERICAL);
    };
    let outcome = if th.bracket.is_some() { "bracketed" } else { "unbracketed" };
    let mut result = ExperimentResult::new("robin", outcome, prov);
    result.checks.push(residual_check(eq));
    let mut push = |name: &str, v: Option<f64>, tol: f64| {
        if let Some(value) = v {
            result.checks.push(Check {
                name: name.into(),
                resolution: None,
                value,
                tol,
                pass: value <= tol,
            });
        }
    };
    push("oracle_boundary_residual", rep.oracle_boundary_residual, 1e-8);
    push("boundary_row_residual", rep.boundary_row_residual, 1e-8);
    push("oracle_relative_error", rep.oracle_sup_error, 1e-3);
    result.values.insert("beta".into(), rep.beta);
    result.values.insert("sup".into(), eq.sup_norm());
    let csv = fill_threshold(&mut result, th)?;
    emit(cfg, &result, csv, "runs.csv", stdout)?;
    Ok(if th.bracket.is_some() { EXIT_OK } else { EXIT_UNDECIDED })
}

fn verify(cfg: &RunConfig, negative_control: bool, stdout: &mut impl Write) -> Result<i32, LabError> {
    if cfg.geometry != GeometryKind::Radial {
        return Err(LabError::Config("verify runs on radial grids".into()));
    }
    let opts = VerifyOptions {
        exponents: cfg.exponents()?,
        dimension: cfg.dim,
        boundary: cfg.bc,
        ladder: cfg.ladder.clone(),
        seed: cfg.seed,
        integrator: cfg.integrator()?,
        broken_operator: negative_control,
        ..VerifyOptions::default()
    };
    let rep = verify_suite(&opts);
    let outcome = if rep.passed() { "pass" } else { "fail" };
    let command = if negative_control { "verify --negative-control" } else { "verify" };
    let mut result = ExperimentResult::new("verify", outcome, provenance(cfg, command));
    result.checks = rep.checks.clone();
    let mut csv = Vec::new();
    format::write_checks_csv(&mut csv, &rep.checks)?;
    emit(cfg, &result, csv, "checks.csv", stdout)?;
    Ok(if rep.passed() { EXIT_OK } else { EXIT_VERIFY })
}
