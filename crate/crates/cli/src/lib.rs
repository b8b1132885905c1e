//! Command-line front end: `simulate`, `observability`, `ambiguity`,
//! `estimate` and `selftest`.
//!
//! Exit codes: 0 on success, 1 for unreadable or invalid input, 2 when an
//! analysis fails on valid input.

mod selftest;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use obskit_core::ambiguity::AmbiguityCertificate;
use obskit_core::{
    check_combined_condition, check_observable, cross_validate, estimate_initial_state,
    generate_bearing_ambiguous, generate_doppler_ambiguous, load_scenario, measure_scenario,
    verify_ambiguity, DopplerAmbiguitySpec, EigenReport, Error, Profile, Regime, Result, Scenario,
    Track, TransformModel,
};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "obskit", version, about = "Observability and ambiguity analysis for passive multi-target tracking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the noise-free bearing/Doppler history as CSV.
    Simulate(ScenarioArgs),
    /// Gramian rank test, collinearity diagnostics and null-space witness.
    Observability(AnalysisArgs),
    /// Generate or verify ambiguous trajectory pairs.
    #[command(subcommand)]
    Ambiguity(AmbiguityCommand),
    /// Least-squares recovery of every target's initial state.
    Estimate(AnalysisArgs),
    /// Randomized agreement check between the Gramian and the estimator.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Override the number of grid points.
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Args)]
struct AnalysisArgs {
    #[command(flatten)]
    io: ScenarioArgs,
    /// Override the scenario's rank tolerance.
    #[arg(long)]
    rank_tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenerateRegime {
    Doppler,
    Bearing,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyRegime {
    Doppler,
    Bearing,
    Combined,
}

impl From<VerifyRegime> for Regime {
    fn from(r: VerifyRegime) -> Self {
        match r {
            VerifyRegime::Doppler => Regime::Doppler,
            VerifyRegime::Bearing => Regime::Bearing,
            VerifyRegime::Combined => Regime::Combined,
        }
    }
}

#[derive(Subcommand)]
enum AmbiguityCommand {
    /// Build a counterpart of one scenario target; writes `t,x,y` CSV.
    Generate {
        #[command(flatten)]
        io: ScenarioArgs,
        #[arg(long, value_enum)]
        regime: GenerateRegime,
        /// Generation parameters (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Also write the ambiguity certificate here.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Compare the measurement histories of a pair of trajectories.
    Verify {
        #[command(flatten)]
        io: ScenarioArgs,
        #[arg(long, value_enum, default_value = "combined")]
        regime: VerifyRegime,
        /// Re-check the pair stored in a certificate.
        #[arg(long, conflicts_with = "pair")]
        certificate: Option<PathBuf>,
        /// Two scenario target indices, e.g. `0,1`.
        #[arg(long, value_delimiter = ',')]
        pair: Option<Vec<usize>>,
    },
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of random scenarios.
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 1e-8)]
    rank_tol: f64,
}

/// Parameters of `ambiguity generate --spec`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateRequest {
    base_target: usize,
    /// Tonal of the base target; defaults to the scenario's.
    #[serde(default)]
    tonal_hz: Option<f64>,
    #[serde(default)]
    l_prime: Option<f64>,
    #[serde(default)]
    b_prime: Option<f64>,
    #[serde(default)]
    rotation: Option<Profile>,
    #[serde(default)]
    alpha: Option<Profile>,
}

#[derive(Serialize)]
struct VerifyReport {
    certificate: AmbiguityCertificate,
    eigen: EigenReport,
}

/// Runs the CLI with process stdout/stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_input_error() {
                1
            } else {
                2
            }
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Simulate(args) => {
            let s = scenario(&args)?;
            let history = measure_scenario(&s)?;
            emit(&args.output, out, history.to_csv_string())?;
        }
        Command::Observability(args) => {
            let s = scenario(&args.io)?;
            let rank_tol = args.rank_tol.unwrap_or(s.tolerances.rank_tol);
            let report = check_observable(&s, rank_tol)?;
            emit(&args.io.output, out, report.to_json() + "\n")?;
            write!(err, "{}", report.summary())?;
        }
        Command::Estimate(args) => {
            let s = scenario(&args.io)?;
            let rank_tol = args.rank_tol.unwrap_or(s.tolerances.rank_tol);
            let history = measure_scenario(&s)?;
            let result = estimate_initial_state(&s.observer, &history, &s.model_orders(), rank_tol)?;
            emit(&args.io.output, out, result.to_json() + "\n")?;
            writeln!(
                err,
                "uniqueness: {}, residual {:e}, replay error {:e} rad",
                format!("{:?}", result.uniqueness).to_lowercase(),
                result.residual_norm,
                cross_validate(&s, &result)
            )?;
        }
        Command::Ambiguity(AmbiguityCommand::Generate { io, regime, spec, certificate }) => {
            let s = scenario(&io)?;
            let request: GenerateRequest = read_json(&spec)?;
            let (csv, cert) = generate(&s, regime, &request)?;
            emit(&io.output, out, csv)?;
            if let Some(path) = certificate {
                std::fs::write(path, cert.to_json() + "\n")?;
            }
            writeln!(
                err,
                "verdict: {}, doppler residual {:e} Hz, bearing residual {:e} rad",
                format!("{:?}", cert.verdict).to_lowercase(),
                cert.residual_doppler,
                cert.residual_bearing
            )?;
        }
        Command::Ambiguity(AmbiguityCommand::Verify { io, regime, certificate, pair }) => {
            let s = scenario(&io)?;
            let report = verify(&s, regime.into(), certificate.as_deref(), pair.as_deref())?;
            let json = serde_json::to_string_pretty(&report).expect("report serialization is infallible");
            emit(&io.output, out, json + "\n")?;
            writeln!(err, "verdict: {}", format!("{:?}", report.certificate.verdict).to_lowercase())?;
        }
        Command::Selftest(args) => {
            let summary = selftest::run(args.seed, args.count, args.rank_tol);
            write!(out, "{summary}")?;
            return Ok(if summary.passed() { 0 } else { 2 });
        }
    }
    Ok(0)
}

fn scenario(args: &ScenarioArgs) -> Result<Scenario> {
    let mut s = load_scenario(&args.scenario)?;
    if let Some(points) = args.grid_points {
        s.time.points = points;
        s.validate()?;
    }
    Ok(s)
}

fn emit(path: &Option<PathBuf>, out: &mut dyn Write, text: String) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Validation {
        field: "path".into(),
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn missing(field: &str) -> Error {
    Error::Validation {
        field: format!("spec.{field}"),
        message: "required for this regime".into(),
    }
}

fn target_tonal(s: &Scenario, i: usize) -> Result<f64> {
    s.targets[i].tonal.map(|t| t.f0()).ok_or_else(|| Error::Validation {
        field: format!("targets[{i}].tonal_hz"),
        message: "a tonal is needed to compare Doppler histories".into(),
    })
}

fn check_index(s: &Scenario, field: &str, i: usize) -> Result<()> {
    if i >= s.targets.len() {
        return Err(Error::Validation {
            field: field.into(),
            message: format!("target {i} does not exist ({} targets)", s.targets.len()),
        });
    }
    Ok(())
}

fn generate(s: &Scenario, regime: GenerateRegime, req: &GenerateRequest) -> Result<(String, AmbiguityCertificate)> {
    check_index(s, "spec.base_target", req.base_target)?;
    let base = &s.targets[req.base_target].trajectory;
    let f_j = match req.tonal_hz {
        Some(f) if f > 0.0 && f.is_finite() => f,
        Some(_) => {
            return Err(Error::Validation {
                field: "spec.tonal_hz".into(),
                message: "tonal must be positive".into(),
            })
        }
        None => target_tonal(s, req.base_target)?,
    };
    let grid = s.time;
    let tol = &s.tolerances;
    let (generated, tonals, kind) = match regime {
        GenerateRegime::Doppler => {
            let rotation = req.rotation.as_ref().ok_or_else(|| missing("rotation"))?.sample(&grid)?;
            let spec = DopplerAmbiguitySpec::new(
                req.l_prime.ok_or_else(|| missing("l_prime"))?,
                req.b_prime.ok_or_else(|| missing("b_prime"))?,
                rotation,
                s.c,
            )
            .map_err(|e| Error::Validation { field: "spec".into(), message: e.to_string() })?;
            let g = generate_doppler_ambiguous(base, &s.observer, &spec, &grid, tol.eps_range)?;
            (g, [spec.counterpart_tonal(f_j), f_j], Regime::Doppler)
        }
        GenerateRegime::Bearing => {
            let alpha = req.alpha.as_ref().ok_or_else(|| missing("alpha"))?.sample(&grid)?;
            let g = generate_bearing_ambiguous(base, &s.observer, &alpha, &grid, tol.eps_range)?;
            (g, [f_j, f_j], Regime::Bearing)
        }
    };
    let csv = generated.to_csv_string();
    let cert = verify_ambiguity(
        &Track::Sampled(generated),
        &Track::Polynomial(base.clone()),
        &s.observer,
        tonals,
        s.c,
        &grid,
        tol,
        kind,
    )?;
    Ok((csv, cert))
}

fn verify(s: &Scenario, regime: Regime, certificate: Option<&Path>, pair: Option<&[usize]>) -> Result<VerifyReport> {
    let tol = &s.tolerances;
    let (ti, tj, tonals, c, grid) = match (certificate, pair) {
        (Some(path), _) => {
            let cert: AmbiguityCertificate = read_json(path)?;
            (cert.pair.trajectory_i, cert.pair.trajectory_j, cert.tonals, cert.c, cert.grid)
        }
        (None, Some(&[i, j])) => {
            check_index(s, "pair", i)?;
            check_index(s, "pair", j)?;
            (
                Track::Polynomial(s.targets[i].trajectory.clone()),
                Track::Polynomial(s.targets[j].trajectory.clone()),
                [target_tonal(s, i)?, target_tonal(s, j)?],
                s.c,
                s.time,
            )
        }
        _ => {
            return Err(Error::Validation {
                field: "pair".into(),
                message: "give either --certificate or --pair I,J".into(),
            })
        }
    };
    let certificate = verify_ambiguity(&ti, &tj, &s.observer, tonals, c, &grid, tol, regime)?;
    let eigen = check_combined_condition(&ti, &tj, &s.observer, TransformModel::Geometry, &grid, tol)?;
    Ok(VerifyReport { certificate, eigen })
}
