//! Command-line front end for `pulsewell`.
//!
//! Exit codes: 0 success, 1 argument or precondition error, 2 a result is
//! unconverged or precision-exhausted (the record is still printed), 3 a
//! validation check failed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;
mod sweep;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use pulsewell::omega0::{asymptotic_r, evaluate_omega0};
use pulsewell::pde::{box_probability, evolve, GridSpec};
use pulsewell::resolvent::{evaluate_survival, lambda0_min_singular, short_pulse_params};
use pulsewell::spectral::ModeIndex;
use pulsewell::validate::{run_validation, Level, Tamper};
use pulsewell::{PrecisionPolicy, PulseParams, SourceSpec, TruncationSpec};
use serde::Serialize;

use output::{write_rows, Format, Record};
use sweep::{abscissae, Mode, Parameter, Scale, SweepSetup};

#[derive(Debug, Parser)]
#[command(name = "pulsewell", version, about = "Survival probability of a delta-well atom under a damped oscillating pulse")]
struct Cli {
    /// Working digits of the first attempt (15 means doubles).
    #[arg(long, global = true, env = "PULSEWELL_DIGITS", default_value_t = 15)]
    digits: u32,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Survival amplitude at one parameter point.
    Survival(SurvivalArgs),
    /// Survival amplitude over a range of one parameter.
    Sweep(SweepArgs),
    /// The omega = 0 series, with the small-lambda asymptote.
    Omega0(Omega0Args),
    /// Pulse with amplitude equal to its decay rate.
    Shortpulse(ShortpulseArgs),
    /// Smallest singular value of the truncated undamped operator.
    Lambda0(Lambda0Args),
    /// Crank-Nicolson solution of the time-dependent problem.
    Oracle(OracleArgs),
    /// Cross-checks between independent routes.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Psi0 {
    /// `exp(-|x|)`.
    Bound,
    /// Smooth bump of unit L2 norm, radius set by `--radius`.
    Bump,
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// Initial condition.
    #[arg(long, value_enum, default_value_t = Psi0::Bound)]
    psi0: Psi0,
    /// Support radius of the bump initial condition.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
}

impl SourceArgs {
    fn source(&self) -> pulsewell::Result<SourceSpec> {
        Ok(match self.psi0 {
            Psi0::Bound => SourceSpec::BoundState,
            Psi0::Bump => SourceSpec::bump(self.radius)?,
        })
    }
}

#[derive(Debug, Args)]
struct TruncArgs {
    /// Target absolute error.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Minimum path-sum depth.
    #[arg(long, default_value_t = 8)]
    depth: usize,
    /// Largest path-sum depth.
    #[arg(long, default_value_t = 1000)]
    max_depth: usize,
}

impl TruncArgs {
    fn spec(&self) -> TruncationSpec {
        TruncationSpec {
            depth: self.depth,
            tol: self.tol,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Debug, Args)]
struct SurvivalArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    omega: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    trunc: TruncArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Swept parameter.
    #[arg(long, value_enum)]
    param: Parameter,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long)]
    points: usize,
    #[arg(long, value_enum, default_value_t = Scale::Linear)]
    scale: Scale,
    #[arg(long, value_enum, default_value_t = Mode::General)]
    mode: Mode,
    /// omega / lambda in shortpulse mode.
    #[arg(long, default_value_t = 20.0)]
    ratio: f64,
    /// Fixed lambda when sweeping omega.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Fixed omega when sweeping lambda.
    #[arg(long, default_value_t = 3.0)]
    omega: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Truncation size in lambda0 mode.
    #[arg(long, default_value_t = 200)]
    truncation: usize,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    trunc: TruncArgs,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct Omega0Args {
    #[arg(long)]
    lambda: f64,
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct ShortpulseArgs {
    #[arg(long)]
    lambda: f64,
    /// omega / lambda.
    #[arg(long)]
    ratio: f64,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    trunc: TruncArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct Lambda0Args {
    #[arg(long)]
    omega: f64,
    /// Modes kept on each side of m = 0.
    #[arg(long, default_value_t = 200)]
    truncation: usize,
    /// Number of sigma values inside (0, omega).
    #[arg(long, default_value_t = 4)]
    sigma_points: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    omega: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[command(flatten)]
    source: SourceArgs,
    /// Half-width of the box.
    #[arg(long = "grid-L", default_value_t = 600.0)]
    grid_l: f64,
    #[arg(long = "grid-h", default_value_t = 0.05)]
    grid_h: f64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, default_value_t = 30.0)]
    tmax: f64,
    #[arg(long, default_value_t = 0.5)]
    sample_every: f64,
    /// Half-width of the region for the box probability.
    #[arg(long = "box", default_value_t = 1.0)]
    box_half: f64,
    /// Write the final snapshot as CSV (t, x, re, im, abs2).
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
    level: LevelArg,
    /// Perturb one B coefficient on the path-sum route.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

/// Failure that maps to exit code 1.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn emit<R: Serialize>(rows: &[R], format: Format, output: Option<&PathBuf>) -> Result<()> {
    match output {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_rows(rows, format, &mut w)?;
            w.flush()?;
        }
        None => write_rows(rows, format, io::stdout().lock())?,
    }
    Ok(())
}

fn status_code(rows: &[Record]) -> u8 {
    if rows.iter().all(Record::is_ok) {
        0
    } else {
        2
    }
}

fn policy(digits: u32) -> Result<PrecisionPolicy> {
    let p = PrecisionPolicy::default().with_base_digits(digits);
    p.validate().map_err(|e| Usage(e.to_string()))?;
    Ok(p)
}

/// Library errors raised before any evaluation are input errors.
fn input<T>(r: pulsewell::Result<T>) -> Result<T> {
    r.map_err(|e| anyhow!(Usage(e.to_string())))
}

fn cmd_survival(a: &SurvivalArgs, policy: &PrecisionPolicy) -> Result<u8> {
    if a.lambda == 0.0 {
        bail!(Usage(
            "lambda = 0 is the undamped case, which has no survival amplitude here; use the `lambda0` command".into()
        ));
    }
    let params = input(PulseParams::new(a.lambda, a.omega, a.alpha))?;
    let source = input(a.source.source())?;
    let trunc = a.trunc.spec();
    input(trunc.validate())?;
    let result = if a.omega == 0.0 && a.alpha == 1.0 {
        evaluate_omega0(a.lambda, &source, a.trunc.tol, policy)
    } else {
        evaluate_survival(&params, &source, &trunc, policy)
    };
    let record = match result {
        Ok(r) => Record::from_result(&params, &r),
        Err(e @ pulsewell::Error::InvalidParameter(_)) => bail!(Usage(e.to_string())),
        Err(e) => Record::failed(a.lambda, a.omega, a.alpha, &e),
    };
    let rows = [record];
    emit(&rows, a.format, None)?;
    Ok(status_code(&rows))
}

fn cmd_sweep(a: &SweepArgs, policy: &PrecisionPolicy) -> Result<u8> {
    let xs = abscissae(a.from, a.to, a.points, a.scale).map_err(|e| Usage(e.to_string()))?;
    if a.mode == Mode::Lambda0 {
        if a.param != Parameter::Omega {
            bail!(Usage("lambda0 mode sweeps omega".into()));
        }
        let rows = sweep::run_lambda0(&xs, a.truncation);
        emit(&rows, a.format, a.output.as_ref())?;
        return Ok(if rows.iter().all(|r| r.flag == "ok") { 0 } else { 2 });
    }
    if a.mode != Mode::General && a.param != Parameter::Lambda {
        bail!(Usage("omega0 and shortpulse modes sweep lambda".into()));
    }
    if a.param == Parameter::Lambda && a.from <= 0.0 {
        bail!(Usage("lambda sweeps need from > 0; use lambda0 mode for the undamped case".into()));
    }
    let trunc = a.trunc.spec();
    input(trunc.validate())?;
    let setup = SweepSetup {
        parameter: a.param,
        mode: a.mode,
        lambda: a.lambda,
        omega: a.omega,
        alpha: a.alpha,
        ratio: a.ratio,
        source: input(a.source.source())?,
        trunc,
        policy: *policy,
        tol: a.trunc.tol,
    };
    let rows = sweep::run(&setup, &xs);
    emit(&rows, a.format, a.output.as_ref())?;
    Ok(status_code(&rows))
}

/// A survival record extended by the small-lambda asymptote of `|r|`.
#[derive(Debug, Serialize)]
struct Omega0Row {
    lambda: f64,
    re_r: f64,
    im_r: f64,
    abs_r: f64,
    probability: f64,
    err_estimate: f64,
    depth_used: usize,
    digits_used: u32,
    flag: String,
    asymptotic_abs_r: f64,
}

fn cmd_omega0(a: &Omega0Args, policy: &PrecisionPolicy) -> Result<u8> {
    let params = input(PulseParams::new(a.lambda, 0.0, 1.0))?;
    let source = input(a.source.source())?;
    let rec = match evaluate_omega0(a.lambda, &source, a.tol, policy) {
        Ok(r) => Record::from_result(&params, &r),
        Err(e @ pulsewell::Error::InvalidParameter(_)) => bail!(Usage(e.to_string())),
        Err(e) => Record::failed(a.lambda, 0.0, 1.0, &e),
    };
    let code = status_code(std::slice::from_ref(&rec));
    let row = Omega0Row {
        lambda: rec.lambda,
        re_r: rec.re_r,
        im_r: rec.im_r,
        abs_r: rec.abs_r,
        probability: rec.probability,
        err_estimate: rec.err_estimate,
        depth_used: rec.depth_used,
        digits_used: rec.digits_used,
        flag: rec.flag,
        asymptotic_abs_r: input(asymptotic_r(a.lambda))?.norm(),
    };
    emit(&[row], a.format, None)?;
    Ok(code)
}

fn cmd_shortpulse(a: &ShortpulseArgs, policy: &PrecisionPolicy) -> Result<u8> {
    let params = input(short_pulse_params(a.lambda, a.ratio))?;
    let source = input(a.source.source())?;
    let trunc = a.trunc.spec();
    input(trunc.validate())?;
    let record = match evaluate_survival(&params, &source, &trunc, policy) {
        Ok(r) => Record::from_result(&params, &r),
        Err(e) => Record::failed(params.lambda, params.omega, params.alpha, &e),
    };
    let rows = [record];
    emit(&rows, a.format, None)?;
    Ok(status_code(&rows))
}

fn cmd_lambda0(a: &Lambda0Args) -> Result<u8> {
    if a.sigma_points == 0 {
        bail!(Usage("--sigma-points must be at least 1".into()));
    }
    let grid = sweep::sigma_grid(a.omega, a.sigma_points);
    let row = match lambda0_min_singular(a.omega, &grid, a.truncation) {
        Ok(s) => sweep::Lambda0Record {
            omega: a.omega,
            truncation: a.truncation,
            sigma_min: s,
            flag: "ok".into(),
        },
        Err(e @ pulsewell::Error::ThresholdHit(_)) => sweep::Lambda0Record {
            omega: a.omega,
            truncation: a.truncation,
            sigma_min: 0.0,
            flag: output::error_flag(&e).into(),
        },
        Err(e) => bail!(Usage(e.to_string())),
    };
    let code = if row.flag == "ok" { 0 } else { 2 };
    emit(&[row], a.format, None)?;
    Ok(code)
}

#[derive(Debug, Serialize)]
struct OracleRow {
    t: f64,
    re_projection: f64,
    im_projection: f64,
    probability: f64,
    box_probability: f64,
    norm: f64,
}

fn cmd_oracle(a: &OracleArgs) -> Result<u8> {
    let params = input(PulseParams::new(a.lambda, a.omega, a.alpha))?;
    let source = input(a.source.source())?;
    let grid = GridSpec {
        half_length: a.grid_l,
        h: a.grid_h,
        dt: a.dt,
        t_max: a.tmax,
        sample_every: a.sample_every,
    };
    input(grid.validate())?;
    let field = evolve(&params, &source, &grid)?;
    let rows = field
        .projections()
        .into_iter()
        .zip(&field.norms)
        .map(|((t, p), &norm): ((f64, Complex64), &f64)| {
            Ok(OracleRow {
                t,
                re_projection: p.re,
                im_projection: p.im,
                probability: p.norm_sqr(),
                box_probability: box_probability(&field, t, a.box_half)?,
                norm,
            })
        })
        .collect::<pulsewell::Result<Vec<_>>>()?;
    emit(&rows, a.format, None)?;
    if let Some(path) = &a.dump {
        let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        w.write_record(["t", "x", "re", "im", "abs2"])?;
        for (t, x, re, im, abs2) in field.snapshot_rows(grid.t_max)? {
            w.serialize((t, x, re, im, abs2))?;
        }
        w.flush()?;
    }
    eprintln!("max norm change per step {:.3e}", field.max_step_drift);
    Ok(0)
}

fn cmd_validate(a: &ValidateArgs) -> Result<u8> {
    let level = match a.level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let tamper = a.inject_fault.then(|| Tamper {
        index: ModeIndex::new(3, 1),
        factor: Complex64::new(1.0 + 1e-6, 0.0),
    });
    let report = run_validation(level, tamper);
    let mut out = io::stdout().lock();
    for c in &report.checks {
        writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
    }
    Ok(if report.all_passed() { 0 } else { 3 })
}

fn run(cli: &Cli) -> Result<u8> {
    let policy = policy(cli.digits)?;
    match &cli.command {
        Command::Survival(a) => cmd_survival(a, &policy),
        Command::Sweep(a) => cmd_sweep(a, &policy),
        Command::Omega0(a) => cmd_omega0(a, &policy),
        Command::Shortpulse(a) => cmd_shortpulse(a, &policy),
        Command::Lambda0(a) => cmd_lambda0(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                eprintln!("run `pulsewell --help` for usage");
            }
            ExitCode::from(1)
        }
    }
}
