//! Command-line front end for `znd-core`: configuration ingestion,
//! deterministic CSV/JSON reports and a one-shot reproduction driver.

pub mod config;
pub mod output;
pub mod reproduce;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;
use znd_core::evans::{compare_methods_with, rectangle_grid, DiscrepancyTable};
use znd_core::lopatinski::{self, EvalOptions, PsiMethod};
use znd_core::profile::{
    integrate_profile_oracle, left_limit, profile_at, rh_residual, ProfilePoint,
};
use znd_core::stability::{
    coeff_floor, parameter_sweep, psi_max, radius_bound, verify_condition_d, StabilityReport,
    SweepTable, TracePoint, Verdict, VerifyOptions,
};
use znd_core::timedomain::{run_experiment, ExperimentResult, ExperimentSpec, Perturbation};
use znd_core::{c64, q_max, Complex64, DetonationParams, ParamsInput};

use config::{
    GridSpec, LambdaConfig, OracleConfig, ParamsConfig, ProfileConfig, SimulateConfig, SweepConfig,
    VerifyConfig,
};
use output::{Artifacts, Cell, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical failure: {0}")]
    Numerics(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerics(_) => 3,
            CliError::Io { .. } | CliError::Internal(_) => 1,
        }
    }
}

/// Outcome of a successful run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Violation,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Violation => 1,
            Status::Inconclusive => 3,
        }
    }

    fn worst(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Violation, _) | (_, Violation) => Violation,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Ok,
        }
    }

    fn from_verdict(v: Verdict) -> Status {
        match v {
            Verdict::StableConditionD => Status::Ok,
            Verdict::Violated => Status::Violation,
            Verdict::Inconclusive => Status::Inconclusive,
        }
    }
}

pub fn exit_code(result: &Result<Status, CliError>) -> i32 {
    match result {
        Ok(s) => s.exit_code(),
        Err(e) => e.exit_code(),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "znd",
    version,
    about = "Spectral stability of ZND detonations in Majda's model"
)]
pub struct Cli {
    /// JSON configuration for the subcommand.
    #[arg(long, global = true, env = "ZND_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "ZND_OUT", default_value = "znd-output")]
    pub out: PathBuf,
    /// Relative tolerance for quadrature and ODE integration.
    #[arg(long, global = true, env = "ZND_TOL", default_value_t = 1e-10)]
    pub tol: f64,
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true, env = "ZND_THREADS")]
    pub threads: Option<usize>,
    /// Seed for randomized λ samples.
    #[arg(long, global = true, env = "ZND_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write a gnuplot script next to every CSV.
    #[arg(long, global = true, env = "ZND_PLOT_SCRIPT")]
    pub plot_script: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Validate parameters and print derived quantities.
    Params,
    /// Sample the detonation profile and check it against ODE integration.
    Profile,
    /// Evaluate the Lopatinski determinant at given λ.
    Det,
    /// Evaluate Ψ(λ) at given λ.
    Psi,
    /// Compare the closed-form determinant with direct shooting.
    Oracle,
    /// Certify the stability condition for one parameter set.
    Verify,
    /// Verify a grid of parameter sets.
    Sweep,
    /// Run the time-domain relaxation experiment.
    Simulate,
    /// Run every check with reference settings and write a manifest.
    Reproduce,
}

/// Parsed options shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub tol: f64,
    pub seed: u64,
    pub plot_script: bool,
}

impl From<&Cli> for RunOptions {
    fn from(cli: &Cli) -> Self {
        RunOptions {
            config: cli.config.clone(),
            out: cli.out.clone(),
            tol: cli.tol,
            seed: cli.seed,
            plot_script: cli.plot_script,
        }
    }
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        RunOptions {
            config: None,
            out: out.into(),
            tol: 1e-10,
            seed: 0,
            plot_script: false,
        }
    }

    fn eval(&self) -> EvalOptions {
        EvalOptions::with_tol(self.tol)
    }
}

pub fn run_cli(cli: &Cli) -> Result<Status, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // A pool may already exist when called repeatedly in one process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    run(cli.command, &RunOptions::from(cli))
}

/// Executes one subcommand. Configuration is parsed and validated first;
/// output files are written only after all computation succeeded.
pub fn run(command: Command, opts: &RunOptions) -> Result<Status, CliError> {
    if !(opts.tol > 0.0 && opts.tol < 1e-2) {
        return Err(CliError::Usage(format!(
            "--tol must lie in (0, 0.01), got {}",
            opts.tol
        )));
    }
    let cfg = opts.config.as_deref();
    let mut art = Artifacts::default();
    let status = match command {
        Command::Params => cmd_params(
            config::load(cfg, || ParamsConfig { params: p0_input() })?,
            &mut art,
        )?,
        Command::Profile => cmd_profile(
            config::load(cfg, || ProfileConfig {
                params: p0_input(),
                length: 30.0,
            })?,
            opts,
            &mut art,
        )?,
        Command::Det => cmd_det(
            config::load(cfg, LambdaConfig::default)?,
            opts,
            &mut art,
            false,
        )?,
        Command::Psi => cmd_det(
            config::load(cfg, LambdaConfig::default)?,
            opts,
            &mut art,
            true,
        )?,
        Command::Oracle => cmd_oracle(
            config::load(cfg, || {
                config::parse::<OracleConfig>("{}").expect("defaults")
            })?,
            opts,
            &mut art,
        )?,
        Command::Verify => cmd_verify(
            config::load(cfg, || {
                config::parse::<VerifyConfig>("{}").expect("defaults")
            })?,
            opts,
            &mut art,
        )?,
        Command::Sweep => cmd_sweep(
            config::load(cfg, || {
                config::parse::<SweepConfig>("{}").expect("defaults")
            })?,
            opts,
            &mut art,
        )?,
        Command::Simulate => cmd_simulate(
            config::load(cfg, || {
                config::parse::<SimulateConfig>("{}").expect("defaults")
            })?,
            opts,
            &mut art,
        )?,
        Command::Reproduce => {
            if cfg.is_some() {
                return Err(CliError::Usage(
                    "reproduce takes no configuration file".into(),
                ));
            }
            let (status, checks) = reproduce::reproduce(opts, &mut art)?;
            for c in &checks {
                println!(
                    "[{}] {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            status
        }
    };
    art.commit(&opts.out)?;
    Ok(status)
}

fn p0_input() -> ParamsInput {
    znd_core::params::p0().to_input()
}

pub fn validate(input: &ParamsInput) -> Result<DetonationParams, CliError> {
    input.validate().map_err(|e| CliError::Usage(e.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivedSummary {
    pub params: DetonationParams,
    pub c_minus: f64,
    pub q_max: f64,
    pub psi_max: f64,
    pub coeff_floor: f64,
    #[serde(rename = "radius_R_base")]
    pub radius_base: f64,
    #[serde(rename = "radius_R")]
    pub radius: f64,
    pub psi_abscissa: f64,
}

pub fn derived_summary(p: &DetonationParams) -> DerivedSummary {
    let r = radius_bound(p);
    DerivedSummary {
        params: *p,
        c_minus: p.c_minus(),
        q_max: q_max(p.u_plus(), p.u_star()).unwrap_or(f64::NAN),
        psi_max: psi_max(p),
        coeff_floor: coeff_floor(p),
        radius_base: r.base,
        radius: r.safety,
        psi_abscissa: lopatinski::psi_abscissa(p),
    }
}

fn cmd_params(cfg: ParamsConfig, art: &mut Artifacts) -> Result<Status, CliError> {
    let p = validate(&cfg.params)?;
    let summary = derived_summary(&p);
    print!("{}", output::canonical_json(&summary)?);
    art.json("params.json", &summary)?;
    Ok(Status::Ok)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileCheck {
    pub params: DetonationParams,
    pub length: f64,
    pub samples: usize,
    pub max_abs_error: f64,
    pub left_limit_u: f64,
    pub left_limit_z: f64,
    pub left_limit_error: f64,
    pub rh_residual: f64,
    pub passed: bool,
}

pub const PROFILE_TOL: f64 = 1e-8;
pub const LEFT_LIMIT_TOL: f64 = 1e-10;
pub const RH_TOL: f64 = 1e-12;

/// Closed-form profile against ODE integration on `[−length, 0]`.
pub fn profile_check(
    p: &DetonationParams,
    length: f64,
    rel_tol: f64,
) -> Result<(ProfileCheck, Table), CliError> {
    let pts = integrate_profile_oracle(p, length, rel_tol.min(1e-10))
        .map_err(|e| CliError::Numerics(e.to_string()))?;
    let mut table = Table::new(&["xi", "u_bar", "z_bar", "u_ode", "z_ode", "abs_error"]);
    let mut max_err: f64 = 0.0;
    let last = pts.len().saturating_sub(1);
    for (j, pt) in pts.iter().enumerate() {
        let exact: ProfilePoint = if j == last {
            left_limit(p)
        } else {
            profile_at(p, pt.xi)
        };
        let err = (pt.u_bar - exact.u_bar)
            .abs()
            .max((pt.z_bar - exact.z_bar).abs());
        max_err = max_err.max(err);
        table.push(vec![
            pt.xi.into(),
            exact.u_bar.into(),
            exact.z_bar.into(),
            pt.u_bar.into(),
            pt.z_bar.into(),
            err.into(),
        ]);
    }
    let l = left_limit(p);
    let left_err = (l.u_bar - p.u_star()).abs().max((l.z_bar - 1.0).abs());
    let rh = rh_residual(p);
    let check = ProfileCheck {
        params: *p,
        length,
        samples: pts.len(),
        max_abs_error: max_err,
        left_limit_u: l.u_bar,
        left_limit_z: l.z_bar,
        left_limit_error: left_err,
        rh_residual: rh,
        passed: max_err <= PROFILE_TOL && left_err <= LEFT_LIMIT_TOL && rh <= RH_TOL,
    };
    Ok((check, table))
}

fn cmd_profile(
    cfg: ProfileConfig,
    opts: &RunOptions,
    art: &mut Artifacts,
) -> Result<Status, CliError> {
    let p = validate(&cfg.params)?;
    if !(cfg.length > 0.0 && cfg.length.is_finite()) {
        return Err(CliError::Usage(format!(
            "length must be positive, got {}",
            cfg.length
        )));
    }
    let (check, table) = profile_check(&p, cfg.length, opts.tol)?;
    println!(
        "profile: max |closed − ode| = {:e}, RH residual = {:e}, passed = {}",
        check.max_abs_error, check.rh_residual, check.passed
    );
    art.csv("profile.csv", &table, opts.plot_script)?;
    art.json("profile_check.json", &check)?;
    Ok(if check.passed {
        Status::Ok
    } else {
        Status::Violation
    })
}

/// λ points requested by a configuration, in the order given.
pub fn lambda_points(cfg: &LambdaConfig, seed: u64) -> Result<Vec<Complex64>, CliError> {
    let mut pts: Vec<Complex64> = cfg.lambdas.iter().map(|&[re, im]| c64(re, im)).collect();
    if let Some(g) = cfg.grid {
        pts.extend(grid_points(&g)?);
    }
    if let Some(r) = cfg.random {
        if !(r.radius > 0.0 && r.radius.is_finite()) {
            return Err(CliError::Usage(format!(
                "random radius must be positive, got {}",
                r.radius
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..r.count {
            let rho = r.radius * rng.gen::<f64>().sqrt();
            let theta = rng.gen_range(-std::f64::consts::FRAC_PI_2..=std::f64::consts::FRAC_PI_2);
            pts.push(Complex64::from_polar(rho, theta));
        }
    }
    if pts.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(CliError::Usage("λ values must be finite".into()));
    }
    Ok(pts)
}

fn grid_points(g: &GridSpec) -> Result<Vec<Complex64>, CliError> {
    if g.n_re == 0 || g.n_im == 0 || g.re.iter().chain(&g.im).any(|x| !x.is_finite()) {
        return Err(CliError::Usage(format!("invalid λ grid {g:?}")));
    }
    Ok(rectangle_grid(
        (g.re[0], g.re[1]),
        (g.im[0], g.im[1]),
        g.n_re,
        g.n_im,
    ))
}

fn method_name(m: PsiMethod) -> &'static str {
    match m {
        PsiMethod::Quadrature => "quadrature",
        PsiMethod::OdeFallback => "ode_fallback",
    }
}

fn cmd_det(
    cfg: LambdaConfig,
    opts: &RunOptions,
    art: &mut Artifacts,
    psi_only: bool,
) -> Result<Status, CliError> {
    let p = validate(&cfg.params)?;
    let pts = lambda_points(&cfg, opts.seed)?;
    let eval = opts.eval();
    let mut failures = 0;
    let table = if psi_only {
        let mut t = Table::new(&[
            "lambda_re",
            "lambda_im",
            "psi_re",
            "psi_im",
            "psi_abs",
            "error_estimate",
            "method",
            "error",
        ]);
        for lam in &pts {
            match lopatinski::psi_with(&p, *lam, &eval) {
                Ok(v) => t.push(vec![
                    lam.re.into(),
                    lam.im.into(),
                    v.value.re.into(),
                    v.value.im.into(),
                    v.value.norm().into(),
                    v.error_estimate.into(),
                    method_name(v.method).into(),
                    Cell::Empty,
                ]),
                Err(e) => {
                    failures += 1;
                    let mut row = vec![lam.re.into(), lam.im.into()];
                    row.extend(std::iter::repeat_n(Cell::Empty, 5));
                    row.push(e.to_string().into());
                    t.push(row);
                }
            }
        }
        t
    } else {
        let mut t = Table::new(&[
            "lambda_re",
            "lambda_im",
            "D_re",
            "D_im",
            "psi_re",
            "psi_im",
            "quad_error",
            "identity_residual",
            "method",
            "error",
        ]);
        for lam in &pts {
            match lopatinski::evaluate(&p, *lam, &eval) {
                Ok(e) => t.push(vec![
                    lam.re.into(),
                    lam.im.into(),
                    e.d_value.re.into(),
                    e.d_value.im.into(),
                    e.psi.re.into(),
                    e.psi.im.into(),
                    e.quad_error.into(),
                    e.identity_residual.into(),
                    method_name(e.method).into(),
                    Cell::Empty,
                ]),
                Err(err) => {
                    failures += 1;
                    let mut row = vec![lam.re.into(), lam.im.into()];
                    row.extend(std::iter::repeat_n(Cell::Empty, 7));
                    row.push(err.to_string().into());
                    t.push(row);
                }
            }
        }
        t
    };
    let name = if psi_only { "psi.csv" } else { "det.csv" };
    println!("{name}: {} points, {failures} failed", pts.len());
    art.csv(name, &table, opts.plot_script)?;
    Ok(if failures == 0 {
        Status::Ok
    } else {
        Status::Inconclusive
    })
}

pub fn oracle_table(t: &DiscrepancyTable) -> Table {
    let mut out = Table::new(&[
        "lambda_re",
        "lambda_im",
        "D_closed_re",
        "D_closed_im",
        "D_ode_re",
        "D_ode_im",
        "discrepancy",
        "absolute",
        "error",
    ]);
    for r in &t.rows {
        out.push(vec![
            r.lambda.re.into(),
            r.lambda.im.into(),
            r.d_closed.map(|d| d.re).into(),
            r.d_closed.map(|d| d.im).into(),
            r.d_ode.map(|d| d.re).into(),
            r.d_ode.map(|d| d.im).into(),
            r.discrepancy.into(),
            (r.absolute as i64).into(),
            r.error.clone().into(),
        ]);
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSummary {
    pub params: DetonationParams,
    pub length: f64,
    pub points: usize,
    pub max_relative: f64,
    pub max_absolute: f64,
    pub median: f64,
    pub failures: usize,
    pub threshold: f64,
    pub passed: bool,
}

/// Runs the comparison and splits relative and absolute discrepancies.
pub fn oracle_summary(
    p: &DetonationParams,
    grid: &[Complex64],
    length: f64,
    rel_tol: f64,
    threshold: f64,
) -> (OracleSummary, DiscrepancyTable) {
    let t = compare_methods_with(p, grid, length, rel_tol);
    let pick = |absolute: bool| {
        t.rows
            .iter()
            .filter(|r| r.absolute == absolute)
            .filter_map(|r| r.discrepancy)
            .fold(0.0, f64::max)
    };
    let (max_relative, max_absolute) = (pick(false), pick(true));
    let summary = OracleSummary {
        params: *p,
        length,
        points: grid.len(),
        max_relative,
        max_absolute,
        median: t.median,
        failures: t.failures,
        threshold,
        passed: t.failures == 0 && max_relative <= threshold && max_absolute <= 1e-8,
    };
    (summary, t)
}

fn cmd_oracle(
    cfg: OracleConfig,
    opts: &RunOptions,
    art: &mut Artifacts,
) -> Result<Status, CliError> {
    let p = validate(&cfg.params)?;
    if !(cfg.length > 0.0 && cfg.length.is_finite()) {
        return Err(CliError::Usage(format!(
            "length must be positive, got {}",
            cfg.length
        )));
    }
    let grid = grid_points(&cfg.grid)?;
    let (summary, table) = oracle_summary(&p, &grid, cfg.length, opts.tol, cfg.threshold);
    println!(
        "oracle: {} points, max relative {:e}, max absolute {:e}, passed = {}",
        summary.points, summary.max_relative, summary.max_absolute, summary.passed
    );
    art.csv("oracle.csv", &oracle_table(&table), opts.plot_script)?;
    art.json("oracle_summary.json", &summary)?;
    Ok(if summary.failures > 0 {
        Status::Inconclusive
    } else if summary.passed {
        Status::Ok
    } else {
        Status::Violation
    })
}

pub fn trace_table(trace: &[TracePoint]) -> Table {
    let mut t = Table::new(&["lambda_re", "lambda_im", "D_re", "D_im", "cum_arg"]);
    for tp in trace {
        t.push(vec![
            tp.lambda.re.into(),
            tp.lambda.im.into(),
            tp.value.re.into(),
            tp.value.im.into(),
            tp.cum_arg.into(),
        ]);
    }
    t
}

pub fn verify_options(
    opts: &RunOptions,
    n0: Option<usize>,
    max_depth: Option<usize>,
) -> VerifyOptions {
    let d = VerifyOptions::default();
    VerifyOptions {
        eval: opts.eval(),
        n0: n0.unwrap_or(d.n0),
        max_depth: max_depth.unwrap_or(d.max_depth),
        ..d
    }
}

/// Report plus trace files under `stem`.
pub fn add_verify_artifacts(
    art: &mut Artifacts,
    stem: &str,
    rep: &StabilityReport,
    plot: bool,
) -> Result<(), CliError> {
    art.json(&format!("{stem}.json"), rep)?;
    if !rep.half_plane_trace.is_empty() {
        art.csv(
            &format!("{stem}_trace_half_plane.csv"),
            &trace_table(&rep.half_plane_trace),
            plot,
        )?;
    }
    if !rep.small_circle_trace.is_empty() {
        art.csv(
            &format!("{stem}_trace_small_circle.csv"),
            &trace_table(&rep.small_circle_trace),
            plot,
        )?;
    }
    Ok(())
}

fn cmd_verify(
    cfg: VerifyConfig,
    opts: &RunOptions,
    art: &mut Artifacts,
) -> Result<Status, CliError> {
    let p = validate(&cfg.params)?;
    let mut vo = verify_options(opts, cfg.n0, cfg.max_depth);
    vo.indent_r = cfg.indent_r;
    vo.radius = cfg.radius;
    vo.keep_trace = cfg.trace;
    let rep = verify_condition_d(&p, &vo);
    println!(
        "verify: windings (half-plane, circle) = ({:?}, {:?}), verdict {:?}",
        rep.winding_open_half_plane, rep.winding_small_circle, rep.verdict
    );
    for d in &rep.diagnostics {
        eprintln!("  {d}");
    }
    add_verify_artifacts(art, "report", &rep, opts.plot_script)?;
    Ok(Status::from_verdict(rep.verdict))
}

pub fn sweep_csv(t: &SweepTable) -> Table {
    let mut out = Table::new(&[
        "index",
        "u_plus",
        "u_star",
        "q_fraction",
        "k",
        "q",
        "u_i",
        "s",
        "u_minus",
        "winding_half_plane",
        "winding_small_circle",
        "coeff_floor",
        "psi_max",
        "radius_R",
        "min_abs_D",
        "verdict",
        "error",
    ]);
    for row in &t.rows {
        let rep = row.report.as_ref();
        out.push(vec![
            row.index.into(),
            row.u_plus.into(),
            row.u_star.into(),
            row.q_fraction.into(),
            row.k.into(),
            rep.map(|r| r.params.q()).into(),
            rep.map(|r| r.params.u_i()).into(),
            rep.map(|r| r.params.s()).into(),
            rep.map(|r| r.params.u_minus()).into(),
            rep.and_then(|r| r.winding_open_half_plane).into(),
            rep.and_then(|r| r.winding_small_circle).into(),
            rep.map(|r| r.coeff_floor).into(),
            rep.map(|r| r.psi_max).into(),
            rep.map(|r| r.radius_r_big).into(),
            rep.map(|r| r.min_abs_d).into(),
            rep.map(|r| format!("{:?}", r.verdict)).into(),
            row.error.clone().into(),
        ]);
    }
    out
}

pub fn sweep_status(t: &SweepTable) -> Status {
    t.rows.iter().fold(Status::Ok, |acc, row| {
        let s = match (&row.report, &row.error) {
            (Some(r), _) => Status::from_verdict(r.verdict),
            (None, _) => Status::Violation,
        };
        acc.worst(s)
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub total: usize,
    pub stable: usize,
    pub errors: usize,
    pub all_stable: bool,
}

fn cmd_sweep(cfg: SweepConfig, opts: &RunOptions, art: &mut Artifacts) -> Result<Status, CliError> {
    let vo = verify_options(opts, cfg.n0, None);
    let t = parameter_sweep(&cfg.grid, &vo);
    let summary = SweepSummary {
        total: t.total,
        stable: t.stable,
        errors: t.rows.iter().filter(|r| r.error.is_some()).count(),
        all_stable: t.all_stable(),
    };
    println!(
        "sweep: {}/{} stable, {} errors",
        summary.stable, summary.total, summary.errors
    );
    for row in t.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "  row {}: {}",
            row.index,
            row.error.as_deref().unwrap_or("")
        );
    }
    art.csv("sweep.csv", &sweep_csv(&t), opts.plot_script)?;
    art.json("sweep_summary.json", &summary)?;
    Ok(sweep_status(&t))
}

pub fn metrics_table(r: &ExperimentResult) -> Table {
    let mut t = Table::new(&[
        "t",
        "step",
        "distance",
        "shift",
        "mass_residual",
        "mass_residual_max",
    ]);
    for m in &r.metrics {
        t.push(vec![
            m.t.into(),
            m.step.into(),
            m.distance.into(),
            m.shift.into(),
            m.mass_residual.into(),
            m.mass_residual_max.into(),
        ]);
    }
    t
}

pub fn snapshot_table(r: &ExperimentResult) -> Table {
    let mut t = Table::new(&["t", "xi", "u", "z"]);
    for s in &r.snapshots {
        for j in 0..s.xi.len() {
            t.push(vec![
                s.t.into(),
                s.xi[j].into(),
                s.u[j].into(),
                s.z[j].into(),
            ]);
        }
    }
    t
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub params: DetonationParams,
    pub cells: usize,
    pub horizon: f64,
    pub steps: usize,
    pub initial_distance: f64,
    pub final_distance: f64,
    pub decay_ratio: f64,
    pub final_shift: f64,
    pub mass_residual_max: f64,
    pub control_final_distance: Option<f64>,
    pub control_ratio: Option<f64>,
    pub decayed: bool,
    pub control_ok: Option<bool>,
}

pub const DECAY_RATIO_MAX: f64 = 0.5;
pub const CONTROL_RATIO_MAX: f64 = 0.2;

/// Perturbed run and optional unperturbed control, run concurrently.
pub fn simulate(
    p: &DetonationParams,
    spec: &ExperimentSpec,
    control: bool,
) -> Result<(SimulateSummary, ExperimentResult, Option<ExperimentResult>), CliError> {
    let control_spec = ExperimentSpec {
        perturbation: Perturbation::none(),
        ..*spec
    };
    let (main, ctrl) = rayon::join(
        || run_experiment(p, spec),
        || control.then(|| run_experiment(p, &control_spec)),
    );
    let main = main.map_err(sim_error)?;
    let ctrl = ctrl.transpose().map_err(sim_error)?;
    let decay_ratio = main.final_distance / main.initial_distance;
    let control_ratio = ctrl
        .as_ref()
        .map(|c| c.final_distance / main.initial_distance);
    let summary = SimulateSummary {
        params: *p,
        cells: spec.grid.cells,
        horizon: spec.horizon,
        steps: main.steps,
        initial_distance: main.initial_distance,
        final_distance: main.final_distance,
        decay_ratio,
        final_shift: main.final_shift,
        mass_residual_max: main.mass_residual_max,
        control_final_distance: ctrl.as_ref().map(|c| c.final_distance),
        control_ratio,
        decayed: decay_ratio <= DECAY_RATIO_MAX,
        control_ok: control_ratio.map(|r| r < CONTROL_RATIO_MAX),
    };
    Ok((summary, main, ctrl))
}

fn sim_error(e: znd_core::timedomain::SimError) -> CliError {
    match e {
        znd_core::timedomain::SimError::Grid(m) => CliError::Usage(m),
        other => CliError::Numerics(other.to_string()),
    }
}

fn cmd_simulate(
    cfg: SimulateConfig,
    opts: &RunOptions,
    art: &mut Artifacts,
) -> Result<Status, CliError> {
    let p = validate(&cfg.params)?;
    let (summary, main, ctrl) = simulate(&p, &cfg.experiment, cfg.control)?;
    println!(
        "simulate: distance {:.6e} -> {:.6e} (ratio {:.4}), control ratio {:?}",
        summary.initial_distance,
        summary.final_distance,
        summary.decay_ratio,
        summary.control_ratio
    );
    art.csv("metrics.csv", &metrics_table(&main), opts.plot_script)?;
    if let Some(c) = &ctrl {
        art.csv("control_metrics.csv", &metrics_table(c), opts.plot_script)?;
    }
    if cfg.experiment.snapshot_every.is_some() {
        art.csv("snapshots.csv", &snapshot_table(&main), false)?;
    }
    art.json("simulate_summary.json", &summary)?;
    Ok(Status::Ok)
}
