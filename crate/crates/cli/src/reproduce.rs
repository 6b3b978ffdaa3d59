//! One-shot run of every check with reference settings.

use serde::Serialize;
use znd_core::params::{p0, p1};
use znd_core::stability::{parameter_sweep, verify_condition_d, SweepSpec, Verdict};
use znd_core::timedomain::ExperimentSpec;

use crate::config::GridSpec;
use crate::output::Artifacts;
use crate::{
    add_verify_artifacts, grid_points, metrics_table, oracle_summary, oracle_table, profile_check,
    simulate, sweep_csv, verify_options, CliError, RunOptions, Status,
};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub version: String,
    pub tol: f64,
    pub checks: Vec<Check>,
    pub all_passed: bool,
    /// SHA-256 of every other output file.
    pub files: std::collections::BTreeMap<String, String>,
}

pub const MANIFEST: &str = "manifest.json";

pub fn reproduce(opts: &RunOptions, art: &mut Artifacts) -> Result<(Status, Vec<Check>), CliError> {
    let mut checks = Vec::new();
    let plot = opts.plot_script;
    let named = [("p0", p0()), ("p1", p1())];

    for (name, p) in &named {
        let (check, table) = profile_check(p, 30.0, opts.tol)?;
        checks.push(Check {
            name: format!("profile_{name}"),
            passed: check.passed,
            detail: format!(
                "max abs error {:e}, left-limit error {:e}, RH residual {:e}",
                check.max_abs_error, check.left_limit_error, check.rh_residual
            ),
        });
        art.csv(&format!("profile_{name}.csv"), &table, plot)?;
        art.json(&format!("profile_check_{name}.json"), &check)?;
    }

    let grid = grid_points(&GridSpec::oracle_default())?;
    for (name, p) in &named {
        let (summary, table) = oracle_summary(p, &grid, 40.0, opts.tol, 1e-4);
        checks.push(Check {
            name: format!("oracle_{name}"),
            passed: summary.passed,
            detail: format!(
                "max relative {:e}, max absolute {:e}, failures {}",
                summary.max_relative, summary.max_absolute, summary.failures
            ),
        });
        art.csv(&format!("oracle_{name}.csv"), &oracle_table(&table), plot)?;
        art.json(&format!("oracle_summary_{name}.json"), &summary)?;
    }

    let mut vo = verify_options(opts, None, None);
    vo.keep_trace = true;
    for (name, p) in &named {
        let rep = verify_condition_d(p, &vo);
        checks.push(Check {
            name: format!("verify_{name}"),
            passed: rep.verdict == Verdict::StableConditionD,
            detail: format!(
                "windings ({:?}, {:?}), verdict {:?}",
                rep.winding_open_half_plane, rep.winding_small_circle, rep.verdict
            ),
        });
        add_verify_artifacts(art, &format!("verify_{name}"), &rep, plot)?;
    }

    vo.keep_trace = false;
    let sweep = parameter_sweep(&SweepSpec::reference(), &vo);
    checks.push(Check {
        name: "sweep".into(),
        passed: sweep.all_stable() && sweep.total == 27,
        detail: format!("{}/{} stable", sweep.stable, sweep.total),
    });
    art.csv("sweep.csv", &sweep_csv(&sweep), plot)?;

    let (sim, main, ctrl) = simulate(&p0(), &ExperimentSpec::reference(0.05), true)?;
    checks.push(Check {
        name: "simulate".into(),
        passed: sim.decayed && sim.control_ok == Some(true),
        detail: format!(
            "decay ratio {:.6}, control ratio {:.6}",
            sim.decay_ratio,
            sim.control_ratio.unwrap_or(f64::NAN)
        ),
    });
    art.csv("simulate_metrics.csv", &metrics_table(&main), plot)?;
    if let Some(c) = &ctrl {
        art.csv("simulate_control_metrics.csv", &metrics_table(c), plot)?;
    }
    art.json("simulate_summary.json", &sim)?;

    let all_passed = checks.iter().all(|c| c.passed);
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        tol: opts.tol,
        checks: checks.clone(),
        all_passed,
        files: art.digests(),
    };
    art.json(MANIFEST, &manifest)?;
    Ok((
        if all_passed {
            Status::Ok
        } else {
            Status::Violation
        },
        checks,
    ))
}
