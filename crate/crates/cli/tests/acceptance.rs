//! Acceptance suite: one pass/fail line per criterion, non-zero exit on any failure.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use znd_cli::output::Artifacts;
use znd_cli::{oracle_summary, reproduce, RunOptions};
use znd_core::evans::rectangle_grid;
use znd_core::lopatinski::{self, EvalOptions};
use znd_core::params::{p0, p1};
use znd_core::profile::{integrate_profile_oracle, left_limit, profile_at, rh_residual};
use znd_core::stability::{
    coeff_floor, parameter_sweep, sweep_point, verify_condition_d, SweepSpec, Verdict,
    VerifyOptions,
};
use znd_core::timedomain::ExperimentSpec;
use znd_core::{c64, Complex64, DetonationParams};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within(elapsed: Duration, budget: f64) -> bool {
    elapsed.as_secs_f64() < budget
}

fn profile_correctness() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut edge: f64 = 0.0;
    let mut rh: f64 = 0.0;
    for p in [p0(), p1()] {
        let pts = integrate_profile_oracle(&p, 30.0, 1e-12).expect("profile oracle");
        let (last, body) = pts.split_last().expect("samples");
        for pt in body {
            let exact = profile_at(&p, pt.xi);
            worst = worst
                .max((pt.u_bar - exact.u_bar).abs())
                .max((pt.z_bar - exact.z_bar).abs());
        }
        let l = left_limit(&p);
        worst = worst
            .max((last.u_bar - l.u_bar).abs())
            .max((last.z_bar - l.z_bar).abs());
        edge = edge
            .max((l.u_bar - p.u_star()).abs())
            .max((l.z_bar - 1.0).abs());
        rh = rh.max(rh_residual(&p));
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-8 && edge <= 1e-10 && rh <= 1e-12 && within(t, 1.0),
        format!("max |closed - ode| {worst:.3e}, left-limit error {edge:.3e}, RH residual {rh:.3e}, {t:.2?}"),
    )
}

fn psi_at_origin() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, p) in [("P0", p0()), ("P1", p1())] {
        let start = Instant::now();
        let v = lopatinski::psi(&p, c64(0.0, 0.0), 1e-12).expect("psi(0)");
        let t = start.elapsed();
        let exact = (p.shock_gap() - (p.u_minus() - p.s())) / (p.q() * p.k());
        let rel = (v.value.re - exact).abs() / exact;
        ok &= rel <= 1e-10 && v.value.im == 0.0 && within(t, 0.1);
        parts.push(format!(
            "{name}: {:.10} (rel {rel:.1e}, {t:.2?})",
            v.value.re
        ));
    }
    outcome(ok, parts.join("; "))
}

fn oracle_agreement() -> Outcome {
    let start = Instant::now();
    let grid = rectangle_grid((0.0, 5.0), (-5.0, 5.0), 9, 9);
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, p) in [("P0", p0()), ("P1", p1())] {
        let (s, _) = oracle_summary(&p, &grid, 40.0, 1e-10, 1e-4);
        ok &= s.failures == 0 && s.max_relative <= 1e-4 && s.max_absolute <= 1e-8;
        parts.push(format!(
            "{name}: max rel {:.2e}, abs at 0 {:.1e}",
            s.max_relative, s.max_absolute
        ));
    }
    let t = start.elapsed();
    ok &= within(t, 10.0);
    outcome(ok, format!("{}, {t:.2?}", parts.join("; ")))
}

fn condition_d() -> Outcome {
    let start = Instant::now();
    let opts = VerifyOptions::default();
    let mut stable = 0;
    let mut total = 0;
    for p in [p0(), p1()] {
        let r = verify_condition_d(&p, &opts);
        total += 1;
        if r.verdict == Verdict::StableConditionD
            && r.winding_open_half_plane == Some(0)
            && r.winding_small_circle == Some(1)
        {
            stable += 1;
        }
    }
    let sweep = parameter_sweep(&SweepSpec::reference(), &opts);
    for row in &sweep.rows {
        total += 1;
        if let Some(r) = &row.report {
            if r.verdict == Verdict::StableConditionD
                && r.winding_open_half_plane == Some(0)
                && r.winding_small_circle == Some(1)
            {
                stable += 1;
            }
        }
    }
    let t = start.elapsed();
    outcome(
        stable == 29 && total == 29 && within(t, 60.0),
        format!("{stable}/{total} StableConditionD with windings (0, 1), {t:.2?}"),
    )
}

fn simple_zero() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, p) in [("P0", p0()), ("P1", p1())] {
        let opts = EvalOptions::with_tol(1e-13);
        let h = 1e-6;
        let d = |x: f64| {
            lopatinski::evaluate(&p, c64(x, 0.0), &opts)
                .expect("D")
                .d_value
        };
        let slope = ((d(h) - d(-h)) / (2.0 * h)).re;
        let floor = coeff_floor(&p);
        let rel = (slope - floor).abs() / floor;
        ok &= rel <= 1e-8;
        parts.push(format!(
            "{name}: D'(0) {slope:.10} vs floor {floor:.10} (rel {rel:.1e})"
        ));
    }
    outcome(ok, parts.join("; "))
}

fn random_params(rng: &mut ChaCha8Rng) -> DetonationParams {
    let up = rng.gen_range(0.0..2.0);
    let gap = rng.gen_range(0.1..3.0);
    let qf = rng.gen_range(0.01..0.99);
    let k = rng.gen_range(-3.0f64..3.0).exp();
    let uif = rng.gen_range(0.05..0.95);
    sweep_point(up, up + gap, qf, k, uif).expect("admissible draw")
}

fn bound_chain() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut min_coeff = f64::INFINITY;
    let mut failures = 0;
    let mut cases = 0;
    for _ in 0..1000 {
        let p = random_params(&mut rng);
        let psi0 = lopatinski::psi(&p, c64(0.0, 0.0), 1e-12)
            .expect("psi(0)")
            .value
            .re;
        for _ in 0..25 {
            let rho = 10.0 * p.k() * rng.gen::<f64>().sqrt();
            let theta = rng.gen_range(-std::f64::consts::FRAC_PI_2..=std::f64::consts::FRAC_PI_2);
            let lam = Complex64::from_polar(rho, theta);
            cases += 1;
            match lopatinski::psi(&p, lam, 1e-10) {
                Ok(v) => {
                    let excess = v.value.norm() - psi0;
                    let coeff = lopatinski::stability_coefficient(&p, v.value).re;
                    worst_excess = worst_excess.max(excess);
                    min_coeff = min_coeff.min(coeff);
                    if excess > 1e-9 || coeff.is_nan() || coeff <= 0.0 {
                        failures += 1;
                    }
                }
                Err(_) => failures += 1,
            }
        }
    }
    let t = start.elapsed();
    outcome(
        failures == 0 && within(t, 60.0),
        format!(
            "{cases} cases, {failures} failures, max |Ψ| - Ψ(0) = {worst_excess:.2e}, min Re coefficient {min_coeff:.4}, {t:.2?}"
        ),
    )
}

fn conjugate_symmetry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for p in [p0(), p1()] {
        for _ in 0..100 {
            let lam = c64(rng.gen_range(0.0..10.0), rng.gen_range(-10.0..10.0));
            let d = lopatinski::det_closed_form(&p, lam).expect("D").d_value;
            let dc = lopatinski::det_closed_form(&p, lam.conj())
                .expect("D")
                .d_value;
            worst = worst.max((dc - d.conj()).norm() / (1.0 + d.norm()));
        }
    }
    outcome(
        worst <= 1e-12,
        format!("max |D(conj λ) - conj D(λ)|/(1+|D|) = {worst:.2e} over 2×100 λ"),
    )
}

fn winding_robustness() -> Outcome {
    let p = p0();
    let base = verify_condition_d(&p, &VerifyOptions::default());
    let fine = verify_condition_d(
        &p,
        &VerifyOptions {
            n0: 2 * VerifyOptions::default().n0,
            indent_r: Some(0.5 * base.indent_r),
            ..Default::default()
        },
    );
    let a = (base.winding_open_half_plane, base.winding_small_circle);
    let b = (fine.winding_open_half_plane, fine.winding_small_circle);
    outcome(
        a == b && a == (Some(0), Some(1)),
        format!(
            "n0 {} r {}: {a:?}; n0 {} r {}: {b:?}",
            VerifyOptions::default().n0,
            base.indent_r,
            2 * VerifyOptions::default().n0,
            fine.indent_r
        ),
    )
}

fn time_domain() -> Outcome {
    let start = Instant::now();
    let (s, _, _) =
        znd_cli::simulate(&p0(), &ExperimentSpec::reference(0.05), true).expect("simulation");
    let t = start.elapsed();
    let control = s.control_ratio.unwrap_or(f64::INFINITY);
    outcome(
        s.decay_ratio <= 0.5 && control < 0.2 && within(t, 60.0),
        format!(
            "distance {:.4e} -> {:.4e} (ratio {:.4}), control drift {:.4e} ({:.1}% of initial), {t:.2?}",
            s.initial_distance,
            s.final_distance,
            s.decay_ratio,
            s.control_final_distance.unwrap_or(f64::NAN),
            100.0 * control
        ),
    )
}

fn determinism() -> Outcome {
    let dirs = [
        tempfile::tempdir().expect("tempdir"),
        tempfile::tempdir().expect("tempdir"),
    ];
    let mut manifests = Vec::new();
    let mut all_files = Vec::new();
    for d in &dirs {
        let opts = RunOptions::new(d.path());
        let mut art = Artifacts::default();
        let (status, _) = reproduce::reproduce(&opts, &mut art).expect("reproduce");
        art.commit(d.path()).expect("write");
        manifests.push(std::fs::read(d.path().join(reproduce::MANIFEST)).expect("manifest"));
        all_files.push((status, art.files));
    }
    let same_manifest = manifests[0] == manifests[1];
    let same_files = all_files[0].1 == all_files[1].1;
    outcome(
        same_manifest && same_files,
        format!(
            "manifests identical: {same_manifest}, {} files identical: {same_files}, status {:?}",
            all_files[0].1.len(),
            all_files[0].0
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("profile correctness", profile_correctness),
        ("Ψ(0) exact value", psi_at_origin),
        ("closed form vs ODE oracle", oracle_agreement),
        ("condition (D) on 29 cases", condition_d),
        ("simple zero at the origin", simple_zero),
        ("bound chain on random draws", bound_chain),
        ("conjugate symmetry", conjugate_symmetry),
        ("winding robustness", winding_robustness),
        ("time-domain relaxation", time_domain),
        ("reproduce determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} [{}] {name}: {}",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
