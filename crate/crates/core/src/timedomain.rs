//! First-order finite-volume solver for the reactive Burgers system in the
//! frame moving with the detonation, `ξ = x − st`:
//!
//! ```text
//! (u + qz)_t + (u²/2 − s(u + qz))_ξ = 0
//! z_t − s z_ξ = −kφ(u) z
//! ```
//!
//! The conserved variable `w = u + qz` is updated with a local
//! Lax–Friedrichs flux, `z` is advected upwind, and the reaction is
//! integrated exactly with `w` frozen. The three stages are Strang split
//! (half reaction, transport, half reaction).
//!
//! Boundaries: the right edge sees the quiescent state `(u_plus, 1)` flowing
//! in (all characteristic speeds there are negative); the left edge uses
//! zero-gradient extrapolation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::DetonationParams;
use crate::profile::profile_at;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("grid error: {0}")]
    Grid(String),
    #[error("time step {dt} exceeds the CFL limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("non-finite state at t = {t} in cell {cell}")]
    NonFiniteState { t: f64, cell: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RightBoundary {
    /// Fixed quiescent inflow `(u_plus, 1)`.
    #[default]
    Inflow,
    /// Zero-gradient extrapolation.
    Extrapolate,
}

fn default_cfl() -> f64 {
    0.4
}

/// Uniform grid of `cells` cells on `[−x_left, x_right]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimGrid {
    pub x_left: f64,
    pub x_right: f64,
    pub cells: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub right_boundary: RightBoundary,
}

impl SimGrid {
    pub fn new(x_left: f64, x_right: f64, cells: usize) -> Self {
        SimGrid {
            x_left,
            x_right,
            cells,
            cfl: default_cfl(),
            right_boundary: RightBoundary::Inflow,
        }
    }

    pub fn dx(&self) -> f64 {
        (self.x_right + self.x_left) / self.cells as f64
    }
}

/// Additive Gaussian bump `a·exp(−½((ξ − center)/width)²)` in `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
}

impl Perturbation {
    pub fn none() -> Self {
        Perturbation {
            amplitude: 0.0,
            width: 1.0,
            center: 0.0,
        }
    }

    pub fn at(&self, xi: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let r = (xi - self.center) / self.width;
        self.amplitude * (-0.5 * r * r).exp()
    }
}

/// Minimum number of cells per reaction length `s/k`.
pub const MIN_CELLS_PER_REACTION_LENGTH: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimState {
    pub xi: Vec<f64>,
    pub u: Vec<f64>,
    pub z: Vec<f64>,
    pub t: f64,
    pub dx: f64,
    pub cfl: f64,
    pub right_boundary: RightBoundary,
    pub steps: usize,
}

impl SimState {
    pub fn mass(&self, q: f64) -> f64 {
        self.u
            .iter()
            .zip(&self.z)
            .map(|(u, z)| u + q * z)
            .sum::<f64>()
            * self.dx
    }
}

/// Average of the exact profile `ū` over `[center − dx/2, center + dx/2]`.
/// Smooth cells use the midpoint value; the cell holding the shock splits
/// at `ξ = 0`.
pub fn profile_cell_average(params: &DetonationParams, center: f64, dx: f64) -> f64 {
    let (a, b) = (center - 0.5 * dx, center + 0.5 * dx);
    if b <= 0.0 || a >= 0.0 {
        return profile_at(params, center).u_bar;
    }
    let left = profile_at(params, 0.5 * a).u_bar;
    (-a * left + b * params.u_plus()) / dx
}

pub fn init_state(
    params: &DetonationParams,
    grid: &SimGrid,
    perturbation: &Perturbation,
) -> Result<SimState, SimError> {
    let len = grid.x_left + grid.x_right;
    if !(len > 0.0 && len.is_finite()) || grid.cells == 0 {
        return Err(SimError::Grid(format!(
            "empty domain [−{}, {}] with {} cells",
            grid.x_left, grid.x_right, grid.cells
        )));
    }
    if !(grid.cfl > 0.0 && grid.cfl < 1.0) {
        return Err(SimError::Grid(format!(
            "cfl must lie in (0, 1), got {}",
            grid.cfl
        )));
    }
    let dx = grid.dx();
    let per_length = params.s() / params.k() / dx;
    if per_length < MIN_CELLS_PER_REACTION_LENGTH {
        return Err(SimError::Grid(format!(
            "reaction length s/k = {} resolved by {per_length:.1} cells, need {MIN_CELLS_PER_REACTION_LENGTH}",
            params.s() / params.k()
        )));
    }
    if !(perturbation.width > 0.0) && perturbation.amplitude != 0.0 {
        return Err(SimError::Grid(format!(
            "perturbation width must be positive, got {}",
            perturbation.width
        )));
    }
    let xi: Vec<f64> = (0..grid.cells)
        .map(|j| -grid.x_left + (j as f64 + 0.5) * dx)
        .collect();
    let u = xi
        .iter()
        .map(|&x| profile_cell_average(params, x, dx) + perturbation.at(x))
        .collect();
    let z = xi.iter().map(|&x| profile_at(params, x).z_bar).collect();
    Ok(SimState {
        xi,
        u,
        z,
        t: 0.0,
        dx,
        cfl: grid.cfl,
        right_boundary: grid.right_boundary,
        steps: 0,
    })
}

/// Largest characteristic speed magnitude, `max(|u − s|, s)`.
pub fn max_wave_speed(state: &SimState, params: &DetonationParams) -> f64 {
    let s = params.s();
    state.u.iter().fold(s, |m, &u| m.max((u - s).abs()))
}

pub fn stable_dt(state: &SimState, params: &DetonationParams) -> f64 {
    state.cfl * state.dx / max_wave_speed(state, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepInfo {
    pub dt: f64,
    /// `|Δ∫w − Δt·(F_left − F_right)|` for the transport stage.
    pub mass_residual: f64,
    pub flux_left: f64,
    pub flux_right: f64,
}

fn react(state: &mut SimState, params: &DetonationParams, dt: f64) {
    let q = params.q();
    let k = params.k();
    for (u, z) in state.u.iter_mut().zip(state.z.iter_mut()) {
        // u only grows as z burns at fixed w, so φ cannot switch off mid-step.
        let phi = params.ignition(*u);
        if phi == 0.0 || *z == 0.0 {
            continue;
        }
        let w = *u + q * *z;
        *z *= (-k * phi * dt).exp();
        *u = w - q * *z;
    }
}

fn transport(state: &mut SimState, params: &DetonationParams, dt: f64) -> (f64, f64, f64) {
    let (s, q) = (params.s(), params.q());
    let n = state.u.len();
    let ghost_left = (state.u[0], state.z[0]);
    let ghost_right = match state.right_boundary {
        RightBoundary::Inflow => (params.u_plus(), 1.0),
        RightBoundary::Extrapolate => (state.u[n - 1], state.z[n - 1]),
    };
    let cell = |j: isize| -> (f64, f64) {
        if j < 0 {
            ghost_left
        } else if j as usize >= n {
            ghost_right
        } else {
            (state.u[j as usize], state.z[j as usize])
        }
    };
    let flux_w = |u: f64, z: f64| 0.5 * u * u - s * (u + q * z);
    // Interface i sits between cells i − 1 and i.
    let mut fw = Vec::with_capacity(n + 1);
    let mut fz = Vec::with_capacity(n + 1);
    for i in 0..=n as isize {
        let (ul, zl) = cell(i - 1);
        let (ur, zr) = cell(i);
        let alpha = (ul - s).abs().max((ur - s).abs());
        let (wl, wr) = (ul + q * zl, ur + q * zr);
        fw.push(0.5 * (flux_w(ul, zl) + flux_w(ur, zr)) - 0.5 * alpha * (wr - wl));
        fz.push(-s * zr);
    }
    let r = dt / state.dx;
    let mut before = 0.0;
    let mut after = 0.0;
    for j in 0..n {
        let w = state.u[j] + q * state.z[j];
        before += w;
        let w_new = w - r * (fw[j + 1] - fw[j]);
        let z_new = state.z[j] - r * (fz[j + 1] - fz[j]);
        after += w_new;
        state.z[j] = z_new;
        state.u[j] = w_new - q * z_new;
    }
    let residual = ((after - before) * state.dx - dt * (fw[0] - fw[n])).abs();
    (residual, fw[0], fw[n])
}

/// Advances one Strang-split step with `dt = min(cfl·dx / max speed, max_dt)`.
pub fn step(
    state: &mut SimState,
    params: &DetonationParams,
    max_dt: Option<f64>,
) -> Result<StepInfo, SimError> {
    let limit = stable_dt(state, params);
    let dt = max_dt.map_or(limit, |m| m.min(limit));
    step_with_dt(state, params, dt)
}

/// Advances one step with a caller-chosen `dt`, rejecting steps beyond the CFL limit.
pub fn step_with_dt(
    state: &mut SimState,
    params: &DetonationParams,
    dt: f64,
) -> Result<StepInfo, SimError> {
    let limit = stable_dt(state, params);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) || !limit.is_finite() {
        return Err(SimError::CflViolation { dt, limit });
    }
    react(state, params, 0.5 * dt);
    let (mass_residual, flux_left, flux_right) = transport(state, params, dt);
    react(state, params, 0.5 * dt);
    state.t += dt;
    state.steps += 1;
    if let Some(cell) = state
        .u
        .iter()
        .zip(&state.z)
        .position(|(u, z)| !(u.is_finite() && z.is_finite()))
    {
        return Err(SimError::NonFiniteState { t: state.t, cell });
    }
    Ok(StepInfo {
        dt,
        mass_residual,
        flux_left,
        flux_right,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceOptions {
    /// Shifts are searched in `[−window, window]`.
    pub window: f64,
    pub coarse_points: usize,
    pub tol: f64,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions {
            window: 1.0,
            coarse_points: 81,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitDistance {
    pub distance: f64,
    pub shift: f64,
}

/// L¹ distance between `state.u` and the profile translated by `shift`.
pub fn l1_to_translate(state: &SimState, params: &DetonationParams, shift: f64) -> f64 {
    state
        .xi
        .iter()
        .zip(&state.u)
        .map(|(&x, &u)| (u - profile_cell_average(params, x - shift, state.dx)).abs())
        .sum::<f64>()
        * state.dx
}

/// `min_δ ‖u − ū(· − δ)‖₁`: a coarse scan brackets the minimum, golden
/// section refines it.
pub fn distance_to_orbit_with(
    state: &SimState,
    params: &DetonationParams,
    opts: &DistanceOptions,
) -> OrbitDistance {
    let f = |d: f64| l1_to_translate(state, params, d);
    let n = opts.coarse_points.max(3);
    let h = 2.0 * opts.window / (n - 1) as f64;
    let (mut best_j, mut best) = (0, f64::INFINITY);
    for j in 0..n {
        let v = f(-opts.window + h * j as f64);
        if v < best {
            best = v;
            best_j = j;
        }
    }
    let center = -opts.window + h * best_j as f64;
    let (mut a, mut b) = (center - h, center + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > opts.tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    // The bracket endpoints were already seen by the scan.
    if fm <= best {
        OrbitDistance {
            distance: fm,
            shift: mid,
        }
    } else {
        OrbitDistance {
            distance: best,
            shift: center,
        }
    }
}

pub fn distance_to_orbit(state: &SimState, params: &DetonationParams) -> f64 {
    distance_to_orbit_with(state, params, &DistanceOptions::default()).distance
}

fn default_record_every() -> usize {
    50
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub grid: SimGrid,
    pub perturbation: Perturbation,
    pub horizon: f64,
    /// Metrics are recorded every this many steps (and at the end).
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// Snapshots of the fields every this many steps; none when absent.
    #[serde(default)]
    pub snapshot_every: Option<usize>,
}

impl ExperimentSpec {
    /// 2000 cells on `[−20, 5]`, a bump of height `amplitude` and unit width
    /// centred at `ξ = −3`, horizon 30.
    pub fn reference(amplitude: f64) -> Self {
        ExperimentSpec {
            grid: SimGrid::new(20.0, 5.0, 2000),
            perturbation: Perturbation {
                amplitude,
                width: 1.0,
                center: -3.0,
            },
            horizon: 30.0,
            record_every: 50,
            snapshot_every: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricRow {
    pub t: f64,
    pub step: usize,
    pub distance: f64,
    pub shift: f64,
    pub mass_residual: f64,
    pub mass_residual_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub xi: Vec<f64>,
    pub u: Vec<f64>,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub metrics: Vec<MetricRow>,
    #[serde(skip)]
    pub snapshots: Vec<Snapshot>,
    pub initial_distance: f64,
    pub final_distance: f64,
    pub final_shift: f64,
    /// Accumulated per-step mass-balance residual.
    pub mass_residual_total: f64,
    pub mass_residual_max: f64,
    pub steps: usize,
}

fn snapshot(state: &SimState) -> Snapshot {
    Snapshot {
        t: state.t,
        xi: state.xi.clone(),
        u: state.u.clone(),
        z: state.z.clone(),
    }
}

pub fn run_experiment(
    params: &DetonationParams,
    spec: &ExperimentSpec,
) -> Result<ExperimentResult, SimError> {
    if !(spec.horizon >= 0.0 && spec.horizon.is_finite()) {
        return Err(SimError::Grid(format!(
            "horizon must be finite and non-negative, got {}",
            spec.horizon
        )));
    }
    let mut state = init_state(params, &spec.grid, &spec.perturbation)?;
    let opts = DistanceOptions::default();
    let d0 = distance_to_orbit_with(&state, params, &opts);
    let mut metrics = vec![MetricRow {
        t: 0.0,
        step: 0,
        distance: d0.distance,
        shift: d0.shift,
        mass_residual: 0.0,
        mass_residual_max: 0.0,
    }];
    let mut snapshots = Vec::new();
    if spec.snapshot_every.is_some() {
        snapshots.push(snapshot(&state));
    }
    let every = spec.record_every.max(1);
    let (mut total, mut worst) = (0.0, 0.0f64);
    let mut last = d0;
    while state.t < spec.horizon {
        let remaining = spec.horizon - state.t;
        let info = step(&mut state, params, Some(remaining))?;
        // Guard against a sliver of a step left by rounding.
        if spec.horizon - state.t < 1e-12 * spec.horizon.max(1.0) {
            state.t = spec.horizon;
        }
        total += info.mass_residual;
        worst = worst.max(info.mass_residual);
        let done = state.t >= spec.horizon;
        if state.steps % every == 0 || done {
            last = distance_to_orbit_with(&state, params, &opts);
            metrics.push(MetricRow {
                t: state.t,
                step: state.steps,
                distance: last.distance,
                shift: last.shift,
                mass_residual: info.mass_residual,
                mass_residual_max: worst,
            });
        }
        if let Some(n) = spec.snapshot_every {
            if state.steps % n.max(1) == 0 || done {
                snapshots.push(snapshot(&state));
            }
        }
    }
    Ok(ExperimentResult {
        metrics,
        snapshots,
        initial_distance: d0.distance,
        final_distance: last.distance,
        final_shift: last.shift,
        mass_residual_total: total,
        mass_residual_max: worst,
        steps: state.steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{p0, p1};

    fn bump() -> Perturbation {
        Perturbation {
            amplitude: 0.05,
            width: 1.0,
            center: -3.0,
        }
    }

    #[test]
    fn unperturbed_init_matches_profile() {
        let p = p0();
        let st = init_state(&p, &SimGrid::new(20.0, 5.0, 2000), &Perturbation::none()).unwrap();
        assert_eq!(st.u.len(), 2000);
        assert!((st.dx - 0.0125).abs() < 1e-15);
        let j = st.xi.iter().position(|&x| x > -3.0).unwrap();
        assert_eq!(st.u[j], profile_at(&p, st.xi[j]).u_bar);
        assert!(distance_to_orbit(&st, &p) < 1e-12);
    }

    #[test]
    fn perturbation_leaves_z_alone() {
        let p = p0();
        let grid = SimGrid::new(20.0, 5.0, 2000);
        let a = init_state(&p, &grid, &Perturbation::none()).unwrap();
        let b = init_state(&p, &grid, &bump()).unwrap();
        assert_eq!(a.z, b.z);
        assert!(b.u.iter().zip(&a.u).any(|(x, y)| x != y));
        // ‖bump‖₁ = a·w·√(2π) when the bump sits well inside the domain.
        let d = distance_to_orbit(&b, &p);
        assert!(d > 0.0);
        assert!(d <= 0.05 * (2.0 * std::f64::consts::PI).sqrt() + 1e-9);
    }

    #[test]
    fn grid_errors() {
        let p = p0();
        assert!(matches!(
            init_state(&p, &SimGrid::new(20.0, 5.0, 200), &Perturbation::none()),
            Err(SimError::Grid(_))
        ));
        let mut g = SimGrid::new(20.0, 5.0, 2000);
        g.cfl = 1.5;
        assert!(matches!(
            init_state(&p, &g, &Perturbation::none()),
            Err(SimError::Grid(_))
        ));
    }

    fn constant_state(u: f64, z: f64, bc: RightBoundary) -> SimState {
        let n = 100;
        let dx = 0.05;
        SimState {
            xi: (0..n).map(|j| (j as f64 + 0.5) * dx).collect(),
            u: vec![u; n],
            z: vec![z; n],
            t: 0.0,
            dx,
            cfl: 0.4,
            right_boundary: bc,
            steps: 0,
        }
    }

    #[test]
    fn quiescent_state_is_stationary() {
        let p = p0();
        let mut st = constant_state(p.u_plus(), 1.0, RightBoundary::Inflow);
        let before = st.clone();
        for _ in 0..200 {
            step(&mut st, &p, None).unwrap();
        }
        assert_eq!(st.u, before.u);
        assert_eq!(st.z, before.z);
    }

    #[test]
    fn burnt_state_is_stationary() {
        let p = p0();
        let mut st = constant_state(p.u_minus(), 0.0, RightBoundary::Extrapolate);
        let before = st.clone();
        for _ in 0..200 {
            step(&mut st, &p, None).unwrap();
        }
        assert_eq!(st.u, before.u);
        assert_eq!(st.z, before.z);
    }

    #[test]
    fn cfl_violation_rejected() {
        let p = p0();
        let mut st = constant_state(p.u_plus(), 1.0, RightBoundary::Inflow);
        let limit = stable_dt(&st, &p);
        assert!(matches!(
            step_with_dt(&mut st, &p, 2.0 * limit),
            Err(SimError::CflViolation { .. })
        ));
    }

    #[test]
    fn non_finite_state_detected() {
        let p = p0();
        let mut st = constant_state(p.u_plus(), 1.0, RightBoundary::Inflow);
        st.z[10] = f64::NAN;
        assert!(matches!(
            step(&mut st, &p, Some(1e-3)),
            Err(SimError::NonFiniteState { .. })
        ));
    }

    #[test]
    fn mass_balance_and_z_bounds() {
        let p = p1();
        let mut st = init_state(&p, &SimGrid::new(10.0, 2.5, 1000), &bump()).unwrap();
        for _ in 0..300 {
            let info = step(&mut st, &p, None).unwrap();
            assert!(info.mass_residual <= 1e-10, "{}", info.mass_residual);
            assert!(st.z.iter().all(|&z| (0.0..=1.0).contains(&z)));
        }
    }

    #[test]
    fn shifted_profile_recovered() {
        let p = p0();
        let grid = SimGrid::new(20.0, 5.0, 2000);
        let mut st = init_state(&p, &grid, &Perturbation::none()).unwrap();
        let shift = 0.5 * st.dx;
        for (u, &x) in st.u.iter_mut().zip(&st.xi) {
            *u = profile_cell_average(&p, x - shift, st.dx);
        }
        let d = distance_to_orbit_with(&st, &p, &DistanceOptions::default());
        assert!(d.distance < 1e-6, "{d:?}");
        assert!((d.shift - shift).abs() < 1e-4, "{d:?}");
    }

    fn control_drift(cells: usize, horizon: f64) -> f64 {
        let p = p0();
        let spec = ExperimentSpec {
            grid: SimGrid::new(20.0, 5.0, cells),
            perturbation: Perturbation::none(),
            horizon,
            record_every: 1_000_000,
            snapshot_every: None,
        };
        run_experiment(&p, &spec).unwrap().final_distance
    }

    #[test]
    fn control_drift_is_first_order() {
        let coarse = control_drift(500, 5.0);
        let fine = control_drift(1000, 5.0);
        let ratio = coarse / fine;
        assert!(fine > 0.0);
        assert!(
            (1.5..2.6).contains(&ratio),
            "coarse {coarse}, fine {fine}, ratio {ratio}"
        );
    }

    #[test]
    fn horizon_zero_records_initial_only() {
        let p = p0();
        let mut spec = ExperimentSpec::reference(0.05);
        spec.horizon = 0.0;
        let r = run_experiment(&p, &spec).unwrap();
        assert_eq!(r.metrics.len(), 1);
        assert_eq!(r.steps, 0);
        assert_eq!(r.initial_distance, r.final_distance);
    }
}
