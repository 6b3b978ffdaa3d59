//! Certification of the spectral stability condition: `D` has a single
//! zero on `Re λ ≥ 0`, a simple one at the origin.
//!
//! The check combines two winding numbers with the analytic bound chain:
//!
//! * on `Re λ ≥ 0`, `|Ψ(λ)| ≤ Ψ(0) = ((s − u_plus) − c₋)/(qk)` ([`psi_max`]);
//! * hence `Re(u_star − u_plus − q − qkΨ) ≥ s − u_plus − q + c₋ > 0`
//!   ([`coeff_floor`]), so the first factor of `D` can only vanish for
//!   `(u_star − u_plus)|λ| ≤ k(u_star − u_plus + q + qk·Ψ(0))` ([`radius_bound`]);
//! * the indented half-disc of that radius must then carry winding 0 and the
//!   small circle around the origin winding 1.

mod contour;
mod sweep;

use serde::Serialize;
use thiserror::Error;

pub use contour::{
    circle_contour, half_plane_contour, winding_number, Contour, ContourSample, Piece, TracePoint,
    WindingOutcome, DYNAMIC_FLOOR, PHASE_STEP_LIMIT, ZERO_FLOOR,
};
pub use sweep::{parameter_sweep, sweep_point, SweepRow, SweepSpec, SweepTable};

use crate::evans::rectangle_grid;
use crate::lopatinski::{self, psi_abscissa, stability_coefficient, EvalOptions};
use crate::params::{DetonationParams, ParamsError};
use crate::{c64, Complex64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("invalid contour geometry: {0}")]
    Geometry(String),
    #[error("refinement exhausted at depth {depth} near λ = {at}")]
    RefinementExhausted { at: Complex64, depth: usize },
    #[error("function vanishes on the contour near λ = {at} (|D| = {abs:e})")]
    ZeroOnContour { at: Complex64, abs: f64 },
    #[error("accumulated phase is not a whole number of turns: {0}")]
    NonIntegerWinding(f64),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

/// Bound `|Ψ(λ)| ≤ ((s − u_plus) − c₋)/(qk)` on `Re λ ≥ 0`, equal to `Ψ(0)`.
pub fn psi_max(params: &DetonationParams) -> f64 {
    lopatinski::psi_at_origin_exact(params)
}

/// Lower bound `s − u_plus − q + c₋` on `Re(u_star − u_plus − q − qkΨ)`;
/// also the derivative `D'(0)`.
pub fn coeff_floor(params: &DetonationParams) -> f64 {
    params.shock_gap() - params.q() + params.c_minus()
}

/// Both links of the bound chain at one value of `Ψ`: `|Ψ| ≤ psi_max + slack`
/// and `Re(u_star − u_plus − q − qkΨ) > 0`.
pub fn stability_bounds_hold(params: &DetonationParams, psi: Complex64, slack: f64) -> bool {
    psi.norm() <= psi_max(params) + slack && stability_coefficient(params, psi).re > 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusBound {
    pub base: f64,
    pub safety: f64,
    pub derivation: String,
}

/// Multiplier applied to the analytic radius.
pub const RADIUS_SAFETY: f64 = 2.0;

/// Radius beyond which `D` cannot vanish on `Re λ ≥ 0`.
pub fn radius_bound(params: &DetonationParams) -> RadiusBound {
    let (q, k) = (params.q(), params.k());
    let jump = params.u_star() - params.u_plus();
    let pm = psi_max(params);
    let base = k * (jump + q + q * k * pm) / jump;
    RadiusBound {
        base,
        safety: RADIUS_SAFETY * base,
        derivation: format!(
            "a zero with Re λ >= 0 needs (u_star - u_plus)|λ| = k|u_star - u_plus - q - qkΨ| <= k(u_star - u_plus + q + qk·psi_max); \
             R_base = {k}·({jump} + {q} + {q}·{k}·{pm})/{jump} = {base}; R = {RADIUS_SAFETY}·R_base"
        ),
    }
}

/// Default indentation radius: `min(0.05k, 0.05R, |abscissa|/2)`.
pub fn default_indent(params: &DetonationParams, big_r: f64) -> f64 {
    (0.05 * params.k())
        .min(0.05 * big_r)
        .min(0.5 * psi_abscissa(params).abs())
}

pub const MIN_SAMPLES: usize = 16;

/// Indented half-disc contour and the small circle around the origin.
pub fn build_contours(
    params: &DetonationParams,
    r: f64,
    big_r: f64,
    n0: usize,
) -> Result<(Contour, Contour), StabilityError> {
    if !(r > 0.0 && r.is_finite() && big_r.is_finite()) {
        return Err(StabilityError::Geometry(format!(
            "radii must be positive and finite (r = {r}, R = {big_r})"
        )));
    }
    if r >= big_r {
        return Err(StabilityError::Geometry(format!(
            "need r < R, got r = {r}, R = {big_r}"
        )));
    }
    if r >= params.k() {
        return Err(StabilityError::Geometry(format!(
            "small circle r = {r} must stay inside Re λ > −k (k = {})",
            params.k()
        )));
    }
    let abscissa = psi_abscissa(params);
    if r >= abscissa.abs() {
        return Err(StabilityError::Geometry(format!(
            "small circle r = {r} crosses the convergence abscissa Re λ = {abscissa}"
        )));
    }
    if n0 < MIN_SAMPLES {
        return Err(StabilityError::Geometry(format!(
            "need at least {MIN_SAMPLES} samples, got {n0}"
        )));
    }
    Ok((half_plane_contour(r, big_r, n0), circle_contour(r, n0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    StableConditionD,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub eval: EvalOptions,
    pub n0: usize,
    pub max_depth: usize,
    pub indent_r: Option<f64>,
    pub radius: Option<f64>,
    /// Side of the pointwise λ grid for the coefficient and `|Ψ|` checks.
    pub sample_grid: usize,
    /// Slack on `|Ψ| ≤ psi_max` beyond the quadrature error estimate.
    pub bound_slack: f64,
    pub keep_trace: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            eval: EvalOptions::default(),
            n0: 64,
            max_depth: 24,
            indent_r: None,
            radius: None,
            sample_grid: 9,
            bound_slack: 1e-9,
            keep_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub params: DetonationParams,
    pub winding_open_half_plane: Option<i64>,
    pub winding_small_circle: Option<i64>,
    #[serde(rename = "radius_R")]
    pub radius_r_big: f64,
    #[serde(rename = "radius_R_base")]
    pub radius_base: f64,
    pub radius_derivation: String,
    pub indent_r: f64,
    pub psi_max: f64,
    pub psi_at_origin: Option<f64>,
    pub coeff_floor: f64,
    #[serde(rename = "min_abs_D")]
    pub min_abs_d: f64,
    pub min_coeff_real_on_grid: Option<f64>,
    pub max_psi_abs_on_grid: Option<f64>,
    pub grid_points: usize,
    pub evaluations: usize,
    pub verdict: Verdict,
    pub diagnostics: Vec<String>,
    #[serde(skip)]
    pub half_plane_trace: Vec<TracePoint>,
    #[serde(skip)]
    pub small_circle_trace: Vec<TracePoint>,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.verdict == Verdict::StableConditionD
    }
}

pub fn decide(half: Option<i64>, small: Option<i64>, floor: f64) -> Verdict {
    match (half, small) {
        (Some(0), Some(1)) if floor > 0.0 => Verdict::StableConditionD,
        (Some(_), Some(_)) => Verdict::Violated,
        _ if !(floor > 0.0) => Verdict::Violated,
        _ => Verdict::Inconclusive,
    }
}

/// Runs the full certification for one parameter set. Numerical failures
/// become an `Inconclusive` verdict with diagnostics.
pub fn verify_condition_d(params: &DetonationParams, opts: &VerifyOptions) -> StabilityReport {
    let mut diagnostics = Vec::new();
    let pm = psi_max(params);
    let floor = coeff_floor(params);
    let bound = radius_bound(params);
    let big_r = opts.radius.unwrap_or(bound.safety);
    let r = opts
        .indent_r
        .unwrap_or_else(|| default_indent(params, big_r));
    let mut evaluations = 0;

    let det = |lam: Complex64| lopatinski::evaluate(params, lam, &opts.eval).map(|e| e.d_value);

    let mut half = None;
    let mut small = None;
    let mut min_abs = f64::INFINITY;
    let mut half_trace = Vec::new();
    let mut small_trace = Vec::new();
    match build_contours(params, r, big_r, opts.n0) {
        Ok((half_contour, circle)) => {
            match winding_number(det, &half_contour, opts.max_depth) {
                Ok(w) => {
                    half = Some(w.winding);
                    evaluations += w.evaluations;
                    min_abs = min_abs.min(w.refined.min_abs_on_contour);
                    if opts.keep_trace {
                        half_trace = w.trace;
                    }
                }
                Err(e) => diagnostics.push(format!("half-plane contour: {e}")),
            }
            match winding_number(det, &circle, opts.max_depth) {
                Ok(w) => {
                    small = Some(w.winding);
                    evaluations += w.evaluations;
                    min_abs = min_abs.min(w.refined.min_abs_on_contour);
                    if opts.keep_trace {
                        small_trace = w.trace;
                    }
                }
                Err(e) => diagnostics.push(format!("small circle: {e}")),
            }
        }
        Err(e) => diagnostics.push(e.to_string()),
    }

    // Pointwise bound-chain check on a grid covering the half-disc's box.
    let psi_at_origin = match lopatinski::psi_with(params, c64(0.0, 0.0), &opts.eval) {
        Ok(v) => Some(v.value.re),
        Err(e) => {
            diagnostics.push(format!("Ψ(0): {e}"));
            None
        }
    };
    let grid = rectangle_grid(
        (0.0, big_r),
        (-big_r, big_r),
        opts.sample_grid,
        opts.sample_grid,
    );
    let mut min_coeff: Option<f64> = None;
    let mut max_psi: Option<f64> = None;
    for lam in &grid {
        match lopatinski::psi_with(params, *lam, &opts.eval) {
            Ok(v) => {
                evaluations += 1;
                let coeff = stability_coefficient(params, v.value).re;
                let abs = v.value.norm();
                min_coeff = Some(min_coeff.map_or(coeff, |m| m.min(coeff)));
                max_psi = Some(max_psi.map_or(abs, |m| m.max(abs)));
                if !(coeff > 0.0) {
                    diagnostics.push(format!(
                        "Re(u_star - u_plus - q - qkΨ) = {coeff} <= 0 at λ = {lam}"
                    ));
                }
                if abs > pm + opts.bound_slack + 10.0 * v.error_estimate {
                    diagnostics.push(format!("|Ψ| = {abs} exceeds psi_max = {pm} at λ = {lam}"));
                }
            }
            Err(e) => diagnostics.push(format!("Ψ at λ = {lam}: {e}")),
        }
    }

    let verdict = decide(half, small, floor);
    if verdict != Verdict::StableConditionD {
        diagnostics.push(format!(
            "verdict {verdict:?}: windings (half-plane, circle) = ({half:?}, {small:?}), coeff_floor = {floor}"
        ));
    }
    StabilityReport {
        params: *params,
        winding_open_half_plane: half,
        winding_small_circle: small,
        radius_r_big: big_r,
        radius_base: bound.base,
        radius_derivation: bound.derivation,
        indent_r: r,
        psi_max: pm,
        psi_at_origin,
        coeff_floor: floor,
        min_abs_d: if min_abs.is_finite() { min_abs } else { 0.0 },
        min_coeff_real_on_grid: min_coeff,
        max_psi_abs_on_grid: max_psi,
        grid_points: grid.len(),
        evaluations,
        verdict,
        diagnostics,
        half_plane_trace: half_trace,
        small_circle_trace: small_trace,
    }
}
