//! Closed-form Lopatinski determinant.
//!
//! With `P(ξ) = λ / (ū(ξ) − s)` and `Q(ξ) = −(qk/s)·e^{((k+λ)/s)ξ}`, the
//! decaying solution of the eigenvalue system normalized by `Z₂(0) = 1` has
//!
//! ```text
//! Z₁(λ, 0) = −(qk/(k+λ))·(1 − λΨ(λ)),
//! Ψ(λ)     = ∫_{−∞}^0 e^{−∫_y^0 P} e^{((k+λ)/s)y} / (ū(y) − s) dy,
//! D(λ)     = ((u_star − u_plus)λ + (u_star − u_plus − q − qkΨ)k) · λ/(k+λ).
//! ```
//!
//! `Ψ` is evaluated in `t = e^{(k/s)y} ∈ (0, 1]`, where the inner integral of
//! `P` is available in closed form ([`p_antiderivative`]). For large
//! `|Im λ|` the integrand oscillates in `ln t`, and the evaluator switches to
//! integrating the scalar equation `Z₁' = −P·Z₁ + Q` instead.
//!
//! Note: the radicand of `P` uses `u_plus² − 2s·u_plus`, consistent with the
//! explicit profile and the antiderivative. The inner integration variable is
//! named `y`/`eta` here to avoid clashing with the wave speed `s`.

use serde::Serialize;
use thiserror::Error;

use crate::numerics::{
    adaptive_quad_with, integrate_ode_with, NumericsError, OdeOptions, QuadOptions, State,
};
use crate::params::DetonationParams;
use crate::profile::{radicand, reaction_gap};
use crate::{c64, Complex64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LopatinskiError {
    #[error("λ = {lambda} outside the domain Re λ > {abscissa}")]
    Domain { lambda: Complex64, abscissa: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiMethod {
    Quadrature,
    OdeFallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Switch to the ODE path when `|Im λ| > fallback_ratio · k`.
    pub fallback_ratio: f64,
    /// Force one method regardless of `λ`.
    pub force: Option<PsiMethod>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_intervals: 4000,
            fallback_ratio: 50.0,
            force: None,
        }
    }
}

impl EvalOptions {
    pub fn with_tol(rel_tol: f64) -> Self {
        EvalOptions {
            rel_tol,
            abs_tol: (rel_tol * 1e-3).max(1e-15),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiValue {
    pub value: Complex64,
    pub error_estimate: f64,
    pub method: PsiMethod,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LopatinskiEval {
    pub lambda: Complex64,
    pub psi: Complex64,
    pub z1_at_zero: Complex64,
    pub jump: [Complex64; 2],
    pub d_value: Complex64,
    pub quad_error: f64,
    /// Relative mismatch between the closed form and `−kZ₁ + λ(u_star − u_plus) − qk`.
    pub identity_residual: f64,
    pub method: PsiMethod,
}

/// `P(ξ) = λ / sqrt(c₋² + 2qs·e^{(k/s)ξ})` for `ξ ≤ 0`.
pub fn p_coeff(params: &DetonationParams, lambda: Complex64, xi: f64) -> Complex64 {
    lambda / reaction_gap(params, xi)
}

/// `F(ξ) = −(2λs/(k·c₋))·ln[(sqrt(c₋² + 2qs·e^{(k/s)ξ}) + c₋) / sqrt(2qs·e^{(k/s)ξ})]`,
/// an antiderivative of [`p_coeff`].
pub fn p_antiderivative(params: &DetonationParams, lambda: Complex64, xi: f64) -> Complex64 {
    lambda * p_antiderivative_unit(params, xi)
}

// F / λ, computed in log form so that very negative ξ does not underflow.
fn p_antiderivative_unit(params: &DetonationParams, xi: f64) -> f64 {
    let (s, k, q) = (params.s(), params.k(), params.q());
    let c = params.c_minus();
    let r = reaction_gap(params, xi);
    let log_ratio = (r + c).ln() - 0.5 * (2.0 * q * s).ln() - 0.5 * (k / s) * xi;
    -(2.0 * s / (k * c)) * log_ratio
}

/// Left edge of the half-plane where the `Ψ` integral converges:
/// `Re λ > −k·c₋/(c₋ + s)`.
pub fn psi_abscissa(params: &DetonationParams) -> f64 {
    let c = params.c_minus();
    -params.k() * c / (c + params.s())
}

/// `λ[W̄] − [A W̄']` at the shock: `(λ(u_plus − u_star) + qk, −k)`.
pub fn jump_vector(params: &DetonationParams, lambda: Complex64) -> [Complex64; 2] {
    let (q, k) = (params.q(), params.k());
    [
        lambda * (params.u_plus() - params.u_star()) + q * k,
        c64(-k, 0.0),
    ]
}

fn check_domain(params: &DetonationParams, lambda: Complex64) -> Result<(), LopatinskiError> {
    let abscissa = psi_abscissa(params);
    if !(lambda.re > abscissa) || !lambda.im.is_finite() {
        return Err(LopatinskiError::Domain { lambda, abscissa });
    }
    Ok(())
}

pub fn psi(
    params: &DetonationParams,
    lambda: Complex64,
    rel_tol: f64,
) -> Result<PsiValue, LopatinskiError> {
    psi_with(params, lambda, &EvalOptions::with_tol(rel_tol))
}

pub fn psi_with(
    params: &DetonationParams,
    lambda: Complex64,
    opts: &EvalOptions,
) -> Result<PsiValue, LopatinskiError> {
    check_domain(params, lambda)?;
    let method = opts
        .force
        .unwrap_or(if lambda.im.abs() > opts.fallback_ratio * params.k() {
            PsiMethod::OdeFallback
        } else {
            PsiMethod::Quadrature
        });
    match method {
        PsiMethod::Quadrature => psi_quadrature(params, lambda, opts),
        PsiMethod::OdeFallback => psi_via_ode(params, lambda, opts),
    }
}

fn psi_quadrature(
    params: &DetonationParams,
    lambda: Complex64,
    opts: &EvalOptions,
) -> Result<PsiValue, LopatinskiError> {
    let (s, k) = (params.s(), params.k());
    let c = params.c_minus();
    let a = params.shock_gap();
    let ln_ac = (a + c).ln();
    let inv_k = 1.0 / k;
    let p_scale = 2.0 * s / (k * c);
    // In t the integrand is (s/k)·t^{λ/k}·e^{F(y) − F(0)} / r(t) with
    // F(y) − F(0) = λ·(2s/(k c))·ln[sqrt(t)(a + c)/(r + c)].
    let integrand = |t: f64| {
        let r = radicand(params, t).sqrt();
        let ln_t = t.ln();
        let ln_rho = 0.5 * ln_t + ln_ac - (r + c).ln();
        let real_factor = inv_k * ln_t + p_scale * ln_rho;
        (lambda * real_factor - r.ln()).exp()
    };
    let qopts = QuadOptions {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol * k / s,
        max_intervals: opts.max_intervals,
    };
    let res = adaptive_quad_with(integrand, 0.0, 1.0, &qopts)?;
    Ok(PsiValue {
        value: res.value * (s / k),
        error_estimate: res.error_estimate * (s / k),
        method: PsiMethod::Quadrature,
        evaluations: res.evaluations,
    })
}

/// Decaying `Z₁(λ, 0)` (with `Z₂(0) = 1`) from the scalar equation
/// `Y' = (−P − μ)Y − qk/s`, `Y = Z₁e^{−μξ}`, `μ = (k+λ)/s`, seeded with the
/// asymptotic value `Y(−∞) = −(qk/s)/(μ + λ/c₋)`.
pub fn z1_by_ode(
    params: &DetonationParams,
    lambda: Complex64,
    opts: &EvalOptions,
) -> Result<(Complex64, usize), LopatinskiError> {
    check_domain(params, lambda)?;
    let (s, k, q) = (params.s(), params.k(), params.q());
    let c = params.c_minus();
    let mu = (lambda + k) / s;
    let forcing = c64(-q * k / s, 0.0);
    let y_start = forcing / (mu + lambda / c);
    let length = (s / k) * (1.0 / f64::EPSILON).ln();
    let rhs = |xi: f64, y: &State<1>| [(-p_coeff(params, lambda, xi) - mu) * y[0] + forcing];
    let ode = OdeOptions::new(opts.rel_tol, opts.abs_tol);
    let out = integrate_ode_with(rhs, [y_start], -length, 0.0, &ode)?;
    Ok((out.final_state[0], out.steps_accepted + out.steps_rejected))
}

fn psi_via_ode(
    params: &DetonationParams,
    lambda: Complex64,
    opts: &EvalOptions,
) -> Result<PsiValue, LopatinskiError> {
    let (q, k) = (params.q(), params.k());
    let (z1, steps) = z1_by_ode(params, lambda, opts)?;
    // Invert Z₁ = −(qk/(k+λ))(1 − λΨ).
    let value = (z1 * (lambda + k) / (q * k) + 1.0) / lambda;
    Ok(PsiValue {
        value,
        error_estimate: opts.rel_tol * value.norm(),
        method: PsiMethod::OdeFallback,
        evaluations: steps * 7,
    })
}

pub fn z1_from_psi(params: &DetonationParams, lambda: Complex64, psi: Complex64) -> Complex64 {
    let (q, k) = (params.q(), params.k());
    -(q * k) / (lambda + k) * (1.0 - lambda * psi)
}

pub fn z1_at_zero(
    params: &DetonationParams,
    lambda: Complex64,
) -> Result<Complex64, LopatinskiError> {
    let psi = psi_with(params, lambda, &EvalOptions::default())?;
    Ok(z1_from_psi(params, lambda, psi.value))
}

/// `u_star − u_plus − q − qkΨ`, the factor whose real part the stability
/// bound keeps positive.
pub fn stability_coefficient(params: &DetonationParams, psi: Complex64) -> Complex64 {
    let (q, k) = (params.q(), params.k());
    c64(params.u_star() - params.u_plus() - q, 0.0) - psi * (q * k)
}

pub fn det_from_psi(params: &DetonationParams, lambda: Complex64, psi: Complex64) -> Complex64 {
    let k = params.k();
    let front =
        lambda * (params.u_star() - params.u_plus()) + stability_coefficient(params, psi) * k;
    front * lambda / (lambda + k)
}

pub fn evaluate(
    params: &DetonationParams,
    lambda: Complex64,
    opts: &EvalOptions,
) -> Result<LopatinskiEval, LopatinskiError> {
    let psi = psi_with(params, lambda, opts)?;
    let (q, k) = (params.q(), params.k());
    let z1 = z1_from_psi(params, lambda, psi.value);
    let jump = jump_vector(params, lambda);
    let d_value = det_from_psi(params, lambda, psi.value);
    // det [[Z₁, j₁], [Z₂, j₂]] with Z₂ = 1.
    let d_matrix = z1 * jump[1] - jump[0];
    let scale = d_value
        .norm()
        .max(k * z1.norm())
        .max(lambda.norm() * (params.u_star() - params.u_plus()))
        .max(q * k);
    Ok(LopatinskiEval {
        lambda,
        psi: psi.value,
        z1_at_zero: z1,
        jump,
        d_value,
        quad_error: psi.error_estimate,
        identity_residual: (d_value - d_matrix).norm() / scale,
        method: psi.method,
    })
}

pub fn det_closed_form(
    params: &DetonationParams,
    lambda: Complex64,
) -> Result<LopatinskiEval, LopatinskiError> {
    evaluate(params, lambda, &EvalOptions::default())
}

/// Value of `Ψ(0)` in closed form, `((s − u_plus) − c₋)/(qk)`, written
/// without cancellation as `2s / (k((s − u_plus) + c₋))`.
pub fn psi_at_origin_exact(params: &DetonationParams) -> f64 {
    2.0 * params.s() / (params.k() * (params.shock_gap() + params.c_minus()))
}
