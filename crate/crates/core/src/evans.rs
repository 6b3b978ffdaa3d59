//! Independent evaluation of the Lopatinski determinant by shooting.
//!
//! The linearized eigenvalue equations in flux form `Z = AW` read `Z' = G Z`
//! with
//!
//! ```text
//! G(ξ) = [[−λ/(ū − s), −qk/s],
//!         [0,          (k+λ)/s]].
//! ```
//!
//! As `ξ → −∞`, `G → G₋` and the solution decaying there is tangent to the
//! eigenvector of `G₋` for `μ = (k+λ)/s`. We integrate the polar-stripped
//! variable `Y = Z·e^{−μξ}` (bounded, same linear system shifted by `μ`) from
//! `ξ = −L` to `0`, normalize so `Z₂(0) = 1`, and take the determinant
//! against the shock jump vector.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::lopatinski::{self, jump_vector, psi_abscissa, EvalOptions};
use crate::numerics::{integrate_ode_with, NumericsError, OdeOptions, State};
use crate::params::DetonationParams;
use crate::profile::reaction_gap;
use crate::{c64, Complex64};

pub type Matrix2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvansError {
    #[error("λ = {lambda} outside the decaying-mode domain Re λ > {abscissa}")]
    Domain { lambda: Complex64, abscissa: f64 },
    #[error("decaying and slow modes resonate at λ = {0}")]
    Degenerate(Complex64),
    #[error("truncation length must be positive, got {0}")]
    InvalidLength(f64),
    #[error("normalization Z₂(0) vanished")]
    ZeroNormalization,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenSystemEval {
    pub lambda: Complex64,
    pub length: f64,
    pub z_at_zero: [Complex64; 2],
    pub det_value: Complex64,
    /// Raw `Z₂(0)` before rescaling, relative to the stripped exponential `e^{μ·0}/e^{μ(−L)}`.
    /// Equals the seed's second component when the decoupled row is integrated exactly.
    pub normalization: Complex64,
    /// `e^{−gap·L}` where `gap` is the decay margin of the discarded modes.
    pub truncation_bound: f64,
    pub truncation_warning: bool,
}

/// Threshold above which [`EigenSystemEval::truncation_warning`] is set.
pub const TRUNCATION_WARN: f64 = 1e-8;

pub fn g_matrix(params: &DetonationParams, lambda: Complex64, xi: f64) -> Matrix2 {
    let (s, k, q) = (params.s(), params.k(), params.q());
    let gap = reaction_gap(params, xi);
    [
        [-lambda / gap, c64(-q * k / s, 0.0)],
        [c64(0.0, 0.0), (lambda + k) / s],
    ]
}

/// `G₋`, the limit of `G` as `ξ → −∞` (`ū → u_minus`).
pub fn g_matrix_limit(params: &DetonationParams, lambda: Complex64) -> Matrix2 {
    let (s, k, q) = (params.s(), params.k(), params.q());
    [
        [-lambda / params.c_minus(), c64(-q * k / s, 0.0)],
        [c64(0.0, 0.0), (lambda + k) / s],
    ]
}

/// Growth rate `μ = (k+λ)/s` and eigenvector `v` (with `v₂ = 1`) of `G₋`
/// spanning the solutions that decay as `ξ → −∞`.
pub fn unstable_mode_at_minus_infinity(
    params: &DetonationParams,
    lambda: Complex64,
) -> Result<(Complex64, [Complex64; 2]), EvansError> {
    let (s, k, q) = (params.s(), params.k(), params.q());
    let mu = (lambda + k) / s;
    if !(mu.re > 0.0) {
        return Err(EvansError::Domain {
            lambda,
            abscissa: -k,
        });
    }
    let denom = mu + lambda / params.c_minus();
    if denom.norm() <= 1e-14 * (mu.norm() + 1.0) {
        return Err(EvansError::Degenerate(lambda));
    }
    Ok((mu, [c64(-q * k / s, 0.0) / denom, c64(1.0, 0.0)]))
}

/// Decay margin for the truncated seed: the profile reaches `u_minus` like
/// `e^{(k/s)ξ}` and the discarded mode of the stripped system decays at
/// `Re(λ/c₋ + μ)`, so the seed error is damped like `e^{−gap·L}`.
pub fn decay_gap(params: &DetonationParams, lambda: Complex64) -> f64 {
    let (s, k) = (params.s(), params.k());
    let mu_re = (lambda.re + k) / s;
    (k / s).min(lambda.re / params.c_minus() + mu_re)
}

/// `40·s/k`, extended when the decay margin is thin.
pub fn default_length(params: &DetonationParams, lambda: Complex64) -> f64 {
    let base = 40.0 * params.s() / params.k();
    let gap = decay_gap(params, lambda);
    if gap > 0.0 {
        base.max(37.0 / gap)
    } else {
        base
    }
}

pub fn det_ode(
    params: &DetonationParams,
    lambda: Complex64,
    length: f64,
    rel_tol: f64,
) -> Result<EigenSystemEval, EvansError> {
    det_ode_seeded(params, lambda, length, rel_tol, c64(1.0, 0.0))
}

/// As [`det_ode`], with the seed vector multiplied by `gauge`.
pub fn det_ode_seeded(
    params: &DetonationParams,
    lambda: Complex64,
    length: f64,
    rel_tol: f64,
    gauge: Complex64,
) -> Result<EigenSystemEval, EvansError> {
    let abscissa = psi_abscissa(params);
    if !(lambda.re > abscissa) {
        return Err(EvansError::Domain { lambda, abscissa });
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(EvansError::InvalidLength(length));
    }
    let (mu, v) = unstable_mode_at_minus_infinity(params, lambda)?;
    let y0: State<2> = [v[0] * gauge, v[1] * gauge];
    let rhs = |xi: f64, y: &State<2>| {
        let g = g_matrix(params, lambda, xi);
        [
            (g[0][0] - mu) * y[0] + g[0][1] * y[1],
            g[1][0] * y[0] + (g[1][1] - mu) * y[1],
        ]
    };
    let opts = OdeOptions::new(rel_tol, rel_tol * 1e-3);
    let out = integrate_ode_with(rhs, y0, -length, 0.0, &opts)?;
    let y = out.final_state;
    if y[1].norm() == 0.0 {
        return Err(EvansError::ZeroNormalization);
    }
    let z = [y[0] / y[1], c64(1.0, 0.0)];
    let jump = jump_vector(params, lambda);
    let det_value = z[0] * jump[1] - jump[0] * z[1];
    let truncation_bound = (-decay_gap(params, lambda) * length).exp();
    Ok(EigenSystemEval {
        lambda,
        length,
        z_at_zero: z,
        det_value,
        normalization: y[1] / y0[1],
        truncation_bound,
        truncation_warning: truncation_bound > TRUNCATION_WARN,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub lambda: Complex64,
    pub d_closed: Option<Complex64>,
    pub d_ode: Option<Complex64>,
    /// Relative discrepancy, or absolute when `|D_closed|` is below the floor.
    pub discrepancy: Option<f64>,
    pub absolute: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyTable {
    pub rows: Vec<Discrepancy>,
    pub max: f64,
    pub median: f64,
    pub failures: usize,
}

/// `|D_closed|` below this is compared in absolute terms.
pub const ABSOLUTE_FLOOR: f64 = 1e-8;

pub fn compare_point(
    params: &DetonationParams,
    lambda: Complex64,
    length: f64,
    rel_tol: f64,
) -> Discrepancy {
    let closed = lopatinski::evaluate(params, lambda, &EvalOptions::with_tol(rel_tol.min(1e-10)));
    let ode = det_ode(params, lambda, length, rel_tol);
    match (closed, ode) {
        (Ok(c), Ok(o)) => {
            let diff = (o.det_value - c.d_value).norm();
            let absolute = c.d_value.norm() < ABSOLUTE_FLOOR;
            let discrepancy = if absolute {
                diff
            } else {
                diff / c.d_value.norm()
            };
            Discrepancy {
                lambda,
                d_closed: Some(c.d_value),
                d_ode: Some(o.det_value),
                discrepancy: Some(discrepancy),
                absolute,
                error: None,
            }
        }
        (c, o) => Discrepancy {
            lambda,
            d_closed: c.as_ref().ok().map(|e| e.d_value),
            d_ode: o.as_ref().ok().map(|e| e.det_value),
            discrepancy: None,
            absolute: false,
            error: Some(
                [
                    c.err().map(|e| e.to_string()),
                    o.err().map(|e| e.to_string()),
                ]
                .into_iter()
                .flatten()
                .collect::<Vec<_>>()
                .join("; "),
            ),
        },
    }
}

/// Compares closed form and shooting over a grid; rows keep grid order.
pub fn compare_methods(
    params: &DetonationParams,
    lambda_grid: &[Complex64],
    length: f64,
) -> DiscrepancyTable {
    compare_methods_with(params, lambda_grid, length, 1e-10)
}

pub fn compare_methods_with(
    params: &DetonationParams,
    lambda_grid: &[Complex64],
    length: f64,
    rel_tol: f64,
) -> DiscrepancyTable {
    let rows: Vec<Discrepancy> = lambda_grid
        .par_iter()
        .map(|&lam| compare_point(params, lam, length, rel_tol))
        .collect();
    let mut values: Vec<f64> = rows.iter().filter_map(|r| r.discrepancy).collect();
    values.sort_by(f64::total_cmp);
    let max = values.last().copied().unwrap_or(0.0);
    let median = if values.is_empty() {
        0.0
    } else if values.len() % 2 == 1 {
        values[values.len() / 2]
    } else {
        0.5 * (values[values.len() / 2 - 1] + values[values.len() / 2])
    };
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    DiscrepancyTable {
        rows,
        max,
        median,
        failures,
    }
}

/// `n_re × n_im` rectangle grid, row-major in the imaginary part.
pub fn rectangle_grid(re: (f64, f64), im: (f64, f64), n_re: usize, n_im: usize) -> Vec<Complex64> {
    let lin = |lo: f64, hi: f64, n: usize, i: usize| {
        if n <= 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(n_re * n_im);
    for i in 0..n_re {
        for j in 0..n_im {
            out.push(c64(lin(re.0, re.1, n_re, i), lin(im.0, im.1, n_im, j)));
        }
    }
    out
}
