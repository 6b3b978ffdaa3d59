//! The ZND profile `(ū, z̄)(ξ)` in the co-moving coordinate `ξ = x − st`.
//!
//! Behind the Neumann shock (`ξ < 0`) the profile is explicit:
//! `z̄ = e^{(k/s)ξ}` and `ū = s + sqrt(c₋² + 2qs·z̄)`, where
//! `c₋² = s² − 2qs + u_plus² − 2s·u_plus`. Ahead of it (`ξ ≥ 0`) the state is
//! the quiescent `(u_plus, 1)`. The shock point itself belongs to the
//! quiescent side; [`left_limit`] gives the pre-shock values `(u_star, 1)`.

use serde::Serialize;
use thiserror::Error;

use crate::c64;
use crate::numerics::{integrate_ode_sampled, NumericsError, OdeOptions, State};
use crate::params::DetonationParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub xi: f64,
    pub u_bar: f64,
    pub z_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("profile ODE singular: |u - s| = {gap:e} at u = {u}")]
    Singularity { u: f64, gap: f64 },
    #[error("oracle length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// The radicand `s² − 2qs(1 − z) + u_plus² − 2s·u_plus`, written as
/// `c₋² + 2qs·z` to avoid cancellation.
pub fn radicand(params: &DetonationParams, z: f64) -> f64 {
    let c = params.c_minus();
    c * c + 2.0 * params.q() * params.s() * z
}

/// `ū(ξ) − s` for `ξ ≤ 0` (left limit at zero).
pub fn reaction_gap(params: &DetonationParams, xi: f64) -> f64 {
    let z = (params.k() / params.s() * xi.min(0.0)).exp();
    radicand(params, z).sqrt()
}

pub fn profile_at(params: &DetonationParams, xi: f64) -> ProfilePoint {
    if xi >= 0.0 {
        return ProfilePoint {
            xi,
            u_bar: params.u_plus(),
            z_bar: 1.0,
        };
    }
    let z_bar = (params.k() / params.s() * xi).exp();
    ProfilePoint {
        xi,
        u_bar: params.s() + radicand(params, z_bar).sqrt(),
        z_bar,
    }
}

/// Pre-shock state `(ū, z̄)(0⁻) = (u_star, 1)` as given by the explicit profile.
pub fn left_limit(params: &DetonationParams) -> ProfilePoint {
    ProfilePoint {
        xi: 0.0,
        u_bar: params.s() + radicand(params, 1.0).sqrt(),
        z_bar: 1.0,
    }
}

/// Right-hand side of the traveling-wave ODE solved for the derivatives:
/// `z' = (k/s)·φ(ū)·z̄`, `u' = q·k·φ(ū)·z̄ / (ū − s)`.
pub fn profile_ode_rhs(
    params: &DetonationParams,
    point: &ProfilePoint,
) -> Result<(f64, f64), ProfileError> {
    let gap = point.u_bar - params.s();
    if gap.abs() < 1e-12 * params.s().max(1.0) {
        return Err(ProfileError::Singularity {
            u: point.u_bar,
            gap: gap.abs(),
        });
    }
    let phi = params.ignition(point.u_bar);
    let dz = params.k() / params.s() * phi * point.z_bar;
    let du = params.q() * params.k() * phi * point.z_bar / gap;
    Ok((du, dz))
}

/// Number of samples returned by [`integrate_profile_oracle`].
pub const ORACLE_SAMPLES: usize = 601;

/// Integrates the profile ODE from `ξ = −length` to `0⁻`, seeded with the
/// explicit profile, and returns equispaced samples. The final sample is the
/// left limit at the shock.
pub fn integrate_profile_oracle(
    params: &DetonationParams,
    length: f64,
    rel_tol: f64,
) -> Result<Vec<ProfilePoint>, ProfileError> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(ProfileError::InvalidLength(length));
    }
    let n = ORACLE_SAMPLES - 1;
    let xis: Vec<f64> = (0..=n)
        .map(|j| -length + length * j as f64 / n as f64)
        .collect();
    integrate_profile_oracle_on(params, &xis, rel_tol)
}

/// Same as [`integrate_profile_oracle`] on caller-chosen increasing nodes in `ξ ≤ 0`.
pub fn integrate_profile_oracle_on(
    params: &DetonationParams,
    xis: &[f64],
    rel_tol: f64,
) -> Result<Vec<ProfilePoint>, ProfileError> {
    let Some(&xi0) = xis.first() else {
        return Ok(Vec::new());
    };
    if xis.iter().any(|&x| x > 0.0) {
        return Err(ProfileError::InvalidLength(*xis.last().unwrap_or(&0.0)));
    }
    let start = profile_at(params, xi0.min(-f64::MIN_POSITIVE));
    let start = if xi0 == 0.0 {
        left_limit(params)
    } else {
        start
    };
    let y0: State<2> = [c64(start.u_bar, 0.0), c64(start.z_bar, 0.0)];
    let mut singular = None;
    let rhs = |xi: f64, y: &State<2>| {
        let point = ProfilePoint {
            xi,
            u_bar: y[0].re,
            z_bar: y[1].re,
        };
        match profile_ode_rhs(params, &point) {
            Ok((du, dz)) => [c64(du, 0.0), c64(dz, 0.0)],
            Err(e) => {
                singular.get_or_insert(e);
                [c64(f64::NAN, 0.0), c64(f64::NAN, 0.0)]
            }
        }
    };
    // z̄ starts exponentially small and grows like e^{(k/s)ξ}, so the absolute
    // tolerance is tied to its starting size to keep the control relative.
    let opts = OdeOptions::new(rel_tol, rel_tol * 1e-2 * start.z_bar.min(1.0));
    let out = integrate_ode_sampled(rhs, y0, xis, &opts);
    if let Some(e) = singular {
        return Err(e);
    }
    let out = out?;
    Ok(out
        .times
        .iter()
        .zip(&out.states)
        .map(|(&xi, y)| ProfilePoint {
            xi,
            u_bar: y[0].re,
            z_bar: y[1].re,
        })
        .collect())
}

/// Rankine–Hugoniot residual at the shock, combined with the `z̄` jump
/// `|z̄(0⁻) − z̄(0⁺)|` (both should vanish).
pub fn rh_residual(params: &DetonationParams) -> f64 {
    let z_jump = (left_limit(params).z_bar - profile_at(params, 0.0).z_bar).abs();
    params.rh_residual().max(z_jump)
}

/// `s(ū + q z̄) − ū²/2`, constant along the reaction zone.
pub fn integrated_flux(params: &DetonationParams, point: &ProfilePoint) -> f64 {
    params.s() * (point.u_bar + params.q() * point.z_bar) - 0.5 * point.u_bar * point.u_bar
}
