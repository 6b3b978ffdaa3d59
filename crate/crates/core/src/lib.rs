//! Spectral stability of ZND detonations in Majda's reactive Burgers model.
//!
//! The crate builds the explicit detonation profile, evaluates the
//! Lopatinski determinant `D(λ)` in closed form and by direct shooting of the
//! linearized eigenvalue system, and certifies that `D` has exactly one zero
//! (a simple one, at the origin) on `Re λ ≥ 0` by winding-number counting.
//! A first-order finite-volume simulator provides a nonlinear sanity check.
//!
//! ```
//! use znd_core::{params, stability};
//!
//! let p = params::p0();
//! assert!((p.u_minus() - (1.0 + 0.4f64.sqrt())).abs() < 1e-15);
//! assert!(stability::coeff_floor(&p) > 0.0);
//! ```

// Negated comparisons are used on purpose so NaN falls into the reject branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod evans;
pub mod lopatinski;
pub mod numerics;
pub mod params;
pub mod profile;
pub mod stability;
pub mod timedomain;

pub use num_complex::Complex64;
pub use params::{build_params, q_max, DetonationParams, ParamsError, ParamsInput};

/// Shorthand for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
