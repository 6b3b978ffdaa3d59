//! Complex adaptive quadrature and explicit adaptive ODE integration.

mod ode;
mod quad;

use num_complex::Complex64;
use thiserror::Error;

pub use ode::{
    integrate_ode, integrate_ode_sampled, integrate_ode_with, OdeOptions, OdeResult, SampledOde,
    State,
};
pub use quad::{adaptive_quad, adaptive_quad_with, QuadOptions, QuadResult, RULE_POINTS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("quadrature did not converge: value {value}, error estimate {error_estimate:e}, worst subinterval [{worst_a}, {worst_b}]")]
    Convergence {
        value: Complex64,
        error_estimate: f64,
        worst_a: f64,
        worst_b: f64,
    },
    #[error("integrand not finite on [{a}, {b}]")]
    NonFiniteIntegrand { a: f64, b: f64 },
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("tolerances must be positive")]
    InvalidTolerance,
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    StepBudgetExhausted { t: f64 },
}
