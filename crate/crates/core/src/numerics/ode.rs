//! Dormand–Prince 5(4) integrator with PI step-size control.
//!
//! States are fixed-size complex vectors. Real problems are carried with zero
//! imaginary parts.

use num_complex::Complex64;

use super::NumericsError;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

pub type State<const N: usize> = [Complex64; N];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub h_max: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 2_000_000,
            h_max: None,
        }
    }
}

impl OdeOptions {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        OdeOptions {
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeResult<const N: usize> {
    pub final_state: State<N>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledOde<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<State<N>>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

fn axpy<const N: usize>(y: &State<N>, terms: &[(f64, &State<N>)], h: f64) -> State<N> {
    let mut out = *y;
    for (coef, k) in terms {
        if *coef == 0.0 {
            continue;
        }
        let scale = h * coef;
        for i in 0..N {
            out[i] += k[i] * scale;
        }
    }
    out
}

fn all_finite<const N: usize>(y: &State<N>) -> bool {
    y.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

struct Stepper<'a, const N: usize, F> {
    rhs: F,
    opts: &'a OdeOptions,
    t: f64,
    y: State<N>,
    k1: State<N>,
    h: f64,
    fac_old: f64,
    accepted: usize,
    rejected: usize,
}

impl<'a, const N: usize, F> Stepper<'a, N, F>
where
    F: FnMut(f64, &State<N>) -> State<N>,
{
    fn new(
        mut rhs: F,
        y0: State<N>,
        t0: f64,
        t1: f64,
        opts: &'a OdeOptions,
    ) -> Result<Self, NumericsError> {
        if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0) {
            return Err(NumericsError::InvalidTolerance);
        }
        if !all_finite(&y0) {
            return Err(NumericsError::NonFiniteState { t: t0 });
        }
        let k1 = rhs(t0, &y0);
        if !all_finite(&k1) {
            return Err(NumericsError::NonFiniteState { t: t0 });
        }
        let mut s = Stepper {
            rhs,
            opts,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            fac_old: 1e-4,
            accepted: 0,
            rejected: 0,
        };
        s.h = s.initial_step(t1);
        Ok(s)
    }

    fn h_max(&self, span: f64) -> f64 {
        self.opts.h_max.unwrap_or(f64::INFINITY).min(span.abs())
    }

    fn scale(&self, a: Complex64, b: Complex64) -> f64 {
        self.opts.abs_tol + self.opts.rel_tol * a.norm().max(b.norm())
    }

    // Hairer–Nørsett–Wanner starting step heuristic.
    fn initial_step(&mut self, t1: f64) -> f64 {
        let span = t1 - self.t;
        let dir = span.signum();
        let h_max = self.h_max(span);
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for i in 0..N {
            let sk = self.scale(self.y[i], self.y[i]);
            dnf += (self.k1[i].norm() / sk).powi(2);
            dny += (self.y[i].norm() / sk).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h = h.min(h_max);
        let y1 = axpy(&self.y, &[(1.0, &self.k1)], dir * h);
        let f1 = (self.rhs)(self.t + dir * h, &y1);
        let mut der2: f64 = 0.0;
        for ((y, f), k) in self.y.iter().zip(&f1).zip(&self.k1) {
            der2 += ((f - k).norm() / self.scale(*y, *y)).powi(2);
        }
        let der2 = der2.sqrt() / h;
        let der12 = der2.max(dnf.sqrt());
        let h1 = if !der12.is_finite() {
            h * 1e-3
        } else if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(0.2)
        };
        (100.0 * h).min(h1).min(h_max).max(f64::MIN_POSITIVE)
    }

    /// Advances exactly to `target` (which lies ahead in the current direction).
    fn advance_to(&mut self, target: f64) -> Result<(), NumericsError> {
        let dir = (target - self.t).signum();
        if dir == 0.0 {
            return Ok(());
        }
        loop {
            let remaining = (target - self.t).abs();
            if remaining == 0.0 {
                return Ok(());
            }
            if self.accepted + self.rejected >= self.opts.max_steps {
                return Err(NumericsError::StepBudgetExhausted { t: self.t });
            }
            let min_step = 16.0 * f64::EPSILON * self.t.abs().max(remaining).max(1e-300);
            if self.h < min_step && remaining > min_step {
                return Err(NumericsError::StepSizeUnderflow {
                    t: self.t,
                    h: self.h,
                });
            }
            let mut h = self.h.min(self.opts.h_max.unwrap_or(f64::INFINITY));
            // Land exactly on the target; stretch slightly to avoid a sliver step.
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            let hs = dir * h;
            let t = self.t;
            let y = self.y;
            let k1 = self.k1;
            let rhs = &mut self.rhs;
            let k2 = rhs(t + C2 * hs, &axpy(&y, &[(A21, &k1)], hs));
            let k3 = rhs(t + C3 * hs, &axpy(&y, &[(A31, &k1), (A32, &k2)], hs));
            let k4 = rhs(
                t + C4 * hs,
                &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hs),
            );
            let k5 = rhs(
                t + C5 * hs,
                &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hs),
            );
            let k6 = rhs(
                t + hs,
                &axpy(
                    &y,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    hs,
                ),
            );
            let y_new = axpy(
                &y,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
                hs,
            );
            let t_new = if last { target } else { t + hs };
            let k7 = rhs(t_new, &y_new);

            let mut err_sq = 0.0;
            for i in 0..N {
                let e =
                    (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                        * hs;
                let sk = self.opts.abs_tol + self.opts.rel_tol * y[i].norm().max(y_new[i].norm());
                err_sq += (e.norm() / sk).powi(2);
            }
            let err = (err_sq / N as f64).sqrt();

            if !err.is_finite() || !all_finite(&y_new) || !all_finite(&k7) {
                // Retry smaller; give up if the step is already tiny.
                self.rejected += 1;
                self.h = h * FAC_MIN;
                if self.h < min_step {
                    return Err(NumericsError::NonFiniteState { t });
                }
                continue;
            }

            let fac11 = err.powf(EXPO1);
            if err <= 1.0 {
                let fac =
                    (fac11 / self.fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                self.fac_old = err.max(1e-4);
                self.accepted += 1;
                self.t = t_new;
                self.y = y_new;
                self.k1 = k7;
                self.h = h / fac;
                if last {
                    return Ok(());
                }
            } else {
                self.rejected += 1;
                self.h = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
            }
        }
    }
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1`.
pub fn integrate_ode<const N: usize, F>(
    rhs: F,
    y0: State<N>,
    t0: f64,
    t1: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<OdeResult<N>, NumericsError>
where
    F: FnMut(f64, &State<N>) -> State<N>,
{
    integrate_ode_with(rhs, y0, t0, t1, &OdeOptions::new(rel_tol, abs_tol))
}

pub fn integrate_ode_with<const N: usize, F>(
    rhs: F,
    y0: State<N>,
    t0: f64,
    t1: f64,
    opts: &OdeOptions,
) -> Result<OdeResult<N>, NumericsError>
where
    F: FnMut(f64, &State<N>) -> State<N>,
{
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(NumericsError::InvalidInterval { a: t0, b: t1 });
    }
    if t0 == t1 {
        return Ok(OdeResult {
            final_state: y0,
            steps_accepted: 0,
            steps_rejected: 0,
        });
    }
    let mut stepper = Stepper::new(rhs, y0, t0, t1, opts)?;
    stepper.advance_to(t1)?;
    Ok(OdeResult {
        final_state: stepper.y,
        steps_accepted: stepper.accepted,
        steps_rejected: stepper.rejected,
    })
}

/// Integrates through a monotone list of output times, starting at `times[0]`
/// with state `y0`, and records the state at every requested time.
pub fn integrate_ode_sampled<const N: usize, F>(
    rhs: F,
    y0: State<N>,
    times: &[f64],
    opts: &OdeOptions,
) -> Result<SampledOde<N>, NumericsError>
where
    F: FnMut(f64, &State<N>) -> State<N>,
{
    let Some((&t0, rest)) = times.split_first() else {
        return Ok(SampledOde {
            times: Vec::new(),
            states: Vec::new(),
            steps_accepted: 0,
            steps_rejected: 0,
        });
    };
    let t_end = *times.last().expect("non-empty");
    let dir = (t_end - t0).signum();
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| (w[1] - w[0]) * dir < 0.0) {
        return Err(NumericsError::InvalidInterval { a: t0, b: t_end });
    }
    let mut states = Vec::with_capacity(times.len());
    states.push(y0);
    if t0 == t_end {
        states.resize(times.len(), y0);
        return Ok(SampledOde {
            times: times.to_vec(),
            states,
            steps_accepted: 0,
            steps_rejected: 0,
        });
    }
    let mut stepper = Stepper::new(rhs, y0, t0, t_end, opts)?;
    for &t in rest {
        stepper.advance_to(t)?;
        states.push(stepper.y);
    }
    Ok(SampledOde {
        times: times.to_vec(),
        states,
        steps_accepted: stepper.accepted,
        steps_rejected: stepper.rejected,
    })
}
