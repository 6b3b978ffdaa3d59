//! Detonation parameters for the reactive Burgers (Majda) model.
//!
//! A strong ZND detonation is fixed by the quiescent state `u_plus`, the
//! post-shock peak `u_star`, heat release `q`, reaction rate `k` and the
//! ignition threshold `u_i`. The wave speed follows from Rankine–Hugoniot,
//! `s = (u_plus + u_star) / 2`, and the burnt end state from the integrated
//! profile relation, `u_minus = s + sqrt(s² − 2qs + u_plus² − 2s·u_plus)`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which admissibility inequality a parameter set violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    NonFinite,
    /// `0 <= u_plus`
    NegativeQuiescentState,
    /// `u_plus < s < u_star`
    LaxOrder,
    /// `0 < q < (u_star - s)^2 / (2s)`
    HeatReleaseRange,
    /// `k > 0`
    ReactionRateSign,
    /// `u_plus < u_i < u_minus`
    IgnitionPlacement,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Violation::NonFinite => "all parameters must be finite",
            Violation::NegativeQuiescentState => "u_plus >= 0 required",
            Violation::LaxOrder => "Lax order u_plus < s < u_star violated",
            Violation::HeatReleaseRange => "heat release must satisfy 0 < q < (u_star - s)^2/(2s)",
            Violation::ReactionRateSign => "reaction rate k must be positive",
            Violation::IgnitionPlacement => {
                "ignition threshold must satisfy u_plus < u_i < u_minus"
            }
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("inadmissible parameters: {violation} ({detail})")]
    Admissibility {
        violation: Violation,
        detail: String,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("derived field `{field}` inconsistent: given {given}, computed {computed}")]
    InconsistentDerived {
        field: &'static str,
        given: f64,
        computed: f64,
    },
}

impl ParamsError {
    fn admissibility(violation: Violation, detail: impl Into<String>) -> Self {
        ParamsError::Admissibility {
            violation,
            detail: detail.into(),
        }
    }

    pub fn violation(&self) -> Option<Violation> {
        match self {
            ParamsError::Admissibility { violation, .. } => Some(*violation),
            _ => None,
        }
    }
}

/// Validated, immutable detonation parameters with derived `s` and `u_minus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetonationParams {
    u_plus: f64,
    u_star: f64,
    q: f64,
    k: f64,
    u_i: f64,
    s: f64,
    u_minus: f64,
    #[serde(skip)]
    c_minus: f64,
}

/// Upper bound of the admissible heat-release range, `(u_star − s)² / (2s)`.
pub fn q_max(u_plus: f64, u_star: f64) -> Result<f64, ParamsError> {
    if !(u_plus.is_finite() && u_star.is_finite()) {
        return Err(ParamsError::Domain(
            "u_plus and u_star must be finite".into(),
        ));
    }
    if !(0.0 <= u_plus && u_plus < u_star) {
        return Err(ParamsError::Domain(format!(
            "q_max needs 0 <= u_plus < u_star, got u_plus={u_plus}, u_star={u_star}"
        )));
    }
    let s = 0.5 * (u_plus + u_star);
    let gap = u_star - s;
    Ok(gap * gap / (2.0 * s))
}

impl DetonationParams {
    pub fn new(u_plus: f64, u_star: f64, q: f64, k: f64, u_i: f64) -> Result<Self, ParamsError> {
        build_params(u_plus, u_star, q, k, u_i)
    }

    pub fn u_plus(&self) -> f64 {
        self.u_plus
    }
    pub fn u_star(&self) -> f64 {
        self.u_star
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn u_i(&self) -> f64 {
        self.u_i
    }
    /// Wave speed.
    pub fn s(&self) -> f64 {
        self.s
    }
    /// Burnt end state at ξ → −∞.
    pub fn u_minus(&self) -> f64 {
        self.u_minus
    }

    /// `c₋ = sqrt(s² − 2qs + u_plus² − 2s·u_plus) = u_minus − s`.
    pub fn c_minus(&self) -> f64 {
        self.c_minus
    }

    /// `s − u_plus`, which also equals `u_star − s`.
    pub fn shock_gap(&self) -> f64 {
        self.s - self.u_plus
    }

    /// Step ignition function: 0 below `u_i`, 1 at or above it.
    pub fn ignition(&self, u: f64) -> f64 {
        if u >= self.u_i {
            1.0
        } else {
            0.0
        }
    }

    /// Raw squared radicand `s² − 2qs + u_plus² − 2s·u_plus` as written.
    pub fn radicand_minus(&self) -> f64 {
        let s = self.s;
        s * s - 2.0 * self.q * s + self.u_plus * self.u_plus - 2.0 * s * self.u_plus
    }

    /// Rankine–Hugoniot residual `|s(u_plus − u_star) − (u_plus²/2 − u_star²/2)|`.
    pub fn rh_residual(&self) -> f64 {
        (self.s * (self.u_plus - self.u_star)
            - (0.5 * self.u_plus * self.u_plus - 0.5 * self.u_star * self.u_star))
            .abs()
    }

    /// Copy with an overridden wave speed. Only for exercising residual checks;
    /// the result no longer satisfies the type's invariants.
    #[doc(hidden)]
    pub fn with_corrupted_speed(mut self, s: f64) -> Self {
        self.s = s;
        self
    }

    pub fn to_input(&self) -> ParamsInput {
        ParamsInput {
            u_plus: self.u_plus,
            u_star: self.u_star,
            q: self.q,
            k: self.k,
            u_i: self.u_i,
            s: None,
            u_minus: None,
        }
    }
}

/// Validates and builds a parameter set, deriving `s` and `u_minus`.
pub fn build_params(
    u_plus: f64,
    u_star: f64,
    q: f64,
    k: f64,
    u_i: f64,
) -> Result<DetonationParams, ParamsError> {
    use Violation::*;
    if ![u_plus, u_star, q, k, u_i].iter().all(|v| v.is_finite()) {
        return Err(ParamsError::admissibility(NonFinite, "non-finite input"));
    }
    if u_plus < 0.0 {
        return Err(ParamsError::admissibility(
            NegativeQuiescentState,
            format!("u_plus = {u_plus}"),
        ));
    }
    let s = 0.5 * (u_plus + u_star);
    if !(u_plus < s && s < u_star) {
        return Err(ParamsError::admissibility(
            LaxOrder,
            format!("u_plus = {u_plus}, s = {s}, u_star = {u_star}"),
        ));
    }
    let gap = u_star - s;
    let q_max = gap * gap / (2.0 * s);
    if !(q > 0.0 && q < q_max) {
        return Err(ParamsError::admissibility(
            HeatReleaseRange,
            format!("q = {q}, q_max = {q_max}"),
        ));
    }
    if !(k > 0.0) {
        return Err(ParamsError::admissibility(
            ReactionRateSign,
            format!("k = {k}"),
        ));
    }
    // (s − u_plus)² − 2qs is the same radicand with less cancellation.
    let shock_gap = s - u_plus;
    let radicand = shock_gap * shock_gap - 2.0 * q * s;
    if !(radicand > 0.0) {
        return Err(ParamsError::admissibility(
            HeatReleaseRange,
            format!("degenerate radicand {radicand}"),
        ));
    }
    let c_minus = radicand.sqrt();
    let u_minus = s + c_minus;
    if !(s < u_minus && u_minus < u_star) {
        return Err(ParamsError::admissibility(
            HeatReleaseRange,
            format!("u_minus = {u_minus} outside (s, u_star)"),
        ));
    }
    if !(u_plus < u_i && u_i < u_minus) {
        return Err(ParamsError::admissibility(
            IgnitionPlacement,
            format!("u_i = {u_i}, u_plus = {u_plus}, u_minus = {u_minus}"),
        ));
    }
    Ok(DetonationParams {
        u_plus,
        u_star,
        q,
        k,
        u_i,
        s,
        u_minus,
        c_minus,
    })
}

/// Canonical parameter set used in docs and tests: `(0, 2, 0.3, 1, 1.2)`.
pub fn p0() -> DetonationParams {
    build_params(0.0, 2.0, 0.3, 1.0, 1.2).expect("P0 is admissible")
}

/// Second reference set: `(0.5, 1.5, 0.1, 2, 1.0)`.
pub fn p1() -> DetonationParams {
    build_params(0.5, 1.5, 0.1, 2.0, 1.0).expect("P1 is admissible")
}

/// JSON wire form. Derived fields are optional on input and checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsInput {
    pub u_plus: f64,
    pub u_star: f64,
    pub q: f64,
    pub k: f64,
    pub u_i: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_minus: Option<f64>,
}

/// Tolerance for derived fields supplied on input.
pub const DERIVED_FIELD_TOL: f64 = 1e-10;

impl ParamsInput {
    pub fn validate(&self) -> Result<DetonationParams, ParamsError> {
        let p = build_params(self.u_plus, self.u_star, self.q, self.k, self.u_i)?;
        let checks = [("s", self.s, p.s), ("u_minus", self.u_minus, p.u_minus)];
        for (field, given, computed) in checks {
            if let Some(given) = given {
                if !((given - computed).abs() <= DERIVED_FIELD_TOL * computed.abs().max(1.0)) {
                    return Err(ParamsError::InconsistentDerived {
                        field,
                        given,
                        computed,
                    });
                }
            }
        }
        Ok(p)
    }
}

impl TryFrom<ParamsInput> for DetonationParams {
    type Error = ParamsError;
    fn try_from(value: ParamsInput) -> Result<Self, Self::Error> {
        value.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p0_derived_values() {
        let p = p0();
        assert_eq!(p.s(), 1.0);
        let expected = 1.0 + 0.4f64.sqrt();
        assert!((p.u_minus() - expected).abs() < 1e-15);
        assert!((p.u_minus() - 1.6324555).abs() < 1e-7);
    }

    #[test]
    fn p1_derived_values() {
        let p = p1();
        assert_eq!(p.s(), 1.0);
        assert!((p.u_minus() - (1.0 + 0.05f64.sqrt())).abs() < 1e-15);
        assert!((p.u_minus() - 1.2236068).abs() < 1e-7);
    }

    #[test]
    fn q_above_range_rejected() {
        let err = build_params(0.0, 2.0, 0.6, 1.0, 1.2).unwrap_err();
        assert_eq!(err.violation(), Some(Violation::HeatReleaseRange));
    }

    #[test]
    fn boundary_values_rejected() {
        // q = q_max exactly
        let err = build_params(0.0, 2.0, 0.5, 1.0, 1.2).unwrap_err();
        assert_eq!(err.violation(), Some(Violation::HeatReleaseRange));
        // u_plus = u_star collapses Lax order
        let err = build_params(1.0, 1.0, 0.1, 1.0, 1.2).unwrap_err();
        assert_eq!(err.violation(), Some(Violation::LaxOrder));
        let err = build_params(0.0, 2.0, 0.3, 0.0, 1.2).unwrap_err();
        assert_eq!(err.violation(), Some(Violation::ReactionRateSign));
        let err = build_params(0.0, 2.0, 0.3, 1.0, 1.7).unwrap_err();
        assert_eq!(err.violation(), Some(Violation::IgnitionPlacement));
        let err = build_params(0.0, 2.0, 0.3, 1.0, 0.0).unwrap_err();
        assert_eq!(err.violation(), Some(Violation::IgnitionPlacement));
        let err = build_params(-0.1, 2.0, 0.3, 1.0, 1.2).unwrap_err();
        assert_eq!(err.violation(), Some(Violation::NegativeQuiescentState));
        let err = build_params(0.0, f64::NAN, 0.3, 1.0, 1.2).unwrap_err();
        assert_eq!(err.violation(), Some(Violation::NonFinite));
    }

    #[test]
    fn q_max_examples() {
        assert_eq!(q_max(0.0, 2.0).unwrap(), 0.5);
        assert_eq!(q_max(0.5, 1.5).unwrap(), 0.125);
        assert_eq!(q_max(1.0, 3.0).unwrap(), 0.25);
        assert!(matches!(q_max(2.0, 1.0), Err(ParamsError::Domain(_))));
        assert!(matches!(q_max(-1.0, 1.0), Err(ParamsError::Domain(_))));
    }

    #[test]
    fn ignition_step() {
        let p = p0();
        assert_eq!(p.ignition(p.u_plus()), 0.0);
        assert_eq!(p.ignition(p.u_minus()), 1.0);
        assert_eq!(p.ignition(p.u_i()), 1.0);
        assert_eq!(p.ignition(p.u_star()), 1.0);
    }

    #[test]
    fn rebuild_is_bitwise_idempotent() {
        for p in [p0(), p1()] {
            let again = build_params(p.u_plus(), p.u_star(), p.q(), p.k(), p.u_i()).unwrap();
            assert_eq!(p.s().to_bits(), again.s().to_bits());
            assert_eq!(p.u_minus().to_bits(), again.u_minus().to_bits());
        }
    }

    #[test]
    fn corrupted_speed_has_rh_residual() {
        let p = p0().with_corrupted_speed(1.1);
        assert!(p.rh_residual() > 0.1);
        assert!(p0().rh_residual() <= 1e-14);
        assert!(p1().rh_residual() <= 1e-14);
    }
}
