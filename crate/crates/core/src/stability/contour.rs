//! Closed contours and argument-principle winding numbers.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Display;

use serde::Serialize;

use super::StabilityError;
use crate::{c64, Complex64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Piece {
    Line {
        from: Complex64,
        to: Complex64,
    },
    Arc {
        center: Complex64,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
}

impl Piece {
    /// Point at parameter `t ∈ [0, 1]`.
    pub fn point(&self, t: f64) -> Complex64 {
        match *self {
            Piece::Line { from, to } => from + (to - from) * t,
            Piece::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => center + Complex64::from_polar(radius, theta0 + (theta1 - theta0) * t),
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Piece::Line { from, to } => (to - from).norm(),
            Piece::Arc {
                radius,
                theta0,
                theta1,
                ..
            } => radius * (theta1 - theta0).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourSample {
    pub piece: usize,
    pub t: f64,
    pub z: Complex64,
}

/// A closed, positively oriented polyline sampled on piecewise-smooth pieces.
/// The first and last samples coincide.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contour {
    pub pieces: Vec<Piece>,
    pub samples: Vec<ContourSample>,
    pub refinement_depth: usize,
    /// Smallest `|f|` seen on the contour; zero until a winding pass fills it.
    pub min_abs_on_contour: f64,
}

impl Contour {
    /// Samples each piece with a share of `n0` points proportional to its length.
    pub fn from_pieces(pieces: Vec<Piece>, n0: usize) -> Self {
        let total: f64 = pieces.iter().map(Piece::length).sum();
        let mut samples = Vec::new();
        for (i, piece) in pieces.iter().enumerate() {
            let n = ((n0 as f64 * piece.length() / total).round() as usize).max(4);
            let first = if i == 0 { 0 } else { 1 };
            for j in first..=n {
                let t = j as f64 / n as f64;
                samples.push(ContourSample {
                    piece: i,
                    t,
                    z: piece.point(t),
                });
            }
        }
        // Close exactly.
        if let (Some(first), Some(last)) = (samples.first().copied(), samples.last_mut()) {
            last.z = first.z;
        }
        Contour {
            pieces,
            samples,
            refinement_depth: 0,
            min_abs_on_contour: 0.0,
        }
    }

    pub fn is_closed(&self) -> bool {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => self.samples.len() > 2 && a.z == b.z,
            _ => false,
        }
    }

    /// Shoelace area; positive for counter-clockwise orientation.
    pub fn signed_area(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[0].z.re * w[1].z.im - w[1].z.re * w[0].z.im)
            .sum::<f64>()
            * 0.5
    }

    fn midpoint(&self, a: &ContourSample, b: &ContourSample) -> ContourSample {
        // A segment lies in the piece of its later endpoint.
        let ta = if a.piece == b.piece { a.t } else { 0.0 };
        let t = 0.5 * (ta + b.t);
        ContourSample {
            piece: b.piece,
            t,
            z: self.pieces[b.piece].point(t),
        }
    }
}

/// Boundary of `{Re λ ≥ 0, r ≤ |λ| ≤ R}`, counter-clockwise: big arc from
/// `−iR` through `R` to `iR`, down the imaginary axis to `ir`, the
/// indentation arc through `r` back to `−ir`, then down to `−iR`.
pub fn half_plane_contour(r: f64, big_r: f64, n0: usize) -> Contour {
    let origin = c64(0.0, 0.0);
    let pieces = vec![
        Piece::Arc {
            center: origin,
            radius: big_r,
            theta0: -FRAC_PI_2,
            theta1: FRAC_PI_2,
        },
        Piece::Line {
            from: c64(0.0, big_r),
            to: c64(0.0, r),
        },
        Piece::Arc {
            center: origin,
            radius: r,
            theta0: FRAC_PI_2,
            theta1: -FRAC_PI_2,
        },
        Piece::Line {
            from: c64(0.0, -r),
            to: c64(0.0, -big_r),
        },
    ];
    Contour::from_pieces(pieces, n0)
}

/// Full counter-clockwise circle `|λ| = r`.
pub fn circle_contour(r: f64, n0: usize) -> Contour {
    Contour::from_pieces(
        vec![Piece::Arc {
            center: c64(0.0, 0.0),
            radius: r,
            theta0: 0.0,
            theta1: TAU,
        }],
        n0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub lambda: Complex64,
    pub value: Complex64,
    /// Unwrapped argument accumulated from the first sample.
    pub cum_arg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindingOutcome {
    pub winding: i64,
    pub total_phase: f64,
    pub evaluations: usize,
    pub refinements: usize,
    pub max_abs: f64,
    /// Contour including refinement points.
    pub refined: Contour,
    pub trace: Vec<TracePoint>,
}

/// Phase jump above which a segment is bisected.
pub const PHASE_STEP_LIMIT: f64 = FRAC_PI_2;
/// Segments touching `|f| < DYNAMIC_FLOOR · max|f|` are refined.
pub const DYNAMIC_FLOOR: f64 = 1e-10;
/// `|f| < ZERO_FLOOR · max|f|` is treated as a zero on the contour.
pub const ZERO_FLOOR: f64 = 1e-13;

struct Walker<'c, F> {
    contour: &'c Contour,
    f: F,
    max_depth: usize,
    dynamic_floor: f64,
    zero_floor: f64,
    evaluations: usize,
    refinements: usize,
    depth_used: usize,
    min_abs: f64,
    phase: f64,
    samples: Vec<ContourSample>,
    trace: Vec<TracePoint>,
}

impl<F, E> Walker<'_, F>
where
    F: FnMut(Complex64) -> Result<Complex64, E>,
    E: Display,
{
    fn eval(&mut self, z: Complex64) -> Result<Complex64, StabilityError> {
        self.evaluations += 1;
        let v = (self.f)(z).map_err(|e| StabilityError::Evaluation(format!("at λ = {z}: {e}")))?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(StabilityError::Evaluation(format!(
                "non-finite value at λ = {z}"
            )));
        }
        Ok(v)
    }

    fn check_zero(&mut self, s: &ContourSample, v: Complex64) -> Result<(), StabilityError> {
        let a = v.norm();
        self.min_abs = self.min_abs.min(a);
        if a < self.zero_floor {
            return Err(StabilityError::ZeroOnContour { at: s.z, abs: a });
        }
        Ok(())
    }

    fn segment(
        &mut self,
        a: ContourSample,
        fa: Complex64,
        b: ContourSample,
        fb: Complex64,
        depth: usize,
    ) -> Result<(), StabilityError> {
        let dphi = (fb / fa).arg();
        let small = fa.norm().min(fb.norm()) < self.dynamic_floor;
        if dphi.abs() < PHASE_STEP_LIMIT && !small {
            self.phase += dphi;
            self.samples.push(b);
            self.trace.push(TracePoint {
                lambda: b.z,
                value: fb,
                cum_arg: self.phase,
            });
            return Ok(());
        }
        if depth >= self.max_depth {
            return Err(StabilityError::RefinementExhausted { at: b.z, depth });
        }
        self.refinements += 1;
        self.depth_used = self.depth_used.max(depth + 1);
        let m = self.contour.midpoint(&a, &b);
        let fm = self.eval(m.z)?;
        self.check_zero(&m, fm)?;
        self.segment(a, fa, m, fm, depth + 1)?;
        self.segment(m, fm, b, fb, depth + 1)
    }
}

/// Counts zeros minus poles of `f` inside `contour` by accumulating phase
/// increments between consecutive samples, bisecting any segment whose
/// phase step reaches `π/2` or whose endpoint is nearly zero.
pub fn winding_number<F, E>(
    mut f: F,
    contour: &Contour,
    max_depth: usize,
) -> Result<WindingOutcome, StabilityError>
where
    F: FnMut(Complex64) -> Result<Complex64, E>,
    E: Display,
{
    if !contour.is_closed() {
        return Err(StabilityError::Geometry("contour is not closed".into()));
    }
    let n = contour.samples.len();
    let mut values = Vec::with_capacity(n);
    let mut evaluations = 0;
    for s in &contour.samples[..n - 1] {
        evaluations += 1;
        let v = f(s.z).map_err(|e| StabilityError::Evaluation(format!("at λ = {}: {e}", s.z)))?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(StabilityError::Evaluation(format!(
                "non-finite value at λ = {}",
                s.z
            )));
        }
        values.push(v);
    }
    values.push(values[0]);
    let max_abs = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max_abs == 0.0 {
        return Err(StabilityError::ZeroOnContour {
            at: contour.samples[0].z,
            abs: 0.0,
        });
    }

    let mut walker = Walker {
        contour,
        f,
        max_depth,
        dynamic_floor: DYNAMIC_FLOOR * max_abs,
        zero_floor: ZERO_FLOOR * max_abs,
        evaluations,
        refinements: 0,
        depth_used: 0,
        min_abs: f64::INFINITY,
        phase: 0.0,
        samples: vec![contour.samples[0]],
        trace: vec![TracePoint {
            lambda: contour.samples[0].z,
            value: values[0],
            cum_arg: 0.0,
        }],
    };
    for (s, v) in contour.samples.iter().zip(&values) {
        walker.check_zero(s, *v)?;
    }
    for j in 0..n - 1 {
        walker.segment(
            contour.samples[j],
            values[j],
            contour.samples[j + 1],
            values[j + 1],
            0,
        )?;
    }

    let turns = walker.phase / TAU;
    let winding = turns.round();
    if (turns - winding).abs() > 1e-6 {
        return Err(StabilityError::NonIntegerWinding(turns));
    }
    let refined = Contour {
        pieces: contour.pieces.clone(),
        samples: walker.samples,
        refinement_depth: walker.depth_used,
        min_abs_on_contour: walker.min_abs,
    };
    Ok(WindingOutcome {
        winding: winding as i64,
        total_phase: walker.phase,
        evaluations: walker.evaluations,
        refinements: walker.refinements,
        max_abs,
        refined,
        trace: walker.trace,
    })
}
