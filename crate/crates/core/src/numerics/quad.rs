//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.
//!
//! The real and imaginary parts share one subdivision tree; the interval with
//! the largest error estimate is bisected until the summed estimate meets
//! `max(abs_tol, rel_tol·|value|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::NumericsError;

// Kronrod abscissae; odd indices are the 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Points evaluated by one application of the 15-point rule.
pub const RULE_POINTS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of subintervals in the tree.
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    // Largest error first; ties broken by position so the order is total.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod_15<F>(f: &mut F, a: f64, b: f64) -> Result<(Complex64, f64), NumericsError>
where
    F: FnMut(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let habs = half.abs();

    let f_center = f(center);
    let mut res_g = f_center * WG[3];
    let mut res_k = f_center * WGK[7];
    let mut res_abs = f_center.norm() * WGK[7];
    let mut fv1 = [Complex64::new(0.0, 0.0); 7];
    let mut fv2 = [Complex64::new(0.0, 0.0); 7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            res_g += (f1 + f2) * WG[j / 2];
        }
    }

    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).norm();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }

    let value = res_k * half;
    res_abs *= habs;
    res_asc *= habs;
    let mut err = ((res_k - res_g) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !(value.re.is_finite() && value.im.is_finite() && err.is_finite()) {
        return Err(NumericsError::NonFiniteIntegrand { a, b });
    }
    Ok((value, err))
}

/// Integrates a complex-valued `f` over `[a, b]` to `max(abs_tol, rel_tol·|I|)`.
pub fn adaptive_quad<F>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult, NumericsError>
where
    F: FnMut(f64) -> Complex64,
{
    adaptive_quad_with(f, a, b, &QuadOptions::new(rel_tol, abs_tol))
}

pub fn adaptive_quad_with<F>(
    mut f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult, NumericsError>
where
    F: FnMut(f64) -> Complex64,
{
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(NumericsError::InvalidInterval { a, b });
    }
    if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0) {
        return Err(NumericsError::InvalidTolerance);
    }
    if a == b {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            error_estimate: 0.0,
            evaluations: 0,
            intervals: 0,
        });
    }

    let (value, error) = gauss_kronrod_15(&mut f, a, b)?;
    let mut evaluations = RULE_POINTS;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;

    let target = |v: Complex64| opts.abs_tol.max(opts.rel_tol * v.norm());
    while total_err > target(total) {
        if heap.len() >= opts.max_intervals.max(1) {
            let worst = *heap.peek().expect("non-empty");
            return Err(NumericsError::Convergence {
                value: total,
                error_estimate: total_err,
                worst_a: worst.a,
                worst_b: worst.b,
            });
        }
        let seg = heap.pop().expect("non-empty");
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            // Cannot be split further in floating point.
            return Err(NumericsError::Convergence {
                value: total,
                error_estimate: total_err,
                worst_a: seg.a,
                worst_b: seg.b,
            });
        }
        let (lv, le) = gauss_kronrod_15(&mut f, seg.a, mid)?;
        let (rv, re) = gauss_kronrod_15(&mut f, mid, seg.b)?;
        evaluations += 2 * RULE_POINTS;
        total += lv + rv - seg.value;
        total_err += le + re - seg.error;
        heap.push(Segment {
            a: seg.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Segment {
            a: mid,
            b: seg.b,
            value: rv,
            error: re,
        });

        // Periodically resum to keep the running totals honest.
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }

    // Final sum in left-to-right order for a reproducible result.
    let mut segments = heap.into_vec();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value: Complex64 = segments.iter().map(|s| s.value).sum();
    let error_estimate: f64 = segments.iter().map(|s| s.error).sum();
    Ok(QuadResult {
        value,
        error_estimate,
        evaluations,
        intervals: segments.len(),
    })
}
