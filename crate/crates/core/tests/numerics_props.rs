use proptest::prelude::*;
use znd_core::c64;
use znd_core::numerics::{adaptive_quad, integrate_ode};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn quadrature_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, w in 0.1f64..8.0) {
        let f = |t: f64| c64((w * t).cos(), (-t).exp());
        let g = |t: f64| c64(t * t, (w * t).sin());
        let int = |h: &dyn Fn(f64) -> znd_core::Complex64| adaptive_quad(h, 0.0, 2.0, 1e-12, 1e-14).unwrap().value;
        let lhs = int(&|t| f(t) * a + g(t) * b);
        let rhs = int(&f) * a + int(&g) * b;
        prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + lhs.norm()));
    }

    #[test]
    fn quadrature_matches_antiderivative(w in -20.0f64..20.0, d in 0.0f64..2.0) {
        // ∫₀¹ e^{(d + iw)t} dt = (e^{d + iw} − 1)/(d + iw)
        let m = c64(d, w);
        let exact = if m.norm() < 1e-12 { c64(1.0, 0.0) } else { (m.exp() - 1.0) / m };
        let got = adaptive_quad(|t| (m * t).exp(), 0.0, 1.0, 1e-12, 1e-14).unwrap().value;
        prop_assert!((got - exact).norm() <= 1e-10 * exact.norm().max(1e-3));
    }

    #[test]
    fn ode_matches_linear_exponential(re in -2.0f64..1.0, im in -5.0f64..5.0, t1 in 0.1f64..3.0) {
        let m = c64(re, im);
        let r = integrate_ode(|_, y: &[znd_core::Complex64; 1]| [m * y[0]], [c64(1.0, 0.0)], 0.0, t1, 1e-11, 1e-13).unwrap();
        let exact = (m * t1).exp();
        prop_assert!((r.final_state[0] - exact).norm() <= 1e-8 * exact.norm().max(1.0));
    }
}
