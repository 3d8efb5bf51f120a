use ddehopf::modelkit::{sis_exp, sis_inverse, TaylorTable};
use ddehopf::normalform::{
    analyze, classify, find_degenerate_point, lyapunov_k1_closed, lyapunov_k1_general, DiagramClass, K1Normalization,
    NormalFormError,
};
use ddehopf::spectrum::{find_imaginary_root, hopf_point};
use proptest::prelude::*;

#[test]
fn converged_points_are_tangent_and_on_the_curve() {
    for (m, g) in [(sis_inverse(), (1.8, 2.6)), (sis_exp(), (2.1, 1.7)), (sis_exp(), (2.0, 1.6))] {
        let d = find_degenerate_point(&m, g, m.tau).unwrap();
        assert!(d.residuals.0.abs() < 1e-9 && d.residuals.1.abs() < 1e-9, "{:?}", d.residuals);
        let w = find_imaginary_root(d.point.alpha, d.point.beta, m.tau).unwrap();
        assert!((w - d.omega).abs() < 1e-9);
    }
}

#[test]
fn both_builtins_have_a_bubble_above_mu_star() {
    for (m, g) in [(sis_inverse(), (1.8, 2.6)), (sis_exp(), (2.1, 1.7))] {
        let r = analyze(&m, g).unwrap();
        assert_eq!(r.epsilon, 1);
        assert_eq!(r.class_above, DiagramClass::PlusEtaNegative);
        assert_eq!(r.class_below, DiagramClass::PlusEtaPositive);
        assert_eq!(r.bubble_side(), Some(1));
        assert!(r.predicted_width(r.mu_star - 0.01).is_none());
        let w = r.predicted_width(r.mu_star + 0.02).unwrap();
        assert!((w - r.bubble_coeff * 0.02f64.sqrt()).abs() < 1e-12);
        assert!(r.hypothesis1);
        assert_eq!(r.k2, None);
    }
}

#[test]
fn far_guess_does_not_converge() {
    let e = find_degenerate_point(&sis_inverse(), (50.0, 0.01), 10.0).unwrap_err();
    assert!(matches!(e, NormalFormError::NonConvergence { .. } | NormalFormError::LeftDomain { .. }), "{e}");
}

#[test]
fn zero_cubic_and_quadratic_terms_are_out_of_scope() {
    assert!(matches!(
        classify(0.02, -0.03, 0.0, 1.0),
        Err(NormalFormError::DegenerateBeyondScope { quantity: "K1", .. })
    ));
    assert!(matches!(
        classify(0.02, 0.0, -1.0, 1.0),
        Err(NormalFormError::DegenerateBeyondScope { .. })
    ));
}

fn scaled(t: &TaylorTable, quad: f64, cubic: f64) -> TaylorTable {
    let mut out = *t;
    for &(j, k) in TaylorTable::MONOMIALS.iter() {
        out.set(j, k, t.get(j, k) * if j + k == 2 { quad } else { cubic });
    }
    out
}

proptest! {
    #[test]
    fn epsilon_is_sign_product(
        s1 in prop_oneof![-1.0f64..-1e-6, 1e-6f64..1.0],
        s4 in prop_oneof![-1.0f64..-1e-6, 1e-6f64..1.0],
        k1 in prop_oneof![-5.0f64..-1e-4, 1e-4f64..5.0],
        dmu in prop_oneof![-1.0f64..-1e-6, 1e-6f64..1.0],
    ) {
        let c = classify(s1, s4, k1, dmu).unwrap();
        prop_assert_eq!(c.epsilon as f64, s4.signum() * k1.signum());
        prop_assert_eq!(c.bubble_width.is_some(), c.epsilon == 1 && c.eta < 0.0);
        if let Some(w) = c.bubble_width {
            prop_assert!((w - 2.0 * (s1 * dmu / s4).abs().sqrt()).abs() < 1e-12);
        }
    }

    /// Cubic terms enter K1 linearly and quadratic terms through products,
    /// so scaling cubics by c² and quadratics by c scales K1 by c².
    #[test]
    fn k1_is_homogeneous(
        tau in 0.5f64..12.0,
        frac in 0.05f64..0.95,
        f in prop::array::uniform7(-2.0f64..2.0),
        c in 0.1f64..10.0,
    ) {
        let p = hopf_point(tau, frac * std::f64::consts::PI / tau).unwrap();
        prop_assume!((p.alpha + p.beta).abs() > 1e-3 * p.beta.abs());
        prop_assume!((4.0 * p.alpha - 5.0 * p.beta).abs() > 1e-3 * p.beta.abs());
        let mut t = TaylorTable::default();
        for (&(j, k), v) in TaylorTable::MONOMIALS.iter().zip(f) {
            t.set(j, k, v);
        }
        let k = lyapunov_k1_closed(p.alpha, p.beta, p.omega, tau, &t).unwrap();
        let ks = lyapunov_k1_closed(p.alpha, p.beta, p.omega, tau, &scaled(&t, c, c * c)).unwrap();
        prop_assert!((ks - c * c * k).abs() <= 1e-9 * (c * c * k).abs().max(1e-6));
        for n in [K1Normalization::ClosedForm, K1Normalization::DelayScaled] {
            let g = lyapunov_k1_general(p.alpha, p.beta, p.omega, tau, &t, n).unwrap();
            let gs = lyapunov_k1_general(p.alpha, p.beta, p.omega, tau, &scaled(&t, c, c * c), n).unwrap();
            prop_assert!((gs - c * c * g).abs() <= 1e-9 * (c * c * g).abs().max(1e-6));
        }
    }
}
