use nonlocal_core::convex_body::BodyKind;
use nonlocal_core::functionals::{evaluate, limit_constant, local_limit};
use nonlocal_core::{
    ConvexBody, FunctionalSpec, IntegrationPlan, MollifierFamily, MollifierKind, TestFunction,
    Theorem,
};
use proptest::prelude::*;

fn spec(theorem: Theorem, half_width: f64, m: usize, p: f64, param: f64) -> FunctionalSpec {
    FunctionalSpec {
        theorem,
        f: TestFunction::by_name("gaussian", 1).unwrap(),
        body: ConvexBody::new(BodyKind::Box {
            half_widths: vec![half_width],
        })
        .unwrap(),
        m,
        p,
        parameter: param,
        mollifier: Some(MollifierFamily::new(MollifierKind::Shell, 1, param).unwrap()),
    }
}

fn plan(seed: u64) -> IntegrationPlan {
    IntegrationPlan::monte_carlo(20_000, seed, 2).with_box(6.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn first_order_taylor_equals_centered(
        seed in 0u64..1000,
        param in 0.001f64..0.5,
        p in 1.1f64..4.0,
        level in any::<bool>(),
    ) {
        let (a, b) = if level {
            (Theorem::NguyenCentered, Theorem::NguyenTaylor)
        } else {
            (Theorem::BbmCentered, Theorem::BbmTaylor)
        };
        let s = spec(a, 1.0, 1, p, param);
        let va = evaluate(&s, &plan(seed)).unwrap();
        let vb = evaluate(&s.with_theorem(b), &plan(seed)).unwrap();
        prop_assert_eq!(va.value, vb.value);
    }

    #[test]
    fn values_are_finite_nonnegative_and_seed_deterministic(
        seed in 0u64..1000,
        param in 0.01f64..0.5,
        m in 1usize..=3,
        t in 0usize..4,
    ) {
        let s = spec(Theorem::ALL[t], 1.0, m, 2.0, param);
        let a = evaluate(&s, &plan(seed)).unwrap();
        let b = evaluate(&s, &plan(seed)).unwrap();
        prop_assert!(a.value.is_finite() && a.value >= 0.0);
        prop_assert!(a.stderr.is_finite() && a.stderr >= 0.0);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn local_limit_scales_with_body(
        lambda in 0.25f64..4.0,
        m in 1usize..=3,
        p in 1.1f64..4.0,
    ) {
        // ∫_{λK} |y|^{mp} = λ^{N+mp} ∫_K |y|^{mp}
        let q = IntegrationPlan::quadrature(120).with_box(6.0);
        let a = local_limit(&spec(Theorem::NguyenCentered, 1.0, m, p, 0.1), &q).unwrap();
        let b = local_limit(&spec(Theorem::NguyenCentered, lambda, m, p, 0.1), &q).unwrap();
        let expected = lambda.powf(1.0 + m as f64 * p);
        prop_assert!((b / a / expected - 1.0).abs() < 1e-10);
    }

    #[test]
    fn limit_constants_are_positive_and_ordered(n in 1usize..=3, m in 1usize..=3, p in 1.01f64..8.0) {
        let c: Vec<f64> = Theorem::ALL.iter().map(|&t| limit_constant(t, n, m, p)).collect();
        prop_assert!(c.iter().all(|v| v.is_finite() && *v > 0.0));
        let mp = m as f64 * p;
        let nc = limit_constant(Theorem::NguyenCentered, n, m, p);
        let bc = limit_constant(Theorem::BbmCentered, n, m, p);
        prop_assert!((bc / nc / mp - 1.0).abs() < 1e-14);
    }
}

#[test]
fn zero_function_gives_zero_everywhere() {
    for t in Theorem::ALL {
        let mut s = spec(t, 1.0, 2, 2.0, 0.05);
        s.f = TestFunction::by_name("zero", 1).unwrap();
        let e = evaluate(&s, &plan(1)).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(local_limit(&s, &plan(1)).unwrap(), 0.0);
    }
}

#[test]
fn level_set_value_vanishes_for_large_delta() {
    // |R^m f| ≤ 2^m sup|f| for the centered remainder
    let s = spec(Theorem::NguyenCentered, 1.0, 2, 2.0, 4.5);
    assert_eq!(evaluate(&s, &plan(3)).unwrap().value, 0.0);
}
