use proptest::prelude::*;
use radialdpp::asymptotics::{
    beta_kernel_marginal, binomial_exp_error, gamma_moment_constant, hyperbolic_scale, k_coeff_power_error, limit_variance_ginibre,
    limit_variance_hyperbolic, predicted_limit, probe_binomial_exp, probe_k_coeff_power, RegimeClass,
};
use radialdpp::funcs::{quad_2d_pieces, QuadratureSpec};
use radialdpp::oracle::{exact_variance, poisson_limit_diagnostics};
use radialdpp::{Ensemble, LimitKind, ScalingFamily, ScalingRegime, TestFunction};

const SQRT_PI: f64 = 1.772_453_850_905_516;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

/// `(1/√π) ∫∫ (f(x) - f(y))² e^{-(x-y)²}` by direct 2-D quadrature over
/// the breakpoint grid, padded by 8 on each side.
fn ginibre_functional_by_quadrature(f: &TestFunction) -> f64 {
    let bp = f.breakpoints();
    let mut grid = vec![bp[0] - 8.0];
    grid.extend_from_slice(bp);
    grid.push(bp[bp.len() - 1] + 8.0);
    let s = QuadratureSpec::new(1e-12, 1e-12, 200_000).unwrap();
    let r = quad_2d_pieces(
        |x, y| {
            let d = f.eval(x) - f.eval(y);
            d * d * (-(x - y) * (x - y)).exp()
        },
        &grid,
        &grid,
        &s,
    )
    .unwrap();
    // Pairs with one point beyond the padding: f = 0 there, so
    // ∫ f(x)² ∫_{|x-y| > 8+} e^{-(x-y)²} dy dx ≤ ∫f² √π erfc(8) is negligible.
    r.value / SQRT_PI
}

#[test]
fn hyperbolic_scale_examples() {
    assert_eq!(hyperbolic_scale(1.0, 0.0).unwrap(), 0.125);
    assert_eq!(hyperbolic_scale(8.0, 0.0).unwrap(), 1.0);
    assert!((hyperbolic_scale(2.0, 4f64.ln()).unwrap() - 1.0).abs() < 1e-15);
    assert!(hyperbolic_scale(0.0, 1.0).is_err());
}

#[test]
fn kernel_marginal_examples_and_grid() {
    assert!((beta_kernel_marginal(1.0, 0.0, &spec()).unwrap() - 1.0).abs() < 1e-10);
    assert!((beta_kernel_marginal(1.0, 1.0, &spec()).unwrap() - 1f64.exp()).abs() < 1e-9);
    assert!((beta_kernel_marginal(0.5, -2.0, &spec()).unwrap() - (-2f64).exp()).abs() < 1e-10);
    for alpha in [0.5, 1.0, 2.0, 3.7] {
        for i in 0..41 {
            let x = -5.0 + 0.25 * i as f64;
            let v = beta_kernel_marginal(alpha, x, &spec()).unwrap();
            assert!((v - x.exp()).abs() <= 1e-8, "alpha={alpha} x={x}");
        }
    }
}

#[test]
fn gamma_moment_examples() {
    for (alpha, want) in [(1.0, 0.25), (2.0, 0.5), (0.5, 0.125)] {
        let g = gamma_moment_constant(alpha, &spec()).unwrap();
        assert_eq!(g.closed_form, want);
        assert!((g.numeric - want).abs() <= 1e-10, "{alpha}: {}", g.numeric);
    }
}

#[test]
fn ginibre_functional_matches_direct_quadrature() {
    for f in [
        TestFunction::indicator(0.0, 1.0).unwrap(),
        TestFunction::new(vec![-1.0, 0.5, 0.7, 2.0], vec![1.5, -2.0, 0.25]).unwrap(),
    ] {
        let closed = limit_variance_ginibre(&f);
        let direct = ginibre_functional_by_quadrature(&f);
        assert!((closed - direct).abs() <= 1e-8, "{closed} vs {direct}");
    }
}

#[test]
fn long_plateau_has_no_interior_contribution() {
    // Only pairs straddling ±L contribute; each edge gives 1/√π.
    for l in [10.0, 50.0] {
        let f = TestFunction::indicator(-l, l).unwrap();
        assert!((limit_variance_ginibre(&f) - 2.0 / SQRT_PI).abs() < 1e-12);
    }
}

#[test]
fn hyperbolic_functional_matches_oracle_at_r12() {
    let f = TestFunction::indicator(0.0, 1.0).unwrap();
    let v = limit_variance_hyperbolic(1.0, &f, &spec()).unwrap();
    let exact = exact_variance(&Ensemble::hyperbolic(1.0).unwrap(), &f, 12.0, 1.0, 1e-12).unwrap();
    let ratio = exact / (hyperbolic_scale(1.0, 12.0).unwrap() * v);
    assert!((ratio - 1.0).abs() <= 0.02, "{ratio}");
}

fn step_function() -> impl Strategy<Value = TestFunction> {
    (prop::collection::vec(0.1f64..1.5, 1..5), -2.0f64..2.0, prop::collection::vec(-2.0f64..2.0, 5)).prop_map(|(widths, start, vals)| {
        let mut bp = vec![start];
        for w in &widths {
            bp.push(bp.last().unwrap() + w);
        }
        TestFunction::new(bp, vals[..widths.len()].to_vec()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ginibre_functional_quadratic_and_reflection_invariant(f in step_function(), c in -3.0f64..3.0) {
        let v = limit_variance_ginibre(&f);
        prop_assert!(v >= 0.0);
        let vc = limit_variance_ginibre(&f.scale(c));
        prop_assert!((vc - c * c * v).abs() <= 1e-10 * (1.0 + vc.abs()));
        let vr = limit_variance_ginibre(&f.reflect());
        prop_assert!((vr - v).abs() <= 1e-10 * (1.0 + v));
        prop_assert_eq!(v == 0.0, f.is_zero());
    }

    #[test]
    fn hyperbolic_functional_quadratic(f in step_function(), alpha in 0.3f64..4.0) {
        let v = limit_variance_hyperbolic(alpha, &f, &spec()).unwrap();
        prop_assert!(v >= 0.0);
        let v2 = limit_variance_hyperbolic(alpha, &f.scale(2.0), &spec()).unwrap();
        prop_assert!((v2 - 4.0 * v).abs() <= 1e-8 * (1.0 + v2), "{v2} vs 4·{v}");
        if !f.is_zero() {
            prop_assert!(v > 0.0);
        }
    }
}

#[test]
fn zero_function_has_zero_functionals() {
    let z = TestFunction::new(vec![0.0, 1.0], vec![0.0]).unwrap();
    assert_eq!(limit_variance_ginibre(&z), 0.0);
    assert_eq!(limit_variance_hyperbolic(1.0, &z, &spec()).unwrap(), 0.0);
}

#[test]
fn binomial_lemma_examples() {
    assert_eq!(binomial_exp_error(500.0, 0.0).unwrap(), 0.0);
    // The error decays like 1/y: sup over one floor period at t = 2.
    let sup = |y: f64| (0..50).map(|i| binomial_exp_error(y, 2.0 + i as f64 / (50.0 * y)).unwrap()).fold(0.0, f64::max);
    let ratio = sup(1e3) / sup(1e4);
    assert!((5.0..20.0).contains(&ratio), "{ratio}");
    let probe = probe_binomial_exp(1.0).unwrap();
    assert!(probe.bounded && probe.constant.is_finite());
    let c = probe.constant;
    let at = binomial_exp_error(1e3, 1.0).unwrap();
    assert!(at <= c * (-1.0 / c).exp() / 1e3, "{at}");
}

#[test]
fn k_coeff_lemma_examples() {
    for i in 0..200 {
        let y = 0.37 * i as f64;
        let e = k_coeff_power_error(1.0, y).unwrap();
        assert!(e <= 1.0 + 1e-12 && (e - (y.floor() + 1.0 - y)).abs() < 1e-9, "y={y}: {e}");
    }
    assert!((k_coeff_power_error(2.0, 0.0).unwrap() - 2.0).abs() < 1e-14);
    for alpha in [0.5, 1.0, 2.0] {
        let p = probe_k_coeff_power(alpha).unwrap();
        assert!(p.weighted.bounded, "alpha={alpha}");
        assert!(p.sup_below_one.is_finite());
    }
    let c = probe_k_coeff_power(0.5).unwrap().weighted.constant;
    assert!(k_coeff_power_error(0.5, 1e4).unwrap() <= c * 1e-2 * (1.0 + 1e-9));
}

#[test]
fn classification_table() {
    let h = Ensemble::hyperbolic(1.0).unwrap();
    let g = Ensemble::Ginibre;
    let class = |e: &Ensemble, f| ScalingRegime::classify(e, f).unwrap().class;
    assert_eq!(class(&g, ScalingFamily::Fixed), RegimeClass::FixedScale { coef: 1.0 });
    assert_eq!(class(&g, ScalingFamily::Power { coef: 1.0, p: 0.5 }), RegimeClass::WhiteNoise);
    assert_eq!(class(&g, ScalingFamily::Extreme), RegimeClass::Extreme { intensity: 2.0 });
    assert_eq!(class(&g, ScalingFamily::Power { coef: 1.0, p: 2.0 }), RegimeClass::Degenerate);
    assert_eq!(class(&h, ScalingFamily::Exponential { coef: 1.0, c: 0.5 }), RegimeClass::WhiteNoise);
    assert_eq!(class(&h, ScalingFamily::Extreme), RegimeClass::Extreme { intensity: 0.25 });
    assert_eq!(class(&h, ScalingFamily::Exponential { coef: 1.0, c: 2.0 }), RegimeClass::Degenerate);
    assert_eq!(class(&h, ScalingFamily::Power { coef: 1.0, p: -0.5 }), RegimeClass::Vanishing);
    assert!(ScalingRegime::classify(&g, ScalingFamily::Power { coef: -1.0, p: 1.0 }).is_err());
}

#[test]
fn predicted_laws() {
    let f = TestFunction::indicator(0.0, 1.0).unwrap();
    let g = Ensemble::Ginibre;
    let fixed = ScalingRegime::classify(&g, ScalingFamily::Fixed).unwrap();
    match predicted_limit(&g, &fixed, &f, 100.0, &spec()).unwrap().kind {
        LimitKind::Gaussian { centering, scale, variance } => {
            assert_eq!(centering, 200.0);
            assert_eq!(scale, 100.0);
            assert!((variance - limit_variance_ginibre(&f)).abs() < 1e-15);
        }
        k => panic!("{k:?}"),
    }
    let h = Ensemble::hyperbolic(2.0).unwrap();
    let extreme = ScalingRegime::classify(&h, ScalingFamily::Extreme).unwrap();
    assert_eq!(predicted_limit(&h, &extreme, &f, 10.0, &spec()).unwrap().kind, LimitKind::Poisson { intensity: 0.5 });
    let wn = ScalingRegime::classify(&g, ScalingFamily::Power { coef: 1.0, p: 0.5 }).unwrap();
    match predicted_limit(&g, &wn, &f, 400.0, &spec()).unwrap().kind {
        LimitKind::WhiteNoise { variance, .. } => assert_eq!(variance, 2.0),
        k => panic!("{k:?}"),
    }
}

#[test]
fn avoidance_single_probability_decays_like_exp_minus_r() {
    let e = Ensemble::hyperbolic(1.0).unwrap();
    let f = TestFunction::indicator(0.0, 1.0).unwrap();
    let at = |r: f64| poisson_limit_diagnostics(&e, r, r.exp(), &f, 1e-12).unwrap().sup_single;
    let ratio = at(8.0) / at(10.0);
    let e2 = 2f64.exp();
    assert!((ratio / e2 - 1.0).abs() <= 0.2, "{ratio}");
}
