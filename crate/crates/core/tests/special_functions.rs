use proptest::prelude::*;
use radialdpp::funcs::{
    beta_fn, erf, erfc, inc_beta_tails, ln_beta, log_gamma, quad_1d, quad_2d, reg_inc_beta, reg_inc_gamma_lower, tf_integrals, Box2,
    QuadratureSpec, TestFunction,
};

/// `1 - e^{-x} Σ_{j<=n} x^j / j!`, summed in log space.
fn poisson_lower(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut upper = 0.0;
    for j in 0..=n {
        let ln_term = -x + j as f64 * x.ln() - (1..=j).map(|k| (k as f64).ln()).sum::<f64>();
        upper += ln_term.exp();
    }
    1.0 - upper
}

#[test]
fn gamma_lower_matches_poisson_sum_on_grid() {
    for n in 0..=20u32 {
        for i in 0..=100 {
            let x = 0.5 * i as f64;
            let got = reg_inc_gamma_lower(n as f64 + 1.0, x).unwrap();
            let want = poisson_lower(n, x);
            assert!((got - want).abs() <= 1e-10, "n={n} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn log_gamma_at_integers_and_half() {
    let mut fact = 1.0f64;
    for n in 1..30u32 {
        assert!((log_gamma(n as f64).unwrap() - fact.ln()).abs() < 1e-12 * fact.ln().abs().max(1.0));
        fact *= n as f64;
    }
    assert!((log_gamma(0.5).unwrap() - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    assert!(log_gamma(0.0).is_err());
}

#[test]
fn erf_reference_values() {
    // erf(1) and erfc(3) to 16 digits.
    assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-14);
    assert!((erfc(3.0) / 2.209_049_699_858_544e-5 - 1.0).abs() < 1e-13);
    assert_eq!(erf(0.0), 0.0);
}

#[test]
fn beta_edge_values() {
    for b in [0.1, 1.0, 2.5, 40.0] {
        assert!((beta_fn(1.0, b).unwrap() - 1.0 / b).abs() < 1e-13 / b);
    }
    assert!((beta_fn(0.5, 0.5).unwrap() - std::f64::consts::PI).abs() < 1e-13);
    assert!(beta_fn(-1.0, 1.0).is_err());
}

#[test]
fn quadrature_exact_on_polynomials() {
    let spec = QuadratureSpec::default();
    for deg in 0..=6i32 {
        let r = quad_1d(|x| x.powi(deg), -1.3, 2.1, &spec).unwrap();
        let exact = (2.1f64.powi(deg + 1) - (-1.3f64).powi(deg + 1)) / (deg + 1) as f64;
        assert!((r.value - exact).abs() <= spec.abs_tol, "degree {deg}: {} vs {exact}", r.value);
    }
}

#[test]
fn quadrature_2d_examples() {
    let spec = QuadratureSpec::default();
    let one = quad_2d(|_, _| 1.0, Box2::square(0.0, 1.0), &spec).unwrap();
    assert!((one.value - 1.0).abs() < 1e-12);
    let g = quad_2d(|x, y| (-(x * x + y * y)).exp(), Box2::square(-9.0, 9.0), &spec).unwrap();
    assert!((g.value - std::f64::consts::PI).abs() < 1e-8, "{}", g.value);
}

fn step_function() -> impl Strategy<Value = TestFunction> {
    (prop::collection::vec(0.05f64..2.0, 1..6), -3.0f64..3.0, prop::collection::vec(-4.0f64..4.0, 6)).prop_map(|(widths, start, vals)| {
        let mut bp = vec![start];
        for w in &widths {
            bp.push(bp.last().unwrap() + w);
        }
        TestFunction::new(bp, vals[..widths.len()].to_vec()).unwrap()
    })
}

proptest! {
    #[test]
    fn beta_symmetry(a in 0.05f64..50.0, b in 0.05f64..50.0) {
        let ab = ln_beta(a, b).unwrap();
        let ba = ln_beta(b, a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0));
    }

    #[test]
    fn incomplete_beta_reflection(a in 0.1f64..30.0, b in 0.1f64..30.0, x in 0.0f64..=1.0) {
        let s = reg_inc_beta(a, b, x).unwrap() + reg_inc_beta(b, a, 1.0 - x).unwrap();
        prop_assert!((s - 1.0).abs() <= 1e-10, "{s}");
        let t = inc_beta_tails(a, b, x).unwrap();
        prop_assert!((t.lower + t.upper - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn gamma_lower_is_monotone_cdf(s in 0.5f64..200.0, x in 0.0f64..300.0, dx in 0.0f64..5.0) {
        let a = reg_inc_gamma_lower(s, x).unwrap();
        let b = reg_inc_gamma_lower(s, x + dx).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a - 1e-14);
    }

    #[test]
    fn integrals_are_linear(f in step_function(), g in step_function(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (fi, gi) = (tf_integrals(&f), tf_integrals(&g));
        let h = tf_integrals(&f.linear_combination(a, &g, b));
        let tol = 1e-10 * (1.0 + fi.exp_weighted.abs() + gi.exp_weighted.abs()) * (1.0 + a.abs() + b.abs());
        prop_assert!((h.integral - (a * fi.integral + b * gi.integral)).abs() <= tol);
        prop_assert!((h.exp_weighted - (a * fi.exp_weighted + b * gi.exp_weighted)).abs() <= tol);
    }

    #[test]
    fn square_integral_is_self_product(f in step_function()) {
        let sq = tf_integrals(&f).square;
        let prod = tf_integrals(&f.product(&f)).integral;
        prop_assert!((sq - prod).abs() <= 1e-12 * sq.max(1.0));
    }

    #[test]
    fn evaluation_vanishes_outside_support(f in step_function(), d in 0.0f64..10.0) {
        let (lo, hi) = (f.breakpoints()[0], *f.breakpoints().last().unwrap());
        prop_assert_eq!(f.eval(lo - d - 1e-9), 0.0);
        prop_assert_eq!(f.eval(hi + d), 0.0);
    }
}

#[test]
fn malformed_functions_rejected() {
    assert!(TestFunction::new(vec![0.0], vec![]).is_err());
    assert!(TestFunction::new(vec![0.0, 0.0], vec![1.0]).is_err());
    assert!(TestFunction::new(vec![0.0, 1.0], vec![f64::INFINITY]).is_err());
    assert!(TestFunction::new(vec![0.0, 1.0, 2.0], vec![1.0]).is_err());
    assert!(serde_json::from_str::<TestFunction>(r#"{"breakpoints":[1,0],"values":[1]}"#).is_err());
}

#[test]
fn right_endpoint_and_left_limit() {
    let f = TestFunction::new(vec![0.0, 1.0, 2.0, 3.0], vec![2.0, -1.0, 0.0]).unwrap();
    assert_eq!(f.essential_right_endpoint(), Some(2.0));
    assert_eq!(f.left_limit_at_right_endpoint(), Some(-1.0));
    let z = TestFunction::new(vec![0.0, 1.0], vec![0.0]).unwrap();
    assert_eq!(z.essential_right_endpoint(), None);
}
