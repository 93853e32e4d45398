//! Property-based checks of the coefficient algebra, the expression parser
//! and the exact norm routes.

mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

use bergman::series::{multi_indices_of_degree, MultiIndex, PowerSeries};
use bergman::spaces::{self, compute_norm, NormKind, NormRoute, NormSpec};
use bergman::weights::expr::{parse_expr, EvalContext};
use bergman::weights::Weight;

fn arb_series(n: usize, degree: usize) -> impl Strategy<Value = PowerSeries> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=degree + 1).prop_map(move |cs| {
        let terms: Vec<_> = cs
            .into_iter()
            .enumerate()
            .map(|(k, (re, im))| {
                let mut m = vec![0usize; n];
                m[k % n] = k;
                (MultiIndex::new(m), Complex64::new(re, im))
            })
            .collect();
        PowerSeries::from_terms(n, terms).unwrap()
    })
}

fn arb_dense_series(degree: usize) -> impl Strategy<Value = PowerSeries> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), degree + 1).prop_map(|cs| {
        let terms: Vec<_> = cs
            .into_iter()
            .enumerate()
            .map(|(k, (re, im))| (MultiIndex::new(vec![k]), Complex64::new(re, im)))
            .collect();
        PowerSeries::from_terms(1, terms).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dilation_is_a_semigroup(f in arb_series(2, 8), r in 0.1f64..1.0, s in 0.1f64..1.0) {
        let a = f.dilate(r).unwrap().dilate(s).unwrap();
        let b = f.dilate(r * s).unwrap();
        for (m, c) in f.terms() {
            let ca = a.coefficient(m);
            let cb = b.coefficient(m);
            // (r^k)(s^k) vs (rs)^k: equal up to rounding
            prop_assert!((ca - cb).norm() <= 1e-12 * c.norm().max(1.0));
        }
    }

    #[test]
    fn radial_derivative_commutes_with_dilation(f in arb_series(2, 8), r in 0.1f64..1.0) {
        let a = f.dilate(r).unwrap().radial_derivative();
        let b = f.radial_derivative().dilate(r).unwrap();
        for (m, _) in f.terms() {
            let ca = a.coefficient(m);
            let cb = b.coefficient(m);
            prop_assert!((ca - cb).norm() <= 1e-15 * ca.norm().max(1e-300));
        }
    }

    #[test]
    fn evaluation_is_linear(f in arb_series(2, 6), g in arb_series(2, 6),
                            x in -0.9f64..0.9, y in -0.9f64..0.9) {
        let z = [Complex64::new(x, y), Complex64::new(y, -x)];
        let lhs = f.add(&g).unwrap().evaluate(&z).unwrap();
        let rhs = f.evaluate(&z).unwrap() + g.evaluate(&z).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn dilation_bound_at_evaluation(f in arb_dense_series(8), r in 0.1f64..1.0,
                                    x in -0.9f64..0.9, y in -0.9f64..0.9) {
        // f_r(z) = f(rz) pointwise
        let z = [Complex64::new(x, y)];
        let rz = [Complex64::new(r * x, r * y)];
        let lhs = f.dilate(r).unwrap().evaluate(&z).unwrap();
        let rhs = f.evaluate(&rz).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn norm_is_homogeneous(f in arb_dense_series(6), c_re in -2.0f64..2.0, c_im in -2.0f64..2.0) {
        let c = Complex64::new(c_re, c_im);
        let w = Weight::angular(1, "1").unwrap();
        let mut s = NormSpec::new(1, NormKind::BergmanPolydisk { p: 2.0, alpha: 0.0 }, w);
        s.route = NormRoute::ExactCoefficient;
        let base = compute_norm(&f, &s).unwrap().value;
        let scaled = compute_norm(&f.scale(c), &s).unwrap().value;
        prop_assert!((scaled - c.norm() * base).abs() <= 1e-12 * base.max(1.0));
    }

    #[test]
    fn dilation_contracts_the_exact_norm(f in arb_dense_series(8), r in 0.1f64..1.0) {
        // radial monomial norms are increasing in the coefficient modulus,
        // and dilation shrinks every coefficient
        let w = Weight::angular(1, "1").unwrap();
        let mut s = NormSpec::new(1, NormKind::BergmanPolydisk { p: 2.0, alpha: 0.5 }, w);
        s.route = NormRoute::ExactCoefficient;
        let base = compute_norm(&f, &s).unwrap().value;
        let dilated = compute_norm(&f.dilate(r).unwrap(), &s).unwrap().value;
        prop_assert!(dilated <= base * (1.0 + 1e-12));
    }

    #[test]
    fn parseval_for_unit_weight(f in arb_dense_series(8)) {
        let w = Weight::angular(1, "1").unwrap();
        let mut s = NormSpec::new(1, NormKind::BergmanPolydisk { p: 2.0, alpha: 0.0 }, w);
        s.route = NormRoute::ExactCoefficient;
        let got = compute_norm(&f, &s).unwrap().value_pow_p;
        let want: f64 = f
            .terms()
            .map(|(m, a)| a.norm_sqr() * spaces::monomial_norm_sq(m, 0.0))
            .sum();
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1e-12));
    }

    #[test]
    fn taylor_error_decreases_and_vanishes(f in arb_dense_series(8)) {
        let w = Weight::angular(1, "1").unwrap();
        let q = bergman::integrate::QuadratureSpec::default();
        let deg = f.max_degree();
        let mut prev = f64::INFINITY;
        for k in 0..=deg {
            let e = spaces::taylor_error(&f, k, &w, 0.0, &q).unwrap();
            prop_assert!(e <= prev + 1e-15);
            prev = e;
        }
        prop_assert_eq!(spaces::taylor_error(&f, deg, &w, 0.0, &q).unwrap(), 0.0);
    }
}

// Random expression trees rendered to source and re-parsed.
#[derive(Debug, Clone)]
enum GenExpr {
    Num(f64),
    Var(&'static str),
    Add(Box<GenExpr>, Box<GenExpr>),
    Mul(Box<GenExpr>, Box<GenExpr>),
    Sin(Box<GenExpr>),
    Cos(Box<GenExpr>),
}

impl GenExpr {
    fn source(&self) -> String {
        match self {
            GenExpr::Num(v) => format!("{v:?}"),
            GenExpr::Var(s) => s.to_string(),
            GenExpr::Add(a, b) => format!("({} + {})", a.source(), b.source()),
            GenExpr::Mul(a, b) => format!("({} * {})", a.source(), b.source()),
            GenExpr::Sin(a) => format!("sin({})", a.source()),
            GenExpr::Cos(a) => format!("cos({})", a.source()),
        }
    }
}

fn arb_gen_expr() -> impl Strategy<Value = GenExpr> {
    let leaf = prop_oneof![
        (0.01f64..10.0).prop_map(GenExpr::Num),
        prop_oneof![
            Just(GenExpr::Var("x1")),
            Just(GenExpr::Var("y1")),
            Just(GenExpr::Var("r1")),
            Just(GenExpr::Var("th1")),
            Just(GenExpr::Var("absz")),
        ],
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| GenExpr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| GenExpr::Mul(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| GenExpr::Sin(Box::new(a))),
            inner.prop_map(|a| GenExpr::Cos(Box::new(a))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn parser_round_trips_through_pretty_print(e in arb_gen_expr(),
                                               x in -0.9f64..0.9, y in -0.9f64..0.9) {
        let src = e.source();
        let parsed = parse_expr(&src, 1).unwrap();
        let reparsed = parse_expr(&parsed.pretty_print(), 1).unwrap();
        let ctx = EvalContext::from_point(&[Complex64::new(x, y)]);
        let a = parsed.evaluate(&ctx).unwrap();
        let b = reparsed.evaluate(&ctx).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn radial_derivative_eigenrelation_exact() {
    for n in 1..=3usize {
        for deg in 0..=12usize {
            for m in multi_indices_of_degree(n, deg) {
                let f = PowerSeries::monomial(m.clone(), Complex64::new(1.25, -0.5));
                let rf = f.radial_derivative();
                let expected = f.scale(Complex64::new(deg as f64, 0.0));
                assert_eq!(rf.coefficient(&m), expected.coefficient(&m));
            }
        }
    }
}

#[test]
fn expression_gaussian_matches_builtin() {
    let builtin = Weight::gaussian(1, 1.0, bergman::weights::GaussianMode::Full).unwrap();
    let expr = bergman::weights::parse_weight("exp(0 - absz^2)", 1).unwrap();
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let t = i as f64 / 1000.0;
        let z = [Complex64::from_polar(0.95 * t, 7.0 * t)];
        let a = builtin.evaluate(&z).unwrap();
        let b = expr.evaluate(&z).unwrap();
        worst = worst.max(rel_err(b, a));
    }
    assert!(worst < 1e-12, "worst rel err {worst}");
}
