use std::collections::BTreeMap;

use ddehopf::equilibria::linearize;
use ddehopf::modelkit::jets::{multi_index, LEN};
use ddehopf::modelkit::{
    parse, sis_exp, sis_inverse, taylor_coeffs, BinOp, Expr, Func, Point, TaylorError, Var,
};
use proptest::prelude::*;

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..1000).prop_map(|n| Expr::num(n as f64 / 8.0)),
        (0.0f64..1e3).prop_map(Expr::num),
        prop::sample::select(Var::ALL.to_vec()).prop_map(Expr::var),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            (
                prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow]),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            (prop::sample::select(vec![Func::Exp, Func::Ln, Func::Sin, Func::Cos, Func::Sqrt]), inner.clone())
                .prop_map(|(f, a)| Expr::call(f, a)),
            inner.prop_map(|e| Expr::Neg(Box::new(e))),
        ]
    })
}

proptest! {
    #[test]
    fn printing_then_parsing_is_identity(e in arb_expr()) {
        let printed = e.to_string();
        let parsed = parse(&printed).unwrap();
        prop_assert_eq!(&parsed, &e, "{}", printed);
        prop_assert_eq!(parse(&parsed.to_string()).unwrap(), parsed);
    }
}

/// Sparse polynomial in `(x, xd, lam, mu)`: exponents to coefficient.
type Poly = BTreeMap<[u32; 4], f64>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
            *out.entry(e).or_insert(0.0) += ca * cb;
        }
    }
    out
}

fn poly_add(a: &Poly, b: &Poly, sign: f64) -> Poly {
    let mut out = a.clone();
    for (e, c) in b {
        *out.entry(*e).or_insert(0.0) += sign * c;
    }
    out
}

/// Random polynomial expression together with its expansion.
fn arb_poly() -> impl Strategy<Value = (Expr, Poly)> {
    let leaf = prop_oneof![
        (-4i32..=4).prop_map(|n| {
            let c = n as f64 / 2.0;
            let e = if c < 0.0 { Expr::Neg(Box::new(Expr::num(-c))) } else { Expr::num(c) };
            (e, Poly::from([([0; 4], c)]))
        }),
        (0usize..4).prop_map(|i| {
            let mut e = [0; 4];
            e[i] = 1;
            (Expr::var(Var::ALL[i]), Poly::from([(e, 1.0)]))
        }),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|((ea, pa), (eb, pb))| {
                (Expr::binary(BinOp::Add, ea, eb), poly_add(&pa, &pb, 1.0))
            }),
            (inner.clone(), inner.clone()).prop_map(|((ea, pa), (eb, pb))| {
                (Expr::binary(BinOp::Sub, ea, eb), poly_add(&pa, &pb, -1.0))
            }),
            (inner.clone(), inner.clone()).prop_map(|((ea, pa), (eb, pb))| {
                (Expr::binary(BinOp::Mul, ea, eb), poly_mul(&pa, &pb))
            }),
            (inner.clone(), 2u32..=3).prop_map(|((e, p), n)| {
                let mut q = Poly::from([([0; 4], 1.0)]);
                for _ in 0..n {
                    q = poly_mul(&q, &p);
                }
                (Expr::binary(BinOp::Pow, e, Expr::num(n as f64)), q)
            }),
            inner.prop_map(|(e, p)| (Expr::Neg(Box::new(e)), poly_add(&Poly::new(), &p, -1.0))),
        ]
    })
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Taylor coefficient of `x^j xd^k lam^a mu^b` about `base`, by expansion.
fn oracle(p: &Poly, base: [f64; 4], d: [u32; 4]) -> f64 {
    p.iter()
        .filter(|(e, _)| (0..4).all(|i| e[i] >= d[i]))
        .map(|(e, c)| c * (0..4).map(|i| binom(e[i], d[i]) * base[i].powi((e[i] - d[i]) as i32)).product::<f64>())
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn polynomial_jets_match_expansion(
        (expr, poly) in arb_poly(),
        base in prop::array::uniform4(-1.5f64..1.5),
    ) {
        let jet = expr.eval_jet(&Point::new(base[0], base[1], base[2], base[3])).unwrap();
        for i in 0..LEN {
            let (j, k, a, b) = multi_index(i);
            let want = oracle(&poly, base, [j as u32, k as u32, a as u32, b as u32]);
            let got = jet.coeff(j, k, a, b);
            prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{expr} at {:?}: {} vs {}", (j, k, a, b), got, want);
        }
    }
}

#[test]
fn sis_inverse_taylor_closed_forms() {
    for (r, p) in [(1.784, 2.613), (1.5, 1.0), (3.0, 4.0)] {
        let lp = linearize(&sis_inverse(), r, p).unwrap();
        let t = taylor_coeffs(&sis_inverse(), &lp).unwrap();
        // f(x, xd) = -x + r x (1 - x) / (1 + p xd) about x = xd = ybar.
        let y = lp.ybar;
        let q = 1.0 + p * y;
        let f20 = -(p + r) / (1.0 + p);
        assert!((t.get(2, 0) - f20).abs() < 1e-12, "{} vs {f20}", t.get(2, 0));
        assert!((t.get(2, 0) + r / q).abs() < 1e-12);
        let f03 = -r * y * (1.0 - y) * p.powi(3) / q.powi(4);
        assert!((t.get(0, 3) - f03).abs() < 1e-12, "{} vs {f03}", t.get(0, 3));
        assert_eq!(t.get(3, 0), 0.0);
        let f21 = r * p / q.powi(2);
        assert!((t.get(2, 1) - f21).abs() < 1e-12);
    }
}

fn rhs(m: &ddehopf::modelkit::ModelSpec, x: f64, xd: f64, lam: f64, mu: f64) -> f64 {
    m.rhs.eval_real(&Point::new(x, xd, lam, mu)).unwrap()
}

#[test]
fn taylor_coefficients_match_finite_differences() {
    let h = 1e-3;
    for (m, lam, mu) in [(sis_inverse(), 1.784, 2.613), (sis_exp(), 2.1474, 1.6617)] {
        let lp = linearize(&m, lam, mu).unwrap();
        let t = taylor_coeffs(&m, &lp).unwrap();
        let y = lp.ybar;
        let f = |a: f64, b: f64| rhs(&m, y + a * h, y + b * h, lam, mu);
        // Second-order and third-order central stencils, divided by j! k!.
        let fd = [
            ((2, 0), (f(1., 0.) - 2.0 * f(0., 0.) + f(-1., 0.)) / (2.0 * h * h)),
            ((0, 2), (f(0., 1.) - 2.0 * f(0., 0.) + f(0., -1.)) / (2.0 * h * h)),
            ((1, 1), (f(1., 1.) - f(1., -1.) - f(-1., 1.) + f(-1., -1.)) / (4.0 * h * h)),
            ((3, 0), (f(2., 0.) - 2.0 * f(1., 0.) + 2.0 * f(-1., 0.) - f(-2., 0.)) / (12.0 * h.powi(3))),
            ((0, 3), (f(0., 2.) - 2.0 * f(0., 1.) + 2.0 * f(0., -1.) - f(0., -2.)) / (12.0 * h.powi(3))),
            (
                (2, 1),
                ((f(1., 1.) - 2.0 * f(0., 1.) + f(-1., 1.)) - (f(1., -1.) - 2.0 * f(0., -1.) + f(-1., -1.)))
                    / (2.0 * h * h * h * 2.0),
            ),
            (
                (1, 2),
                ((f(1., 1.) - 2.0 * f(1., 0.) + f(1., -1.)) - (f(-1., 1.) - 2.0 * f(-1., 0.) + f(-1., -1.)))
                    / (2.0 * h * h * h * 2.0),
            ),
        ];
        for ((j, k), v) in fd {
            let c = t.get(j, k);
            // Third differences at h = 1e-3 carry about 1e-10 / h^3 ~ 1e-7 round-off.
            let tol = if j + k == 3 { 1e-4 } else { 1e-5 };
            assert!((c - v).abs() <= tol * c.abs().max(1e-2), "{} f{j}{k}: {c} vs {v}", m.name);
        }
    }
}

#[test]
fn inconsistent_linearization_is_reported() {
    let mut lp = linearize(&sis_inverse(), 1.784, 2.613).unwrap();
    lp.alpha += 1e-6;
    assert!(matches!(taylor_coeffs(&sis_inverse(), &lp), Err(TaylorError::InconsistentLinearization { .. })));
}

#[test]
fn evaluation_agrees_with_jet_value() {
    let e = parse("exp(-mu * xd) * x * (1 - x) + sin(lam)^2").unwrap();
    let p = Point::new(0.3, 0.2, 1.1, 0.7);
    let v = e.eval_real(&p).unwrap();
    assert!((e.eval_jet(&p).unwrap().value() - v).abs() < 1e-15);
}
