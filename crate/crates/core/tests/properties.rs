use proptest::prelude::*;

use semisym::classify::classify_at;
use semisym::connection::{build_connection, check_concircular, s_concircular_check};
use semisym::expr::Expr;
use semisym::geometry::{frame_at, MetricSpec, VectorFieldSpec};

const COORDS: [&str; 3] = ["t", "x", "y"];

fn expr_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        prop::sample::select(COORDS.to_vec()).prop_map(str::to_string),
        (1u32..40).prop_map(|k| format!("{}", f64::from(k) / 8.0)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})+({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})-({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/(2+({b})^2)")),
            (inner.clone(), 2u32..4).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (
                prop::sample::select(vec!["sin", "cos", "tanh", "exp_tanh"]),
                inner.clone()
            )
                .prop_map(|(f, a)| match f {
                    "exp_tanh" => format!("exp(tanh({a}))"),
                    _ => format!("{f}({a})"),
                }),
            inner.clone().prop_map(|a| format!("sqrt(1+({a})^2)")),
            inner.prop_map(|a| format!("log(1+({a})^2)")),
        ]
    })
}

/// Richardson estimate from steps `h/2, h/4` and its disagreement with the one from `h, h/2`.
fn richardson(d: impl Fn(f64) -> f64, h: f64) -> (f64, f64) {
    let (a, b, c) = (d(h), d(h / 2.0), d(h / 4.0));
    let coarse = (4.0 * b - a) / 3.0;
    let fine = (4.0 * c - b) / 3.0;
    (fine, (fine - coarse).abs())
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 3)
}

proptest! {
    #[test]
    fn printing_round_trips(text in expr_text(), x in point()) {
        let e = Expr::parse(&text, &COORDS).unwrap();
        let again = Expr::parse(&e.to_string(), &COORDS).unwrap();
        prop_assert_eq!(e.eval(&x).unwrap().to_bits(), again.eval(&x).unwrap().to_bits());
    }

    #[test]
    fn jets_match_central_differences(text in expr_text(), x in point()) {
        let e = Expr::parse(&text, &COORDS).unwrap();
        let j = e.eval_jet2(&x).unwrap();
        let at = |d: &[(usize, f64)]| {
            let mut y = x.clone();
            for &(i, h) in d {
                y[i] += h;
            }
            e.eval(&y).unwrap()
        };
        // round-off grows like eps * |f| / h^k
        let noise = 4.0 * f64::EPSILON * (1.0 + j.value().abs());
        let h1 = 1e-5;
        let gnorm = j.grad().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..3 {
            let first = |h: f64| (at(&[(i, h)]) - at(&[(i, -h)])) / (2.0 * h);
            let (fd, spread) = richardson(first, h1);
            prop_assert!((fd - j.grad()[i]).abs() <= 1e-6 * (1.0 + gnorm) + spread + 4.0 * noise / (h1 / 4.0), "grad {} {} {}", i, fd, j.grad()[i]);
        }
        let h2 = 1e-4;
        let hnorm = (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).fold(0.0f64, |m, (a, b)| m.max(j.hess(a, b).abs()));
        for a in 0..3 {
            for b in 0..3 {
                let second = |h: f64| {
                    if a == b {
                        (at(&[(a, h)]) - 2.0 * j.value() + at(&[(a, -h)])) / (h * h)
                    } else {
                        (at(&[(a, h), (b, h)]) - at(&[(a, h), (b, -h)]) - at(&[(a, -h), (b, h)])
                            + at(&[(a, -h), (b, -h)]))
                            / (4.0 * h * h)
                    }
                };
                let (fd, spread) = richardson(second, h2);
                prop_assert!((fd - j.hess(a, b)).abs() <= 1e-5 * (1.0 + hnorm) + spread + 4.0 * noise / (h2 * h2 / 16.0), "hess {} {} {} {}", a, b, fd, j.hess(a, b));
                prop_assert_eq!(j.hess(a, b).to_bits(), j.hess(b, a).to_bits());
            }
        }
    }

    #[test]
    fn taxonomy_lattice_and_concircular_equivalence(
        coeffs in prop::collection::vec(-1.0f64..1.0, 6),
        x in point(),
        warp in prop::bool::ANY,
    ) {
        let e = |s: &str| Expr::parse(s, &COORDS).unwrap();
        let m = if warp {
            MetricSpec::diagonal(COORDS.iter().map(|s| s.to_string()).collect(), vec![e("-1"), e("exp(2*t)"), e("exp(2*t)")])
        } else {
            MetricSpec::diagonal(COORDS.iter().map(|s| s.to_string()).collect(), vec![e("-1"), e("1"), e("1")])
        }
        .unwrap();
        let p = VectorFieldSpec::new(
            COORDS
                .iter()
                .enumerate()
                .map(|(i, c)| e(&format!("{}+{}*{c}", coeffs[2 * i], coeffs[2 * i + 1])))
                .collect(),
        );
        let c = build_connection(frame_at(&m, &x).unwrap(), &p).unwrap();
        let v = classify_at(&c, None, 1e-8);
        if v.holds("parallel") {
            prop_assert!(v.holds("recurrent") && v.holds("concircular_fialkow"));
        }
        if v.holds("concurrent") {
            prop_assert!(v.holds("concircular_fialkow"));
        }
        prop_assert_eq!(check_concircular(&c, 1e-8).holds, s_concircular_check(&c, 1e-8).holds);
    }
}

#[test]
fn dimension_mismatch_is_reported() {
    let e = Expr::parse("t*x", &COORDS).unwrap();
    assert!(e.eval(&[1.0, 2.0]).is_err());
}
