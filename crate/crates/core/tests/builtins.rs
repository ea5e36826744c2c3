use semisym::analysis::run_analysis;
use semisym::catalog::BUILTIN_NAMES;
use semisym::config::{parse_config, AnalysisConfig};

fn kv(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
    pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

#[test]
fn every_builtin_meets_its_expectations() {
    for name in BUILTIN_NAMES {
        let cfg = AnalysisConfig::from_builtin(name, &[]).unwrap();
        assert!(!cfg.expectations.is_empty(), "{name}");
        let r = run_analysis(&cfg).unwrap();
        let failed: Vec<_> = r.checks().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
        assert!(failed.is_empty(), "{name}: {failed:?}");
        assert_eq!(r.points.len(), 16);
    }
}

#[test]
fn minkowski_is_flat_and_einstein() {
    let r = run_analysis(&AnalysisConfig::from_builtin("minkowski", &[]).unwrap()).unwrap();
    assert_eq!(r.exit_code(), 0);
    let s = r.spread("scalar.g").unwrap();
    assert_eq!((s.min, s.max), (0.0, 0.0));
    assert_eq!(r.verdict("parallel"), Some(true));
}

#[test]
fn de_sitter_vacuum_fluid() {
    let cfg = parse_config(
        r#"
[manifold]
dimension = 4
signature = "lorentzian"

[metric]
builtin = "desitter-flat"

[fluid]
sigma = "1"
p = "-1"
lambda = 3.0
k = 1.0
"#,
    )
    .unwrap();
    let r = run_analysis(&cfg).unwrap();
    assert_eq!(r.exit_code(), 0);
    assert_eq!(r.verdict("grw"), Some(true));
    assert_eq!(r.verdict("phantom_barrier"), Some(true));
    assert!(r.worst("relativity.efe").unwrap() <= 1e-9);
    let w = r.spread("fluid.w").unwrap();
    assert_eq!((w.min, w.max), (-1.0, -1.0));
}

#[test]
fn de_sitter_ordinary_fluid_breaks_the_field_equations() {
    let cfg = parse_config(
        "[metric]\nbuiltin = \"desitter-flat\"\n[fluid]\nsigma = 2\np = 1\n[sampling]\ncount = 3\n",
    )
    .unwrap();
    let r = run_analysis(&cfg).unwrap();
    assert_eq!(r.exit_code(), 1);
    assert_eq!(r.verdict("phantom_barrier"), Some(false));
    assert!(r.worst("relativity.div_tau_iff_barrier").unwrap() == 0.0);
    let d = r.spread("div_tau.constant").unwrap();
    assert!(d.min > 0.0);
}

#[test]
fn grw_generic_has_varying_scalar_curvature() {
    let r = run_analysis(&AnalysisConfig::from_builtin("grw-generic", &[]).unwrap()).unwrap();
    assert_eq!(r.exit_code(), 0);
    assert_eq!(r.verdict("scalar_constant"), Some(false));
    let s = r.spread("scalar.g").unwrap();
    assert!(s.max - s.min > 1e-7);
    let d = r.spread("pf.a_minus_b").unwrap();
    assert!((d.min - 3.0).abs() < 1e-9 && (d.max - 3.0).abs() < 1e-9);
}

#[test]
fn flrw_linear_warp_is_not_concircular() {
    let r = run_analysis(&AnalysisConfig::from_builtin("flrw", &kv(&[("f", "t")])).unwrap()).unwrap();
    assert_eq!(r.verdict("concircular"), Some(false));
    assert_eq!(r.verdict("s_concircular"), Some(false));
    assert_eq!(r.verdict("torse_forming"), Some(true));
    assert_eq!(r.verdict("quasi_einstein"), Some(true));
    assert!(r.worst("anchor.ricci.0").is_none());
}

#[test]
fn flrw_rescaled_generator_solves_the_riccati_equation() {
    let cfg = AnalysisConfig::from_builtin("flrw", &kv(&[("f", "t"), ("pt", "t/(1+t^2/2)")])).unwrap();
    let r = run_analysis(&cfg).unwrap();
    assert_eq!(r.exit_code(), 0);
    assert_eq!(r.verdict("torse_forming"), Some(true));
    assert_eq!(r.verdict("self_torse_forming"), Some(true));
    assert_eq!(r.verdict("concircular"), Some(true));
    for p in &r.points {
        let t = p.point[0];
        let phi = t / (1.0 + t * t / 2.0);
        let w = p.fits.iter().find(|f| f.name == "torse.omega").unwrap().value.unwrap();
        assert!((w - phi / t).abs() < 1e-12);
    }
}

#[test]
fn grw_with_user_warp_and_base() {
    let cfg = AnalysisConfig::from_builtin(
        "grw",
        &kv(&[("f", "cosh(t)"), ("gstar.1.1", "1+x^2"), ("gstar.2.1", "0.1*y")]),
    )
    .unwrap();
    let r = run_analysis(&cfg).unwrap();
    assert_eq!(r.exit_code(), 0);
    assert_eq!(r.verdict("torse_forming"), Some(true));
    assert_eq!(r.verdict("unit_timelike"), Some(true));
    assert_eq!(r.verdict("concircular"), Some(false));
}

#[test]
fn explicit_points_and_custom_metric() {
    let cfg = parse_config(
        r#"
[manifold]
coords = ["t", "r"]
signature = "lorentzian"

[metric]
components = [["-(1+r^2)", "0"], ["0", "1/(1+r^2)"]]

[vector_field]
components = ["1", "0"]

[sampling]
points = [[0.0, 0.5], [1.0, -0.3]]

[tolerances]
residual = 1e-9
"#,
    )
    .unwrap();
    let r = run_analysis(&cfg).unwrap();
    assert_eq!(r.points.len(), 2);
    assert_eq!(r.seed, None);
    assert_eq!(r.worst("manifold.signature"), Some(0.0));
    // anti-de Sitter in two dimensions has r = -2
    let s = r.spread("scalar.g").unwrap();
    assert!((s.min + 2.0).abs() < 1e-10 && (s.max + 2.0).abs() < 1e-10);
}
