//! Pointwise pipeline over the sample points and conjunctive aggregation.
//!
//! Each point runs frame → connection → curvature families → classification
//! → fluid checks. Identity checks produce `CHECK` records; classifications
//! produce per-point verdicts that are AND-ed into aggregate verdicts.

use rayon::prelude::*;
use thiserror::Error;

use crate::classify::{
    classify_at, eta_exterior_derivative, fit_quasi_einstein, grw_detect, grw_identity_suite, nonvanishing_margin,
    perfect_fluid_kind, FitStatus, ETA_FD_STEP, FLAG_NAMES,
};
use crate::config::{AnalysisConfig, Sampling, SignatureExpectation, Tolerances};
use crate::connection::{
    build_connection, check_concircular, connection_identities, lie_g_nonsym, nabla1_p, s_concircular_check,
    SSConnection,
};
use crate::curvature::{
    anchor_residuals, curvature_family, cyclic_double_torsion, einstein_relations, einstein_trace_residual,
    r0_variant_check, ricci_asymmetry, riemann_direction_symmetry, CurvatureBundle, Family, SKEW_FAMILIES,
};
use crate::fdcheck::{compare_frame, fd_curvature_with};
use crate::geometry::{first_bianchi_residual, frame_at, lc_riemann, metricity_residual, PointFrame};
use crate::relativity::{
    div_tau, efe_residual, phantom_verdict, stress_energy, DivMode, FluidParams, FluidValues, BARRIER_TOL,
};
use crate::sampling::{sample_points, SamplingError};

/// Every aggregate verdict name, in report order.
pub const VERDICT_NAMES: [&str; 34] = [
    "flat",
    "einstein",
    "quasi_einstein",
    "perfect_fluid",
    "scalar_constant",
    "concircular",
    "s_concircular",
    "p_connection",
    "grw",
    "conformal_1",
    "killing_1",
    "einstein_type_0",
    "einstein_type_1",
    "einstein_type_2",
    "einstein_type_3",
    "einstein_type_4",
    "einstein_type_5",
    "phantom_barrier",
    "torse_forming",
    "torqued",
    "concircular_fialkow",
    "concircular_yano",
    "recurrent",
    "concurrent",
    "parallel",
    "self_torse_forming",
    "anti_torqued",
    "unit_form",
    "geodesic",
    "unit_timelike",
    "conformal_killing",
    "killing",
    "closed_pi",
    "lorentzian",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("sampling: {0}")]
    Sampling(#[from] SamplingError),
    #[error("sample point {index} has {got} coordinates, expected {expected}")]
    PointDimension { index: usize, expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointRef {
    Index(usize),
    All,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub point: PointRef,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitRecord {
    pub name: String,
    /// `None` when the quantity is not identifiable at the point.
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointReport {
    pub index: usize,
    pub point: Vec<f64>,
    pub checks: Vec<CheckRecord>,
    pub fits: Vec<FitRecord>,
    pub verdicts: Vec<(&'static str, bool)>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spread {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationReport {
    pub name: String,
    pub dim: usize,
    pub seed: Option<u64>,
    pub tol: f64,
    pub points: Vec<PointReport>,
    /// Checks over all points (expectations).
    pub global_checks: Vec<CheckRecord>,
    pub verdicts: Vec<(&'static str, bool)>,
    pub spreads: Vec<Spread>,
}

impl ClassificationReport {
    pub fn checks(&self) -> impl Iterator<Item = &CheckRecord> {
        self.points
            .iter()
            .flat_map(|p| p.checks.iter())
            .chain(self.global_checks.iter())
    }

    pub fn errors(&self) -> impl Iterator<Item = (usize, &str)> {
        self.points
            .iter()
            .filter_map(|p| p.error.as_deref().map(|e| (p.index, e)))
    }

    pub fn failed(&self) -> usize {
        self.checks().filter(|c| !c.pass).count()
    }

    pub fn exit_code(&self) -> i32 {
        if self.failed() == 0 && self.errors().next().is_none() {
            0
        } else {
            1
        }
    }

    pub fn verdict(&self, name: &str) -> Option<bool> {
        self.verdicts.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    /// Largest residual of a named check over all points; `None` if never run.
    pub fn worst(&self, name: &str) -> Option<f64> {
        self.checks()
            .filter(|c| c.name == name)
            .map(|c| c.residual)
            .reduce(|a, b| if b.is_nan() || b > a { b } else { a })
    }

    pub fn spread(&self, name: &str) -> Option<&Spread> {
        self.spreads.iter().find(|s| s.name == name)
    }
}

struct PointCtx<'a> {
    index: usize,
    tol: &'a Tolerances,
    checks: Vec<CheckRecord>,
    fits: Vec<FitRecord>,
    verdicts: Vec<(&'static str, bool)>,
}

impl PointCtx<'_> {
    fn check(&mut self, name: impl Into<String>, residual: f64) {
        let tol = self.tol.residual;
        self.check_tol(name, residual, tol);
    }

    fn check_tol(&mut self, name: impl Into<String>, residual: f64, tol: f64) {
        self.checks.push(CheckRecord {
            name: name.into(),
            point: PointRef::Index(self.index),
            residual,
            tol,
            pass: residual <= tol,
        });
    }

    /// A check whose outcome is an agreement between two verdicts.
    fn agree(&mut self, name: &str, a: bool, b: bool) {
        self.check(name, if a == b { 0.0 } else { 1.0 });
    }

    fn fit(&mut self, name: &str, value: Option<f64>) {
        self.fits.push(FitRecord {
            name: name.to_string(),
            value,
        });
    }

    fn verdict(&mut self, name: &'static str, holds: bool) {
        self.verdicts.push((name, holds));
    }
}

fn identity_deviation(f: &PointFrame) -> f64 {
    let n = f.dim();
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s: f64 = (0..n).map(|k| f.ginv.at2(i, k) * f.g.at2(k, j)).sum();
            m = m.max((s - f64::from(u8::from(i == j))).abs());
        }
    }
    m
}

fn analyze_point(cfg: &AnalysisConfig, index: usize, x: &[f64]) -> PointReport {
    let mut cx = PointCtx {
        index,
        tol: &cfg.tol,
        checks: Vec::new(),
        fits: Vec::new(),
        verdicts: Vec::new(),
    };
    let error = run_point(cfg, x, &mut cx).err();
    PointReport {
        index,
        point: x.to_vec(),
        checks: cx.checks,
        fits: cx.fits,
        verdicts: cx.verdicts,
        error,
    }
}

fn run_point(cfg: &AnalysisConfig, x: &[f64], cx: &mut PointCtx<'_>) -> Result<(), String> {
    let tol = cfg.tol.residual;
    let frame = frame_at(&cfg.metric, x).map_err(|e| e.to_string())?;
    let scale = frame.scale();

    match cfg.signature {
        SignatureExpectation::Any => {}
        SignatureExpectation::Lorentzian => {
            cx.check("manifold.signature", f64::from(u8::from(!frame.signature.is_lorentzian())))
        }
        SignatureExpectation::Riemannian => {
            cx.check("manifold.signature", f64::from(u8::from(!frame.signature.is_riemannian())))
        }
    }
    cx.check("metric.inverse", identity_deviation(&frame));
    cx.check("metricity.levi_civita", metricity_residual(&frame, &frame.gamma) / scale);
    let riem = lc_riemann(&frame);
    cx.check("bianchi.first", first_bianchi_residual(&riem) / scale);
    if cfg.tol.fd_check {
        let h = cfg.tol.fd_step;
        let fd = fd_curvature_with(&cfg.metric, x, h, 10.0 * h).map_err(|e| e.to_string())?;
        let (dg, dr) = compare_frame(&frame, &riem, &fd);
        cx.check_tol("fd.christoffel", dg, cfg.tol.fd_tol);
        cx.check_tol("fd.riemann", dr, cfg.tol.fd_tol);
    }
    cx.verdict("lorentzian", frame.signature.is_lorentzian());
    cx.verdict("flat", riem.max_abs() / scale <= tol);

    let c = build_connection(frame, &cfg.field).map_err(|e| e.to_string())?;
    cx.check("metricity.semi_symmetric", c.metricity_residual() / scale);
    cx.check("torsion.antisymmetrized", c.torsion_residual() / scale);
    cx.check("torsion.cyclic", cyclic_double_torsion(&c) / scale);
    let b = curvature_family(&c);
    cx.check("einstein.traceless", einstein_trace_residual(&c, &b) / scale);
    let skew = SKEW_FAMILIES
        .iter()
        .map(|&f| riemann_direction_symmetry(&b, f))
        .fold(0.0, f64::max);
    cx.check("riemann.skew", skew / scale);

    let conc = check_concircular(&c, tol);
    let sconc = s_concircular_check(&c, tol);
    cx.check(
        "concircular.equivalence",
        if conc.holds == sconc.holds {
            (conc.residual - sconc.residual).abs()
        } else {
            1.0
        },
    );
    cx.verdict("concircular", conc.holds);
    cx.verdict("s_concircular", sconc.holds);
    cx.fit("omega", Some(c.omega));
    cx.fit("concircular.residual", Some(conc.residual));

    let n1p = nabla1_p(&c);
    let p_conn = conc.holds && n1p.p_connection_gap / scale <= tol;
    cx.verdict("p_connection", p_conn);
    let lie1 = lie_g_nonsym(&c);
    cx.verdict("conformal_1", lie1.is_conformal(scale, tol));
    cx.verdict("killing_1", lie1.is_killing(scale, tol));

    let eg = b.get(Family::G).einstein.max_abs() / scale;
    let einstein = eg <= tol;
    cx.verdict("einstein", einstein);
    let kinds: Vec<bool> = Family::KINDS
        .iter()
        .map(|&f| b.get(f).einstein.max_abs() / scale <= tol)
        .collect();
    for (i, name) in [
        "einstein_type_0",
        "einstein_type_1",
        "einstein_type_2",
        "einstein_type_3",
        "einstein_type_4",
        "einstein_type_5",
    ]
    .into_iter()
    .enumerate()
    {
        cx.verdict(name, kinds[i]);
    }

    if conc.holds {
        concircular_checks(cx, &c, &b, scale, einstein, &kinds);
    }

    let lc = b.get(Family::G);
    let qe = fit_quasi_einstein(&lc.ricci, &c.frame.g, &c.pi);
    let identifiable = qe.status == FitStatus::Ok;
    cx.fit("qe.a", Some(qe.a));
    cx.fit("qe.b", identifiable.then_some(qe.b));
    cx.fit("scalar.g", Some(lc.scalar));
    let quasi = qe.residual <= tol;
    cx.verdict("quasi_einstein", quasi);
    cx.verdict("perfect_fluid", quasi && c.frame.signature.is_lorentzian());

    let deta = eta_exterior_derivative(&cfg.metric, &cfg.field, x, ETA_FD_STEP).map_err(|e| e.to_string())?;
    let tax = classify_at(&c, deta, tol);
    cx.fit("torse.omega", tax.fit.as_ref().map(|f| f.omega));
    cx.fit("conformal.factor", Some(tax.conformal_factor));
    for name in FLAG_NAMES {
        cx.verdict(name, tax.holds(name));
    }

    let grw = grw_detect(&c, tol);
    cx.verdict("grw", grw.pass);
    if grw.pass {
        cx.check("grw.omega", grw.omega_residual);
        cx.check("grw.nabla1p", grw.nabla1_p_residual / scale);
        for (name, r) in grw_identity_suite(&c, &b) {
            cx.check(format!("grw.{name}"), r / scale);
        }
        cx.check("grw.nonvanishing", (-nonvanishing_margin(&c, &b)).max(0.0));
        let pf = perfect_fluid_kind(&lc.ricci, lc.scalar, &c.frame.g, &c.pi);
        cx.check("perfect_fluid.a_minus_b", pf.gap / scale);
        cx.check("perfect_fluid.rewrite", pf.rewrite_residual);
        cx.fit("pf.a_minus_b", Some(pf.fit.a - pf.fit.b));
    }

    if let Some(fp) = &cfg.fluid {
        fluid_checks(cx, fp, &c, &b, grw.pass, scale)?;
    }
    Ok(())
}

fn concircular_checks(
    cx: &mut PointCtx<'_>,
    c: &SSConnection,
    b: &CurvatureBundle,
    scale: f64,
    einstein: bool,
    kinds: &[bool],
) {
    for (fam, rr, rs) in anchor_residuals(c, b).per_family {
        cx.check(format!("anchor.ricci.{fam}"), rr);
        cx.check(format!("anchor.scalar.{fam}"), rs);
    }
    for (fam, r) in einstein_relations(c, b) {
        cx.check(format!("einstein.relation.{fam}"), r);
    }
    cx.check("ricci.symmetric", ricci_asymmetry(b) / scale);
    cx.check(
        "ricci.2eq3",
        b.get(Family::K2).ricci.max_abs_diff(&b.get(Family::K3).ricci) / scale,
    );
    for (name, r) in connection_identities(c).named() {
        cx.check(format!("identity.{name}"), r / scale);
    }
    let n1p = nabla1_p(c);
    cx.check("nabla1p.closed_form", n1p.closed_form_residual / scale);
    cx.check(
        "p_connection.equivalence",
        (n1p.tensor.max_abs() - n1p.p_connection_gap).abs() / scale,
    );
    cx.check("lie1.closed_form", lie_g_nonsym(c).closed_form_residual / scale);
    cx.agree("einstein.kinds_123", einstein, kinds[1] && kinds[2] && kinds[3]);
    let v = r0_variant_check(c);
    cx.check("r0.canonical", v.with_quarter);
}

fn fluid_checks(
    cx: &mut PointCtx<'_>,
    fp: &FluidParams,
    c: &SSConnection,
    b: &CurvatureBundle,
    grw_pass: bool,
    scale: f64,
) -> Result<(), String> {
    let f = &c.frame;
    let lc = b.get(Family::G);
    let tau = stress_energy(fp, f, &c.pi).map_err(|e| e.to_string())?;
    let r = efe_residual(&lc.ricci, lc.scalar, &f.g, &tau, fp.lambda, fp.k);
    cx.check("relativity.efe", r.max_abs() / scale);

    let frozen = div_tau(fp, c, DivMode::Constant).map_err(|e| e.to_string())?;
    let full = div_tau(fp, c, DivMode::Full).map_err(|e| e.to_string())?;
    let norm = |v: &[f64]| v.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    cx.fit("div_tau.constant", Some(norm(&frozen)));
    cx.fit("div_tau.full", Some(norm(&full)));
    if fp.is_constant() {
        let d = frozen.iter().zip(&full).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
        cx.check("relativity.div_modes", d / scale);
    }
    let v = FluidValues::at(fp, &f.point).map_err(|e| e.to_string())?;
    let rep = phantom_verdict(v, &frozen, grw_pass, BARRIER_TOL);
    cx.fit("fluid.sum", Some(rep.sum));
    cx.fit("fluid.w", rep.w);
    cx.verdict("phantom_barrier", rep.barrier);
    if grw_pass && norm(&c.pi) > 0.0 {
        cx.check(
            "relativity.div_tau_iff_barrier",
            f64::from(u8::from(!rep.div_zero_iff_barrier)),
        );
    }
    Ok(())
}

/// The sample points a configuration resolves to.
pub fn resolve_points(cfg: &AnalysisConfig) -> Result<Vec<Vec<f64>>, AnalysisError> {
    let n = cfg.dim();
    match &cfg.sampling {
        Sampling::Explicit(pts) => {
            for (index, p) in pts.iter().enumerate() {
                if p.len() != n {
                    return Err(AnalysisError::PointDimension {
                        index,
                        expected: n,
                        got: p.len(),
                    });
                }
            }
            Ok(pts.clone())
        }
        Sampling::Random {
            seed,
            count,
            bounds,
            singular,
        } => Ok(sample_points(*seed, *count, bounds, singular)?),
    }
}

pub fn run_analysis(cfg: &AnalysisConfig) -> Result<ClassificationReport, AnalysisError> {
    let pts = resolve_points(cfg)?;
    let points: Vec<PointReport> = pts
        .par_iter()
        .enumerate()
        .map(|(i, x)| analyze_point(cfg, i, x))
        .collect();

    let ok: Vec<&PointReport> = points.iter().filter(|p| p.error.is_none()).collect();
    let mut verdicts: Vec<(&'static str, bool)> = Vec::new();
    for name in VERDICT_NAMES {
        if name == "scalar_constant" {
            continue;
        }
        let vals: Vec<bool> = ok
            .iter()
            .filter_map(|p| p.verdicts.iter().find(|(n, _)| *n == name).map(|(_, v)| *v))
            .collect();
        if !vals.is_empty() {
            verdicts.push((name, vals.len() == ok.len() && vals.iter().all(|v| *v)));
        }
    }

    let mut spreads: Vec<Spread> = Vec::new();
    for p in &ok {
        for f in &p.fits {
            let Some(v) = f.value else { continue };
            match spreads.iter_mut().find(|s| s.name == f.name) {
                Some(s) => {
                    s.min = s.min.min(v);
                    s.max = s.max.max(v);
                }
                None => spreads.push(Spread {
                    name: f.name.clone(),
                    min: v,
                    max: v,
                }),
            }
        }
    }
    if let Some(s) = spreads.iter().find(|s| s.name == "scalar.g") {
        let holds = s.max - s.min <= 10.0 * cfg.tol.residual;
        let at = VERDICT_NAMES.iter().position(|n| *n == "scalar_constant").unwrap_or(0);
        verdicts.insert(at.min(verdicts.len()), ("scalar_constant", holds));
    }

    let global_checks = cfg
        .expectations
        .iter()
        .map(|(name, want)| {
            let got = verdicts.iter().find(|(n, _)| n == name).map(|(_, v)| *v);
            let pass = got == Some(*want);
            CheckRecord {
                name: format!("expect.{name}"),
                point: PointRef::All,
                residual: match got {
                    Some(_) if pass => 0.0,
                    Some(_) => 1.0,
                    None => f64::NAN,
                },
                tol: 0.0,
                pass,
            }
        })
        .collect();

    Ok(ClassificationReport {
        name: cfg.name.clone(),
        dim: cfg.dim(),
        seed: match cfg.sampling {
            Sampling::Random { seed, .. } => Some(seed),
            Sampling::Explicit(_) => None,
        },
        tol: cfg.tol.residual,
        points,
        global_checks,
        verdicts,
        spreads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn builtin_cfg(name: &str, count: usize) -> AnalysisConfig {
        let mut c = AnalysisConfig::from_builtin(name, &[]).unwrap();
        c.set_count(count);
        c
    }

    #[test]
    fn verdict_names_cover_the_flags() {
        for f in FLAG_NAMES {
            assert!(VERDICT_NAMES.contains(&f), "{f}");
        }
    }

    #[test]
    fn minkowski_is_flat_einstein_and_clean() {
        let r = run_analysis(&builtin_cfg("minkowski", 4)).unwrap();
        assert_eq!(r.exit_code(), 0, "{:?}", r.checks().filter(|c| !c.pass).collect::<Vec<_>>());
        assert_eq!(r.verdict("flat"), Some(true));
        assert_eq!(r.verdict("einstein"), Some(true));
        assert_eq!(r.verdict("concircular"), Some(false));
        assert!(r.worst("anchor.ricci.0").is_none());
    }

    #[test]
    fn de_sitter_with_vacuum_fluid() {
        let cfg = parse_config(
            r#"
[metric]
builtin = "desitter-flat"
[sampling]
count = 4
[fluid]
sigma = 1
p = -1
lambda = 3.0
k = 1.0
"#,
        )
        .unwrap();
        let r = run_analysis(&cfg).unwrap();
        assert_eq!(r.exit_code(), 0, "{:?}", r.checks().filter(|c| !c.pass).collect::<Vec<_>>());
        assert_eq!(r.verdict("grw"), Some(true));
        assert_eq!(r.verdict("phantom_barrier"), Some(true));
        assert!(r.worst("relativity.efe").unwrap() < 1e-12);
        assert!(r.worst("anchor.ricci.5").unwrap() < 1e-10);
    }

    #[test]
    fn grw_generic_reports_varying_scalar() {
        let r = run_analysis(&builtin_cfg("grw-generic", 6)).unwrap();
        assert_eq!(r.exit_code(), 0, "{:?}", r.checks().filter(|c| !c.pass).collect::<Vec<_>>());
        let s = r.spread("scalar.g").unwrap();
        assert!(s.max - s.min > 1e-6);
        let d = r.spread("pf.a_minus_b").unwrap();
        assert!((d.min - 3.0).abs() < 1e-9 && (d.max - 3.0).abs() < 1e-9);
    }

    #[test]
    fn failed_expectation_sets_exit_one() {
        let mut cfg = builtin_cfg("flrw", 3);
        cfg.expectations.push(("einstein".into(), true));
        let r = run_analysis(&cfg).unwrap();
        assert_eq!(r.exit_code(), 1);
        let e = r.global_checks.iter().find(|c| c.name == "expect.einstein").unwrap();
        assert!(!e.pass);
    }

    #[test]
    fn point_errors_are_recorded() {
        let cfg = parse_config(
            r#"
[manifold]
coords = ["t", "x"]
[metric]
diagonal = ["-1", "sqrt(x)"]
[sampling]
points = [[0.0, 1.0], [0.0, -1.0]]
"#,
        )
        .unwrap();
        let r = run_analysis(&cfg).unwrap();
        assert_eq!(r.errors().count(), 1);
        assert_eq!(r.errors().next().unwrap().0, 1);
        assert_eq!(r.exit_code(), 1);
    }
}
