//! Analysis configuration in TOML.
//!
//! ```toml
//! [manifold]
//! dimension = 4
//! coords = ["t", "x", "y", "z"]
//! signature = "lorentzian"        # or "riemannian", "any"
//!
//! [metric]
//! diagonal = ["-1", "exp(2*t)", "exp(2*t)", "exp(2*t)"]
//! # components = [["-1", "0", ...], ...]   (lower triangle is read)
//! # builtin = "grw-generic"
//! # params = { f = "cosh(t)" }
//!
//! [vector_field]
//! components = ["1", "0", "0", "0"]
//!
//! [sampling]
//! seed = 0
//! count = 16
//! bounds = { t = [-1.0, 1.0] }
//! singular = { t = [0.0] }
//! # points = [[0.1, 0.2, 0.3, 0.4]]
//!
//! [fluid]
//! sigma = "1"
//! p = "-1"
//! rho = "0"                       # or rho_is_p = true
//! lambda = 3.0
//! k = 1.0
//!
//! [tolerances]
//! residual = 1e-8
//! fd_step = 1e-5
//! fd_tol = 1e-6
//! fd_check = true
//!
//! [report]
//! format = "text"                 # or "machine"
//!
//! [expect]
//! grw = true
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use crate::analysis::VERDICT_NAMES;
use crate::catalog::{builtin, default_coords};
use crate::expr::Expr;
use crate::geometry::{MetricSpec, VectorFieldSpec};
use crate::relativity::FluidParams;
use crate::sampling::SingularLocus;

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Machine,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "text" => Ok(Format::Text),
            "machine" => Ok(Format::Machine),
            _ => Err(format!("unknown report format `{s}` (expected text or machine)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SignatureExpectation {
    #[default]
    Any,
    Lorentzian,
    Riemannian,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sampling {
    Explicit(Vec<Vec<f64>>),
    Random {
        seed: u64,
        count: usize,
        bounds: Vec<(f64, f64)>,
        singular: Vec<SingularLocus>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    pub residual: f64,
    pub fd_step: f64,
    pub fd_tol: f64,
    pub fd_check: bool,
}

impl Default for Tolerances {
    fn default() -> Tolerances {
        Tolerances {
            residual: 1e-8,
            fd_step: 1e-5,
            fd_tol: 1e-6,
            fd_check: true,
        }
    }
}

pub const DEFAULT_POINTS: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisConfig {
    /// Builtin name, or `custom`.
    pub name: String,
    pub metric: MetricSpec,
    pub field: VectorFieldSpec,
    pub signature: SignatureExpectation,
    pub sampling: Sampling,
    pub fluid: Option<FluidParams>,
    pub tol: Tolerances,
    pub format: Format,
    pub expectations: Vec<(String, bool)>,
}

impl AnalysisConfig {
    /// Configuration for a catalog entry with default sampling.
    pub fn from_builtin(name: &str, params: &[(String, String)]) -> Result<AnalysisConfig, ConfigError> {
        let e = builtin(name, params).map_err(|err| ConfigError {
            line: None,
            message: err.to_string(),
        })?;
        Ok(AnalysisConfig {
            name: e.name,
            metric: e.metric,
            field: e.field,
            signature: SignatureExpectation::Any,
            sampling: Sampling::Random {
                seed: 0,
                count: DEFAULT_POINTS,
                bounds: e.bounds,
                singular: e.singular,
            },
            fluid: None,
            tol: Tolerances::default(),
            format: Format::Text,
            expectations: e.expectations,
        })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn set_seed(&mut self, s: u64) {
        if let Sampling::Random { seed, .. } = &mut self.sampling {
            *seed = s;
        }
    }

    pub fn set_count(&mut self, n: usize) {
        if let Sampling::Random { count, .. } = &mut self.sampling {
            *count = n;
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    manifold: Option<RawManifold>,
    metric: Spanned<RawMetric>,
    vector_field: Option<RawField>,
    sampling: Option<RawSampling>,
    fluid: Option<Spanned<RawFluid>>,
    tolerances: Option<Spanned<RawTolerances>>,
    report: Option<RawReport>,
    expect: Option<BTreeMap<Spanned<String>, bool>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifold {
    dimension: Option<Spanned<usize>>,
    coords: Option<Spanned<Vec<String>>>,
    signature: Option<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Scalar {
    Text(String),
    Number(f64),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Text(s) => s.clone(),
            Scalar::Number(v) => format!("{v:?}"),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    builtin: Option<Spanned<String>>,
    params: Option<BTreeMap<String, Scalar>>,
    diagonal: Option<Spanned<Vec<Spanned<String>>>>,
    components: Option<Spanned<Vec<Spanned<Vec<Spanned<String>>>>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    components: Spanned<Vec<Spanned<String>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    seed: Option<u64>,
    count: Option<Spanned<usize>>,
    points: Option<Spanned<Vec<Spanned<Vec<f64>>>>>,
    bounds: Option<BTreeMap<Spanned<String>, Spanned<Vec<f64>>>>,
    singular: Option<BTreeMap<Spanned<String>, Vec<f64>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFluid {
    sigma: Scalar,
    p: Scalar,
    rho: Option<Scalar>,
    rho_is_p: Option<bool>,
    lambda: Option<f64>,
    k: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    residual: Option<f64>,
    fd_step: Option<f64>,
    fd_tol: Option<f64>,
    fd_check: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReport {
    format: Option<Spanned<String>>,
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].bytes().filter(|b| *b == b'\n').count() + 1
    }

    fn err(&self, span: Range<usize>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: Some(self.line(span)),
            message: message.into(),
        }
    }

    fn expr(&self, field: &str, s: &Spanned<String>, coords: &[String]) -> Result<Expr, ConfigError> {
        Expr::parse(s.get_ref(), coords).map_err(|e| self.err(s.span(), format!("{field}: {e}")))
    }
}

pub fn load_config(path: &Path) -> Result<AnalysisConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<AnalysisConfig, ConfigError> {
    let cx = Ctx { text };
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError {
        line: e.span().map(|s| cx.line(s)),
        message: e.message().trim().to_string(),
    })?;

    let manifold = raw.manifold.unwrap_or(RawManifold {
        dimension: None,
        coords: None,
        signature: None,
    });
    let signature = match manifold.signature.as_ref().map(|s| (s.get_ref().as_str(), s.span())) {
        None | Some(("any", _)) => SignatureExpectation::Any,
        Some(("lorentzian", _)) => SignatureExpectation::Lorentzian,
        Some(("riemannian", _)) => SignatureExpectation::Riemannian,
        Some((other, span)) => {
            return Err(cx.err(span, format!("manifold.signature: unknown value `{other}`")));
        }
    };

    let metric_span = raw.metric.span();
    let metric = raw.metric.into_inner();
    let sources = [metric.builtin.is_some(), metric.diagonal.is_some(), metric.components.is_some()];
    if sources.iter().filter(|b| **b).count() != 1 {
        return Err(cx.err(
            metric_span,
            "metric: give exactly one of `builtin`, `diagonal`, `components`",
        ));
    }

    let mut cfg = if let Some(name) = &metric.builtin {
        let mut params: Vec<(String, String)> = metric
            .params
            .iter()
            .flatten()
            .map(|(k, v)| (k.clone(), v.text()))
            .collect();
        if let Some(d) = &manifold.dimension {
            if !params.iter().any(|(k, _)| k == "n") {
                params.push(("n".into(), d.get_ref().to_string()));
            }
        }
        let mut c = AnalysisConfig::from_builtin(name.get_ref(), &params)
            .map_err(|e| cx.err(name.span(), format!("metric: {}", e.message)))?;
        if let Some(cs) = &manifold.coords {
            if cs.get_ref().as_slice() != c.metric.coords() {
                return Err(cx.err(
                    cs.span(),
                    format!("manifold.coords: builtin `{}` uses {:?}", c.name, c.metric.coords()),
                ));
            }
        }
        if let Some(f) = &raw.vector_field {
            c.field = parse_field(&cx, f, c.metric.coords())?;
        }
        c
    } else {
        if metric.params.is_some() {
            return Err(cx.err(metric_span, "metric.params is only valid with `builtin`"));
        }
        let coords = match (&manifold.coords, &manifold.dimension) {
            (Some(cs), d) => {
                if let Some(d) = d {
                    if *d.get_ref() != cs.get_ref().len() {
                        return Err(cx.err(
                            cs.span(),
                            format!("manifold.coords has {} names but dimension is {}", cs.get_ref().len(), d.get_ref()),
                        ));
                    }
                }
                cs.get_ref().clone()
            }
            (None, Some(d)) => default_coords(*d.get_ref()),
            (None, None) => {
                return Err(ConfigError {
                    line: None,
                    message: "manifold: give `dimension` or `coords` for a custom metric".into(),
                })
            }
        };
        let n = coords.len();
        if n < 2 {
            return Err(ConfigError {
                line: None,
                message: "manifold: dimension must be at least 2".into(),
            });
        }
        let metric_spec = if let Some(diag) = &metric.diagonal {
            if diag.get_ref().len() != n {
                return Err(cx.err(
                    diag.span(),
                    format!("metric.diagonal: expected {n} entries, got {}", diag.get_ref().len()),
                ));
            }
            let d = diag
                .get_ref()
                .iter()
                .map(|s| cx.expr("metric.diagonal", s, &coords))
                .collect::<Result<_, _>>()?;
            MetricSpec::diagonal(coords.clone(), d)
        } else {
            let rows = metric.components.as_ref().expect("one source present");
            if rows.get_ref().len() != n {
                return Err(cx.err(
                    rows.span(),
                    format!("metric.components: expected {n} rows, got {}", rows.get_ref().len()),
                ));
            }
            let mut parsed = Vec::with_capacity(n);
            for row in rows.get_ref() {
                if row.get_ref().len() != n {
                    return Err(cx.err(
                        row.span(),
                        format!("metric.components: expected {n} entries per row, got {}", row.get_ref().len()),
                    ));
                }
                parsed.push(
                    row.get_ref()
                        .iter()
                        .map(|s| cx.expr("metric.components", s, &coords))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            MetricSpec::new(coords.clone(), parsed)
        }
        .map_err(|e| cx.err(metric_span.clone(), format!("metric: {e}")))?;
        let field = match &raw.vector_field {
            Some(f) => parse_field(&cx, f, &coords)?,
            None => VectorFieldSpec::zero(&coords),
        };
        AnalysisConfig {
            name: "custom".into(),
            metric: metric_spec,
            field,
            signature,
            sampling: Sampling::Random {
                seed: 0,
                count: DEFAULT_POINTS,
                bounds: vec![(-1.0, 1.0); n],
                singular: vec![],
            },
            fluid: None,
            tol: Tolerances::default(),
            format: Format::Text,
            expectations: vec![],
        }
    };
    cfg.signature = signature;
    let coords = cfg.metric.coords().to_vec();
    let n = coords.len();
    let coord_index = |name: &Spanned<String>, what: &str| {
        coords
            .iter()
            .position(|c| c == name.get_ref())
            .ok_or_else(|| cx.err(name.span(), format!("{what}: `{}` is not a coordinate", name.get_ref())))
    };

    if let Some(s) = raw.sampling {
        if let Some(pts) = s.points {
            if s.count.is_some() || s.bounds.is_some() || s.seed.is_some() {
                return Err(cx.err(pts.span(), "sampling: `points` excludes `seed`, `count` and `bounds`"));
            }
            let mut out = Vec::new();
            for p in pts.into_inner() {
                if p.get_ref().len() != n {
                    return Err(cx.err(
                        p.span(),
                        format!("sampling.points: expected {n} coordinates, got {}", p.get_ref().len()),
                    ));
                }
                out.push(p.into_inner());
            }
            if out.is_empty() {
                return Err(ConfigError {
                    line: None,
                    message: "sampling.points is empty".into(),
                });
            }
            cfg.sampling = Sampling::Explicit(out);
        } else if let Sampling::Random {
            seed,
            count,
            bounds,
            singular,
        } = &mut cfg.sampling
        {
            if let Some(v) = s.seed {
                *seed = v;
            }
            if let Some(c) = s.count {
                if *c.get_ref() == 0 {
                    return Err(cx.err(c.span(), "sampling.count must be positive"));
                }
                *count = c.into_inner();
            }
            for (name, b) in s.bounds.iter().flatten() {
                let i = coord_index(name, "sampling.bounds")?;
                match b.get_ref().as_slice() {
                    [lo, hi] if lo <= hi => bounds[i] = (*lo, *hi),
                    _ => return Err(cx.err(b.span(), "sampling.bounds: expected [lo, hi] with lo <= hi")),
                }
            }
            for (name, vals) in s.singular.iter().flatten() {
                let i = coord_index(name, "sampling.singular")?;
                singular.retain(|l| l.coord != i);
                singular.extend(vals.iter().map(|&value| SingularLocus { coord: i, value }));
            }
        }
    }

    if let Some(fl) = raw.fluid {
        let span = fl.span();
        let f = fl.into_inner();
        let ex = |what: &str, s: &Scalar| {
            Expr::parse(&s.text(), &coords).map_err(|e| cx.err(span.clone(), format!("fluid.{what}: {e}")))
        };
        let mut fp = FluidParams::new(ex("sigma", &f.sigma)?, ex("p", &f.p)?).with_lambda(f.lambda.unwrap_or(0.0));
        fp = fp
            .with_k(f.k.unwrap_or(1.0))
            .map_err(|e| cx.err(span.clone(), format!("fluid.k: {e}")))?;
        match (f.rho_is_p.unwrap_or(false), &f.rho) {
            (true, Some(_)) => return Err(cx.err(span, "fluid: `rho` and `rho_is_p` are exclusive")),
            (true, None) => fp = fp.rho_from_pressure(),
            (false, Some(r)) => fp = fp.with_rho(ex("rho", r)?),
            (false, None) => {}
        }
        cfg.fluid = Some(fp);
    }

    if let Some(t) = raw.tolerances {
        let span = t.span();
        let t = t.into_inner();
        let pos = |what: &str, v: Option<f64>, d: f64| match v {
            Some(x) if !(x > 0.0) => Err(cx.err(span.clone(), format!("tolerances.{what} must be positive"))),
            Some(x) => Ok(x),
            None => Ok(d),
        };
        let d = Tolerances::default();
        cfg.tol = Tolerances {
            residual: pos("residual", t.residual, d.residual)?,
            fd_step: pos("fd_step", t.fd_step, d.fd_step)?,
            fd_tol: pos("fd_tol", t.fd_tol, d.fd_tol)?,
            fd_check: t.fd_check.unwrap_or(true),
        };
    }

    if let Some(r) = raw.report {
        if let Some(f) = r.format {
            cfg.format = f.get_ref().parse().map_err(|e: String| cx.err(f.span(), format!("report.format: {e}")))?;
        }
    }

    if let Some(ex) = raw.expect {
        for (name, v) in ex {
            if !VERDICT_NAMES.contains(&name.get_ref().as_str()) {
                return Err(cx.err(name.span(), format!("expect: unknown verdict `{}`", name.get_ref())));
            }
            let key = name.into_inner();
            cfg.expectations.retain(|(k, _)| *k != key);
            cfg.expectations.push((key, v));
        }
    }
    Ok(cfg)
}

fn parse_field(cx: &Ctx<'_>, f: &RawField, coords: &[String]) -> Result<VectorFieldSpec, ConfigError> {
    let comps = &f.components;
    if comps.get_ref().len() != coords.len() {
        return Err(cx.err(
            comps.span(),
            format!(
                "vector_field.components: expected {} components, got {}",
                coords.len(),
                comps.get_ref().len()
            ),
        ));
    }
    let parsed = comps
        .get_ref()
        .iter()
        .map(|s| cx.expr("vector_field.components", s, coords))
        .collect::<Result<_, _>>()?;
    Ok(VectorFieldSpec::new(parsed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_minkowski_gets_defaults() {
        let c = parse_config(
            r#"
[manifold]
dimension = 4

[metric]
diagonal = ["-1", "1", "1", "1"]
"#,
        )
        .unwrap();
        assert_eq!(c.metric.coords(), ["t", "x", "y", "z"]);
        assert_eq!(c.tol.residual, 1e-8);
        assert_eq!(
            c.sampling,
            Sampling::Random {
                seed: 0,
                count: 16,
                bounds: vec![(-1.0, 1.0); 4],
                singular: vec![]
            }
        );
        assert_eq!(c.format, Format::Text);
    }

    #[test]
    fn wrong_field_arity_names_the_field_and_line() {
        let e = parse_config(
            r#"[manifold]
dimension = 4
[metric]
diagonal = ["-1", "1", "1", "1"]
[vector_field]
components = ["1", "0"]
"#,
        )
        .unwrap_err();
        assert!(e.message.contains("vector_field.components"), "{e}");
        assert_eq!(e.line, Some(6));
    }

    #[test]
    fn builtin_expands() {
        let c = parse_config("[metric]\nbuiltin = \"desitter-flat\"\n[manifold]\ndimension = 4\n").unwrap();
        assert_eq!(c.metric.component(3, 3).to_string(), "exp(2.0*t)");
        assert_eq!(c.field.components()[0].eval(&[0.0; 4]).unwrap(), 1.0);
        assert!(c.expectations.contains(&("grw".to_string(), true)));
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse_config("[metric]\nbuiltin = \"minkowski\"\ncolour = 3\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = parse_config("[metric]\ndiagonal = [\"1\", \"q\"]\n[manifold]\ncoords = [\"a\", \"b\"]\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(e.message.contains("unknown identifier"));
        let e = parse_config("[metric]\nbuiltin = \"minkowski\"\n[expect]\nhappy = true\n").unwrap_err();
        assert_eq!(e.line, Some(4));
        let e = parse_config("[metric]\nbuiltin = \"minkowski\"\n[sampling]\npoints = [[0.0, 1.0]]\n").unwrap_err();
        assert_eq!(e.line, Some(4));
    }

    #[test]
    fn fluid_and_sampling() {
        let c = parse_config(
            r#"
[metric]
builtin = "flrw"
params = { f = "t" }
[sampling]
seed = 9
count = 3
bounds = { t = [1.0, 2.0] }
[fluid]
sigma = 1
p = "-1"
rho_is_p = true
lambda = 3.0
"#,
        )
        .unwrap();
        let Sampling::Random { seed, count, bounds, singular } = &c.sampling else { panic!() };
        assert_eq!((*seed, *count, bounds[0]), (9, 3, (1.0, 2.0)));
        assert_eq!(singular.len(), 1);
        let f = c.fluid.unwrap();
        assert_eq!(f.rho.eval(&[0.0; 4]).unwrap(), -1.0);
        assert_eq!(f.lambda, 3.0);
    }
}
