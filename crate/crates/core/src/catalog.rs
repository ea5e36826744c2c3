//! Builtin metrics with a canonical vector field, default sampling box and
//! documented expectations.
//!
//! | name            | metric                                   | P            |
//! |-----------------|------------------------------------------|--------------|
//! | `minkowski`     | `diag(−1, 1, …, 1)`                      | `∂_x`        |
//! | `desitter-flat` | `−dt² + e^{2t} δ`                        | `∂_t`        |
//! | `flrw`          | `−dt² + f(t)² δ`                         | `pt · ∂_t`   |
//! | `grw-generic`   | `−dt² + e^{2t} g_S³` (stereographic)     | `∂_t`        |
//! | `grw`           | `−dt² + f(t)² g*`                        | `∂_t`        |

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{Expr, ParseError};
use crate::geometry::{GeometryError, MetricSpec, VectorFieldSpec};
use crate::sampling::SingularLocus;

pub const BUILTIN_NAMES: [&str; 5] = ["minkowski", "desitter-flat", "flrw", "grw-generic", "grw"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("unknown builtin `{0}` (known: minkowski, desitter-flat, flrw, grw-generic, grw)")]
    Unknown(String),
    #[error("builtin `{builtin}` does not take parameter `{param}`")]
    UnknownParam { builtin: String, param: String },
    #[error("parameter `{param}`: {source}")]
    Param {
        param: String,
        #[source]
        source: ParseError,
    },
    #[error("parameter `n` must be an integer >= {min}, got `{got}`")]
    Dimension { min: usize, got: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub metric: MetricSpec,
    pub field: VectorFieldSpec,
    pub bounds: Vec<(f64, f64)>,
    pub singular: Vec<SingularLocus>,
    /// Aggregate verdicts this entry must produce, by verdict name.
    pub expectations: Vec<(String, bool)>,
}

/// `t, x, y, z` in dimension 4, `t, x, y` in dimension 3, `t, x1, …` otherwise.
pub fn default_coords(n: usize) -> Vec<String> {
    match n {
        4 => vec!["t".into(), "x".into(), "y".into(), "z".into()],
        3 => vec!["t".into(), "x".into(), "y".into()],
        _ => std::iter::once("t".to_string())
            .chain((1..n).map(|i| format!("x{i}")))
            .collect(),
    }
}

fn expect(pairs: &[(&str, bool)]) -> Vec<(String, bool)> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

struct Params<'a> {
    builtin: &'a str,
    map: BTreeMap<String, String>,
}

impl Params<'_> {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn dim(&mut self, min: usize) -> Result<usize, CatalogError> {
        match self.take("n") {
            None => Ok(4),
            Some(s) => match s.trim().parse::<usize>() {
                Ok(n) if n >= min => Ok(n),
                _ => Err(CatalogError::Dimension { min, got: s }),
            },
        }
    }

    fn finish(self) -> Result<(), CatalogError> {
        match self.map.into_keys().next() {
            Some(param) => Err(CatalogError::UnknownParam {
                builtin: self.builtin.to_string(),
                param,
            }),
            None => Ok(()),
        }
    }
}

fn parse(param: &str, text: &str, coords: &[String]) -> Result<Expr, CatalogError> {
    Expr::parse(text, coords).map_err(|source| CatalogError::Param {
        param: param.to_string(),
        source,
    })
}

fn unit_field(coords: &[String], axis: usize) -> VectorFieldSpec {
    VectorFieldSpec::new(
        (0..coords.len())
            .map(|i| Expr::constant(if i == axis { 1.0 } else { 0.0 }, coords))
            .collect(),
    )
}

/// `−dt² + warp · g*`, with `g*` given as strings over the full chart.
fn warped(coords: &[String], warp: &str, gstar: &[Vec<String>]) -> Result<MetricSpec, CatalogError> {
    let n = coords.len();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let e = match (i, j) {
                (0, 0) => Expr::constant(-1.0, coords),
                (0, _) | (_, 0) => Expr::constant(0.0, coords),
                _ => {
                    let s = &gstar[i - 1][j - 1];
                    if s.trim() == "0" {
                        Expr::constant(0.0, coords)
                    } else if s.trim() == "1" {
                        parse("f", warp, coords)?
                    } else {
                        parse(&format!("gstar.{i}.{j}"), &format!("({warp})*({s})"), coords)?
                    }
                }
            };
            row.push(e);
        }
        rows.push(row);
    }
    Ok(MetricSpec::new(coords.to_vec(), rows)?)
}

fn flat_base(n: usize) -> Vec<Vec<String>> {
    (0..n - 1)
        .map(|i| (0..n - 1).map(|j| if i == j { "1".into() } else { "0".into() }).collect())
        .collect()
}

fn unit_box(n: usize) -> Vec<(f64, f64)> {
    vec![(-1.0, 1.0); n]
}

/// Looks up a builtin. Parameters are `key=value` strings; every builtin
/// accepts `n` (dimension, default 4).
pub fn builtin(name: &str, params: &[(String, String)]) -> Result<CatalogEntry, CatalogError> {
    let mut p = Params {
        builtin: name,
        map: params.iter().cloned().collect(),
    };
    let defaults_only = params.is_empty();
    let entry = match name {
        "minkowski" => {
            let n = p.dim(2)?;
            let c = default_coords(n);
            let diag = (0..n)
                .map(|i| Expr::constant(if i == 0 { -1.0 } else { 1.0 }, &c))
                .collect();
            CatalogEntry {
                name: name.into(),
                metric: MetricSpec::diagonal(c.clone(), diag)?,
                field: unit_field(&c, 1),
                bounds: unit_box(n),
                singular: vec![],
                expectations: expect(&[
                    ("flat", true),
                    ("einstein", true),
                    ("parallel", true),
                    ("concircular", false),
                    ("grw", false),
                ]),
            }
        }
        "desitter-flat" => {
            let n = p.dim(3)?;
            let c = default_coords(n);
            CatalogEntry {
                name: name.into(),
                metric: warped(&c, "exp(2*t)", &flat_base(n))?,
                field: unit_field(&c, 0),
                bounds: unit_box(n),
                singular: vec![],
                expectations: expect(&[
                    ("concircular", true),
                    ("p_connection", true),
                    ("grw", true),
                    ("einstein", true),
                    ("self_torse_forming", true),
                    ("einstein_type_0", false),
                    ("einstein_type_1", true),
                    ("einstein_type_2", true),
                    ("einstein_type_3", true),
                    ("scalar_constant", true),
                ]),
            }
        }
        "flrw" => {
            let n = p.dim(3)?;
            let c = default_coords(n);
            let f = p.take("f").unwrap_or_else(|| "t".into());
            let pt = p.take("pt").unwrap_or_else(|| "1".into());
            parse("f", &f, &c)?;
            let mut comps = vec![parse("pt", &pt, &c)?];
            comps.extend((1..n).map(|_| Expr::constant(0.0, &c)));
            let mut bounds = unit_box(n);
            bounds[0] = (0.5, 2.0);
            CatalogEntry {
                name: name.into(),
                metric: warped(&c, &format!("({f})^2"), &flat_base(n))?,
                field: VectorFieldSpec::new(comps),
                bounds,
                singular: vec![SingularLocus { coord: 0, value: 0.0 }],
                expectations: if defaults_only {
                    expect(&[
                        ("concircular", false),
                        ("grw", false),
                        ("torse_forming", true),
                        ("quasi_einstein", true),
                        ("scalar_constant", false),
                    ])
                } else {
                    vec![]
                },
            }
        }
        "grw-generic" => {
            let n = p.dim(3)?;
            let c = default_coords(n);
            let r2 = c[1..].iter().map(|s| format!("{s}^2")).collect::<Vec<_>>().join("+");
            let conf = format!("1/(1+({r2})/4)^2");
            let base: Vec<Vec<String>> = (0..n - 1)
                .map(|i| (0..n - 1).map(|j| if i == j { conf.clone() } else { "0".into() }).collect())
                .collect();
            CatalogEntry {
                name: name.into(),
                metric: warped(&c, "exp(2*t)", &base)?,
                field: unit_field(&c, 0),
                bounds: unit_box(n),
                singular: vec![],
                expectations: expect(&[
                    ("concircular", true),
                    ("p_connection", true),
                    ("grw", true),
                    ("einstein", false),
                    ("quasi_einstein", true),
                    ("perfect_fluid", true),
                    ("scalar_constant", false),
                ]),
            }
        }
        "grw" => {
            let n = p.dim(3)?;
            let c = default_coords(n);
            let f = p.take("f").unwrap_or_else(|| "exp(t)".into());
            parse("f", &f, &c)?;
            let mut base = flat_base(n);
            for a in 1..n {
                for b in 1..=a {
                    if let Some(s) = p.take(&format!("gstar.{a}.{b}")) {
                        base[a - 1][b - 1] = s.clone();
                        base[b - 1][a - 1] = s;
                    }
                }
            }
            CatalogEntry {
                name: name.into(),
                metric: warped(&c, &format!("({f})^2"), &base)?,
                field: unit_field(&c, 0),
                bounds: unit_box(n),
                singular: vec![],
                expectations: if defaults_only {
                    expect(&[("grw", true), ("concircular", true), ("einstein", true)])
                } else {
                    vec![]
                },
            }
        }
        _ => return Err(CatalogError::Unknown(name.into())),
    };
    p.finish()?;
    Ok(entry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{frame_at, lc_scalar};

    fn kv(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn de_sitter_template() {
        let e = builtin("desitter-flat", &[]).unwrap();
        assert_eq!(e.metric.coords(), ["t", "x", "y", "z"]);
        assert_eq!(e.metric.component(1, 1).to_string(), "exp(2.0*t)");
        assert_eq!(e.metric.component(0, 0).eval(&[0.0; 4]).unwrap(), -1.0);
        assert_eq!(e.metric.component(1, 0).eval(&[0.0; 4]).unwrap(), 0.0);
    }

    #[test]
    fn spherical_base_scalar_curvature() {
        let e = builtin("grw-generic", &[]).unwrap();
        for t in [-0.5, 0.0, 0.8] {
            let f = frame_at(&e.metric, &[t, 0.3, -0.6, 0.2]).unwrap();
            let want = 12.0 + 6.0 * (-2.0 * t as f64).exp();
            assert!((lc_scalar(&f) - want).abs() < 1e-10);
        }
    }

    #[test]
    fn parameters() {
        let e = builtin("flrw", &kv(&[("f", "t"), ("pt", "t/(1+t^2/2)")])).unwrap();
        assert!(e.expectations.is_empty());
        assert_eq!(e.bounds[0], (0.5, 2.0));
        let e = builtin("grw", &kv(&[("f", "cosh(t)"), ("gstar.1.1", "1+x^2"), ("n", "4")])).unwrap();
        let g = e.metric.values_at(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((g[1][1] - 2.0).abs() < 1e-15);
        assert_eq!(default_coords(5), ["t", "x1", "x2", "x3", "x4"]);
        assert!(matches!(builtin("nope", &[]), Err(CatalogError::Unknown(_))));
        assert!(matches!(
            builtin("minkowski", &kv(&[("f", "t")])),
            Err(CatalogError::UnknownParam { .. })
        ));
        assert!(matches!(
            builtin("grw", &kv(&[("n", "2")])),
            Err(CatalogError::Dimension { .. })
        ));
    }
}
