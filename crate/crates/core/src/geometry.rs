//! Pointwise metric data and Levi-Civita curvature.
//!
//! Conventions used throughout the crate:
//!
//! * `Γ^k_{ij}` is stored as `gamma[k][i][j]` with `∇_{e_i} e_j = Γ^k_{ij} e_k`,
//!   so the first lower index is the differentiation direction.
//! * `R(e_i, e_j) e_k = R^l_{kij} e_l`, stored as `riemann[l][k][i][j]`.
//! * `Ric(Y, Z) = tr(X ↦ R(X, Y) Z)`, i.e. `Ric_{jk} = R^i_{kij}`. With this
//!   choice de Sitter space has `Ric = +(n-1) g`.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::expr::{EvalError, Expr, Jet2};
use crate::tensor::{Tensor, TensorJet, Variance};

use Variance::{Down, Up};

/// Metrics with `|det g|` at or below this value are rejected.
pub const SINGULAR_DET: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("metric is singular at {point:?} (det = {det:e})")]
    SingularMetric { point: Vec<f64>, det: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Shape(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpec {
    coords: Vec<String>,
    // lower triangle, row-major: (i, j) with j <= i
    lower: Vec<Expr>,
}

fn tri(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

impl MetricSpec {
    /// Builds a metric from a full component matrix. Only the lower triangle
    /// is read; the upper triangle is its mirror.
    pub fn new(coords: Vec<String>, rows: Vec<Vec<Expr>>) -> Result<MetricSpec, GeometryError> {
        let n = coords.len();
        if n < 2 {
            return Err(GeometryError::Shape("dimension must be at least 2".into()));
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(GeometryError::Shape(format!(
                "metric must be a {n}x{n} matrix of expressions"
            )));
        }
        let mut lower = Vec::with_capacity(n * (n + 1) / 2);
        for (i, row) in rows.into_iter().enumerate() {
            lower.extend(row.into_iter().take(i + 1));
        }
        Ok(MetricSpec { coords, lower })
    }

    pub fn diagonal(coords: Vec<String>, diag: Vec<Expr>) -> Result<MetricSpec, GeometryError> {
        let n = coords.len();
        if diag.len() != n {
            return Err(GeometryError::Shape(format!(
                "expected {n} diagonal entries, got {}",
                diag.len()
            )));
        }
        let rows = diag
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                (0..n)
                    .map(|j| if i == j { d.clone() } else { Expr::constant(0.0, &coords) })
                    .collect()
            })
            .collect();
        MetricSpec::new(coords, rows)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.lower[tri(i, j)]
    }

    /// Plain component values at a point.
    pub fn values_at(&self, point: &[f64]) -> Result<Vec<Vec<f64>>, EvalError> {
        let n = self.dim();
        let mut g = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let v = self.component(i, j).eval(point)?;
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        Ok(g)
    }
}

/// Contravariant vector field `P^k(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldSpec {
    components: Vec<Expr>,
}

impl VectorFieldSpec {
    pub fn new(components: Vec<Expr>) -> VectorFieldSpec {
        VectorFieldSpec { components }
    }

    pub fn zero(coords: &[String]) -> VectorFieldSpec {
        VectorFieldSpec {
            components: coords.iter().map(|_| Expr::constant(0.0, coords)).collect(),
        }
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// `P^k` and `∂_m P^k` (derivative slot first).
    pub fn jet_at(&self, point: &[f64]) -> Result<TensorJet, EvalError> {
        let n = point.len();
        let jets: Vec<Jet2> = self
            .components
            .iter()
            .map(|e| e.eval_jet2(point))
            .collect::<Result<_, _>>()?;
        let value = Tensor::from_fn(n, &[Up], |ix| jets[ix[0]].value());
        let partial = Tensor::from_fn(n, &[Down, Up], |ix| jets[ix[1]].grad()[ix[0]]);
        Ok(TensorJet::new(value, partial))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature {
    pub pluses: usize,
    pub minuses: usize,
}

impl Signature {
    pub fn is_lorentzian(&self) -> bool {
        self.minuses == 1
    }

    pub fn is_riemannian(&self) -> bool {
        self.minuses == 0
    }
}

/// All metric-derived data at one chart point.
///
/// Partial-derivative arrays carry the derivative slot first:
/// `dg[k][i][j] = ∂_k g_ij`, `d2g[l][k][i][j] = ∂_l ∂_k g_ij`,
/// `dgamma[l][k][i][j] = ∂_l Γ^k_{ij}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointFrame {
    pub point: Vec<f64>,
    pub g: Tensor,
    pub dg: Tensor,
    pub d2g: Tensor,
    pub ginv: Tensor,
    pub gamma: Tensor,
    pub dgamma: Tensor,
    pub signature: Signature,
}

impl PointFrame {
    pub fn dim(&self) -> usize {
        self.point.len()
    }

    /// `1 + max |g_ij|`, the normalisation used for residuals.
    pub fn scale(&self) -> f64 {
        1.0 + self.g.max_abs()
    }

    pub fn metric_jet(&self) -> TensorJet {
        TensorJet::new(self.g.clone(), self.dg.clone())
    }

    /// `g(u, v)` for contravariant vectors.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.g.at2(i, j) * u[i] * v[j];
            }
        }
        s
    }

    pub fn lower(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.g.at2(i, j) * v[j]).sum())
            .collect()
    }

    pub fn raise(&self, w: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.ginv.at2(i, j) * w[j]).sum())
            .collect()
    }
}

/// Builds the metric frame at `point`: components and exact derivatives of
/// `g`, its inverse, the Christoffel symbols and their first partials.
pub fn frame_at(m: &MetricSpec, point: &[f64]) -> Result<PointFrame, GeometryError> {
    let n = m.dim();
    if point.len() != n {
        return Err(EvalError::Dimension {
            expected: n,
            got: point.len(),
        }
        .into());
    }
    let mut jets = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in 0..=i {
            jets.push(m.component(i, j).eval_jet2(point)?);
        }
    }
    let jet = |i: usize, j: usize| &jets[tri(i, j)];
    let g = Tensor::from_fn(n, &[Down, Down], |ix| jet(ix[0], ix[1]).value());
    let dg = Tensor::from_fn(n, &[Down, Down, Down], |ix| jet(ix[1], ix[2]).grad()[ix[0]]);
    let d2g = Tensor::from_fn(n, &[Down, Down, Down, Down], |ix| {
        jet(ix[2], ix[3]).hess(ix[0], ix[1])
    });

    let gm = DMatrix::from_fn(n, n, |i, j| g.at2(i, j));
    let det = gm.determinant();
    if !det.is_finite() || det.abs() <= SINGULAR_DET {
        return Err(GeometryError::SingularMetric {
            point: point.to_vec(),
            det,
        });
    }
    let inv = gm.clone().try_inverse().ok_or_else(|| GeometryError::SingularMetric {
        point: point.to_vec(),
        det,
    })?;
    // symmetrise away round-off so ginv is exactly symmetric
    let ginv = Tensor::from_fn(n, &[Up, Up], |ix| 0.5 * (inv[(ix[0], ix[1])] + inv[(ix[1], ix[0])]));

    let eig = SymmetricEigen::new(gm);
    let minuses = eig.eigenvalues.iter().filter(|v| **v < 0.0).count();
    let signature = Signature {
        pluses: n - minuses,
        minuses,
    };

    // Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij), computed for i <= j and mirrored
    let first_kind = |l: usize, i: usize, j: usize| {
        0.5 * (dg.at3(i, j, l) + dg.at3(j, i, l) - dg.at3(l, i, j))
    };
    let mut gamma = Tensor::zeros(n, &[Up, Down, Down]);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n).map(|l| ginv.at2(k, l) * first_kind(l, i, j)).sum();
                gamma.set(&[k, i, j], v);
                gamma.set(&[k, j, i], v);
            }
        }
    }

    // ∂_m g^{kl} = −g^{ka} ∂_m g_ab g^{bl}
    let dginv = Tensor::from_fn(n, &[Down, Up, Up], |ix| {
        let (mm, k, l) = (ix[0], ix[1], ix[2]);
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += ginv.at2(k, a) * dg.at3(mm, a, b) * ginv.at2(b, l);
            }
        }
        -s
    });
    let mut dgamma = Tensor::zeros(n, &[Down, Up, Down, Down]);
    for mm in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        let d_first = 0.5
                            * (d2g.at4(mm, i, j, l) + d2g.at4(mm, j, i, l) - d2g.at4(mm, l, i, j));
                        s += dginv.at3(mm, k, l) * first_kind(l, i, j) + ginv.at2(k, l) * d_first;
                    }
                    dgamma.set(&[mm, k, i, j], s);
                    dgamma.set(&[mm, k, j, i], s);
                }
            }
        }
    }

    Ok(PointFrame {
        point: point.to_vec(),
        g,
        dg,
        d2g,
        ginv,
        gamma,
        dgamma,
        signature,
    })
}

/// Curvature of an arbitrary (possibly non-symmetric) connection:
/// `R^l_{kij} = ∂_i Γ^l_{jk} − ∂_j Γ^l_{ik} + Γ^l_{im} Γ^m_{jk} − Γ^l_{jm} Γ^m_{ik}`.
pub fn riemann_from_coefficients(gamma: &Tensor, dgamma: &Tensor) -> Tensor {
    let n = gamma.dim();
    Tensor::from_fn(n, &[Up, Down, Down, Down], |ix| {
        let (l, k, i, j) = (ix[0], ix[1], ix[2], ix[3]);
        let mut r = dgamma.at4(i, l, j, k) - dgamma.at4(j, l, i, k);
        for m in 0..n {
            r += gamma.at3(l, i, m) * gamma.at3(m, j, k) - gamma.at3(l, j, m) * gamma.at3(m, i, k);
        }
        r
    })
}

/// `Ric_{jk} = R^i_{kij}`: contraction of the upper slot with the first
/// direction slot.
pub fn ricci_from_riemann(riemann: &Tensor) -> Tensor {
    let n = riemann.dim();
    Tensor::from_fn(n, &[Down, Down], |ix| {
        (0..n).map(|i| riemann.at4(i, ix[1], i, ix[0])).sum()
    })
}

pub fn lc_riemann(f: &PointFrame) -> Tensor {
    riemann_from_coefficients(&f.gamma, &f.dgamma)
}

pub fn lc_ricci(f: &PointFrame) -> Tensor {
    ricci_from_riemann(&lc_riemann(f))
}

pub fn lc_scalar(f: &PointFrame) -> f64 {
    lc_ricci(f).trace_with(&f.ginv)
}

/// `R_{lkij} = g_{la} R^a_{kij}`.
pub fn lower_first(f: &PointFrame, riemann: &Tensor) -> Tensor {
    let n = f.dim();
    Tensor::from_fn(n, &[Down, Down, Down, Down], |ix| {
        (0..n)
            .map(|a| f.g.at2(ix[0], a) * riemann.at4(a, ix[1], ix[2], ix[3]))
            .sum()
    })
}

/// Max-norm of the cyclic sum `R^l_{kij} + R^l_{ijk} + R^l_{jki}`.
pub fn first_bianchi_residual(riemann: &Tensor) -> f64 {
    let n = riemann.dim();
    let mut m: f64 = 0.0;
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    // R(X,Y)Z + R(Y,Z)X + R(Z,X)Y with X=e_i, Y=e_j, Z=e_k
                    let s = riemann.at4(l, k, i, j) + riemann.at4(l, i, j, k) + riemann.at4(l, j, k, i);
                    m = m.max(s.abs());
                }
            }
        }
    }
    m
}

/// Max-norm of `∇g` for the supplied connection coefficients.
pub fn metricity_residual(f: &PointFrame, coeffs: &Tensor) -> f64 {
    crate::tensor::covariant_derivative(&f.metric_jet(), coeffs).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn coords(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn diag(names: &[&str], entries: &[&str]) -> MetricSpec {
        let c = coords(names);
        let d = entries.iter().map(|e| Expr::parse(e, &c).unwrap()).collect();
        MetricSpec::diagonal(c, d).unwrap()
    }

    fn de_sitter() -> MetricSpec {
        diag(&["t", "x", "y", "z"], &["-1", "exp(2*t)", "exp(2*t)", "exp(2*t)"])
    }

    #[test]
    fn minkowski_is_flat_with_lorentzian_signature() {
        let m = diag(&["t", "x", "y", "z"], &["-1", "1", "1", "1"]);
        let f = frame_at(&m, &[0.2, -0.4, 0.1, 0.9]).unwrap();
        assert_eq!(f.gamma.max_abs(), 0.0);
        assert_eq!(f.signature, Signature { pluses: 3, minuses: 1 });
        assert_eq!(lc_riemann(&f).max_abs(), 0.0);
        assert_eq!(lc_scalar(&f), 0.0);
    }

    #[test]
    fn de_sitter_christoffels() {
        let f = frame_at(&de_sitter(), &[0.3, 0.0, 0.0, 0.0]).unwrap();
        assert!((f.gamma.at3(0, 1, 1) - 0.6f64.exp()).abs() < 1e-13);
        assert!((f.gamma.at3(1, 0, 1) - 1.0).abs() < 1e-14);
        assert!((f.gamma.at3(1, 1, 0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn de_sitter_has_constant_unit_curvature() {
        let f = frame_at(&de_sitter(), &[-0.7, 0.3, 1.1, -0.2]).unwrap();
        let r = lower_first(&f, &lc_riemann(&f));
        // R_{lkij} with R(e_i,e_j)e_k = g(e_j,e_k) e_i − g(e_i,e_k) e_j
        for l in 0..4 {
            for k in 0..4 {
                for i in 0..4 {
                    for j in 0..4 {
                        let want = f.g.at2(j, k) * f.g.at2(l, i) - f.g.at2(i, k) * f.g.at2(l, j);
                        assert!((r.at4(l, k, i, j) - want).abs() < 1e-12);
                    }
                }
            }
        }
        let ric = lc_ricci(&f);
        assert!(ric.max_abs_diff(&f.g.scaled(3.0)) < 1e-12);
        assert!((lc_scalar(&f) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn flrw_linear_scale_factor() {
        let t = 1.7;
        let f = frame_at(&diag(&["t", "x", "y", "z"], &["-1", "t^2", "t^2", "t^2"]), &[t, 0.2, 0.1, 0.0]).unwrap();
        let ric = lc_ricci(&f);
        assert!(ric.at2(0, 0).abs() < 1e-12);
        assert!((ric.at2(1, 1) - 2.0).abs() < 1e-12);
        assert!((lc_scalar(&f) - 6.0 / (t * t)).abs() < 1e-12);
    }

    #[test]
    fn singular_metric_is_rejected() {
        let m = diag(&["a", "b"], &["0", "1"]);
        assert!(matches!(
            frame_at(&m, &[0.0, 0.0]),
            Err(GeometryError::SingularMetric { .. })
        ));
    }

    #[test]
    fn riemann_is_antisymmetric_in_direction_slots() {
        let c = coords(&["u", "v", "w"]);
        let e = |s: &str| Expr::parse(s, &c).unwrap();
        let m = MetricSpec::new(
            c.clone(),
            vec![
                vec![e("2+sin(u*v)"), e("0"), e("0")],
                vec![e("0.3*w"), e("1+u^2"), e("0")],
                vec![e("0.1*u*v"), e("0.2*cos(w)"), e("3+exp(-v^2)")],
            ],
        )
        .unwrap();
        let f = frame_at(&m, &[0.4, -0.3, 0.8]).unwrap();
        let r = lc_riemann(&f);
        for l in 0..3 {
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        assert!((r.at4(l, k, i, j) + r.at4(l, k, j, i)).abs() < 1e-12);
                    }
                }
            }
        }
        assert!(first_bianchi_residual(&r) < 1e-9);
        assert!(metricity_residual(&f, &f.gamma) < 1e-12);
        // off-diagonal g was read from the lower triangle and mirrored
        assert_eq!(f.g.at2(0, 1), f.g.at2(1, 0));
        assert!((f.g.at2(0, 1) - 0.24).abs() < 1e-15);
    }
}
