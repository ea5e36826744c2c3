//! Pointwise algebra on `(g, Ric, π)`: quasi-Einstein fits, Einstein-type
//! verdicts and the perfect-fluid forms.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::curvature::{closed_form_einstein, traceless, Family};
use crate::tensor::{Tensor, Variance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RicciDataError {
    #[error("metric is singular")]
    Singular,
    #[error("Ricci tensor is not symmetric (defect {0:e})")]
    Asymmetric(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Metric, Ricci tensor and generator 1-form at one point, independent of
/// where the Ricci tensor came from.
#[derive(Clone, Debug, PartialEq)]
pub struct RicciData {
    pub g: Tensor,
    pub ginv: Tensor,
    pub ric: Tensor,
    pub pi: Vec<f64>,
}

impl RicciData {
    pub fn new(g: Tensor, ric: Tensor, pi: Vec<f64>) -> Result<RicciData, RicciDataError> {
        let n = g.dim();
        if g.rank() != 2 || ric.rank() != 2 || ric.dim() != n || pi.len() != n {
            return Err(RicciDataError::Shape(format!(
                "expected {n}x{n} g and Ric and {n} components of π"
            )));
        }
        let asym = ric.asymmetry();
        if asym > 1e-10 * (1.0 + ric.max_abs()) {
            return Err(RicciDataError::Asymmetric(asym));
        }
        let gm = DMatrix::from_fn(n, n, |i, j| g.at2(i, j));
        if gm.determinant().abs() <= crate::geometry::SINGULAR_DET {
            return Err(RicciDataError::Singular);
        }
        let inv = gm.try_inverse().ok_or(RicciDataError::Singular)?;
        let ginv = Tensor::from_fn(n, &[Variance::Up, Variance::Up], |ix| inv[(ix[0], ix[1])]);
        Ok(RicciData { g, ginv, ric, pi })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn scale(&self) -> f64 {
        1.0 + self.g.max_abs()
    }

    /// `π(P) = g^{ij} π_i π_j`.
    pub fn pi_p(&self) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.ginv.at2(i, j) * self.pi[i] * self.pi[j];
            }
        }
        s
    }

    pub fn pi_pi(&self) -> Tensor {
        Tensor::outer(&self.pi, &self.pi)
    }

    pub fn scalar(&self) -> f64 {
        self.ric.trace_with(&self.ginv)
    }

    pub fn einstein_g(&self) -> Tensor {
        traceless(&self.ric, self.scalar(), &self.g)
    }

    /// `E^θ` from the Einstein-type relations; valid for concircular generators.
    pub fn einstein_type_tensor(&self, fam: Family) -> Tensor {
        closed_form_einstein(fam, &self.einstein_g(), &self.g, &self.pi, self.pi_p())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FitStatus {
    Ok,
    /// `π = 0`: `b` is not identifiable and is reported as 0.
    ZeroPi,
    /// `g` and `π⊗π` are numerically proportional.
    RankDeficient,
}

/// Least-squares fit `T ≈ a g + b π⊗π` in the Frobenius norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuasiEinsteinFit {
    pub a: f64,
    pub b: f64,
    /// `max |T − a g − b π⊗π|` divided by `1 + max|g|`.
    pub residual: f64,
    pub status: FitStatus,
}

fn dot(a: &Tensor, b: &Tensor) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

pub fn fit_quasi_einstein(t: &Tensor, g: &Tensor, pi: &[f64]) -> QuasiEinsteinFit {
    let pp = Tensor::outer(pi, pi);
    let scale = 1.0 + g.max_abs();
    let (gg, gp, p2) = (dot(g, g), dot(g, &pp), dot(&pp, &pp));
    let (tg, tp) = (dot(t, g), dot(t, &pp));
    let finish = |a: f64, b: f64, status| QuasiEinsteinFit {
        a,
        b,
        residual: t.add_scaled(-a, g).add_scaled(-b, &pp).max_abs() / scale,
        status,
    };
    if p2 == 0.0 {
        return finish(tg / gg, 0.0, FitStatus::ZeroPi);
    }
    let det = gg * p2 - gp * gp;
    if det.abs() <= 1e-12 * gg * p2 {
        return finish(tg / gg, 0.0, FitStatus::RankDeficient);
    }
    finish((tg * p2 - tp * gp) / det, (gg * tp - gp * tg) / det, FitStatus::Ok)
}

pub fn classify_quasi_einstein(d: &RicciData) -> QuasiEinsteinFit {
    fit_quasi_einstein(&d.ric, &d.g, &d.pi)
}

/// `max |E^g|` divided by the point scale.
pub fn einstein_residual(d: &RicciData) -> f64 {
    d.einstein_g().max_abs() / d.scale()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verdict {
    pub residual: f64,
    pub holds: bool,
}

/// Einstein-type verdict of kind `fam` from an already assembled `E^θ`.
pub fn einstein_type(e_theta: &Tensor, scale: f64, tol: f64) -> Verdict {
    let residual = e_theta.max_abs() / scale;
    Verdict {
        residual,
        holds: residual <= tol,
    }
}

/// Einstein-type verdict of kind `fam` on synthetic data.
pub fn einstein_type_data(fam: Family, d: &RicciData, tol: f64) -> Verdict {
    einstein_type(&d.einstein_type_tensor(fam), d.scale(), tol)
}

/// The quasi-Einstein form equivalent to `E^θ = 0` for `θ ∈ {0, 4, 5}`:
/// `Ric = (1/(c n))(c r − (n−1)π(P)) g + ((n−1)/c) π⊗π` with `c = 4, 1, 2`.
pub fn qe_form(fam: Family, d: &RicciData, r: f64) -> Option<Tensor> {
    let c = match fam {
        Family::K0 => 4.0,
        Family::K4 => 1.0,
        Family::K5 => 2.0,
        _ => return None,
    };
    let n = d.dim() as f64;
    let m = n - 1.0;
    let a = (c * r - m * d.pi_p()) / (c * n);
    Some(d.g.scaled(a).add_scaled(m / c, &d.pi_pi()))
}

/// Scalar curvature forced on a GRW space-time by `E^θ = 0`, `θ ∈ {0, 4, 5}`.
pub fn grw_constant_scalar(fam: Family, n: usize) -> Option<f64> {
    let n = n as f64;
    let m = n - 1.0;
    match fam {
        Family::K0 => Some(m * (5.0 * n - 1.0) / 4.0),
        Family::K4 => Some(m * (2.0 * n - 1.0)),
        Family::K5 => Some(m * (3.0 * n - 1.0) / 2.0),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Equivalence {
    /// `E^θ = 0`.
    pub einstein_type: Verdict,
    /// `Ric` equals the stated quasi-Einstein form.
    pub form: Verdict,
    pub scalar: f64,
}

impl Equivalence {
    /// Both directions of the equivalence agree.
    pub fn consistent(&self) -> bool {
        self.einstein_type.holds == self.form.holds
    }
}

/// Checks `E^θ = 0 ⟺ Ric = form(r)` on data, with `r` the scalar curvature of `d`.
pub fn qe_kind_equivalence(fam: Family, d: &RicciData, tol: f64) -> Option<Equivalence> {
    let r = d.scalar();
    let form = qe_form(fam, d, r)?;
    let fr = d.ric.max_abs_diff(&form) / d.scale();
    Some(Equivalence {
        einstein_type: einstein_type_data(fam, d, tol),
        form: Verdict {
            residual: fr,
            holds: fr <= tol,
        },
        scalar: r,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerfectFluidFit {
    pub fit: QuasiEinsteinFit,
    /// `|a − b − (n−1)|`.
    pub gap: f64,
    /// `max |Ric − (r/(n−1) − 1) g − (r/(n−1) − n) π⊗π|` divided by the scale.
    pub rewrite_residual: f64,
}

/// Fits `Ric^θ = a g + b π⊗π`; for the Levi-Civita family also checks the GRW relations.
pub fn perfect_fluid_kind(ric: &Tensor, scalar: f64, g: &Tensor, pi: &[f64]) -> PerfectFluidFit {
    let n = g.dim() as f64;
    let fit = fit_quasi_einstein(ric, g, pi);
    let q = scalar / (n - 1.0);
    let rewrite = ric
        .add_scaled(-(q - 1.0), g)
        .add_scaled(-(q - n), &Tensor::outer(pi, pi));
    PerfectFluidFit {
        fit,
        gap: (fit.a - fit.b - (n - 1.0)).abs(),
        rewrite_residual: rewrite.max_abs() / (1.0 + g.max_abs()),
    }
}
