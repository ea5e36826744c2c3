//! Torse-forming fit `∇_X P = ω X + η(X) P` and the special cases derived from it.

use nalgebra::{DMatrix, DVector};

use crate::connection::{build_connection, lie_g, SSConnection};
use crate::geometry::{frame_at, GeometryError, MetricSpec, VectorFieldSpec};
use crate::tensor::Tensor;

/// Step for the central differences of the fitted `η̂`.
pub const ETA_FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct TorseFit {
    pub omega: f64,
    pub eta: Vec<f64>,
    /// `max |∇_i P^k − ω̂ δ^k_i − η̂_i P^k|`.
    pub residual: f64,
}

/// Least-squares fit of `(ω̂, η̂)` from `∇_i P^k` (stored `[k][i]`).
/// Returns `None` when `P = 0`, where `η̂` is not identifiable.
pub fn fit_torse_forming(nabla_p: &Tensor, p: &[f64]) -> Option<TorseFit> {
    let n = p.len();
    let p2: f64 = p.iter().map(|v| v * v).sum();
    if p2 == 0.0 {
        return None;
    }
    // unknowns (ω, η_0 .. η_{n-1}); one equation per (k, i)
    let mut a = DMatrix::zeros(n * n, n + 1);
    let mut rhs = DVector::zeros(n * n);
    for k in 0..n {
        for i in 0..n {
            let row = k * n + i;
            if k == i {
                a[(row, 0)] = 1.0;
            }
            a[(row, 1 + i)] = p[k];
            rhs[row] = nabla_p.at2(k, i);
        }
    }
    let ata = a.transpose() * &a;
    let atb = a.transpose() * &rhs;
    let x = ata.lu().solve(&atb)?;
    let omega = x[0];
    let eta: Vec<f64> = (0..n).map(|i| x[1 + i]).collect();
    let mut residual: f64 = 0.0;
    for k in 0..n {
        for i in 0..n {
            let fit = if k == i { omega } else { 0.0 } + eta[i] * p[k];
            residual = residual.max((nabla_p.at2(k, i) - fit).abs());
        }
    }
    Some(TorseFit { omega, eta, residual })
}

pub const FLAG_NAMES: [&str; 15] = [
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
];

#[derive(Clone, Debug, PartialEq)]
pub struct Flag {
    pub name: &'static str,
    /// Residual divided by `1 + max|g|`; `NaN` when indeterminate.
    pub residual: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorTaxonomy {
    pub fit: Option<TorseFit>,
    /// Fitted conformal factor `φ̂` in `L_P g ≈ 2φ̂ g`.
    pub conformal_factor: f64,
    pub flags: Vec<Flag>,
}

impl VectorTaxonomy {
    pub fn flag(&self, name: &str) -> Option<&Flag> {
        self.flags.iter().find(|f| f.name == name)
    }

    pub fn holds(&self, name: &str) -> bool {
        self.flag(name).is_some_and(|f| f.holds)
    }

    pub fn is_indeterminate(&self) -> bool {
        self.fit.is_none()
    }
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Classifies `P` at the connection's base point. `deta` is the exterior
/// derivative `∂_m η̂_i − ∂_i η̂_m` (max-norm) when available.
pub fn classify_at(c: &SSConnection, deta: Option<f64>, tol: f64) -> VectorTaxonomy {
    let n = c.dim();
    let scale = c.frame.scale();
    let fit = fit_torse_forming(&c.nabla_p, &c.p);
    let mut flags = Vec::with_capacity(FLAG_NAMES.len());
    let mut push = |name: &'static str, raw: f64, gate: bool| {
        let residual = raw / scale;
        flags.push(Flag {
            name,
            residual,
            holds: gate && residual <= tol,
        });
    };

    match &fit {
        Some(fit) => {
            let tf = fit.residual / scale <= tol;
            let eta_norm = max_abs(fit.eta.iter().copied());
            let eta_p: f64 = fit.eta.iter().zip(&c.p).map(|(a, b)| a * b).sum();
            let recurrent = fit.omega.abs();
            push("torse_forming", fit.residual, true);
            push("torqued", eta_p.abs(), tf);
            push("concircular_fialkow", eta_norm, tf);
            push("concircular_yano", deta.unwrap_or(f64::NAN), tf && deta.is_some());
            push("recurrent", recurrent, tf);
            push("concurrent", eta_norm.max((fit.omega - 1.0).abs()), tf);
            push("parallel", eta_norm.max(recurrent), tf);
            push("self_torse_forming", max_abs((0..n).map(|i| fit.eta[i] - c.pi[i])), tf);
            push(
                "anti_torqued",
                max_abs((0..n).map(|i| fit.eta[i] + fit.omega * c.pi[i])),
                tf,
            );
            // unit form ∇π = ω(g − ε π⊗π), ε = g(P, P) = ±1
            let eps = c.pi_p.signum();
            let unit = (c.pi_p.abs() - 1.0).abs() / scale <= tol;
            let target = c
                .frame
                .g
                .add_scaled(-eps, &c.pi_pi())
                .scaled(fit.omega);
            push("unit_form", c.nabla_pi.max_abs_diff(&target), tf && unit);
        }
        None => {
            for name in &FLAG_NAMES[..10] {
                push(name, f64::NAN, false);
            }
        }
    }

    let geo = max_abs((0..n).map(|k| (0..n).map(|i| c.p[i] * c.nabla_p.at2(k, i)).sum::<f64>()));
    push("geodesic", geo, true);
    push("unit_timelike", (c.pi_p + 1.0).abs(), true);

    let lg = lie_g(c);
    let g = &c.frame.g;
    let gg: f64 = g.data().iter().map(|v| v * v).sum();
    let lgg: f64 = g.data().iter().zip(lg.data()).map(|(a, b)| a * b).sum();
    let conformal_factor = 0.5 * lgg / gg;
    push("conformal_killing", lg.max_abs_diff(&g.scaled(2.0 * conformal_factor)), true);
    push("killing", lg.max_abs(), true);
    push("closed_pi", c.dpi_closedness(), true);

    VectorTaxonomy {
        fit,
        conformal_factor,
        flags,
    }
}

fn fit_at(m: &MetricSpec, p: &VectorFieldSpec, point: &[f64]) -> Result<Option<TorseFit>, GeometryError> {
    let c = build_connection(frame_at(m, point)?, p)?;
    Ok(fit_torse_forming(&c.nabla_p, &c.p))
}

/// `max |∂_m η̂_i − ∂_i η̂_m|` by central differences of the pointwise fit.
/// `None` if the fit is indeterminate anywhere on the stencil.
pub fn eta_exterior_derivative(
    m: &MetricSpec,
    p: &VectorFieldSpec,
    point: &[f64],
    h: f64,
) -> Result<Option<f64>, GeometryError> {
    let n = point.len();
    let mut d = vec![vec![0.0; n]; n];
    for (mm, row) in d.iter_mut().enumerate() {
        let mut plus = point.to_vec();
        let mut minus = point.to_vec();
        plus[mm] += h;
        minus[mm] -= h;
        let (Some(fp), Some(fm)) = (fit_at(m, p, &plus)?, fit_at(m, p, &minus)?) else {
            return Ok(None);
        };
        for i in 0..n {
            row[i] = (fp.eta[i] - fm.eta[i]) / (2.0 * h);
        }
    }
    let mut r: f64 = 0.0;
    for (a, row) in d.iter().enumerate() {
        for b in 0..n {
            r = r.max((row[b] - d[b][a]).abs());
        }
    }
    Ok(Some(r))
}

/// Classifies `P` at each point, including the closedness of `η̂`.
pub fn classify_vector(
    m: &MetricSpec,
    p: &VectorFieldSpec,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<VectorTaxonomy>, GeometryError> {
    points
        .iter()
        .map(|x| {
            let c = build_connection(frame_at(m, x)?, p)?;
            let deta = eta_exterior_derivative(m, p, x, ETA_FD_STEP)?;
            Ok(classify_at(&c, deta, tol))
        })
        .collect()
}
