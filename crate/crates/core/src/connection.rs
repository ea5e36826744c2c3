//! Semi-symmetric metric connection generated by a vector field.
//!
//! `Γ¹^k_{ij} = Γ^k_{ij} + π_j δ^k_i − g_{ij} P^k`, torsion
//! `T^k_{ij} = π_j δ^k_i − π_i δ^k_j`, and the scalar
//! `ω = (div P − π(P)) / n`.

use crate::geometry::{GeometryError, PointFrame, VectorFieldSpec};
use crate::tensor::{covariant_derivative, Tensor, TensorJet, Variance};

use Variance::{Down, Up};

/// Default residual tolerance (applied after normalisation by `1 + max|g|`).
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SSConnection {
    pub frame: PointFrame,
    /// `P^k`.
    pub p: Vec<f64>,
    /// `dp[m][k] = ∂_m P^k`.
    pub dp: Tensor,
    /// `π_i = g_ij P^j`.
    pub pi: Vec<f64>,
    /// `dpi[m][i] = ∂_m π_i`.
    pub dpi: Tensor,
    pub gamma1: Tensor,
    /// `dgamma1[m][k][i][j] = ∂_m Γ¹^k_{ij}`.
    pub dgamma1: Tensor,
    pub torsion: Tensor,
    /// `dtorsion[m][k][i][j] = ∂_m T^k_{ij}`.
    pub dtorsion: Tensor,
    /// `nabla_pi[i][j] = (∇_i π)_j` with the Levi-Civita connection.
    pub nabla_pi: Tensor,
    /// `nabla_p[k][i] = (∇_i P)^k` with the Levi-Civita connection.
    pub nabla_p: Tensor,
    pub div_p: f64,
    /// `π(P) = g(P, P)`.
    pub pi_p: f64,
    pub omega: f64,
}

pub fn build_connection(frame: PointFrame, field: &VectorFieldSpec) -> Result<SSConnection, GeometryError> {
    if field.dim() != frame.dim() {
        return Err(GeometryError::Shape(format!(
            "vector field has {} components, metric dimension is {}",
            field.dim(),
            frame.dim()
        )));
    }
    let jet = field.jet_at(&frame.point)?;
    Ok(connection_from_jet(frame, &jet))
}

/// Builds the connection from `P` and its first partials at the frame point.
pub fn connection_from_jet(frame: PointFrame, pjet: &TensorJet) -> SSConnection {
    let n = frame.dim();
    let p = pjet.value.data().to_vec();
    let dp = pjet.partial.clone();
    let g = &frame.g;
    let pi = frame.lower(&p);
    let dpi = Tensor::from_fn(n, &[Down, Down], |ix| {
        let (m, i) = (ix[0], ix[1]);
        (0..n)
            .map(|k| frame.dg.at3(m, i, k) * p[k] + g.at2(i, k) * dp.at2(m, k))
            .sum()
    });
    let delta = |a: usize, b: usize| f64::from(u8::from(a == b));

    let gamma1 = Tensor::from_fn(n, &[Up, Down, Down], |ix| {
        let (k, i, j) = (ix[0], ix[1], ix[2]);
        frame.gamma.at3(k, i, j) + pi[j] * delta(k, i) - g.at2(i, j) * p[k]
    });
    let dgamma1 = Tensor::from_fn(n, &[Down, Up, Down, Down], |ix| {
        let (m, k, i, j) = (ix[0], ix[1], ix[2], ix[3]);
        frame.dgamma.at4(m, k, i, j) + dpi.at2(m, j) * delta(k, i)
            - frame.dg.at3(m, i, j) * p[k]
            - g.at2(i, j) * dp.at2(m, k)
    });
    // antisymmetrised Γ¹, so the invariant holds bit for bit
    let torsion = Tensor::from_fn(n, &[Up, Down, Down], |ix| {
        gamma1.at3(ix[0], ix[1], ix[2]) - gamma1.at3(ix[0], ix[2], ix[1])
    });
    let dtorsion = Tensor::from_fn(n, &[Down, Up, Down, Down], |ix| {
        let (m, k, i, j) = (ix[0], ix[1], ix[2], ix[3]);
        dpi.at2(m, j) * delta(k, i) - dpi.at2(m, i) * delta(k, j)
    });

    let pi_jet = TensorJet::new(Tensor::from_data(n, &[Down], pi.clone()), dpi.clone());
    // covariant_derivative appends the direction slot; transpose to [i][j]
    let d = covariant_derivative(&pi_jet, &frame.gamma);
    let nabla_pi = Tensor::from_fn(n, &[Down, Down], |ix| d.at2(ix[1], ix[0]));
    let nabla_p = covariant_derivative(pjet, &frame.gamma);

    let div_p: f64 = (0..n).map(|i| nabla_p.at2(i, i)).sum();
    let pi_p: f64 = pi.iter().zip(&p).map(|(a, b)| a * b).sum();
    let omega = (div_p - pi_p) / n as f64;

    SSConnection {
        frame,
        p,
        dp,
        pi,
        dpi,
        gamma1,
        dgamma1,
        torsion,
        dtorsion,
        nabla_pi,
        nabla_p,
        div_p,
        pi_p,
        omega,
    }
}

/// A residual already divided by the point scale, with its verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Check {
    pub residual: f64,
    pub holds: bool,
}

impl Check {
    pub fn new(raw: f64, scale: f64, tol: f64) -> Check {
        let residual = raw / scale;
        Check {
            residual,
            holds: residual <= tol,
        }
    }
}

impl SSConnection {
    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn pi_pi(&self) -> Tensor {
        Tensor::outer(&self.pi, &self.pi)
    }

    /// `TensorJet` of `P` at the base point.
    pub fn p_jet(&self) -> TensorJet {
        TensorJet::new(
            Tensor::from_data(self.dim(), &[Up], self.p.clone()),
            self.dp.clone(),
        )
    }

    pub fn torsion_jet(&self) -> TensorJet {
        TensorJet::new(self.torsion.clone(), self.dtorsion.clone())
    }

    /// `(∇π)_{ij} − π_i π_j − ω g_{ij}`.
    pub fn concircular_tensor(&self) -> Tensor {
        self.nabla_pi
            .sub(&self.pi_pi())
            .add_scaled(-self.omega, &self.frame.g)
    }

    /// `∇¹_i P^k`, stored `[k][i]`.
    pub fn nabla1_p(&self) -> Tensor {
        covariant_derivative(&self.p_jet(), &self.gamma1)
    }

    /// Max-norm of `∇¹g`.
    pub fn metricity_residual(&self) -> f64 {
        covariant_derivative(&self.frame.metric_jet(), &self.gamma1).max_abs()
    }

    /// `max |Γ¹^k_{ij} − Γ¹^k_{ji} − T^k_{ij}|` against the closed-form torsion.
    pub fn torsion_residual(&self) -> f64 {
        let n = self.dim();
        let mut m: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let want = self.pi[j] * f64::from(u8::from(k == i))
                        - self.pi[i] * f64::from(u8::from(k == j));
                    m = m.max((self.torsion.at3(k, i, j) - want).abs());
                }
            }
        }
        m
    }

    /// Max-norm of `dπ`, i.e. `∂_i π_j − ∂_j π_i`.
    pub fn dpi_closedness(&self) -> f64 {
        self.dpi.asymmetry()
    }
}

pub fn check_concircular(c: &SSConnection, tol: f64) -> Check {
    Check::new(c.concircular_tensor().max_abs(), c.frame.scale(), tol)
}

/// `μ = ω + ½π(P)`.
pub fn s_concircular_mu(c: &SSConnection) -> f64 {
    c.omega + 0.5 * c.pi_p
}

/// Residual of `∇π − π⊗π + ½π(P)g − μg`.
pub fn s_concircular_check(c: &SSConnection, tol: f64) -> Check {
    let mu = s_concircular_mu(c);
    let t = c
        .nabla_pi
        .sub(&c.pi_pi())
        .add_scaled(0.5 * c.pi_p, &c.frame.g)
        .add_scaled(-mu, &c.frame.g);
    Check::new(t.max_abs(), c.frame.scale(), tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Nabla1P {
    pub tensor: Tensor,
    /// `max |∇¹_i P^k − (ω + π(P)) δ^k_i|`, meaningful when the connection is concircular.
    pub closed_form_residual: f64,
    /// `|ω + g(P, P)|`.
    pub p_connection_gap: f64,
}

pub fn nabla1_p(c: &SSConnection) -> Nabla1P {
    let tensor = c.nabla1_p();
    let expected = Tensor::kronecker(c.dim()).scaled(c.omega + c.pi_p);
    Nabla1P {
        closed_form_residual: tensor.max_abs_diff(&expected),
        p_connection_gap: (c.omega + c.pi_p).abs(),
        tensor,
    }
}

/// Raw residuals of the five identities that hold for a concircular generator.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionIdentities {
    /// `∇¹_P Y = ∇_P Y` on the coordinate basis.
    pub nabla1_along_p: f64,
    /// `π(T(X, Y)) = 0`.
    pub pi_of_torsion: f64,
    /// `(∇_X π)(P) = (∇_P π)(X) = π(∇_P X) = (ω + π(P)) π(X)`, max over the three.
    pub pi_derivatives: f64,
    /// `(L_P π)(X) = 2(ω + π(P)) π(X)`.
    pub lie_pi: f64,
    /// `(L_P g)(X, Y) = 2 (∇_X π)(Y)`.
    pub lie_g: f64,
}

impl ConnectionIdentities {
    pub fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("nabla1_along_p", self.nabla1_along_p),
            ("pi_of_torsion", self.pi_of_torsion),
            ("pi_derivatives", self.pi_derivatives),
            ("lie_pi", self.lie_pi),
            ("lie_g", self.lie_g),
        ]
    }
}

/// `(L_P g)_{ij}` from coordinate partials.
pub fn lie_g(c: &SSConnection) -> Tensor {
    let n = c.dim();
    let f = &c.frame;
    Tensor::from_fn(n, &[Down, Down], |ix| {
        let (i, j) = (ix[0], ix[1]);
        (0..n)
            .map(|m| {
                c.p[m] * f.dg.at3(m, i, j) + f.g.at2(m, j) * c.dp.at2(i, m) + f.g.at2(i, m) * c.dp.at2(j, m)
            })
            .sum()
    })
}

/// `(L_P π)_i` from coordinate partials.
pub fn lie_pi(c: &SSConnection) -> Vec<f64> {
    let n = c.dim();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|m| c.p[m] * c.dpi.at2(m, i) + c.pi[m] * c.dp.at2(i, m))
                .sum()
        })
        .collect()
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn connection_identities(c: &SSConnection) -> ConnectionIdentities {
    let n = c.dim();
    let k = c.omega + c.pi_p;

    let mut along: f64 = 0.0;
    for kk in 0..n {
        for j in 0..n {
            let d: f64 = (0..n)
                .map(|i| c.p[i] * (c.gamma1.at3(kk, i, j) - c.frame.gamma.at3(kk, i, j)))
                .sum();
            along = along.max(d.abs());
        }
    }

    let mut pt: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s: f64 = (0..n).map(|kk| c.pi[kk] * c.torsion.at3(kk, i, j)).sum();
            pt = pt.max(s.abs());
        }
    }

    // π(∇_P X) for P-invariant X equals π_k ∇_X P^k
    let mut pd: f64 = 0.0;
    for x in 0..n {
        let rhs = k * c.pi[x];
        let a: f64 = (0..n).map(|j| c.nabla_pi.at2(x, j) * c.p[j]).sum();
        let b: f64 = (0..n).map(|i| c.p[i] * c.nabla_pi.at2(i, x)).sum();
        let e: f64 = (0..n).map(|kk| c.pi[kk] * c.nabla_p.at2(kk, x)).sum();
        pd = pd.max((a - rhs).abs()).max((b - rhs).abs()).max((e - rhs).abs());
    }

    let lp = lie_pi(c);
    let lie_pi_res = max_abs((0..n).map(|i| lp[i] - 2.0 * k * c.pi[i]));
    let lie_g_res = lie_g(c).max_abs_diff(&c.nabla_pi.scaled(2.0));

    ConnectionIdentities {
        nabla1_along_p: along,
        pi_of_torsion: pt,
        pi_derivatives: pd,
        lie_pi: lie_pi_res,
        lie_g: lie_g_res,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LieNonSym {
    pub tensor: Tensor,
    /// Least-squares factor `φ` in `L¹_P g ≈ 2φ g`.
    pub factor: f64,
    /// `max |L¹_P g − 2φ g|` with the fitted factor.
    pub conformal_residual: f64,
    /// `max |L¹_P g − 2(ω + π(P)) g|`.
    pub closed_form_residual: f64,
}

impl LieNonSym {
    pub fn is_conformal(&self, scale: f64, tol: f64) -> bool {
        self.closed_form_residual / scale <= tol
    }

    pub fn is_killing(&self, scale: f64, tol: f64) -> bool {
        self.is_conformal(scale, tol) && self.tensor.max_abs() / scale <= tol
    }
}

/// `(L¹_P g)(X, Y) = (∇¹_P g)(X, Y) + g(∇¹_X P, Y) + g(X, ∇¹_Y P)`.
pub fn lie_g_nonsym(c: &SSConnection) -> LieNonSym {
    let n = c.dim();
    let g = &c.frame.g;
    let dg1 = covariant_derivative(&c.frame.metric_jet(), &c.gamma1);
    let np = c.nabla1_p();
    let tensor = Tensor::from_fn(n, &[Down, Down], |ix| {
        let (i, j) = (ix[0], ix[1]);
        let mut s: f64 = (0..n).map(|m| c.p[m] * dg1.at3(i, j, m)).sum();
        for k in 0..n {
            s += g.at2(k, j) * np.at2(k, i) + g.at2(i, k) * np.at2(k, j);
        }
        s
    });
    let gg: f64 = g.data().iter().map(|v| v * v).sum();
    let lg: f64 = g.data().iter().zip(tensor.data()).map(|(a, b)| a * b).sum();
    let factor = 0.5 * lg / gg;
    LieNonSym {
        conformal_residual: tensor.max_abs_diff(&g.scaled(2.0 * factor)),
        closed_form_residual: tensor.max_abs_diff(&g.scaled(2.0 * (c.omega + c.pi_p))),
        factor,
        tensor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::geometry::{frame_at, MetricSpec};

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn metric(entries: &[&str]) -> MetricSpec {
        let c = names(&["t", "x", "y", "z"]);
        let d = entries.iter().map(|e| Expr::parse(e, &c).unwrap()).collect();
        MetricSpec::diagonal(c, d).unwrap()
    }

    fn field(entries: &[&str]) -> VectorFieldSpec {
        let c = names(&["t", "x", "y", "z"]);
        VectorFieldSpec::new(entries.iter().map(|e| Expr::parse(e, &c).unwrap()).collect())
    }

    fn de_sitter(t: f64) -> SSConnection {
        let m = metric(&["-1", "exp(2*t)", "exp(2*t)", "exp(2*t)"]);
        build_connection(frame_at(&m, &[t, 0.1, -0.2, 0.3]).unwrap(), &field(&["1", "0", "0", "0"])).unwrap()
    }

    #[test]
    fn zero_field_reduces_to_levi_civita() {
        let m = metric(&["-1", "exp(2*t)", "exp(2*t)", "exp(2*t)"]);
        let c = build_connection(frame_at(&m, &[0.4, 0.0, 0.0, 0.0]).unwrap(), &field(&["0", "0", "0", "0"])).unwrap();
        assert_eq!(c.gamma1, c.frame.gamma);
        assert_eq!(c.torsion.max_abs(), 0.0);
        assert_eq!(c.omega, 0.0);
        assert_eq!(check_concircular(&c, DEFAULT_TOL).residual, 0.0);
        let ids = connection_identities(&c);
        assert!(ids.named().iter().all(|(_, r)| *r == 0.0));
        let l = lie_g_nonsym(&c);
        assert_eq!(l.tensor.max_abs(), 0.0);
    }

    #[test]
    fn de_sitter_generator_is_a_p_connection() {
        let t = 0.3;
        let c = de_sitter(t);
        assert!((c.omega - 1.0).abs() < 1e-14);
        assert!((c.pi_p + 1.0).abs() < 1e-14);
        // Γ¹^x_{xt} = 0, Γ¹^t_{xx} = 0
        assert!(c.gamma1.at3(1, 1, 0).abs() < 1e-14);
        assert!(c.gamma1.at3(0, 1, 1).abs() < 1e-13);
        assert!(check_concircular(&c, 1e-10).holds);
        assert!(s_concircular_check(&c, 1e-10).holds);
        assert!((s_concircular_mu(&c) - 0.5).abs() < 1e-14);
        let np = nabla1_p(&c);
        assert!(np.tensor.max_abs() < 1e-13);
        assert!(np.p_connection_gap < 1e-14);
        assert!(c.metricity_residual() < 1e-12);
        let ids = connection_identities(&c);
        for (name, r) in ids.named() {
            assert!(r < 1e-9, "{name}: {r}");
        }
        let l = lie_g_nonsym(&c);
        assert!(l.is_killing(c.frame.scale(), 1e-10));
    }

    #[test]
    fn minkowski_spacelike_generator() {
        let m = metric(&["-1", "1", "1", "1"]);
        let c = build_connection(frame_at(&m, &[0.0; 4]).unwrap(), &field(&["0", "1", "0", "0"])).unwrap();
        // T^y_{yx} = π_x = 1
        assert_eq!(c.torsion.at3(2, 2, 1), 1.0);
        assert_eq!(c.torsion_residual(), 0.0);
        assert!((c.omega + 0.25).abs() < 1e-15);
        let chk = check_concircular(&c, DEFAULT_TOL);
        assert!(!chk.holds);
        assert_eq!(chk.holds, s_concircular_check(&c, DEFAULT_TOL).holds);
        // L¹_P g = 2g − 2π⊗π
        let l = lie_g_nonsym(&c);
        let want = c.frame.g.scaled(2.0).add_scaled(-2.0, &c.pi_pi());
        assert!(l.tensor.max_abs_diff(&want) < 1e-15);
        assert!(!l.is_conformal(c.frame.scale(), DEFAULT_TOL));
    }

    #[test]
    fn flrw_linear_fails_concircularity() {
        let m = metric(&["-1", "t^2", "t^2", "t^2"]);
        for t in [0.5, 2.0] {
            let c = build_connection(frame_at(&m, &[t, 0.0, 0.0, 0.0]).unwrap(), &field(&["1", "0", "0", "0"])).unwrap();
            assert!(!check_concircular(&c, DEFAULT_TOL).holds);
            assert!(!s_concircular_check(&c, DEFAULT_TOL).holds);
            assert!(c.metricity_residual() < 1e-12);
        }
    }

    #[test]
    fn torsion_matches_antisymmetrised_gamma1() {
        let c = names(&["t", "x", "y"]);
        let e = |s: &str| Expr::parse(s, &c).unwrap();
        let m = MetricSpec::diagonal(c.clone(), vec![e("-1-x^2"), e("exp(t)"), e("2+sin(y)")]).unwrap();
        let p = VectorFieldSpec::new(vec![e("x*y"), e("cos(t)"), e("t+1")]);
        let conn = build_connection(frame_at(&m, &[0.3, -0.5, 0.8]).unwrap(), &p).unwrap();
        assert!(conn.torsion_residual() < 1e-14);
        assert!(conn.metricity_residual() < 1e-12);
        assert!(connection_identities(&conn).pi_of_torsion < 1e-14);
        assert!(connection_identities(&conn).nabla1_along_p < 1e-13);
    }
}
