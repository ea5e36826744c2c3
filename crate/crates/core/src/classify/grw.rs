//! Generalized Robertson-Walker detection through a unit timelike generator
//! with `∇_X P = X + π(X) P`, and the identities that follow.

use crate::connection::{lie_pi, nabla1_p, SSConnection};
use crate::curvature::{CurvatureBundle, Family};
use crate::relativity::div_pi_pi;
use crate::tensor::Tensor;

#[derive(Clone, Debug, PartialEq)]
pub struct GrwDetection {
    pub lorentzian: bool,
    /// `|g(P, P) + 1|` divided by the point scale.
    pub unit_residual: f64,
    /// `max |∇_i P^k − δ^k_i − π_i P^k|` divided by the point scale.
    pub torse_residual: f64,
    /// `|ω − 1|`.
    pub omega_residual: f64,
    /// `max |∇¹P|`.
    pub nabla1_p_residual: f64,
    pub pass: bool,
}

pub fn grw_detect(c: &SSConnection, tol: f64) -> GrwDetection {
    let n = c.dim();
    let scale = c.frame.scale();
    let mut torse: f64 = 0.0;
    for k in 0..n {
        for i in 0..n {
            let want = f64::from(u8::from(k == i)) + c.pi[i] * c.p[k];
            torse = torse.max((c.nabla_p.at2(k, i) - want).abs());
        }
    }
    let lorentzian = c.frame.signature.is_lorentzian();
    let unit_residual = (c.pi_p + 1.0).abs() / scale;
    let torse_residual = torse / scale;
    GrwDetection {
        lorentzian,
        unit_residual,
        torse_residual,
        omega_residual: (c.omega - 1.0).abs(),
        nabla1_p_residual: nabla1_p(c).tensor.max_abs(),
        pass: n >= 3 && lorentzian && unit_residual <= tol && torse_residual <= tol,
    }
}

fn contract_p(c: &SSConnection, t: &Tensor) -> Vec<f64> {
    t.contract_first(&c.p)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Named raw residuals of the GRW identities at one point.
pub fn grw_identity_suite(c: &SSConnection, b: &CurvatureBundle) -> Vec<(&'static str, f64)> {
    let n = c.dim();
    let m = n as f64 - 1.0;
    let g = &c.frame.g;
    let pp = c.pi_pi();
    let target: Vec<f64> = c.pi.iter().map(|v| m * v).collect();
    let ric = |f: Family| &b.get(f).ricci;
    let ric_g = ric(Family::G);
    let scaled = |f: Family, s: f64| -> Vec<f64> {
        contract_p(c, ric(f)).iter().map(|v| s * v).collect()
    };

    let nabla_p_pi: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| c.p[i] * c.nabla_pi.at2(i, j)).sum())
        .collect();
    let mut t_px: f64 = 0.0;
    for k in 0..n {
        for i in 0..n {
            let t: f64 = (0..n).map(|a| c.p[a] * c.torsion.at3(k, a, i)).sum();
            t_px = t_px.max((t - c.nabla_p.at2(k, i)).abs());
        }
    }
    let beta = [Family::K1, Family::K2, Family::K3]
        .iter()
        .map(|&f| ric(f).max_abs_diff(&ric_g.add_scaled(-m, g)))
        .fold(0.0, f64::max);

    vec![
        ("ric_g_p", max_diff(&contract_p(c, ric_g), &target)),
        ("ric1_p", contract_p(c, ric(Family::K1)).iter().fold(0.0, |a, v| a.max(v.abs()))),
        ("ric0_p", max_diff(&scaled(Family::K0, 4.0), &target)),
        ("ric4_p", max_diff(&scaled(Family::K4, 1.0), &target)),
        ("ric5_p", max_diff(&scaled(Family::K5, 2.0), &target)),
        ("nabla1_torsion", b.nabla1_torsion.max_abs()),
        (
            "ricci_0",
            ric(Family::K0).max_abs_diff(&ric_g.add_scaled(-m, g).add_scaled(-m / 4.0, &pp)),
        ),
        ("ricci_beta", beta),
        (
            "ricci_4",
            ric(Family::K4).max_abs_diff(&ric_g.add_scaled(-m, g).add_scaled(-m, &pp)),
        ),
        (
            "ricci_5",
            ric(Family::K5).max_abs_diff(&ric_g.add_scaled(-m, g).add_scaled(-m / 2.0, &pp)),
        ),
        ("nabla_p_pi", nabla_p_pi.iter().fold(0.0, |a, v| a.max(v.abs()))),
        ("lie_p_pi", lie_pi(c).iter().fold(0.0, |a, v| a.max(v.abs()))),
        ("torsion_p_x", t_px),
        ("div_pi_pi", max_diff(&div_pi_pi(c), &target)),
    ]
}

/// `min over θ ∈ {0,4,5}` of `|Ric^θ(P,P)| − (n−1)/4`. Non-negative when none
/// of the three tensors can vanish.
pub fn nonvanishing_margin(c: &SSConnection, b: &CurvatureBundle) -> f64 {
    let m = c.dim() as f64 - 1.0;
    [Family::K0, Family::K4, Family::K5]
        .iter()
        .map(|&f| {
            let rp = contract_p(c, &b.get(f).ricci);
            let rpp: f64 = rp.iter().zip(&c.p).map(|(a, b)| a * b).sum();
            rpp.abs() - m / 4.0
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::build_connection;
    use crate::curvature::curvature_family;
    use crate::expr::Expr;
    use crate::geometry::{frame_at, MetricSpec, VectorFieldSpec};

    fn conn(g: &[&str], p: &[&str], at: &[f64]) -> SSConnection {
        let c: Vec<String> = ["t", "x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let e = |s: &&str| Expr::parse(s, &c).unwrap();
        let m = MetricSpec::diagonal(c.clone(), g.iter().map(e).collect()).unwrap();
        build_connection(frame_at(&m, at).unwrap(), &VectorFieldSpec::new(p.iter().map(e).collect())).unwrap()
    }

    #[test]
    fn de_sitter_passes_with_all_identities() {
        let c = conn(&["-1", "exp(2*t)", "exp(2*t)", "exp(2*t)"], &["1", "0", "0", "0"], &[0.4, 0.3, 0.2, 0.1]);
        let d = grw_detect(&c, 1e-8);
        assert!(d.pass);
        assert!(d.omega_residual < 1e-12 && d.nabla1_p_residual < 1e-12);
        let b = curvature_family(&c);
        for (name, r) in grw_identity_suite(&c, &b) {
            assert!(r < 1e-10, "{name}: {r}");
        }
        assert!(nonvanishing_margin(&c, &b) >= -1e-12);
    }

    #[test]
    fn spherical_base_is_grw_but_not_einstein() {
        let s = "exp(2*t)/(1+(x^2+y^2+z^2)/4)^2";
        let c = conn(&["-1", s, s, s], &["1", "0", "0", "0"], &[0.3, 0.5, -0.2, 0.7]);
        assert!(grw_detect(&c, 1e-8).pass);
        let b = curvature_family(&c);
        for (name, r) in grw_identity_suite(&c, &b) {
            assert!(r < 1e-9, "{name}: {r}");
        }
        assert!(b.get(Family::G).einstein.max_abs() > 0.1);
    }

    #[test]
    fn spacelike_generator_fails() {
        let c = conn(&["-1", "1", "1", "1"], &["0", "1", "0", "0"], &[0.0; 4]);
        assert!(!grw_detect(&c, 1e-8).pass);
    }
}
