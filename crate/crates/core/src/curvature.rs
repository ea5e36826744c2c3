//! The six curvature tensors of the semi-symmetric connection and their
//! Ricci, scalar and traceless (Einstein-type) descendants.

use std::fmt;

use crate::connection::SSConnection;
use crate::geometry::{lc_riemann, ricci_from_riemann, riemann_from_coefficients};
use crate::tensor::{covariant_derivative, Tensor, Variance};

use Variance::{Down, Up};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    G,
    K0,
    K1,
    K2,
    K3,
    K4,
    K5,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::G,
        Family::K0,
        Family::K1,
        Family::K2,
        Family::K3,
        Family::K4,
        Family::K5,
    ];

    pub const KINDS: [Family; 6] = [
        Family::K0,
        Family::K1,
        Family::K2,
        Family::K3,
        Family::K4,
        Family::K5,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_kind(k: u8) -> Option<Family> {
        Family::KINDS.get(usize::from(k)).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            Family::G => "g",
            Family::K0 => "0",
            Family::K1 => "1",
            Family::K2 => "2",
            Family::K3 => "3",
            Family::K4 => "4",
            Family::K5 => "5",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyData {
    pub riemann: Tensor,
    pub ricci: Tensor,
    pub scalar: f64,
    pub einstein: Tensor,
}

impl FamilyData {
    fn from_riemann(riemann: Tensor, g: &Tensor, ginv: &Tensor) -> FamilyData {
        let ricci = ricci_from_riemann(&riemann);
        let scalar = ricci.trace_with(ginv);
        let einstein = traceless(&ricci, scalar, g);
        FamilyData {
            riemann,
            ricci,
            scalar,
            einstein,
        }
    }
}

/// `Ric − (r/n) g`.
pub fn traceless(ricci: &Tensor, scalar: f64, g: &Tensor) -> Tensor {
    ricci.add_scaled(-scalar / g.dim() as f64, g)
}

/// Curvature data of every family at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureBundle {
    pub families: Vec<FamilyData>,
    /// `nabla1_torsion[k][a][b][c] = (∇¹_c T)^k_{ab}`.
    pub nabla1_torsion: Tensor,
}

impl CurvatureBundle {
    pub fn get(&self, f: Family) -> &FamilyData {
        &self.families[f.index()]
    }
}

/// `tt[l][k][i][j]` holds the components of `T(T(e_i, e_j), e_k)`.
fn double_torsion(t: &Tensor) -> Tensor {
    let n = t.dim();
    Tensor::from_fn(n, &[Up, Down, Down, Down], |ix| {
        let (l, k, i, j) = (ix[0], ix[1], ix[2], ix[3]);
        (0..n).map(|m| t.at3(m, i, j) * t.at3(l, m, k)).sum()
    })
}

struct Pieces {
    r1: Tensor,
    dt: Tensor,
    tt: Tensor,
}

impl Pieces {
    fn new(c: &SSConnection) -> Pieces {
        Pieces {
            r1: riemann_from_coefficients(&c.gamma1, &c.dgamma1),
            dt: covariant_derivative(&c.torsion_jet(), &c.gamma1),
            tt: double_torsion(&c.torsion),
        }
    }

    /// `R^θ(e_i, e_j) e_k` component `l`, or `None` for the Levi-Civita family.
    /// `quarter` toggles the standalone `−¼ T(T(X,Y),Z)` term of `R⁰`.
    fn component(&self, fam: Family, quarter: bool, l: usize, k: usize, i: usize, j: usize) -> f64 {
        let r1 = self.r1.at4(l, k, i, j);
        // (∇¹_X T)(Y,Z) and (∇¹_Y T)(X,Z) with X=e_i, Y=e_j, Z=e_k
        let dx = self.dt.at4(l, j, k, i);
        let dy = self.dt.at4(l, i, k, j);
        let tt = |x: usize, y: usize, z: usize| self.tt.at4(l, z, x, y);
        let txy = tt(i, j, k);
        let cyc = txy + tt(j, k, i) + tt(k, i, j);
        match fam {
            Family::G => unreachable!("Levi-Civita family is assembled separately"),
            Family::K1 => r1,
            Family::K0 => {
                let mut v = r1 - 0.5 * dx + 0.5 * dy - 0.25 * cyc;
                if quarter {
                    v -= 0.25 * txy;
                }
                v
            }
            Family::K2 => r1 - dx + dy - cyc,
            Family::K3 => r1 + dy,
            Family::K4 => r1 + dy - txy,
            Family::K5 => r1 - 0.5 * dx + 0.5 * dy - 0.5 * cyc + 0.5 * tt(k, i, j),
        }
    }

    fn riemann(&self, fam: Family, quarter: bool) -> Tensor {
        let n = self.r1.dim();
        Tensor::from_fn(n, &[Up, Down, Down, Down], |ix| {
            self.component(fam, quarter, ix[0], ix[1], ix[2], ix[3])
        })
    }
}

pub fn curvature_family(c: &SSConnection) -> CurvatureBundle {
    let f = &c.frame;
    let pieces = Pieces::new(c);
    let mut families = Vec::with_capacity(7);
    families.push(FamilyData::from_riemann(lc_riemann(f), &f.g, &f.ginv));
    for fam in Family::KINDS {
        families.push(FamilyData::from_riemann(pieces.riemann(fam, true), &f.g, &f.ginv));
    }
    CurvatureBundle {
        families,
        nabla1_torsion: pieces.dt,
    }
}

/// Scalars entering the closed forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormInputs {
    pub n: usize,
    pub omega: f64,
    pub pi_p: f64,
}

impl ClosedFormInputs {
    pub fn of(c: &SSConnection) -> ClosedFormInputs {
        ClosedFormInputs {
            n: c.dim(),
            omega: c.omega,
            pi_p: c.pi_p,
        }
    }
}

/// Coefficients `(α, β)` with `Ric^θ = Ric^g − α g − β π⊗π` for a concircular generator.
pub fn ricci_shift(fam: Family, x: ClosedFormInputs) -> (f64, f64) {
    let m = x.n as f64 - 1.0;
    let (w, pp) = (x.omega, x.pi_p);
    match fam {
        Family::G => (0.0, 0.0),
        Family::K0 => (0.5 * m * (3.0 * w + pp), 0.25 * m),
        Family::K1 => (m * (2.0 * w + pp), 0.0),
        Family::K2 | Family::K3 => (m * w, 0.0),
        Family::K4 => (m * w, m),
        Family::K5 => (0.5 * m * (3.0 * w + pp), 0.5 * m),
    }
}

pub fn closed_form_ricci(fam: Family, ric_g: &Tensor, g: &Tensor, pi: &[f64], x: ClosedFormInputs) -> Tensor {
    let (a, b) = ricci_shift(fam, x);
    ric_g.add_scaled(-a, g).add_scaled(-b, &Tensor::outer(pi, pi))
}

pub fn closed_form_scalar(fam: Family, r_g: f64, x: ClosedFormInputs) -> f64 {
    let n = x.n as f64;
    let m = n - 1.0;
    let (w, pp) = (x.omega, x.pi_p);
    match fam {
        Family::G => r_g,
        Family::K0 => r_g - 1.5 * n * m * w - m * (2.0 * n + 1.0) * pp / 4.0,
        Family::K1 => r_g - 2.0 * n * m * (w + 0.5 * pp),
        Family::K2 | Family::K3 => r_g - n * m * w,
        Family::K4 => r_g - n * m * w - m * pp,
        Family::K5 => r_g - 1.5 * n * m * w - (n * n - 1.0) * pp / 2.0,
    }
}

/// Coefficients `(α, β)` with `E^θ = E^g + α π(P) g − β π⊗π`.
pub fn einstein_shift(fam: Family, n: usize) -> (f64, f64) {
    let n = n as f64;
    let m = n - 1.0;
    match fam {
        Family::G | Family::K1 | Family::K2 | Family::K3 => (0.0, 0.0),
        Family::K0 => (m / (4.0 * n), 0.25 * m),
        Family::K4 => (m / n, m),
        Family::K5 => (m / (2.0 * n), 0.5 * m),
    }
}

/// Right-hand side of the Einstein-type relation for family `fam`.
pub fn closed_form_einstein(fam: Family, e_g: &Tensor, g: &Tensor, pi: &[f64], pi_p: f64) -> Tensor {
    let (a, b) = einstein_shift(fam, g.dim());
    e_g.add_scaled(a * pi_p, g).add_scaled(-b, &Tensor::outer(pi, pi))
}

/// Relative residuals of the direct assembly against the closed forms.
#[derive(Clone, Debug, PartialEq)]
pub struct AnchorResiduals {
    /// `(family, ricci residual, scalar residual)` for `θ = 0..5`.
    pub per_family: Vec<(Family, f64, f64)>,
}

impl AnchorResiduals {
    pub fn max(&self) -> f64 {
        self.per_family
            .iter()
            .fold(0.0, |m, (_, a, b)| m.max(*a).max(*b))
    }
}

fn relative(diff: f64, magnitude: f64) -> f64 {
    diff / (1.0 + magnitude)
}

pub fn anchor_residuals(c: &SSConnection, b: &CurvatureBundle) -> AnchorResiduals {
    let f = &c.frame;
    let x = ClosedFormInputs::of(c);
    let lc = b.get(Family::G);
    let per_family = Family::KINDS
        .iter()
        .map(|&fam| {
            let d = b.get(fam);
            let want = closed_form_ricci(fam, &lc.ricci, &f.g, &c.pi, x);
            let rr = relative(d.ricci.max_abs_diff(&want), want.max_abs());
            let ws = closed_form_scalar(fam, lc.scalar, x);
            let rs = relative((d.scalar - ws).abs(), ws.abs());
            (fam, rr, rs)
        })
        .collect();
    AnchorResiduals { per_family }
}

/// Relative residuals of `E^θ` against their closed forms, `θ = 0..5`.
pub fn einstein_relations(c: &SSConnection, b: &CurvatureBundle) -> Vec<(Family, f64)> {
    let f = &c.frame;
    let eg = &b.get(Family::G).einstein;
    Family::KINDS
        .iter()
        .map(|&fam| {
            let want = closed_form_einstein(fam, eg, &f.g, &c.pi, c.pi_p);
            (fam, relative(b.get(fam).einstein.max_abs_diff(&want), want.max_abs()))
        })
        .collect()
}

/// Max-norm of `trace_g(E^θ)` over all families.
pub fn einstein_trace_residual(c: &SSConnection, b: &CurvatureBundle) -> f64 {
    b.families
        .iter()
        .fold(0.0, |m, d| m.max(d.einstein.trace_with(&c.frame.ginv).abs()))
}

/// Anchor residuals of `Ric⁰` with and without the standalone quarter term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct R0Variants {
    pub with_quarter: f64,
    pub without_quarter: f64,
}

impl R0Variants {
    pub fn canonical_has_quarter(&self) -> bool {
        self.with_quarter <= self.without_quarter
    }
}

pub fn r0_variant_check(c: &SSConnection) -> R0Variants {
    let f = &c.frame;
    let pieces = Pieces::new(c);
    let ric_g = ricci_from_riemann(&lc_riemann(f));
    let want = closed_form_ricci(Family::K0, &ric_g, &f.g, &c.pi, ClosedFormInputs::of(c));
    let res = |quarter| {
        let ric = ricci_from_riemann(&pieces.riemann(Family::K0, quarter));
        relative(ric.max_abs_diff(&want), want.max_abs())
    };
    R0Variants {
        with_quarter: res(true),
        without_quarter: res(false),
    }
}

/// Max-norm of `𝔖 T(T(X,Y),Z)`; vanishes for semi-symmetric torsion.
pub fn cyclic_double_torsion(c: &SSConnection) -> f64 {
    let tt = double_torsion(&c.torsion);
    let n = c.dim();
    let mut m: f64 = 0.0;
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let s = tt.at4(l, k, i, j) + tt.at4(l, i, j, k) + tt.at4(l, j, k, i);
                    m = m.max(s.abs());
                }
            }
        }
    }
    m
}

/// Largest antisymmetric part among the Ricci tensors.
pub fn ricci_asymmetry(b: &CurvatureBundle) -> f64 {
    b.families.iter().fold(0.0, |m, d| m.max(d.ricci.asymmetry()))
}

/// Families whose curvature tensor is skew in `X, Y` for every generator.
/// `R³`, `R⁴` carry a lone `(∇¹_Y T)(X,Z)` and `R⁵` a lone `T(T(Z,X),Y)`.
pub const SKEW_FAMILIES: [Family; 4] = [Family::G, Family::K0, Family::K1, Family::K2];

/// Largest direction-slot symmetric part of `R^θ`.
pub fn riemann_direction_symmetry(b: &CurvatureBundle, fam: Family) -> f64 {
    let mut m: f64 = 0.0;
    {
        let r = &b.get(fam).riemann;
        let n = r.dim();
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        m = m.max((r.at4(l, k, i, j) + r.at4(l, k, j, i)).abs());
                    }
                }
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::build_connection;
    use crate::expr::Expr;
    use crate::geometry::{frame_at, MetricSpec, VectorFieldSpec};

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn conn(g: &[&str], p: &[&str], at: &[f64]) -> SSConnection {
        let c = names(&["t", "x", "y", "z"]);
        let e = |s: &&str| Expr::parse(s, &c).unwrap();
        let m = MetricSpec::diagonal(c.clone(), g.iter().map(e).collect()).unwrap();
        let v = VectorFieldSpec::new(p.iter().map(e).collect());
        build_connection(frame_at(&m, at).unwrap(), &v).unwrap()
    }

    const DS: [&str; 4] = ["-1", "exp(2*t)", "exp(2*t)", "exp(2*t)"];

    #[test]
    fn zero_field_collapses_every_family() {
        let c = conn(&DS, &["0", "0", "0", "0"], &[0.2, 0.0, 0.0, 0.0]);
        let b = curvature_family(&c);
        let lc = b.get(Family::G);
        for fam in Family::KINDS {
            assert!(b.get(fam).riemann.max_abs_diff(&lc.riemann) < 1e-15);
        }
    }

    #[test]
    fn de_sitter_values() {
        let c = conn(&DS, &["1", "0", "0", "0"], &[0.35, 0.2, -0.1, 0.4]);
        let b = curvature_family(&c);
        let pp = c.pi_pi();
        assert!(b.get(Family::K1).ricci.max_abs() < 1e-12);
        assert!(b.get(Family::K0).ricci.max_abs_diff(&pp.scaled(-0.75)) < 1e-12);
        assert!((b.get(Family::K0).scalar - 0.75).abs() < 1e-12);
        assert!((b.get(Family::K4).scalar - 3.0).abs() < 1e-12);
        assert!(anchor_residuals(&c, &b).max() < 1e-12);
        assert!(einstein_relations(&c, &b).iter().all(|(_, r)| *r < 1e-12));
        assert!(einstein_trace_residual(&c, &b) < 1e-12);
        assert!(b.nabla1_torsion.max_abs() < 1e-12);
    }

    #[test]
    fn quarter_term_is_required() {
        let c = conn(&DS, &["1", "0", "0", "0"], &[0.1, 0.0, 0.0, 0.0]);
        let v = r0_variant_check(&c);
        assert!(v.canonical_has_quarter());
        assert!(v.with_quarter < 1e-12);
        assert!(v.without_quarter > 0.1);
    }

    #[test]
    fn cyclic_double_torsion_vanishes_for_any_generator() {
        let c = conn(&["-1-x^2", "exp(t)", "1", "2"], &["x", "t*y", "1", "z"], &[0.3, 0.5, -0.4, 0.9]);
        assert!(cyclic_double_torsion(&c) < 1e-13);
        let b = curvature_family(&c);
        for fam in SKEW_FAMILIES {
            assert!(riemann_direction_symmetry(&b, fam) < 1e-10, "{fam}");
        }
        assert!(riemann_direction_symmetry(&b, Family::K3) > 1.0);
    }

    #[test]
    fn scalar_closed_forms_are_traces_of_ricci_closed_forms() {
        let c = conn(&DS, &["1", "0.3", "0", "0"], &[0.2, 0.0, 0.0, 0.0]);
        let b = curvature_family(&c);
        let x = ClosedFormInputs::of(&c);
        for fam in Family::ALL {
            let r = closed_form_ricci(fam, &b.get(Family::G).ricci, &c.frame.g, &c.pi, x);
            let want = closed_form_scalar(fam, b.get(Family::G).scalar, x);
            assert!((r.trace_with(&c.frame.ginv) - want).abs() < 1e-11, "{fam}");
        }
    }
}
