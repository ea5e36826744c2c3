//! Finite-difference oracle for the metric pipeline.
//!
//! Everything here uses plain `f64` evaluation of the component expressions
//! and its own inverse, Christoffel and curvature loops, so it shares no
//! arithmetic with the jet-based path beyond the parsed expressions.

use crate::expr::EvalError;
use crate::geometry::{GeometryError, MetricSpec, PointFrame, VectorFieldSpec};

/// Central-difference step for first derivatives.
pub const H1: f64 = 1e-5;
/// Step for second derivatives.
pub const H2: f64 = 1e-4;

type Mat = Vec<Vec<f64>>;

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(i, d) in moves {
        y[i] += d;
    }
    y
}

fn invert(a: &Mat) -> Option<Mat> {
    let n = a.len();
    let mut m: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| f64::from(u8::from(i == j))));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        let d = m[col][col];
        for v in m[col].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Christoffel symbols and Riemann tensor from finite differences.
#[derive(Clone, Debug, PartialEq)]
pub struct FdCurvature {
    /// `gamma[k][i][j]`.
    pub gamma: Vec<Vec<Vec<f64>>>,
    /// `riemann[l][k][i][j]`, same convention as the main pipeline.
    pub riemann: Vec<Vec<Vec<Vec<f64>>>>,
}

pub fn fd_curvature(m: &MetricSpec, x: &[f64]) -> Result<FdCurvature, GeometryError> {
    fd_curvature_with(m, x, H1, H2)
}

/// [`fd_curvature`] with explicit first- and second-derivative steps.
pub fn fd_curvature_with(m: &MetricSpec, x: &[f64], h1: f64, h2: f64) -> Result<FdCurvature, GeometryError> {
    let n = m.dim();
    let g = m.values_at(x)?;
    let ginv = invert(&g).ok_or_else(|| GeometryError::SingularMetric {
        point: x.to_vec(),
        det: 0.0,
    })?;

    // dg[a][i][j] = ∂_a g_ij
    let mut dg = vec![vec![vec![0.0; n]; n]; n];
    for (a, slab) in dg.iter_mut().enumerate() {
        let gp = m.values_at(&shifted(x, &[(a, h1)]))?;
        let gm = m.values_at(&shifted(x, &[(a, -h1)]))?;
        for i in 0..n {
            for j in 0..n {
                slab[i][j] = (gp[i][j] - gm[i][j]) / (2.0 * h1);
            }
        }
    }

    // d2g[a][b][i][j] = ∂_a ∂_b g_ij
    let mut d2g = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for a in 0..n {
        for b in a..n {
            let h = h2;
            let val: Mat = if a == b {
                let gp = m.values_at(&shifted(x, &[(a, h)]))?;
                let gm = m.values_at(&shifted(x, &[(a, -h)]))?;
                (0..n)
                    .map(|i| (0..n).map(|j| (gp[i][j] - 2.0 * g[i][j] + gm[i][j]) / (h * h)).collect())
                    .collect()
            } else {
                let pp = m.values_at(&shifted(x, &[(a, h), (b, h)]))?;
                let pm = m.values_at(&shifted(x, &[(a, h), (b, -h)]))?;
                let mp = m.values_at(&shifted(x, &[(a, -h), (b, h)]))?;
                let mm = m.values_at(&shifted(x, &[(a, -h), (b, -h)]))?;
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| (pp[i][j] - pm[i][j] - mp[i][j] + mm[i][j]) / (4.0 * h * h))
                            .collect()
                    })
                    .collect()
            };
            d2g[a][b] = val.clone();
            d2g[b][a] = val;
        }
    }

    // first kind Γ_{l,ij} and its derivative
    let first = |l: usize, i: usize, j: usize| 0.5 * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
    let dfirst =
        |a: usize, l: usize, i: usize, j: usize| 0.5 * (d2g[a][i][j][l] + d2g[a][j][i][l] - d2g[a][l][i][j]);

    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for (k, gk) in gamma.iter_mut().enumerate() {
        for i in 0..n {
            for j in 0..n {
                gk[i][j] = (0..n).map(|l| ginv[k][l] * first(l, i, j)).sum();
            }
        }
    }

    // dgamma[a][k][i][j] = ∂_a Γ^k_{ij}
    let mut dgamma = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for a in 0..n {
        for k in 0..n {
            for l in 0..n {
                let mut dinv = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        dinv -= ginv[k][p] * dg[a][p][q] * ginv[q][l];
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        dgamma[a][k][i][j] += dinv * first(l, i, j) + ginv[k][l] * dfirst(a, l, i, j);
                    }
                }
            }
        }
    }

    let mut riemann = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut r = dgamma[i][l][j][k] - dgamma[j][l][i][k];
                    for p in 0..n {
                        r += gamma[l][i][p] * gamma[p][j][k] - gamma[l][j][p] * gamma[p][i][k];
                    }
                    riemann[l][k][i][j] = r;
                }
            }
        }
    }
    Ok(FdCurvature { gamma, riemann })
}

/// Max absolute differences `(Christoffel, Riemann)` between a frame and the oracle.
pub fn compare_frame(frame: &PointFrame, riemann: &crate::tensor::Tensor, fd: &FdCurvature) -> (f64, f64) {
    let n = frame.dim();
    let mut dg: f64 = 0.0;
    let mut dr: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                dg = dg.max((frame.gamma.at3(a, b, c) - fd.gamma[a][b][c]).abs());
                for d in 0..n {
                    dr = dr.max((riemann.at4(a, b, c, d) - fd.riemann[a][b][c][d]).abs());
                }
            }
        }
    }
    (dg, dr)
}

/// `(∇_i π)_j` and `div P` from finite differences of `π = g P` and `P`.
pub fn fd_nabla_pi(m: &MetricSpec, p: &VectorFieldSpec, x: &[f64]) -> Result<(Mat, f64), GeometryError> {
    let n = m.dim();
    let fd = fd_curvature(m, x)?;
    let eval_p = |y: &[f64]| -> Result<Vec<f64>, EvalError> {
        p.components().iter().map(|e| e.eval(y)).collect()
    };
    let pi_at = |y: &[f64]| -> Result<Vec<f64>, GeometryError> {
        let g = m.values_at(y)?;
        let pv = eval_p(y)?;
        Ok((0..n).map(|i| (0..n).map(|j| g[i][j] * pv[j]).sum()).collect())
    };
    let pi = pi_at(x)?;
    let pv = eval_p(x)?;
    let mut nabla = vec![vec![0.0; n]; n];
    let mut div = 0.0;
    for i in 0..n {
        let ppl = pi_at(&shifted(x, &[(i, H1)]))?;
        let pmi = pi_at(&shifted(x, &[(i, -H1)]))?;
        let vp = eval_p(&shifted(x, &[(i, H1)]))?;
        let vm = eval_p(&shifted(x, &[(i, -H1)]))?;
        div += (vp[i] - vm[i]) / (2.0 * H1);
        for j in 0..n {
            let d = (ppl[j] - pmi[j]) / (2.0 * H1);
            nabla[i][j] = d - (0..n).map(|k| fd.gamma[k][i][j] * pi[k]).sum::<f64>();
        }
    }
    for i in 0..n {
        div += (0..n).map(|k| fd.gamma[i][i][k] * pv[k]).sum::<f64>();
    }
    Ok((nabla, div))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::build_connection;
    use crate::expr::Expr;
    use crate::geometry::{frame_at, lc_riemann};

    #[test]
    fn inverse_of_small_matrix() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let b = invert(&a).unwrap();
        assert!((b[0][0] - 0.6).abs() < 1e-15 && (b[0][1] + 0.2).abs() < 1e-15);
        assert!(invert(&vec![vec![0.0, 0.0], vec![0.0, 1.0]]).is_none());
    }

    #[test]
    fn oracle_agrees_with_jets() {
        let c: Vec<String> = ["t", "x", "y"].iter().map(|s| s.to_string()).collect();
        let e = |s: &str| Expr::parse(s, &c).unwrap();
        let m = MetricSpec::new(
            c.clone(),
            vec![
                vec![e("-1-0.2*x^2"), e("0"), e("0")],
                vec![e("0.1*sin(t)"), e("exp(t)"), e("0")],
                vec![e("0"), e("0.3*x*y"), e("2+cos(y)")],
            ],
        )
        .unwrap();
        let x = [0.3, -0.4, 0.6];
        let f = frame_at(&m, &x).unwrap();
        let fd = fd_curvature(&m, &x).unwrap();
        let (dg, dr) = compare_frame(&f, &lc_riemann(&f), &fd);
        assert!(dg < 1e-8, "{dg}");
        assert!(dr < 1e-6, "{dr}");

        let p = VectorFieldSpec::new(vec![e("1+x"), e("t*y"), e("0.5")]);
        let conn = build_connection(f, &p).unwrap();
        let (nabla, div) = fd_nabla_pi(&m, &p, &x).unwrap();
        assert!((div - conn.div_p).abs() < 1e-8);
        for i in 0..3 {
            for j in 0..3 {
                assert!((nabla[i][j] - conn.nabla_pi.at2(i, j)).abs() < 1e-8);
            }
        }
    }
}
