//! Perfect-fluid energy-momentum tensor, field-equation residual and the
//! divergence checks behind the phantom-barrier verdict.
//!
//! The fluid tensor is `τ = ρ g + (σ + p) π⊗π`. The coefficient `ρ` is an
//! independent parameter (default 0); [`FluidParams::rho_from_pressure`]
//! sets `ρ := p`.

use thiserror::Error;

use crate::connection::SSConnection;
use crate::expr::{EvalError, Expr};
use crate::geometry::PointFrame;
use crate::tensor::{covariant_derivative, Tensor, TensorJet, Variance};

use Variance::Down;

/// `|σ + p|` at or below this value is the phantom barrier.
pub const BARRIER_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FluidError {
    #[error("gravitational constant must be positive, got {0}")]
    NonPositiveK(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FluidParams {
    pub sigma: Expr,
    pub p: Expr,
    pub rho: Expr,
    pub lambda: f64,
    pub k: f64,
}

impl FluidParams {
    /// `ρ = 0`, `Λ = 0`, `k = 1`.
    pub fn new(sigma: Expr, p: Expr) -> FluidParams {
        let rho = Expr::constant(0.0, sigma.coords());
        FluidParams {
            sigma,
            p,
            rho,
            lambda: 0.0,
            k: 1.0,
        }
    }

    pub fn constant(coords: &[String], sigma: f64, p: f64) -> FluidParams {
        FluidParams::new(Expr::constant(sigma, coords), Expr::constant(p, coords))
    }

    pub fn with_lambda(mut self, lambda: f64) -> FluidParams {
        self.lambda = lambda;
        self
    }

    pub fn with_k(mut self, k: f64) -> Result<FluidParams, FluidError> {
        if k.is_nan() || k <= 0.0 {
            return Err(FluidError::NonPositiveK(k));
        }
        self.k = k;
        Ok(self)
    }

    pub fn with_rho(mut self, rho: Expr) -> FluidParams {
        self.rho = rho;
        self
    }

    pub fn rho_from_pressure(mut self) -> FluidParams {
        self.rho = self.p.clone();
        self
    }

    pub fn is_constant(&self) -> bool {
        self.sigma.is_constant() && self.p.is_constant() && self.rho.is_constant()
    }
}

/// `(σ, p, ρ)` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluidValues {
    pub sigma: f64,
    pub p: f64,
    pub rho: f64,
}

impl FluidValues {
    pub fn at(fp: &FluidParams, point: &[f64]) -> Result<FluidValues, EvalError> {
        Ok(FluidValues {
            sigma: fp.sigma.eval(point)?,
            p: fp.p.eval(point)?,
            rho: fp.rho.eval(point)?,
        })
    }

    pub fn sum(&self) -> f64 {
        self.sigma + self.p
    }
}

pub fn stress_energy(fp: &FluidParams, f: &PointFrame, pi: &[f64]) -> Result<Tensor, EvalError> {
    let v = FluidValues::at(fp, &f.point)?;
    Ok(f.g.scaled(v.rho).add_scaled(v.sum(), &Tensor::outer(pi, pi)))
}

/// `Ric − (r/2) g + Λ g − k τ`.
pub fn efe_residual(ric: &Tensor, scalar: f64, g: &Tensor, tau: &Tensor, lambda: f64, k: f64) -> Tensor {
    ric.add_scaled(lambda - 0.5 * scalar, g).add_scaled(-k, tau)
}

/// `g^{ik} ∇_i S_{kj}` for a covariant rank-2 jet.
fn divergence(f: &PointFrame, s: &TensorJet) -> Vec<f64> {
    let n = f.dim();
    let d = covariant_derivative(s, &f.gamma);
    (0..n)
        .map(|j| {
            let mut acc = 0.0;
            for i in 0..n {
                for k in 0..n {
                    acc += f.ginv.at2(i, k) * d.at3(k, j, i);
                }
            }
            acc
        })
        .collect()
}

fn pi_pi_jet(c: &SSConnection) -> TensorJet {
    let n = c.dim();
    let dpp = Tensor::from_fn(n, &[Down, Down, Down], |ix| {
        let (m, k, j) = (ix[0], ix[1], ix[2]);
        c.dpi.at2(m, k) * c.pi[j] + c.pi[k] * c.dpi.at2(m, j)
    });
    TensorJet::new(c.pi_pi(), dpp)
}

/// `(div π⊗π)_j = g^{ik} ∇_i (π_k π_j)`.
pub fn div_pi_pi(c: &SSConnection) -> Vec<f64> {
    divergence(&c.frame, &pi_pi_jet(c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivMode {
    /// `(σ + p) div(π⊗π)`, treating the coefficients as constants.
    Constant,
    /// The full covariant divergence, including `∂ρ` and `∂(σ + p)`.
    Full,
}

pub fn div_tau(fp: &FluidParams, c: &SSConnection, mode: DivMode) -> Result<Vec<f64>, EvalError> {
    let x = &c.frame.point;
    match mode {
        DivMode::Constant => {
            let s = fp.sigma.eval(x)? + fp.p.eval(x)?;
            Ok(div_pi_pi(c).into_iter().map(|v| s * v).collect())
        }
        DivMode::Full => {
            let n = c.dim();
            let sig = fp.sigma.eval_jet2(x)?;
            let p = fp.p.eval_jet2(x)?;
            let rho = fp.rho.eval_jet2(x)?;
            let s = &sig + &p;
            let g = &c.frame.g;
            let pp = pi_pi_jet(c);
            let value = g.scaled(rho.value()).add_scaled(s.value(), &pp.value);
            let partial = Tensor::from_fn(n, &[Down, Down, Down], |ix| {
                let (m, k, j) = (ix[0], ix[1], ix[2]);
                rho.grad()[m] * g.at2(k, j)
                    + rho.value() * c.frame.dg.at3(m, k, j)
                    + s.grad()[m] * pp.value.at2(k, j)
                    + s.value() * pp.partial.at3(m, k, j)
            });
            Ok(divergence(&c.frame, &TensorJet::new(value, partial)))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhantomReport {
    /// GRW hypothesis: unit timelike torse-forming generator.
    pub applicable: bool,
    pub sum: f64,
    /// `p / σ`, undefined when `σ = 0`.
    pub w: Option<f64>,
    pub barrier: bool,
    /// `max |div τ|` with constant coefficients.
    pub div_tau: f64,
    /// `div τ = 0` exactly when `σ + p = 0` (requires `π ≠ 0`).
    pub div_zero_iff_barrier: bool,
}

pub fn phantom_verdict(v: FluidValues, div_tau_constant: &[f64], grw_pass: bool, tol: f64) -> PhantomReport {
    let sum = v.sum();
    let barrier = sum.abs() <= BARRIER_TOL;
    let div = div_tau_constant.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    PhantomReport {
        applicable: grw_pass,
        sum,
        w: (v.sigma != 0.0).then(|| v.p / v.sigma),
        barrier,
        div_tau: div,
        div_zero_iff_barrier: (div <= tol) == barrier,
    }
}
