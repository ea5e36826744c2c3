//! Truncated second-order Taylor arithmetic.
//!
//! A [`Jet2`] carries the value, gradient and Hessian of a scalar with respect
//! to the `n` chart coordinates. The Hessian is stored as a packed upper
//! triangle, so it is symmetric by construction.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    value: f64,
    grad: Vec<f64>,
    // packed upper triangle, row-major over i <= j
    hess: Vec<f64>,
}

#[inline]
fn packed(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl Jet2 {
    pub fn constant(n: usize, value: f64) -> Self {
        Jet2 {
            value,
            grad: vec![0.0; n],
            hess: vec![0.0; n * (n + 1) / 2],
        }
    }

    /// The coordinate function `x^index` evaluated at `value`.
    pub fn variable(n: usize, index: usize, value: f64) -> Self {
        let mut j = Jet2::constant(n, value);
        j.grad[index] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[packed(self.dim(), i, j)]
    }

    /// Dense copy of the Hessian.
    pub fn hess_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.hess(i, j)).collect())
            .collect()
    }

    pub fn is_constant(&self) -> bool {
        self.grad.iter().all(|g| *g == 0.0) && self.hess.iter().all(|h| *h == 0.0)
    }

    /// Compose with a scalar function given its value and first two
    /// derivatives at `self.value`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let n = self.dim();
        let grad = self.grad.iter().map(|g| f1 * g).collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..n {
            for j in i..n {
                hess.push(f1 * self.hess[packed(n, i, j)] + f2 * self.grad[i] * self.grad[j]);
            }
        }
        Jet2 {
            value: f0,
            grad,
            hess,
        }
    }

    pub fn scale(&self, c: f64) -> Jet2 {
        Jet2 {
            value: c * self.value,
            grad: self.grad.iter().map(|g| c * g).collect(),
            hess: self.hess.iter().map(|h| c * h).collect(),
        }
    }

    pub fn recip(&self) -> Option<Jet2> {
        let u = self.value;
        if u == 0.0 {
            return None;
        }
        Some(self.chain(1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u)))
    }

    pub fn checked_div(&self, rhs: &Jet2) -> Option<Jet2> {
        rhs.recip().map(|r| self * &r)
    }
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value - rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        let n = self.dim();
        let (a, b) = (self.value, rhs.value);
        let grad = self
            .grad
            .iter()
            .zip(&rhs.grad)
            .map(|(ga, gb)| a * gb + b * ga)
            .collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..n {
            for j in i..n {
                let k = packed(n, i, j);
                hess.push(
                    a * rhs.hess[k]
                        + b * self.hess[k]
                        + self.grad[i] * rhs.grad[j]
                        + rhs.grad[i] * self.grad[j],
                );
            }
        }
        Jet2 {
            value: a * b,
            grad,
            hess,
        }
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}
