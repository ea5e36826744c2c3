//! Dense component arrays with per-slot variance.
//!
//! Components are stored row-major in slot order, so a rank-3 tensor with
//! slots `[Up, Down, Down]` stores `T^k_{ij}` at `(k * n + i) * n + j`.
//! Arrays of partial derivatives reuse the same type with the derivative slot
//! first and marked `Down`; they are not tensors, but the layout is shared.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variance {
    Up,
    Down,
}

use Variance::{Down, Up};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    dim: usize,
    variance: Vec<Variance>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dim: usize, variance: &[Variance]) -> Tensor {
        Tensor {
            dim,
            variance: variance.to_vec(),
            data: vec![0.0; dim.pow(variance.len() as u32)],
        }
    }

    pub fn scalar(dim: usize, value: f64) -> Tensor {
        Tensor {
            dim,
            variance: Vec::new(),
            data: vec![value],
        }
    }

    /// Fill every component from its multi-index.
    pub fn from_fn(dim: usize, variance: &[Variance], mut f: impl FnMut(&[usize]) -> f64) -> Tensor {
        let mut t = Tensor::zeros(dim, variance);
        let mut idx = vec![0usize; variance.len()];
        for slot in t.data.iter_mut() {
            *slot = f(&idx);
            increment(&mut idx, dim);
        }
        t
    }

    pub fn from_data(dim: usize, variance: &[Variance], data: Vec<f64>) -> Tensor {
        assert_eq!(data.len(), dim.pow(variance.len() as u32), "component count");
        Tensor {
            dim,
            variance: variance.to_vec(),
            data,
        }
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    #[inline]
    pub fn set(&mut self, idx: &[usize], value: f64) {
        let o = self.offset(idx);
        self.data[o] = value;
    }

    #[inline]
    pub fn at2(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn at3(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.dim + j) * self.dim + k]
    }

    #[inline]
    pub fn at4(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[((i * self.dim + j) * self.dim + k) * self.dim + l]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max-norm of the componentwise difference. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        assert_eq!(self.data.len(), other.data.len(), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            dim: self.dim,
            variance: self.variance.clone(),
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Tensor {
        self.map(|v| c * v)
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Tensor) -> Tensor {
        assert_eq!(self.data.len(), other.data.len(), "shape mismatch");
        Tensor {
            dim: self.dim,
            variance: self.variance.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        self.add_scaled(-1.0, other)
    }

    /// Outer product of two covectors, `(a ⊗ b)_{ij} = a_i b_j`.
    pub fn outer(a: &[f64], b: &[f64]) -> Tensor {
        let n = a.len();
        Tensor::from_fn(n, &[Down, Down], |ix| a[ix[0]] * b[ix[1]])
    }

    pub fn kronecker(dim: usize) -> Tensor {
        Tensor::from_fn(dim, &[Up, Down], |ix| f64::from(u8::from(ix[0] == ix[1])))
    }

    /// Full contraction of a rank-2 covariant tensor with an inverse metric.
    pub fn trace_with(&self, ginv: &Tensor) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += ginv.at2(i, j) * self.at2(i, j);
            }
        }
        s
    }

    /// Max-norm of the antisymmetric part of a rank-2 array.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                m = m.max((self.at2(i, j) - self.at2(j, i)).abs());
            }
        }
        m
    }

    /// Rank-2 covariant tensor applied to a vector in its first slot.
    pub fn contract_first(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|j| (0..n).map(|i| v[i] * self.at2(i, j)).sum())
            .collect()
    }
}

fn increment(idx: &mut [usize], dim: usize) {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < dim {
            return;
        }
        *slot = 0;
    }
}

impl fmt::Display for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rank() {
            0 => write!(f, "{}", self.data[0]),
            1 => write!(f, "{:?}", self.data),
            2 => {
                for i in 0..self.dim {
                    let row: Vec<String> = (0..self.dim)
                        .map(|j| format!("{:>14.6e}", self.at2(i, j)))
                        .collect();
                    writeln!(f, "[{}]", row.join(" "))?;
                }
                Ok(())
            }
            _ => write!(f, "rank-{} tensor, dim {}", self.rank(), self.dim),
        }
    }
}

/// Value of a tensor field at a point together with its coordinate partials.
///
/// `partial` has the derivative slot first: `partial[m][..] = ∂_m value[..]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorJet {
    pub value: Tensor,
    pub partial: Tensor,
}

impl TensorJet {
    pub fn new(value: Tensor, partial: Tensor) -> TensorJet {
        assert_eq!(partial.rank(), value.rank() + 1, "partial rank");
        TensorJet { value, partial }
    }

    pub fn constant(value: Tensor) -> TensorJet {
        let mut v = vec![Down];
        v.extend_from_slice(value.variance());
        let partial = Tensor::zeros(value.dim(), &v);
        TensorJet { value, partial }
    }
}

/// Coordinate covariant derivative with connection coefficients
/// `coeffs[k][i][j] = Γ^k_{ij}`, where `∇_{e_i} e_j = Γ^k_{ij} e_k`.
///
/// The coefficients need not be symmetric. The derivative slot is appended
/// last: `result[a..][c] = (∇_c T)[a..]`.
pub fn covariant_derivative(field: &TensorJet, coeffs: &Tensor) -> Tensor {
    let value = &field.value;
    let n = value.dim();
    let rank = value.rank();
    let mut variance = value.variance().to_vec();
    variance.push(Down);
    let mut scratch = vec![0usize; rank];
    let mut pidx = vec![0usize; rank + 1];
    Tensor::from_fn(n, &variance, |ix| {
        let (idx, c) = (&ix[..rank], ix[rank]);
        pidx[0] = c;
        pidx[1..].copy_from_slice(idx);
        let mut acc = field.partial.get(&pidx);
        for (s, var) in value.variance().iter().enumerate() {
            scratch.copy_from_slice(idx);
            for m in 0..n {
                scratch[s] = m;
                let t = value.get(&scratch);
                match var {
                    Up => acc += coeffs.at3(idx[s], c, m) * t,
                    Down => acc -= coeffs.at3(m, c, idx[s]) * t,
                }
            }
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_layout() {
        let t = Tensor::from_fn(3, &[Up, Down, Down], |ix| (ix[0] * 100 + ix[1] * 10 + ix[2]) as f64);
        assert_eq!(t.at3(2, 1, 0), 210.0);
        assert_eq!(t.get(&[1, 2, 2]), 122.0);
        assert_eq!(t.data().len(), 27);
    }

    #[test]
    fn covariant_derivative_of_constant_scalar_vanishes() {
        let gamma = Tensor::from_fn(2, &[Up, Down, Down], |ix| (ix[0] + 2 * ix[1] + 3 * ix[2]) as f64);
        let d = covariant_derivative(&TensorJet::constant(Tensor::scalar(2, 4.0)), &gamma);
        assert_eq!(d.data(), &[0.0, 0.0]);
    }

    #[test]
    fn covariant_derivative_of_vector_uses_direction_first_index() {
        // (∇_c V)^a = ∂_c V^a + Γ^a_{cm} V^m
        let n = 2;
        let gamma = Tensor::from_fn(n, &[Up, Down, Down], |ix| (ix[0] * 4 + ix[1] * 2 + ix[2]) as f64);
        let v = Tensor::from_data(n, &[Up], vec![1.0, 2.0]);
        let d = covariant_derivative(&TensorJet::constant(v.clone()), &gamma);
        for a in 0..n {
            for c in 0..n {
                let want: f64 = (0..n).map(|m| gamma.at3(a, c, m) * v.data()[m]).sum();
                assert_eq!(d.at2(a, c), want);
            }
        }
    }
}
