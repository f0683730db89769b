use num_complex::Complex64;

use super::index::Positions;
use crate::error::{Error, Result};

/// Row-major dense cubic tensor with complex entries (first index slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    order: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseTensor {
    pub fn zeros(order: usize, dim: usize) -> Self {
        Self { order, dim, data: vec![Complex64::new(0.0, 0.0); dim.pow(order as u32)] }
    }

    pub fn from_data(order: usize, dim: usize, data: Vec<Complex64>) -> Result<Self> {
        let expected = dim.pow(order as u32);
        if data.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: data.len() });
        }
        Ok(Self { order, dim, data })
    }

    pub fn from_real(order: usize, dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_data(order, dim, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(order: usize, dim: usize, mut f: impl FnMut(&[usize]) -> Complex64) -> Self {
        let data = Positions::new(order, dim).map(|pos| f(&pos)).collect();
        Self { order, dim, data }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn offset(&self, index: &[usize]) -> usize {
        index.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, index: &[usize]) -> Complex64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: Complex64) {
        let o = self.offset(index);
        self.data[o] = value;
    }

    pub fn positions(&self) -> Positions {
        Positions::new(self.order, self.dim)
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &DenseTensor) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> DenseTensor {
        Self { order: self.order, dim: self.dim, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    /// Tensor with legs permuted: `out[i] = self[i∘perm]`, i.e.
    /// `out[i₁,…,i_p] = self[i_{perm(1)},…,i_{perm(p)}]`.
    pub fn permute_legs(&self, perm: &[usize]) -> DenseTensor {
        assert_eq!(perm.len(), self.order);
        let mut src = vec![0usize; self.order];
        DenseTensor::from_fn(self.order, self.dim, |pos| {
            for (k, &pk) in perm.iter().enumerate() {
                src[k] = pos[pk];
            }
            self.get(&src)
        })
    }

    /// Contracts `matrix` (row index j, column index i) into one leg:
    /// `out[…, i, …] = Σ_j self[…, j, …] · matrix[j][i]`.
    pub fn contract_leg(&self, leg: usize, matrix: &[Complex64], cols: usize) -> DenseTensor {
        let n = self.dim;
        debug_assert_eq!(matrix.len(), n * cols);
        let inner = n.pow((self.order - leg - 1) as u32);
        let outer = n.pow(leg as u32);
        let mut out = vec![Complex64::new(0.0, 0.0); outer * cols * inner];
        for o in 0..outer {
            let src_block = o * n * inner;
            let dst_block = o * cols * inner;
            for j in 0..n {
                let src = &self.data[src_block + j * inner..src_block + (j + 1) * inner];
                for i in 0..cols {
                    let m = matrix[j * cols + i];
                    if m == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let dst = &mut out[dst_block + i * inner..dst_block + (i + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += s * m;
                    }
                }
            }
        }
        DenseTensor { order: self.order, dim: cols, data: out }
    }
}
