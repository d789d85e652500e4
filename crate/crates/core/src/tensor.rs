//! Dense square tensors of fixed rank.
//!
//! Every axis has the same extent (the system dimension `n`), which is all the
//! KCC objects need: `Nⁱⱼ` is rank 2, `Gⁱⱼₗ` rank 3, `Dⁱⱼₖₗ` rank 4. The first
//! index is always the upper (contravariant) one.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor<const R: usize> {
    dim: usize,
    data: Vec<f64>,
}

pub type Matrix = Tensor<2>;

impl<const R: usize> Tensor<R> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim.pow(R as u32)],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut([usize; R]) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for idx in multi_indices::<R>(dim) {
            t[idx] = f(idx);
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Largest absolute entry, `0.0` for an empty tensor.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn indices(&self) -> impl Iterator<Item = [usize; R]> {
        multi_indices::<R>(self.dim)
    }

    fn offset(&self, idx: [usize; R]) -> usize {
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim, "index {i} out of range {}", self.dim);
            acc * self.dim + i
        })
    }
}

impl Matrix {
    pub fn from_rows<const N: usize>(rows: [[f64; N]; N]) -> Self {
        Self::from_fn(N, |[i, j]| rows[i][j])
    }

    pub fn to_array2(&self) -> [[f64; 2]; 2] {
        assert_eq!(self.dim, 2, "not a 2x2 matrix");
        [[self[[0, 0]], self[[0, 1]]], [self[[1, 0]], self[[1, 1]]]]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[[i, i]]).sum()
    }
}

impl<const R: usize> Index<[usize; R]> for Tensor<R> {
    type Output = f64;

    fn index(&self, idx: [usize; R]) -> &f64 {
        &self.data[self.offset(idx)]
    }
}

impl<const R: usize> IndexMut<[usize; R]> for Tensor<R> {
    fn index_mut(&mut self, idx: [usize; R]) -> &mut f64 {
        let o = self.offset(idx);
        &mut self.data[o]
    }
}

/// All multi-indices of rank `R` over `0..dim`, in row-major order.
pub fn multi_indices<const R: usize>(dim: usize) -> impl Iterator<Item = [usize; R]> {
    let total = dim.pow(R as u32);
    (0..total).map(move |mut flat| {
        let mut idx = [0usize; R];
        for slot in idx.iter_mut().rev() {
            *slot = flat % dim;
            flat /= dim;
        }
        idx
    })
}
