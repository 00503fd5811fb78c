//! Real sparse operators in compressed-row form.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Entries of `A - Aᵀ` below this (times `max(1, max|A|)`) count as symmetric.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Sorts the triplets, sums duplicates in sorted order and drops zeros.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(t) = triplets.iter().find(|t| t.0 >= rows || t.1 >= cols) {
            return Err(Error::invalid(format!(
                "entry ({}, {}) outside a {rows}×{cols} operator",
                t.0, t.1
            )));
        }
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut rows_of = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if rows_of.last() == Some(&r) && col_idx.last() == Some(&c) {
                *values.last_mut().unwrap() += v;
            } else {
                rows_of.push(r);
                col_idx.push(c);
                values.push(v);
            }
        }
        let mut kept = 0;
        for i in 0..values.len() {
            if values[i] != 0.0 {
                values[kept] = values[i];
                col_idx[kept] = col_idx[i];
                rows_of[kept] = rows_of[i];
                kept += 1;
            }
        }
        values.truncate(kept);
        col_idx.truncate(kept);
        for &r in &rows_of[..kept] {
            row_ptr[r + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut op = SparseOperator {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
            hermitian: false,
        };
        op.hermitian = rows == cols && op.max_asymmetry() < HERMITIAN_TOL * op.max_abs().max(1.0);
        Ok(op)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_triplets(n, n, values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
            .expect("diagonal entries are in range")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Side length of a square operator.
    pub fn dimension(&self) -> usize {
        self.rows
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Set at construction: square and symmetric to [`HERMITIAN_TOL`].
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    /// `(row, col, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(i) => self.values[range.start + i],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate().take(self.rows) {
            *yr = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.entries().map(|(r, c, v)| (c, r, v)).collect())
            .expect("transposed entries are in range")
    }

    /// `self · other`.
    pub fn matmul(&self, other: &SparseOperator) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::invalid(format!(
                "cannot multiply {}×{} by {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut triplets = Vec::new();
        for r in 0..self.rows {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    *acc.entry(c).or_insert(0.0) += a * b;
                }
            }
            triplets.extend(acc.into_iter().map(|(c, v)| (r, c, v)));
        }
        Self::from_triplets(self.rows, other.cols, triplets)
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, other: &SparseOperator, s: f64) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::invalid("operator shapes differ"));
        }
        let mut triplets: Vec<_> = self.entries().collect();
        triplets.extend(other.entries().map(|(r, c, v)| (r, c, s * v)));
        Self::from_triplets(self.rows, self.cols, triplets)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A - other|` over all entries.
    pub fn max_abs_diff(&self, other: &SparseOperator) -> Result<f64> {
        Ok(self.add_scaled(other, -1.0)?.max_abs())
    }

    /// `max |A - Aᵀ|`; infinite for a non-square operator.
    pub fn max_asymmetry(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute row sum, an upper bound on the spectral norm of a
    /// symmetric operator.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }
}
