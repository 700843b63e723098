//! Compressed-row complex matrices for the full Hilbert space oracle.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Square complex matrix in compressed sparse row layout.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseMatrix {
    /// Builds a `dim × dim` matrix from `(row, col, value)` triplets.
    /// Duplicates are summed and exact zeros dropped.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut rows: Vec<BTreeMap<usize, Complex64>> = vec![BTreeMap::new(); dim];
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside {dim}x{dim}");
            *rows[r].entry(c).or_default() += v;
        }
        Self::from_rows(dim, rows)
    }

    fn from_rows(dim: usize, rows: Vec<BTreeMap<usize, Complex64>>) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                if v != Complex64::new(0.0, 0.0) {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Diagonal matrix with the given entries.
    pub fn diagonal(entries: &[Complex64]) -> Self {
        Self::from_triplets(
            entries.len(),
            entries.iter().enumerate().map(|(i, &v)| (i, i, v)),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// All stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn mul_vec(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        assert_eq!(x.len(), self.dim);
        DVector::from_iterator(
            self.dim,
            (0..self.dim).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()),
        )
    }

    pub fn matmul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.dim, other.dim);
        let rows = (0..self.dim)
            .map(|r| {
                let mut acc = BTreeMap::new();
                for (k, a) in self.row(r) {
                    for (c, b) in other.row(k) {
                        *acc.entry(c).or_insert(Complex64::new(0.0, 0.0)) += a * b;
                    }
                }
                acc
            })
            .collect();
        Self::from_rows(self.dim, rows)
    }

    /// `self - other`.
    pub fn sub(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(
            self.dim,
            self.triplets()
                .chain(other.triplets().map(|(r, c, v)| (r, c, -v))),
        )
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values
            .iter()
            .map(Complex64::norm_sqr)
            .fold(0.0, |a, b| a + b)
            .sqrt()
    }

    /// Largest absolute row sum; bounds the spectral radius.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest `|A_rc - conj(A_cr)|`.
    pub fn hermiticity_error(&self) -> f64 {
        self.triplets()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `‖AB - BA‖_F`.
    pub fn commutator_norm(&self, other: &SparseMatrix) -> f64 {
        self.matmul(other).sub(&other.matmul(self)).frobenius_norm()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }
}
