//! Real sparse matrices in compressed-row form.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

const ROW_CHUNK: usize = 4096;

/// A square real matrix stored row by row, columns ascending, no duplicate
/// coordinates and no explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    values: Vec<f64>,
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_rows(diag.len(), |i, out| out.push((i, diag[i])))
    }

    /// Assembles a matrix whose row `i` entries are produced by `row(i, out)`.
    ///
    /// Rows are generated in parallel in fixed-size chunks and concatenated
    /// in row order; within a row, entries are sorted by column and
    /// duplicates summed in emission order. The result does not depend on
    /// the thread count.
    pub fn from_rows<F>(dim: usize, row: F) -> Self
    where
        F: Fn(usize, &mut Vec<(usize, f64)>) + Sync,
    {
        assert!(dim <= u32::MAX as usize, "dimension exceeds u32 column range");
        let chunks: Vec<(Vec<usize>, Vec<u32>, Vec<f64>)> = (0..dim.div_ceil(ROW_CHUNK))
            .into_par_iter()
            .map(|c| {
                let start = c * ROW_CHUNK;
                let end = (start + ROW_CHUNK).min(dim);
                let mut lens = Vec::with_capacity(end - start);
                let mut cols = Vec::new();
                let mut vals = Vec::new();
                let mut buf = Vec::new();
                for i in start..end {
                    buf.clear();
                    row(i, &mut buf);
                    // stable sort keeps emission order among equal columns
                    buf.sort_by_key(|e| e.0);
                    let before = cols.len();
                    let mut k = 0;
                    while k < buf.len() {
                        let col = buf[k].0;
                        assert!(col < dim, "column {col} out of range {dim}");
                        let mut v = 0.0;
                        while k < buf.len() && buf[k].0 == col {
                            v += buf[k].1;
                            k += 1;
                        }
                        if v != 0.0 {
                            cols.push(col as u32);
                            vals.push(v);
                        }
                    }
                    lens.push(cols.len() - before);
                }
                (lens, cols, vals)
            })
            .collect();

        let nnz = chunks.iter().map(|c| c.1.len()).sum();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for (lens, c, v) in chunks {
            for len in lens {
                row_ptr.push(row_ptr.last().unwrap() + len);
            }
            cols.extend(c);
            values.extend(v);
        }
        Self {
            dim,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .zip(&self.values[r])
            .map(|(&c, &v)| (c as usize, v))
    }

    /// Coordinate view: `(row, col, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&(j as u32)) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`, rows in parallel, each row summed left to right.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.dim];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if y.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        y.par_chunks_mut(ROW_CHUNK).enumerate().for_each(|(c, block)| {
            let start = c * ROW_CHUNK;
            for (off, out) in block.iter_mut().enumerate() {
                let i = start + off;
                let mut acc = 0.0;
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.values[k] * x[self.cols[k] as usize];
                }
                *out = acc;
            }
        });
        Ok(())
    }

    /// `xᵀ A x / xᵀ x`.
    pub fn rayleigh_quotient(&self, x: &[f64]) -> Result<f64> {
        let y = self.matvec(x)?;
        let num: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let den: f64 = x.iter().map(|a| a * a).sum();
        Ok(num / den)
    }

    pub fn transpose(&self) -> Self {
        let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.dim];
        for (i, j, v) in self.entries() {
            by_col[j].push((i, v));
        }
        Self::from_rows(self.dim, |j, out| out.extend_from_slice(&by_col[j]))
    }

    /// Exact structural and numerical symmetry.
    pub fn is_symmetric(&self) -> bool {
        self.entries().all(|(i, j, v)| self.get(j, i) == v)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out.drop_zeros();
        out
    }

    /// `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(Self::from_rows(self.dim, |i, out| {
            out.extend(self.row(i));
            out.extend(other.row(i));
        }))
    }

    /// `self + shift · I`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self::from_rows(self.dim, |i, out| {
            out.extend(self.row(i));
            out.push((i, shift));
        })
    }

    /// `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(Self::from_rows(self.dim, |i, out| {
            for (k, a) in self.row(i) {
                out.extend(other.row(k).map(|(j, b)| (j, a * b)));
            }
        }))
    }

    /// `max |(AB − BA)_ij|`.
    pub fn commutator_max_abs(&self, other: &Self) -> Result<f64> {
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        let diff = ab.add(&ba.scaled(-1.0))?;
        Ok(diff.max_abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Restriction to the rows and columns in `keep` (ascending ordinals).
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.dim];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        Self::from_rows(keep.len(), |i, out| {
            out.extend(
                self.row(keep[i])
                    .filter(|(j, _)| map[*j] != usize::MAX)
                    .map(|(j, v)| (map[j], v)),
            );
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }

    fn drop_zeros(&mut self) {
        if self.values.iter().all(|v| *v != 0.0) {
            return;
        }
        *self = Self::from_rows(self.dim, |i, out| out.extend(self.row(i)));
    }
}
