//! Compressed-row complex sparse matrices.

use crate::error::{HeomError, Result};
use crate::C64;
use nalgebra::DMatrix;
use rayon::prelude::*;

/// Row-major compressed sparse matrix with sorted, duplicate-free rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

/// Rows shorter than this are multiplied serially.
const PAR_MIN_ROWS: usize = 4096;

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![C64::new(1.0, 0.0); n],
        }
    }

    /// Builds from raw parts, checking the structure.
    pub fn from_parts(
        nrows: usize,
        ncols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<C64>,
    ) -> Result<Self> {
        if indptr.len() != nrows + 1 || indptr[0] != 0 || *indptr.last().unwrap() != indices.len() {
            return Err(HeomError::Dimension("bad row pointer".into()));
        }
        if indices.len() != values.len() {
            return Err(HeomError::Dimension("indices and values differ in length".into()));
        }
        for r in 0..nrows {
            if indptr[r] > indptr[r + 1] {
                return Err(HeomError::Dimension("row pointer not monotone".into()));
            }
            let row = &indices[indptr[r]..indptr[r + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.iter().any(|&c| c >= ncols) {
                return Err(HeomError::Dimension(format!(
                    "row {r} has unsorted or out-of-range columns"
                )));
            }
        }
        Ok(Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    /// Sums duplicates. Entries are combined in input order so the result
    /// does not depend on anything but the triplet sequence.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trip: Vec<(usize, usize, C64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = trip.iter().find(|t| t.0 >= nrows || t.1 >= ncols) {
            return Err(HeomError::Dimension(format!(
                "triplet ({r},{c}) outside {nrows}x{ncols}"
            )));
        }
        trip.sort_by_key(|t| (t.0, t.1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut values: Vec<C64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Ok(Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    /// Assembles from per-row entry lists, each already sorted and merged.
    pub(crate) fn from_rows(nrows: usize, ncols: usize, rows: Vec<Vec<(usize, C64)>>) -> Self {
        debug_assert_eq!(rows.len(), nrows);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for row in rows {
            for (c, v) in row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut trip = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    trip.push((r, c, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), trip).expect("in range")
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                m[(r, self.indices[k])] += self.values[k];
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    pub fn nnz(&self) -> usize {
        self.values.len()
    }
    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Iterates `(col, value)` over row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Position of the stored entry `(r, c)` in the value array.
    pub fn find(&self, r: usize, c: usize) -> Option<usize> {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .binary_search(&c)
            .ok()
            .map(|k| span.start + k)
    }

    /// Iterates all stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    /// `y = A x`. Each row is summed in storage order, so the result does not
    /// depend on the thread count.
    pub fn mul_vec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        let row_dot = |r: usize| {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            acc
        };
        if self.nrows >= PAR_MIN_ROWS {
            y.par_iter_mut().enumerate().for_each(|(r, yr)| *yr = row_dot(r));
        } else {
            y.iter_mut().enumerate().for_each(|(r, yr)| *yr = row_dot(r));
        }
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn scale(&mut self, s: C64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![C64::new(0.0, 0.0); self.nnz()];
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[k];
                indices[next[c]] = r;
                values[next[c]] = self.values[k];
                next[c] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            indptr: counts,
            indices,
            values,
        }
    }

    /// `a·self + b·other`, union of the sparsity patterns.
    pub fn add_scaled(&self, a: C64, other: &Self, b: C64) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(HeomError::Dimension("matrix sum with different shapes".into()));
        }
        let mut rows = Vec::with_capacity(self.nrows);
        for r in 0..self.nrows {
            let mut out = Vec::new();
            let (mut i, ie) = (self.indptr[r], self.indptr[r + 1]);
            let (mut j, je) = (other.indptr[r], other.indptr[r + 1]);
            while i < ie || j < je {
                let ci = if i < ie { self.indices[i] } else { usize::MAX };
                let cj = if j < je { other.indices[j] } else { usize::MAX };
                if ci == cj {
                    out.push((ci, a * self.values[i] + b * other.values[j]));
                    i += 1;
                    j += 1;
                } else if ci < cj {
                    out.push((ci, a * self.values[i]));
                    i += 1;
                } else {
                    out.push((cj, b * other.values[j]));
                    j += 1;
                }
            }
            rows.push(out);
        }
        Ok(Self::from_rows(self.nrows, self.ncols, rows))
    }

    /// Sparse product `self · other` with a dense accumulator per row.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(HeomError::Dimension("inner dimensions differ in product".into()));
        }
        let n = other.ncols;
        let rows: Vec<Vec<(usize, C64)>> = (0..self.nrows)
            .into_par_iter()
            .map_init(
                || (vec![C64::new(0.0, 0.0); n], vec![false; n], Vec::new()),
                |(acc, seen, cols), r| {
                    cols.clear();
                    for (k, a) in self.row(r) {
                        for (c, b) in other.row(k) {
                            if !seen[c] {
                                seen[c] = true;
                                cols.push(c);
                            }
                            acc[c] += a * b;
                        }
                    }
                    cols.sort_unstable();
                    let out = cols.iter().map(|&c| (c, acc[c])).collect();
                    for &c in cols.iter() {
                        acc[c] = C64::new(0.0, 0.0);
                        seen[c] = false;
                    }
                    out
                },
            )
            .collect();
        Ok(Self::from_rows(self.nrows, n, rows))
    }

    /// Removes entries with modulus at most `tol`.
    pub fn drop_small(&mut self, tol: f64) {
        let mut rows = Vec::with_capacity(self.nrows);
        for r in 0..self.nrows {
            rows.push(self.row(r).filter(|(_, v)| v.norm() > tol).collect());
        }
        *self = Self::from_rows(self.nrows, self.ncols, rows);
    }

    /// Max column sum of moduli.
    pub fn norm_1(&self) -> f64 {
        let mut cols = vec![0.0; self.ncols];
        for (&c, v) in self.indices.iter().zip(&self.values) {
            cols[c] += v.norm();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    /// Max row sum of moduli.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Adds `s` to every diagonal entry; the diagonal must be stored.
    pub fn shift_diagonal(&mut self, s: C64) -> Result<()> {
        for r in 0..self.nrows.min(self.ncols) {
            let k = self
                .find(r, r)
                .ok_or_else(|| HeomError::Usage(format!("diagonal entry {r} not stored")))?;
            self.values[k] += s;
        }
        Ok(())
    }

    /// Ensures every diagonal entry is present in the pattern (possibly as an explicit zero).
    pub fn with_full_diagonal(&self) -> Self {
        let rows = (0..self.nrows)
            .map(|r| {
                let mut row: Vec<(usize, C64)> = self.row(r).collect();
                if r < self.ncols && self.find(r, r).is_none() {
                    let pos = row.partition_point(|&(c, _)| c < r);
                    row.insert(pos, (r, C64::new(0.0, 0.0)));
                }
                row
            })
            .collect();
        Self::from_rows(self.nrows, self.ncols, rows)
    }

    pub(crate) fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    /// Replaces row `r` with the given sorted entries.
    pub fn replace_row(&self, r: usize, entries: &[(usize, C64)]) -> Self {
        let rows = (0..self.nrows)
            .map(|i| {
                if i == r {
                    entries.to_vec()
                } else {
                    self.row(i).collect()
                }
            })
            .collect();
        Self::from_rows(self.nrows, self.ncols, rows)
    }

    /// Column-compressed copy in faer's layout.
    pub fn to_faer(&self) -> faer::sparse::SparseColMat<usize, C64> {
        let t = self.transpose();
        let sym = faer::sparse::SymbolicSparseColMat::new_checked(self.nrows, self.ncols, t.indptr, None, t.indices);
        faer::sparse::SparseColMat::new(sym, t.values)
    }
}
