//! Compressed sparse row matrices.

use std::io::{self, Write};

use faer::sparse::{SparseColMat, Triplet};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Assemble from `(row, col, value)` entries. Duplicates are summed in
    /// input order; columns within a row end up sorted.
    pub fn from_triplets(n_rows: usize, n_cols: usize, entries: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, c, _) in entries {
            assert!(r < n_rows && c < n_cols, "entry ({r}, {c}) out of bounds");
            counts[r + 1] += 1;
        }
        for r in 0..n_rows {
            counts[r + 1] += counts[r];
        }
        let mut fill = counts.clone();
        let mut raw = vec![(0usize, 0.0f64); entries.len()];
        for &(r, c, v) in entries {
            raw[fill[r]] = (c, v);
            fill[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        row_ptr.push(0);
        for r in 0..n_rows {
            let row = &mut raw[counts[r]..counts[r + 1]];
            row.sort_by_key(|e| e.0);
            for &(c, v) in row.iter() {
                if col_idx.len() > row_ptr[r] && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl ExactSizeIterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    /// Iterate over all stored entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_rows);
        let mut y = vec![0.0; self.n_cols];
        for (r, &xr) in x.iter().enumerate() {
            for (c, v) in self.row(r) {
                y[c] += v * xr;
            }
        }
        y
    }

    pub fn transpose(&self) -> CsrMatrix {
        let entries: Vec<_> = self.entries().map(|(r, c, v)| (c, r, v)).collect();
        CsrMatrix::from_triplets(self.n_cols, self.n_rows, &entries)
    }

    /// `self + alpha · I`; the diagonal must be structurally present.
    pub fn add_identity(&self, alpha: f64) -> CsrMatrix {
        let mut out = self.clone();
        for r in 0..self.n_rows {
            let span = out.row_ptr[r]..out.row_ptr[r + 1];
            let k = out.col_idx[span.clone()]
                .binary_search(&r)
                .expect("diagonal entry must be stored");
            out.values[span.start + k] += alpha;
        }
        out
    }

    /// Principal submatrix on `keep` (in the given order).
    pub fn principal_submatrix(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.n_cols];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut entries = Vec::new();
        for (new_r, &r) in keep.iter().enumerate() {
            for (c, v) in self.row(r) {
                if map[c] != usize::MAX {
                    entries.push((new_r, map[c], v));
                }
            }
        }
        CsrMatrix::from_triplets(keep.len(), keep.len(), &entries)
    }

    pub fn to_faer(&self) -> SparseColMat<usize, f64> {
        let triplets: Vec<_> = self.entries().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        SparseColMat::try_new_from_triplets(self.n_rows, self.n_cols, &triplets)
            .expect("CSR structure is always a valid triplet list")
    }

    /// Matrix Market coordinate format (1-based indices).
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.n_rows, self.n_cols, self.nnz())?;
        for (r, c, v) in self.entries() {
            writeln!(out, "{} {} {:e}", r + 1, c + 1, v)?;
        }
        Ok(())
    }

    pub(crate) fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub(crate) fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CsrMatrix {
        CsrMatrix::from_triplets(
            3,
            3,
            &[
                (0, 0, 2.0),
                (0, 2, -1.0),
                (1, 1, 3.0),
                (2, 0, 1.0),
                (2, 2, 4.0),
                (0, 0, 1.0),
            ],
        )
    }

    #[test]
    fn duplicates_are_summed() {
        let a = sample();
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.nnz(), 5);
        assert_eq!(a.get(1, 2), 0.0);
    }

    #[test]
    fn matvec_and_transpose_agree() {
        let a = sample();
        let x = [1.0, -2.0, 0.5];
        assert_eq!(a.matvec(&x), vec![2.5, -6.0, 3.0]);
        assert_eq!(a.transpose().matvec(&x), a.matvec_transpose(&x));
    }

    #[test]
    fn identity_shift_and_submatrix() {
        let a = sample().add_identity(-1.0);
        assert_eq!(a.diagonal(), vec![2.0, 2.0, 3.0]);
        let s = a.principal_submatrix(&[2, 0]);
        assert_eq!(s.get(0, 0), 3.0);
        assert_eq!(s.get(0, 1), 1.0);
        assert_eq!(s.get(1, 0), -1.0);
    }

    #[test]
    fn matrix_market_header() {
        let mut buf = Vec::new();
        sample().write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n3 3 5\n1 1 3e0\n"));
    }
}
