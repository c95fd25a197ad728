//! Compressed sparse column storage.

use alloc::vec::Vec;

use crate::dense::DenseMatrix;

/// Square-or-rectangular CSC matrix with sorted row indices in each column.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    n_rows: usize,
    n_cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    values: Vec<f64>,
}

/// Column-by-column builder. Entries of a column must be pushed in strictly
/// increasing row order.
#[derive(Debug, Clone)]
pub struct CscBuilder {
    n_rows: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    values: Vec<f64>,
}

impl CscBuilder {
    pub fn new(n_rows: usize, nnz_hint: usize) -> Self {
        let mut col_ptr = Vec::with_capacity(n_rows + 1);
        col_ptr.push(0);
        Self {
            n_rows,
            col_ptr,
            row_idx: Vec::with_capacity(nnz_hint),
            values: Vec::with_capacity(nnz_hint),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, value: f64) {
        debug_assert!(row < self.n_rows);
        debug_assert!(
            self.row_idx.len() == *self.col_ptr.last().unwrap()
                || (self.row_idx.last().map_or(true, |&r| (r as usize) < row)),
            "rows must increase within a column"
        );
        self.row_idx.push(row as u32);
        self.values.push(value);
    }

    pub fn finish_column(&mut self) {
        self.col_ptr.push(self.row_idx.len());
    }

    pub fn build(self) -> CscMatrix {
        CscMatrix {
            n_rows: self.n_rows,
            n_cols: self.col_ptr.len() - 1,
            col_ptr: self.col_ptr,
            row_idx: self.row_idx,
            values: self.values,
        }
    }
}

impl CscMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            col_ptr: alloc::vec![0; n_cols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut b = CscBuilder::new(n_rows, sorted.len());
        let mut it = sorted.into_iter().peekable();
        for col in 0..n_cols {
            while let Some(&(r, c, mut v)) = it.peek() {
                if c != col {
                    break;
                }
                it.next();
                while let Some(&(r2, c2, v2)) = it.peek() {
                    if r2 == r && c2 == c {
                        v += v2;
                        it.next();
                    } else {
                        break;
                    }
                }
                b.push(r, v);
            }
            b.finish_column();
        }
        b.build()
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

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_indices(&self) -> &[u32] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row indices and values of column `j`.
    #[inline]
    pub fn column(&self, j: usize) -> (&[u32], &[f64]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    /// Stored entry at `(i, j)`, or zero.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (rows, vals) = self.column(j);
        rows.binary_search(&(i as u32)).map_or(0.0, |k| vals[k])
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_cols).flat_map(move |j| {
            let (rows, vals) = self.column(j);
            rows.iter().zip(vals).map(move |(&i, &v)| (i as usize, j, v))
        })
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        y.fill(0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let r = self.col_ptr[j]..self.col_ptr[j + 1];
            for (&i, &v) in self.row_idx[r.clone()].iter().zip(&self.values[r]) {
                y[i as usize] += v * xj;
            }
        }
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.n_cols).map(|j| self.column(j).1.iter().sum()).collect()
    }

    /// Induced 1-norm (largest absolute column sum).
    pub fn norm1(&self) -> f64 {
        (0..self.n_cols)
            .map(|j| self.column(j).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_cols.min(self.n_rows)).map(|j| self.get(j, j)).collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros_rect(self.n_rows, self.n_cols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] += v;
        }
        d
    }

    /// Appends one extra row whose entry in column `j` is `row[j]` (zeros skipped)
    /// and one extra all-zero column.
    pub fn with_extra_row_and_column(&self, row: &[f64]) -> CscMatrix {
        debug_assert_eq!(row.len(), self.n_cols);
        let extra = self.n_rows;
        let mut b = CscBuilder::new(self.n_rows + 1, self.nnz() + self.n_cols);
        for (j, &rj) in row.iter().enumerate() {
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                b.push(i as usize, v);
            }
            if rj != 0.0 {
                b.push(extra, rj);
            }
            b.finish_column();
        }
        b.finish_column();
        b.build()
    }
}
