//! Small dense matrices and the scaling-and-squaring matrix exponential.
//!
//! `expm_dense` is the exact-route oracle for the Krylov solver and also
//! exponentiates the small Hessenberg matrices produced by the Arnoldi process.
//! It follows the degree-3..13 Padé selection with scaling and squaring.

use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::math;

/// Largest order accepted by [`expm_dense`].
pub const MAX_DENSE_ORDER: usize = 2000;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self::zeros_rect(n, n)
    }

    pub fn zeros_rect(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: alloc::vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Leading `k x k` block.
    pub fn leading(&self, k: usize) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(k);
        for i in 0..k {
            out.data[i * k..(i + 1) * k].copy_from_slice(&self.row(i)[..k]);
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros_rect(self.rows, other.cols);
        let n = other.cols;
        for i in 0..self.rows {
            let dst = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (d, &b) in dst.iter_mut().zip(other.row(k)) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// Induced 1-norm.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self[(i, j)]).sum()).collect()
    }

    fn scaled(&self, s: f64) -> DenseMatrix {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    fn add_assign_scaled(&mut self, other: &DenseMatrix, s: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    fn add_identity(&mut self, s: f64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += s;
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `A X = B` in place of `B` by LU with partial pivoting.
fn solve_in_place(mut a: DenseMatrix, b: &mut DenseMatrix) {
    let n = a.rows;
    let m = b.cols;
    for k in 0..n {
        let mut piv = k;
        let mut best = a[(k, k)].abs();
        for i in k + 1..n {
            let v = a[(i, k)].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if piv != k {
            for j in 0..n {
                a.data.swap(k * n + j, piv * n + j);
            }
            for j in 0..m {
                b.data.swap(k * m + j, piv * m + j);
            }
        }
        let d = a[(k, k)];
        if d == 0.0 {
            continue;
        }
        for i in k + 1..n {
            let f = a[(i, k)] / d;
            if f == 0.0 {
                continue;
            }
            a[(i, k)] = f;
            for j in k + 1..n {
                a.data[i * n + j] -= f * a.data[k * n + j];
            }
            for j in 0..m {
                b.data[i * m + j] -= f * b.data[k * m + j];
            }
        }
    }
    for k in (0..n).rev() {
        let d = a[(k, k)];
        for j in 0..m {
            let mut s = b.data[k * m + j];
            for i in k + 1..n {
                s -= a.data[k * n + i] * b.data[i * m + j];
            }
            b.data[k * m + j] = s / d;
        }
    }
}

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn pade_low(a: &DenseMatrix, b: &[f64]) -> DenseMatrix {
    let n = a.rows;
    let a2 = a.matmul(a);
    // even/odd powers A^0, A^2, A^4, ...
    let mut powers = alloc::vec![DenseMatrix::identity(n), a2.clone()];
    let degree = b.len() - 1;
    while 2 * (powers.len() - 1) < degree {
        let next = powers.last().unwrap().matmul(&a2);
        powers.push(next);
    }
    let mut u_inner = DenseMatrix::zeros(n);
    let mut v = DenseMatrix::zeros(n);
    for (k, pk) in powers.iter().enumerate() {
        if 2 * k < b.len() {
            v.add_assign_scaled(pk, b[2 * k]);
        }
        if 2 * k + 1 < b.len() {
            u_inner.add_assign_scaled(pk, b[2 * k + 1]);
        }
    }
    let u = a.matmul(&u_inner);
    pade_solve(u, v)
}

fn pade_13(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows;
    let b = &B13;
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let mut inner = a6.scaled(b[13]);
    inner.add_assign_scaled(&a4, b[11]);
    inner.add_assign_scaled(&a2, b[9]);
    let mut u = a6.matmul(&inner);
    u.add_assign_scaled(&a6, b[7]);
    u.add_assign_scaled(&a4, b[5]);
    u.add_assign_scaled(&a2, b[3]);
    u.add_identity(b[1]);
    let u = a.matmul(&u);
    let mut inner = a6.scaled(b[12]);
    inner.add_assign_scaled(&a4, b[10]);
    inner.add_assign_scaled(&a2, b[8]);
    let mut v = a6.matmul(&inner);
    v.add_assign_scaled(&a6, b[6]);
    v.add_assign_scaled(&a4, b[4]);
    v.add_assign_scaled(&a2, b[2]);
    v.add_identity(b[0]);
    debug_assert_eq!(v.rows, n);
    pade_solve(u, v)
}

fn pade_solve(u: DenseMatrix, v: DenseMatrix) -> DenseMatrix {
    // (V - U) R = (V + U)
    let mut lhs = v.clone();
    lhs.add_assign_scaled(&u, -1.0);
    let mut rhs = v;
    rhs.add_assign_scaled(&u, 1.0);
    solve_in_place(lhs, &mut rhs);
    rhs
}

/// `exp(t A)` by scaling and squaring with Padé approximants.
pub fn expm_dense(a: &DenseMatrix, t: f64) -> Result<DenseMatrix> {
    if a.rows != a.cols {
        return Err(Error::DimensionMismatch { expected: a.rows, found: a.cols });
    }
    let n = a.rows;
    if n > MAX_DENSE_ORDER {
        return Err(Error::MatrixTooLarge { n, max: MAX_DENSE_ORDER });
    }
    if n == 0 {
        return Ok(DenseMatrix::zeros(0));
    }
    // No trace shift: CME generators mix fast and slow states, and shifting by
    // the mean diagonal then overflows exp(t A - mu I) while exp(mu) underflows.
    let m = a.scaled(t);
    let norm = m.norm1();
    if !norm.is_finite() {
        return Err(Error::NonFinite { t });
    }
    let mut result = None;
    for (degree, theta) in THETA {
        if norm <= theta {
            let b: &[f64] = match degree {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            result = Some(pade_low(&m, b));
            break;
        }
    }
    let r = match result {
        Some(r) => r,
        None => {
            let s = math::ceil(math::log10(norm / THETA_13) / core::f64::consts::LOG10_2).max(0.0) as i32;
            let scaled = m.scaled(math::powf(2.0, -f64::from(s)));
            let mut r = pade_13(&scaled);
            for _ in 0..s {
                r = r.matmul(&r);
            }
            r
        }
    };
    Ok(r)
}
