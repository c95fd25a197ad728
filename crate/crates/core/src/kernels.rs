//! Dense vector kernels used by the Krylov solver.
//!
//! Reductions are evaluated over a fixed chunk partition and combined in order,
//! so results are bit-identical whether or not the `parallel` feature is on and
//! independent of the thread count.

const CHUNK: usize = 8192;
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 1 << 15;

#[inline]
fn dot_serial(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let xs = x.chunks_exact(4);
    let ys = y.chunks_exact(4);
    let (xr, yr) = (xs.remainder(), ys.remainder());
    for (a, b) in xs.zip(ys) {
        acc[0] += a[0] * b[0];
        acc[1] += a[1] * b[1];
        acc[2] += a[2] * b[2];
        acc[3] += a[3] * b[3];
    }
    let mut tail = 0.0;
    for (a, b) in xr.iter().zip(yr) {
        tail += a * b;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn abs_sum_serial(x: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let xs = x.chunks_exact(4);
    let xr = xs.remainder();
    for a in xs {
        acc[0] += a[0].abs();
        acc[1] += a[1].abs();
        acc[2] += a[2].abs();
        acc[3] += a[3].abs();
    }
    let tail: f64 = xr.iter().map(|v| v.abs()).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn chunked_sum(n: usize, f: impl Fn(core::ops::Range<usize>) -> f64 + Sync) -> f64 {
    let chunks = n.div_ceil(CHUNK);
    #[cfg(feature = "parallel")]
    if n >= PAR_THRESHOLD {
        use rayon::prelude::*;
        let parts: alloc::vec::Vec<f64> = (0..chunks)
            .into_par_iter()
            .map(|c| f(c * CHUNK..((c + 1) * CHUNK).min(n)))
            .collect();
        return parts.iter().sum();
    }
    let mut total = 0.0;
    for c in 0..chunks {
        total += f(c * CHUNK..((c + 1) * CHUNK).min(n));
    }
    total
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    chunked_sum(x.len(), |r| dot_serial(&x[r.clone()], &y[r]))
}

pub fn norm2(x: &[f64]) -> f64 {
    crate::math::sqrt(dot(x, x))
}

pub fn norm1(x: &[f64]) -> f64 {
    chunked_sum(x.len(), |r| abs_sum_serial(&x[r]))
}

/// `y += a * x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    #[cfg(feature = "parallel")]
    if y.len() >= PAR_THRESHOLD {
        use rayon::prelude::*;
        y.par_chunks_mut(CHUNK)
            .zip(x.par_chunks(CHUNK))
            .for_each(|(yc, xc)| yc.iter_mut().zip(xc).for_each(|(yi, xi)| *yi += a * xi));
        return;
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn scale(a: f64, x: &mut [f64]) {
    for v in x {
        *v *= a;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn reductions_match_naive_sums() {
        let x: Vec<f64> = (0..20_011).map(|i| ((i % 17) as f64 - 8.0) * 0.25).collect();
        let y: Vec<f64> = (0..20_011).map(|i| ((i % 5) as f64) * 0.5).collect();
        let naive: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!((dot(&x, &y) - naive).abs() < 1e-9);
        let naive1: f64 = x.iter().map(|v| v.abs()).sum();
        assert!((norm1(&x) - naive1).abs() < 1e-9);
    }

    #[test]
    fn axpy_accumulates() {
        let x = [1.0, 2.0, 3.0];
        let mut y = [1.0, 1.0, 1.0];
        axpy(2.0, &x, &mut y);
        assert_eq!(y, [3.0, 5.0, 7.0]);
    }
}
