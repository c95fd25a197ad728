//! Action of the matrix exponential on a vector, `w = exp(tA) v`.
//!
//! The main route is an Arnoldi projection onto a Krylov subspace of dimension
//! `m` with adaptive time substepping, in the style of Expokit's `dgexpv`. The
//! local error estimate is measured in the 1-norm and each substep of length
//! `h` is allotted `h / t` of half the requested tolerance.
//!
//! For generator matrices (non-negative off-diagonals, non-positive column sums)
//! uniformization is also available: `exp(tA) = sum_k Poisson(k; Lt) P^k` with
//! `P = I + A / L`. Every term is non-negative and the truncation error is the
//! discarded Poisson tail, so the 1-norm bound is rigorous. It needs about `Lt`
//! matrix-vector products and wins whenever `Lt` is moderate.
//!
//! Very small, stiff problems are cheapest as a dense exponential of the whole
//! matrix, so `Auto` also considers that.

use alloc::vec::Vec;

use crate::dense::{expm_dense, DenseMatrix};
use crate::error::{Error, Result};
use crate::kernels;
use crate::math;
use crate::sparse::CscMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ExpmvMethod {
    /// Whichever of the other methods has the lowest estimated cost.
    /// Uniformization is only considered for generator matrices and the dense
    /// route only up to [`DENSE_AUTO_MAX`] states.
    #[default]
    Auto,
    Krylov,
    Uniformization,
    /// Dense scaling-and-squaring exponential of the full matrix.
    Dense,
}

/// Largest dimension for which `Auto` considers the dense route.
pub const DENSE_AUTO_MAX: usize = 160;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpmvOptions {
    /// Requested 1-norm accuracy relative to `||v||_1`.
    pub tol: f64,
    /// Krylov subspace dimension `m` (capped at the problem dimension).
    pub krylov_dim: usize,
    /// Upper bound on Krylov substeps plus rejections.
    pub max_substeps: usize,
    pub method: ExpmvMethod,
    /// Starting substep length; defaults to the a-priori estimate.
    pub initial_substep: Option<f64>,
    /// Replace negative output entries by zero and report their mass.
    pub clamp_negative: bool,
}

impl Default for ExpmvOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            krylov_dim: 30,
            max_substeps: 100_000,
            method: ExpmvMethod::Auto,
            initial_substep: None,
            clamp_negative: true,
        }
    }
}

impl ExpmvOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!("expmv tolerance must be positive, got {}", self.tol)));
        }
        if self.krylov_dim == 0 {
            return Err(Error::InvalidConfig("krylov dimension must be at least 1".into()));
        }
        if self.max_substeps == 0 {
            return Err(Error::InvalidConfig("max_substeps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpmvOutput {
    pub w: Vec<f64>,
    /// Method actually used.
    pub method: ExpmvMethod,
    /// Accepted Krylov substeps, or 1 for uniformization.
    pub substeps: usize,
    pub rejected: usize,
    pub matvecs: usize,
    /// Total magnitude of negative entries replaced by zero.
    pub clamped_mass: f64,
    /// Smallest entry before clamping.
    pub min_entry: f64,
    /// Accumulated local error estimate (1-norm).
    pub error_estimate: f64,
    /// True when the result is exact up to rounding (invariant subspace found,
    /// `t = 0` or `A = 0`).
    pub exact: bool,
    /// Length of the last accepted Krylov substep; a good starting guess for the
    /// next call on a similar matrix.
    pub last_substep: f64,
    /// `int_0^t b . p(s) ds` when a boundary-rate vector was supplied.
    pub outflow: f64,
}

/// `exp(tA) v`.
pub fn expmv(a: &CscMatrix, v: &[f64], t: f64, opts: &ExpmvOptions) -> Result<ExpmvOutput> {
    expmv_impl(a, None, v, t, opts)
}

/// `exp(tA) v` together with the time integral of `b . p(s)` along the path
/// `p(s) = exp(sA) v`. With `b` the boundary exit rates this is the probability
/// mass that would have left the set.
pub fn expmv_with_outflow(a: &CscMatrix, b: &[f64], v: &[f64], t: f64, opts: &ExpmvOptions) -> Result<ExpmvOutput> {
    if b.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: v.len(), found: b.len() });
    }
    expmv_impl(a, Some(b), v, t, opts)
}

fn expmv_impl(a: &CscMatrix, b: Option<&[f64]>, v: &[f64], t: f64, opts: &ExpmvOptions) -> Result<ExpmvOutput> {
    opts.validate()?;
    let n = v.len();
    if a.n_rows() != n || a.n_cols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.n_cols() });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidConfig(alloc::format!("expmv time must be finite and non-negative, got {t}")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { t: 0.0 });
    }
    if t == 0.0 || a.nnz() == 0 || n == 0 {
        let outflow = b.map_or(0.0, |b| t * kernels::dot(b, v));
        return Ok(finish(v.to_vec(), ExpmvMethod::Auto, 0, 0, 0, 0.0, true, 0.0, outflow, opts));
    }
    let method = match opts.method {
        ExpmvMethod::Auto => choose_method(a, t, opts.krylov_dim),
        ExpmvMethod::Uniformization => {
            if uniformization_rate(a).is_none() {
                return Err(Error::InvalidConfig("uniformization requires a generator matrix".into()));
            }
            ExpmvMethod::Uniformization
        }
        ExpmvMethod::Krylov => ExpmvMethod::Krylov,
        ExpmvMethod::Dense => ExpmvMethod::Dense,
    };
    match method {
        ExpmvMethod::Uniformization => {
            let rate = uniformization_rate(a).expect("checked generator");
            uniformize(a, rate, b, v, t, opts)
        }
        _ => match b {
            None => krylov(a, v, t, opts, None, method == ExpmvMethod::Dense),
            Some(b) => {
                // Append a sink row collecting b . p; its column is zero.
                let aug = a.with_extra_row_and_column(b);
                let mut va = Vec::with_capacity(n + 1);
                va.extend_from_slice(v);
                va.push(0.0);
                krylov(&aug, &va, t, opts, Some(n), method == ExpmvMethod::Dense)
            }
        },
    }
}

/// `exp(tA) v` through the dense exponential of `A`.
fn dense_expmv(a: &CscMatrix, v: &[f64], t: f64) -> Result<Vec<f64>> {
    let e = expm_dense(&a.to_dense(), t)?;
    let w = e.matvec(v);
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { t });
    }
    Ok(w)
}

/// Uniformization rate `max_j -A_jj` when `A` has non-negative off-diagonals
/// and non-positive column sums, `None` otherwise.
fn uniformization_rate(a: &CscMatrix) -> Option<f64> {
    let mut rate = 0.0f64;
    for j in 0..a.n_cols() {
        let (rows, vals) = a.column(j);
        let mut diag = 0.0;
        let mut sum = 0.0;
        let mut scale = 0.0f64;
        for (&i, &v) in rows.iter().zip(vals) {
            if i as usize == j {
                diag = v;
            } else if v < 0.0 {
                return None;
            }
            sum += v;
            scale = scale.max(v.abs());
        }
        if sum > 1e-12 * scale {
            return None;
        }
        rate = rate.max(-diag);
    }
    Some(rate)
}

fn choose_method(a: &CscMatrix, t: f64, m: usize) -> ExpmvMethod {
    let n_us = a.n_cols();
    let n = n_us as f64;
    let nnz = a.nnz() as f64;
    let anorm_t = a.norm1() * t;
    let mm = m.min(n_us) as f64;
    let krylov_steps = (anorm_t / KRYLOV_REACH).max(1.0);
    let krylov_cost = krylov_steps * (mm * (2.0 * nnz + 2.0 * n) + 2.0 * mm * mm * n + 4.0 * n);
    let mut best = (krylov_cost, ExpmvMethod::Krylov);
    if let Some(rate) = uniformization_rate(a) {
        let lt = rate * t;
        let unif_cost = (lt + 4.0 * math::sqrt(lt) + 5.0) * (2.0 * nnz + 3.0 * n);
        if unif_cost <= best.0 {
            best = (unif_cost, ExpmvMethod::Uniformization);
        }
    }
    if n_us <= DENSE_AUTO_MAX {
        // one extra row and column for the outflow sink, about eight products
        // for the Padé step plus one per squaring
        let nd = n + 1.0;
        let squarings = math::log2(anorm_t.max(1.0)).max(0.0);
        let dense_cost = (squarings + 8.0) * 2.0 * nd * nd * nd;
        if dense_cost < best.0 {
            best = (dense_cost, ExpmvMethod::Dense);
        }
    }
    best.1
}

/// Rough `||A|| h` covered by one Krylov substep, used only for method choice.
const KRYLOV_REACH: f64 = 10.0;

#[allow(clippy::too_many_arguments)]
fn finish(
    mut w: Vec<f64>,
    method: ExpmvMethod,
    substeps: usize,
    rejected: usize,
    matvecs: usize,
    error_estimate: f64,
    exact: bool,
    last_substep: f64,
    outflow: f64,
    opts: &ExpmvOptions,
) -> ExpmvOutput {
    let min_entry = w.iter().copied().fold(f64::INFINITY, f64::min);
    let mut clamped_mass = 0.0;
    if opts.clamp_negative {
        for x in w.iter_mut().filter(|x| **x < 0.0) {
            clamped_mass -= *x;
            *x = 0.0;
        }
    }
    ExpmvOutput {
        w,
        method,
        substeps,
        rejected,
        matvecs,
        clamped_mass,
        min_entry: if min_entry.is_finite() { min_entry } else { 0.0 },
        error_estimate,
        exact,
        last_substep,
        outflow,
    }
}

/// Normalized Poisson(lambda) weights on `left..left + weights.len()`, with
/// both discarded tails below `eps / 2` each.
fn poisson_weights(lambda: f64, eps: f64) -> (usize, Vec<f64>) {
    let mode = math::floor(lambda) as usize;
    let mut right = Vec::new();
    let mut w = 1.0f64;
    let mut k = mode;
    loop {
        let kp = (k + 1) as f64;
        w *= lambda / kp;
        k += 1;
        if w == 0.0 {
            break;
        }
        right.push(w);
        let r = lambda / (kp + 1.0);
        if r < 1.0 && w * r / (1.0 - r) <= 0.5 * eps {
            break;
        }
    }
    let mut left = Vec::new();
    let mut w = 1.0f64;
    let mut k = mode;
    while k > 0 {
        w *= k as f64 / lambda;
        k -= 1;
        if w == 0.0 {
            break;
        }
        left.push(w);
        let r = k as f64 / lambda;
        if r < 1.0 && w * r / (1.0 - r) <= 0.5 * eps {
            break;
        }
    }
    let start = mode - left.len();
    let mut weights: Vec<f64> = left.into_iter().rev().collect();
    weights.push(1.0);
    weights.extend(right);
    // sum from small to large for accuracy
    let mut sorted = weights.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let total: f64 = sorted.iter().sum();
    for x in &mut weights {
        *x /= total;
    }
    (start, weights)
}

fn uniformize(a: &CscMatrix, rate: f64, b: Option<&[f64]>, v: &[f64], t: f64, opts: &ExpmvOptions) -> Result<ExpmvOutput> {
    let n = v.len();
    if rate == 0.0 {
        let outflow = b.map_or(0.0, |b| t * kernels::dot(b, v));
        return Ok(finish(v.to_vec(), ExpmvMethod::Uniformization, 1, 0, 0, 0.0, true, t, outflow, opts));
    }
    let lambda = rate * t;
    // Tails of eps/2 each, then renormalization, give a 1-norm error of at most
    // 2 * eps * ||v||_1.
    let eps = 0.5 * opts.tol;
    let (left, weights) = poisson_weights(lambda, eps);
    let last = left + weights.len() - 1;
    // P(N > k) for the outflow integral; int_0^t Poisson(k; L s) ds = P(N > k) / L
    let mut tail_above = alloc::vec![0.0; weights.len()];
    let mut acc = 0.0;
    for i in (0..weights.len()).rev() {
        tail_above[i] = acc;
        acc += weights[i];
    }
    let inv = 1.0 / rate;
    let mut u = v.to_vec();
    let mut tmp = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let mut outflow = 0.0;
    let mut matvecs = 0;
    for k in 0..=last {
        let (wk, above) = if k >= left { (weights[k - left], tail_above[k - left]) } else { (0.0, 1.0) };
        if wk != 0.0 {
            kernels::axpy(wk, &u, &mut w);
        }
        if let Some(b) = b {
            outflow += kernels::dot(b, &u) * above * inv;
        }
        if k < last {
            a.matvec(&u, &mut tmp);
            matvecs += 1;
            kernels::axpy(inv, &tmp, &mut u);
        }
    }
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { t });
    }
    let err = 2.0 * eps * kernels::norm1(v);
    Ok(finish(w, ExpmvMethod::Uniformization, 1, 0, matvecs, err, false, t, outflow, opts))
}

const GAMMA: f64 = 0.9;
const MAX_REJECT_PER_STEP: usize = 60;

fn round_two_digits(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return x;
    }
    let s = math::powf(10.0, math::floor(math::log10(x)) - 1.0);
    math::ceil(x / s) * s
}

/// Krylov substepping. `sink` is the index of an auxiliary coordinate that is
/// returned as `outflow` and excluded from the output vector.
///
/// With `dense` set, or when the subspace would span the whole space anyway,
/// the full matrix is exponentiated directly instead.
fn krylov(
    a: &CscMatrix,
    v: &[f64],
    t_out: f64,
    opts: &ExpmvOptions,
    sink: Option<usize>,
    dense: bool,
) -> Result<ExpmvOutput> {
    let n = v.len();
    let m = opts.krylov_dim.min(n).max(1);
    let anorm = a.norm1();
    let vnorm1 = kernels::norm1(v);
    let method = if dense { ExpmvMethod::Dense } else { ExpmvMethod::Krylov };
    let finish_vec = |mut w: Vec<f64>, substeps, rejected, matvecs, err, exact, last| {
        let outflow = match sink {
            Some(s) => {
                let o = w[s];
                w.truncate(s);
                o
            }
            None => 0.0,
        };
        finish(w, method, substeps, rejected, matvecs, err, exact, last, outflow, opts)
    };
    if vnorm1 == 0.0 {
        return Ok(finish_vec(v.to_vec(), 0, 0, 0, 0.0, true, 0.0));
    }
    if dense || (opts.krylov_dim >= n && n <= DENSE_AUTO_MAX) {
        let w = dense_expmv(a, v, t_out)?;
        return Ok(finish_vec(w, 1, 0, 0, 0.0, true, 0.0));
    }
    // per unit time, so substeps of total length t share half of tol * ||v||_1
    let budget_rate = 0.5 * opts.tol * vnorm1 / t_out;
    let rndoff = anorm * f64::EPSILON;

    let mut w = v.to_vec();
    let mut beta = kernels::norm2(&w);
    let mut basis = alloc::vec![0.0; (m + 1) * n];
    let mut av = alloc::vec![0.0; n];

    let mut t_new = match opts.initial_substep {
        Some(h0) if h0 > 0.0 => h0,
        _ => {
            let mf = m as f64;
            let xm = 1.0 / mf;
            let fact = math::powf((mf + 1.0) / core::f64::consts::E, mf + 1.0)
                * math::sqrt(2.0 * core::f64::consts::PI * (mf + 1.0));
            round_two_digits((1.0 / anorm) * math::powf(fact * budget_rate / (4.0 * beta * anorm), xm))
        }
    };
    let mut t_now = 0.0;
    let mut substeps = 0;
    let mut rejected = 0;
    let mut matvecs = 0;
    let mut s_error = 0.0;
    let mut all_exact = true;
    let mut last_step = 0.0;

    while t_now < t_out {
        if substeps + rejected >= opts.max_substeps {
            return Err(Error::NonConvergence { substeps: substeps + rejected, reached: t_now, target: t_out });
        }
        let t_rem = t_out - t_now;
        let mut t_step = t_new.min(t_rem);
        if !(t_step > 0.0) {
            t_step = t_rem;
        }

        // Arnoldi with modified Gram-Schmidt
        let mut hm = DenseMatrix::zeros(m + 2);
        basis[..n].copy_from_slice(&w);
        kernels::scale(1.0 / beta, &mut basis[..n]);
        let mut breakdown = None;
        for j in 0..m {
            let (done, rest) = basis.split_at_mut((j + 1) * n);
            let p = &mut rest[..n];
            a.matvec(&done[j * n..], p);
            matvecs += 1;
            for i in 0..=j {
                let vi = &done[i * n..(i + 1) * n];
                let hij = kernels::dot(vi, p);
                kernels::axpy(-hij, vi, p);
                hm[(i, j)] = hij;
            }
            let s = kernels::norm2(p);
            let negligible = s <= f64::EPSILON * anorm || s * t_rem * math::sqrt(n as f64) <= 1e-3 * opts.tol;
            if negligible {
                breakdown = Some(j + 1);
                break;
            }
            hm[(j + 1, j)] = s;
            kernels::scale(1.0 / s, p);
        }

        let (f, err_loc, exact, xm) = if let Some(mb) = breakdown {
            t_step = t_rem;
            let f = expm_dense(&hm.leading(mb), t_step)?;
            (f, 0.0, true, 1.0 / m as f64)
        } else {
            hm[(m + 1, m)] = 1.0;
            let vm = &basis[m * n..(m + 1) * n];
            a.matvec(vm, &mut av);
            matvecs += 1;
            let vm_norm1 = kernels::norm1(vm);
            let avnorm1 = kernels::norm1(&av);
            let mut rejects_here = 0;
            loop {
                let f = expm_dense(&hm, t_step)?;
                let phi1 = (beta * f[(m, 0)]).abs() * vm_norm1;
                let phi2 = (beta * f[(m + 1, 0)]).abs() * avnorm1;
                let (err, xm) = if phi1 > 10.0 * phi2 {
                    (phi2, 1.0 / m as f64)
                } else if phi1 > phi2 {
                    (phi1 * phi2 / (phi1 - phi2), 1.0 / m as f64)
                } else {
                    (phi1, 1.0 / (m.max(2) - 1) as f64)
                };
                if err <= t_step * budget_rate {
                    break (f, err, false, xm);
                }
                rejected += 1;
                rejects_here += 1;
                if rejects_here > MAX_REJECT_PER_STEP || substeps + rejected >= opts.max_substeps {
                    return Err(Error::NonConvergence { substeps: substeps + rejected, reached: t_now, target: t_out });
                }
                t_step = round_two_digits(GAMMA * t_step * math::powf(t_step * budget_rate / err, xm));
                if !(t_step > 0.0) {
                    return Err(Error::NonConvergence { substeps: substeps + rejected, reached: t_now, target: t_out });
                }
            }
        };

        // w = beta * V[:, 0..mx] * F[0..mx, 0], using the extra vector V[m]
        // when the corrected scheme was used
        let mx = match breakdown {
            Some(mb) => mb,
            None => m + 1,
        };
        w.fill(0.0);
        for i in 0..mx {
            let c = beta * f[(i, 0)];
            if c != 0.0 {
                kernels::axpy(c, &basis[i * n..(i + 1) * n], &mut w);
            }
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { t: t_now });
        }
        beta = kernels::norm2(&w);
        t_now += t_step;
        if t_now > t_out || t_rem - t_step <= 1e-15 * t_out {
            t_now = t_out;
        }
        substeps += 1;
        last_step = t_step;
        all_exact &= exact;
        s_error += err_loc.max(rndoff * t_step);
        if exact {
            t_new = t_out;
        } else {
            let ratio = if err_loc > 0.0 { t_step * budget_rate / err_loc } else { 1e6 };
            t_new = round_two_digits(GAMMA * t_step * math::powf(ratio, xm));
        }
        if beta == 0.0 {
            break;
        }
    }
    Ok(finish_vec(w, substeps, rejected, matvecs, s_error, all_exact, last_step))
}
