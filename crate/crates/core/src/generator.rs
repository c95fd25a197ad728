//! Sparse CME generator assembly by forward enumeration.
//!
//! Column `j` of the generator describes the transitions out of state `x_j`:
//! for each reaction `k` with `alpha_k(x_j) > 0` whose destination `x_j + nu_k`
//! is in the set, the entry `(index(x_j + nu_k), j)` receives `alpha_k(x_j)`.
//! Destinations outside the set are the boundary outflow of the column.
//!
//! Two diagonals are available. [`GeneratorMode::Truncated`] uses the full exit
//! rate `-w(x_j)`, so mass leaving the set is lost (the principal submatrix of
//! the infinite generator). [`GeneratorMode::Compressed`] uses minus the in-set
//! off-diagonal sum, so columns sum to zero and mass is conserved.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::network::{apply_into, Kinetics};
use crate::sparse::{CscBuilder, CscMatrix};
use crate::statespace::StateSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GeneratorMode {
    /// Diagonal is the full exit rate; columns with boundary outflow sum below zero.
    Truncated,
    /// Diagonal is the in-set exit rate; every column sums to zero.
    #[default]
    Compressed,
}

/// A generator matrix together with the mode it was assembled in.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGenerator {
    mode: GeneratorMode,
    matrix: CscMatrix,
}

/// Total exit rates `w(x) = sum_k alpha_k(x)`, aligned with the state set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExitRates {
    pub w: Vec<f64>,
}

impl ExitRates {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.w.iter().copied().fold(0.0, f64::max)
    }
}

/// Result of a single assembly pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub generator: SparseGenerator,
    pub exit_rates: ExitRates,
    /// Part of each exit rate whose destination lies outside the set.
    pub boundary: Vec<f64>,
}

impl SparseGenerator {
    pub fn new(mode: GeneratorMode, matrix: CscMatrix) -> Result<Self> {
        if matrix.n_rows() != matrix.n_cols() {
            return Err(Error::DimensionMismatch { expected: matrix.n_rows(), found: matrix.n_cols() });
        }
        Ok(Self { mode, matrix })
    }

    pub fn mode(&self) -> GeneratorMode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn matrix(&self) -> &CscMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CscMatrix {
        self.matrix
    }

    /// Restricts the generator to the states at `keep` (ascending old indices
    /// after deduplication), dropping rows and columns of removed states.
    ///
    /// Truncated diagonals are kept as is since the full exit rate does not
    /// depend on the set. Compressed diagonals are recomputed from the surviving
    /// off-diagonals. The result equals a fresh assembly on the restricted set.
    pub fn restrict(&self, keep: &[usize]) -> Result<SparseGenerator> {
        let n = self.n();
        let mut map = alloc::vec![u32::MAX; n];
        for &i in keep {
            if i >= n {
                return Err(Error::StateOutOfRange { index: i, len: n });
            }
            map[i] = 0;
        }
        let mut next = 0u32;
        for m in map.iter_mut().filter(|m| **m == 0) {
            *m = next;
            next += 1;
        }
        let new_n = next as usize;
        if new_n == 0 {
            return Err(Error::EmptyKeepSet);
        }
        let mut b = CscBuilder::new(new_n, self.matrix.nnz());
        for (j, &mj) in map.iter().enumerate() {
            if mj == u32::MAX {
                continue;
            }
            let (rows, vals) = self.matrix.column(j);
            let mut diag = None;
            let mut off_sum = 0.0;
            for (&i, &v) in rows.iter().zip(vals) {
                let mi = map[i as usize];
                if mi == u32::MAX {
                    continue;
                }
                if i as usize == j {
                    diag = Some(v);
                } else {
                    off_sum += v;
                }
            }
            let diag = match self.mode {
                GeneratorMode::Truncated => diag,
                GeneratorMode::Compressed => (off_sum > 0.0).then_some(-off_sum),
            };
            for (&i, &v) in rows.iter().zip(vals) {
                let mi = map[i as usize];
                if mi == u32::MAX {
                    continue;
                }
                if i as usize == j {
                    if let Some(d) = diag {
                        b.push(mi as usize, d);
                    }
                } else {
                    b.push(mi as usize, v);
                }
            }
            b.finish_column();
        }
        let matrix = b.build();
        // A compressed column whose old diagonal was absent cannot gain in-set
        // off-diagonals by restriction, so the diagonal never needs inserting.
        Ok(SparseGenerator { mode: self.mode, matrix })
    }
}

impl AsRef<CscMatrix> for SparseGenerator {
    fn as_ref(&self) -> &CscMatrix {
        &self.matrix
    }
}

/// Exit rate of every state in `set`, including reactions that leave the set.
pub fn exit_rates<K: Kinetics + ?Sized>(set: &StateSet, kinetics: &K) -> ExitRates {
    let r = kinetics.n_reactions();
    let w = set.iter().map(|x| (0..r).map(|k| kinetics.rate(k, x)).sum()).collect();
    ExitRates { w }
}

/// Assembles the generator on `set`.
pub fn assemble<K: Kinetics + ?Sized>(set: &StateSet, kinetics: &K, mode: GeneratorMode) -> SparseGenerator {
    assemble_full(set, kinetics, mode).generator
}

/// Assembles the generator and returns exit and boundary rates from the same
/// pass. Propensities are evaluated exactly `|S| * R` times.
pub fn assemble_full<K: Kinetics + ?Sized>(set: &StateSet, kinetics: &K, mode: GeneratorMode) -> Assembly {
    let n = set.len();
    let r = kinetics.n_reactions();
    let mut b = CscBuilder::new(n, n * (r + 1));
    let mut w = Vec::with_capacity(n);
    let mut boundary = Vec::with_capacity(n);
    let mut dst = alloc::vec![0u32; set.n_species()];
    let mut column: Vec<(u32, f64)> = Vec::with_capacity(r + 1);
    for j in 0..n {
        let x = set.state(j);
        column.clear();
        let mut wj = 0.0;
        let mut out = 0.0;
        for k in 0..r {
            let a = kinetics.rate(k, x);
            if !(a > 0.0) {
                continue;
            }
            wj += a;
            let target = if apply_into(x, kinetics.stoichiometry(k), &mut dst) { set.index_of(&dst) } else { None };
            match target {
                Some(i) => column.push((i as u32, a)),
                None => out += a,
            }
        }
        push_column(&mut b, &mut column, j, wj, mode);
        w.push(wj);
        boundary.push(out);
    }
    Assembly {
        generator: SparseGenerator { mode, matrix: b.build() },
        exit_rates: ExitRates { w },
        boundary,
    }
}

/// Sorts the off-diagonal entries of column `j` by row, merges duplicate rows in
/// reaction order, inserts the diagonal and appends the column.
fn push_column(b: &mut CscBuilder, column: &mut Vec<(u32, f64)>, j: usize, w: f64, mode: GeneratorMode) {
    column.sort_by_key(|e| e.0);
    let mut merged = 0;
    for e in 0..column.len() {
        if merged > 0 && column[merged - 1].0 == column[e].0 {
            column[merged - 1].1 += column[e].1;
        } else {
            column[merged] = column[e];
            merged += 1;
        }
    }
    column.truncate(merged);
    let diag = match mode {
        GeneratorMode::Truncated => (w > 0.0).then_some(-w),
        GeneratorMode::Compressed => {
            let s: f64 = column.iter().map(|e| e.1).sum();
            (s > 0.0).then_some(-s)
        }
    };
    let mut diag_pending = diag;
    for &(i, v) in column.iter() {
        if let Some(d) = diag_pending {
            if (i as usize) > j {
                b.push(j, d);
                diag_pending = None;
            }
        }
        b.push(i as usize, v);
    }
    if let Some(d) = diag_pending {
        b.push(j, d);
    }
    b.finish_column();
}

/// Baseline assembly that tests every ordered state pair against every
/// stoichiometry vector. Quadratic in `|S|`; used as an oracle and benchmark
/// baseline.
pub fn assemble_all_pairs<K: Kinetics + ?Sized>(set: &StateSet, kinetics: &K, mode: GeneratorMode) -> SparseGenerator {
    let n = set.len();
    let r = kinetics.n_reactions();
    let d = set.n_species();
    let mut b = CscBuilder::new(n, n * (r + 1));
    let mut column: Vec<(u32, f64)> = Vec::with_capacity(r + 1);
    let mut rates = alloc::vec![0.0; r];
    for j in 0..n {
        let x = set.state(j);
        let mut wj = 0.0;
        for (k, rate) in rates.iter_mut().enumerate() {
            *rate = kinetics.rate(k, x);
            if *rate > 0.0 {
                wj += *rate;
            }
        }
        column.clear();
        for i in 0..n {
            if i == j {
                continue;
            }
            let y = set.state(i);
            for (k, &a) in rates.iter().enumerate() {
                if !(a > 0.0) {
                    continue;
                }
                let nu = kinetics.stoichiometry(k);
                if (0..d).all(|s| i64::from(y[s]) - i64::from(x[s]) == i64::from(nu[s])) {
                    column.push((i as u32, a));
                }
            }
        }
        push_column(&mut b, &mut column, j, wj, mode);
    }
    SparseGenerator { mode, matrix: b.build() }
}
