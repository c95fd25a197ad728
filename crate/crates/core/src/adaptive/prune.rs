//! Flux-preserving pruning.
//!
//! The lowest-probability states whose combined mass stays within the quantile
//! tolerance are pruning candidates. A candidate survives if its outgoing flux
//! is at least `flux_tol` times the total flux, which keeps low-probability
//! states that carry the dynamics (bridges between high-probability regions).
//! The highest-probability state is never removed.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::statespace::StateSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruneParams {
    /// Largest total mass eligible for removal, `0 < alpha < 1`.
    pub quantile_tol: f64,
    /// Relative flux threshold for protection; zero disables protection.
    pub flux_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PruneReport {
    pub candidates: usize,
    pub protected: usize,
    pub removed: usize,
    /// Mass removed before renormalization.
    pub removed_mass: f64,
    /// Largest exit rate among removed states (zero when none removed).
    pub w_max_removed: f64,
    /// Mass before pruning.
    pub mass_before: f64,
    /// Old indices of the surviving states, ascending.
    pub kept: Vec<usize>,
}

impl PruneReport {
    /// Report for a set left untouched.
    pub fn unchanged(n: usize, mass: f64) -> Self {
        Self { mass_before: mass, kept: (0..n).collect(), ..Self::default() }
    }
}

/// Prunes `set` given probabilities `p` and exit rates `w`, returning the new
/// set, the renormalized probabilities on it and a report.
pub fn prune(set: &StateSet, p: &[f64], w: &[f64], params: &PruneParams) -> Result<(StateSet, Vec<f64>, PruneReport)> {
    let n = set.len();
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p.len() });
    }
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: w.len() });
    }
    let (remove, mut report) = select(p, w, params)?;
    let (new_set, map) = set.restrict_mask(&remove.iter().map(|r| !r).collect::<Vec<_>>())?;
    let mut q = alloc::vec![0.0; new_set.len()];
    let mut kept_mass = 0.0;
    for (i, m) in map.iter().enumerate() {
        if let Some(j) = *m {
            q[j] = p[i];
            kept_mass += p[i];
        }
    }
    if !(kept_mass > 0.0) {
        return Err(Error::AllStatesPruned);
    }
    for x in &mut q {
        *x /= kept_mass;
    }
    report.kept = map.iter().enumerate().filter_map(|(i, m)| m.map(|_| i)).collect();
    Ok((new_set, q, report))
}

/// Removal mask and report without touching the set.
pub fn select(p: &[f64], w: &[f64], params: &PruneParams) -> Result<(Vec<bool>, PruneReport)> {
    let n = p.len();
    let mass: f64 = p.iter().sum();
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::AllStatesPruned);
    }
    // Non-negative floats order like their bit patterns; the index breaks ties.
    let key = |x: f64| if x > 0.0 { x.to_bits() } else { 0 };
    let mut order: Vec<(u64, u32)> = p.iter().enumerate().map(|(i, &x)| (key(x), i as u32)).collect();
    order.sort_unstable();
    let top = (0..n).fold(0, |best, i| if p[i] > p[best] { i } else { best });

    let phi_total: f64 = p.iter().zip(w).map(|(p, w)| p * w).sum();
    let threshold = params.flux_tol * phi_total;
    let mut remove = alloc::vec![false; n];
    let mut report = PruneReport { mass_before: mass, ..PruneReport::default() };
    let mut cum = 0.0;
    for &(_, i) in &order {
        let i = i as usize;
        cum += p[i].max(0.0);
        if cum > params.quantile_tol {
            break;
        }
        report.candidates += 1;
        let phi = p[i] * w[i];
        if i == top || (params.flux_tol > 0.0 && phi >= threshold) {
            report.protected += 1;
            continue;
        }
        remove[i] = true;
        report.removed += 1;
        report.removed_mass += p[i].max(0.0);
        report.w_max_removed = report.w_max_removed.max(w[i]);
    }
    Ok((remove, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_set(n: usize) -> StateSet {
        let mut s = StateSet::new(1);
        for i in 0..n as u32 {
            s.insert(&[i]);
        }
        s
    }

    #[test]
    fn hand_executed_example() {
        let s = line_set(4);
        let p = [0.96, 0.02, 0.015, 0.005];
        let w = [1.0, 1.0, 100.0, 1.0];
        let params = PruneParams { quantile_tol: 0.05, flux_tol: 0.1 };
        let (s2, q, r) = prune(&s, &p, &w, &params).unwrap();
        assert_eq!(r.candidates, 3);
        assert_eq!(r.protected, 1);
        assert_eq!(r.removed, 2);
        assert!((r.removed_mass - 0.025).abs() < 1e-15);
        assert_eq!(r.w_max_removed, 1.0);
        assert_eq!(r.kept, alloc::vec![0, 2]);
        assert_eq!(s2.len(), 2);
        assert!((q[0] - 0.96 / 0.975).abs() < 1e-15);
        assert!((q[1] - 0.015 / 0.975).abs() < 1e-15);
    }

    #[test]
    fn probability_only_pruning_cuts_the_bridge() {
        let mut s = StateSet::new(3);
        for x in [[1u32, 0, 0], [0, 1, 2], [0, 1, 1], [0, 1, 0]] {
            s.insert(&x);
        }
        let p = [0.999, 6.3e-4, 3.7e-4, 1e-5];
        let w = [1e-6, 1.0, 1.0, 1.0];
        let (s2, q, r) = prune(&s, &p, &w, &PruneParams { quantile_tol: 0.9, flux_tol: 0.0 }).unwrap();
        assert_eq!(s2.len(), 1);
        assert_eq!(s2.state(0), &[1, 0, 0]);
        assert_eq!(q, alloc::vec![1.0]);
        assert_eq!(r.removed, 3);
    }

    #[test]
    fn empty_candidate_set_only_renormalizes() {
        let s = line_set(3);
        let (s2, q, r) = prune(&s, &[0.5, 0.3, 0.1], &[1.0; 3], &PruneParams { quantile_tol: 0.01, flux_tol: 0.0 }).unwrap();
        assert_eq!(s2, s);
        assert_eq!(r.candidates, 0);
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ties_prefer_lower_index() {
        let s = line_set(4);
        let p = [0.1, 0.1, 0.1, 0.7];
        let (_, _, r) = prune(&s, &p, &[1.0; 4], &PruneParams { quantile_tol: 0.15, flux_tol: 0.5 }).unwrap();
        assert_eq!(r.kept, alloc::vec![1, 2, 3]);
    }

    #[test]
    fn zero_mass_is_rejected() {
        let s = line_set(2);
        assert_eq!(
            prune(&s, &[0.0, 0.0], &[1.0, 1.0], &PruneParams { quantile_tol: 0.5, flux_tol: 0.0 }).unwrap_err(),
            Error::AllStatesPruned
        );
    }
}
