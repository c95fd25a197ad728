//! The `bench-assembly` subcommand: forward enumeration against the all-pairs
//! baseline.

use std::cell::Cell;
use std::hint::black_box;
use std::time::Instant;

use fluxfsp_core::generator::assemble_all_pairs;
use fluxfsp_core::{assemble, GeneratorMode, Kinetics, ReactionNetwork, StateSet};
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Propensity evaluation counter around a network.
pub struct Counting<'a> {
    pub inner: &'a ReactionNetwork,
    pub evaluations: Cell<u64>,
}

impl<'a> Counting<'a> {
    pub fn new(inner: &'a ReactionNetwork) -> Self {
        Self { inner, evaluations: Cell::new(0) }
    }
}

impl Kinetics for Counting<'_> {
    fn n_species(&self) -> usize {
        self.inner.n_species()
    }

    fn n_reactions(&self) -> usize {
        self.inner.n_reactions()
    }

    fn stoichiometry(&self, k: usize) -> &[i32] {
        self.inner.stoichiometry(k)
    }

    fn rate(&self, k: usize, x: &[u32]) -> f64 {
        self.evaluations.set(self.evaluations.get() + 1);
        self.inner.rate(k, x)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Timing {
    pub median_s: f64,
    pub mean_s: f64,
    pub stddev_s: f64,
}

impl Timing {
    fn from_samples(mut s: Vec<f64>) -> Self {
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let median = if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) };
        let mean = s.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Self { median_s: median, mean_s: mean, stddev_s: var.sqrt() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SizeResult {
    pub requested_states: usize,
    pub n_states: usize,
    pub reactions: usize,
    pub trials: usize,
    pub forward: Timing,
    pub all_pairs: Timing,
    /// Ratio of median times, baseline over forward enumeration.
    pub speedup: f64,
    pub forward_evaluations: u64,
    pub all_pairs_evaluations: u64,
    /// Ordered state pairs times reactions examined by the baseline.
    pub all_pairs_tests: u64,
    /// Whether both methods produced the same matrix.
    pub identical: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub model: String,
    pub results: Vec<SizeResult>,
}

/// The first `n` states reached by breadth-first expansion from `x0`, or the
/// whole reachable set if it is smaller.
pub fn grow_state_set(net: &ReactionNetwork, x0: &[u32], n: usize) -> CliResult<StateSet> {
    let mut set = StateSet::from_states(x0.len(), [x0])?;
    while set.len() < n {
        let next = set.expand(net, 1);
        if next.len() == set.len() {
            break;
        }
        set = next;
    }
    if set.len() > n {
        let keep: Vec<usize> = (0..n).collect();
        set = set.restrict(&keep)?.0;
    }
    Ok(set)
}

fn time<F: FnMut()>(mut f: F) -> f64 {
    let start = Instant::now();
    f();
    start.elapsed().as_secs_f64()
}

pub fn bench_assembly(
    model: &str,
    net: &ReactionNetwork,
    x0: &[u32],
    sizes: &[usize],
    trials: usize,
) -> CliResult<BenchReport> {
    if trials == 0 {
        return Err(CliError::config("trials must be at least 1"));
    }
    if sizes.iter().any(|&n| n == 0) {
        return Err(CliError::config("state-set sizes must be at least 1"));
    }
    let mode = GeneratorMode::Compressed;
    let mut results = Vec::with_capacity(sizes.len());
    for &requested in sizes {
        let set = grow_state_set(net, x0, requested)?;
        let counted = Counting::new(net);
        let fwd = assemble(&set, &counted, mode);
        let forward_evaluations = counted.evaluations.replace(0);
        let base = assemble_all_pairs(&set, &counted, mode);
        let all_pairs_evaluations = counted.evaluations.get();

        let (mut tf, mut tb) = (Vec::with_capacity(trials), Vec::with_capacity(trials));
        for _ in 0..trials {
            tf.push(time(|| {
                black_box(assemble(black_box(&set), net, mode));
            }));
            tb.push(time(|| {
                black_box(assemble_all_pairs(black_box(&set), net, mode));
            }));
        }
        let (forward, all_pairs) = (Timing::from_samples(tf), Timing::from_samples(tb));
        let n = set.len() as u64;
        let r = net.n_reactions() as u64;
        results.push(SizeResult {
            requested_states: requested,
            n_states: set.len(),
            reactions: net.n_reactions(),
            trials,
            forward,
            all_pairs,
            speedup: all_pairs.median_s / forward.median_s.max(f64::MIN_POSITIVE),
            forward_evaluations,
            all_pairs_evaluations,
            all_pairs_tests: n * n.saturating_sub(1) * r,
            identical: fwd == base,
        });
    }
    Ok(BenchReport { model: model.to_string(), results })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fluxfsp_core::builtin_model;

    #[test]
    fn growth_truncates_to_the_requested_size() {
        let (net, x0) = builtin_model("bottleneck").unwrap();
        assert_eq!(grow_state_set(&net, &x0, 1).unwrap().len(), 1);
        assert_eq!(grow_state_set(&net, &x0, 40).unwrap().len(), 40);
    }

    #[test]
    fn single_state_is_well_formed() {
        let (net, x0) = builtin_model("robertson").unwrap();
        let r = bench_assembly("robertson", &net, &x0, &[1], 3).unwrap();
        let s = &r.results[0];
        assert_eq!(s.n_states, 1);
        assert_eq!(s.forward_evaluations, 3);
        assert!(s.identical);
        assert!(s.forward.median_s >= 0.0 && s.all_pairs.median_s >= 0.0);
    }

    #[test]
    fn timing_statistics() {
        let t = Timing::from_samples(vec![3.0, 1.0, 2.0, 10.0]);
        assert_eq!(t.median_s, 2.5);
        assert_eq!(t.mean_s, 4.0);
        assert!((t.stddev_s - (50.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }
}
