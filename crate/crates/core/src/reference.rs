//! Fixed-box FSP reference solutions and distribution comparison.
//!
//! The reference solver enumerates every state reachable from `x0` without
//! leaving a box, assembles the truncated generator once and evolves the point
//! mass through the requested times. Mass that leaves the box is lost, so the
//! retained mass at each time certifies the accuracy of the truncation.

use alloc::vec::Vec;

use crate::dense::expm_dense;
use crate::error::{Error, Result};
use crate::expmv::{expmv, ExpmvMethod, ExpmvOptions};
use crate::generator::{assemble, GeneratorMode};
use crate::network::{apply_into, Kinetics};
use crate::statespace::StateSet;

/// Default cap on the number of reference states.
pub const DEFAULT_BOX_CAP: usize = 1_000_000;

/// Largest order solved with the dense exponential.
pub const DENSE_LIMIT: usize = 500;

/// Inclusive per-species bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxSpec {
    lower: Vec<u32>,
    upper: Vec<u32>,
    cap: usize,
}

impl BoxSpec {
    pub fn new(lower: Vec<u32>, upper: Vec<u32>) -> Result<Self> {
        Self::with_cap(lower, upper, DEFAULT_BOX_CAP)
    }

    pub fn with_cap(lower: Vec<u32>, upper: Vec<u32>, cap: usize) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(Error::InvalidConfig("box lower bound exceeds upper bound".into()));
        }
        Ok(Self { lower, upper, cap })
    }

    /// The box `0..=upper`.
    pub fn from_upper(upper: Vec<u32>) -> Result<Self> {
        Self::new(alloc::vec![0; upper.len()], upper)
    }

    pub fn lower(&self) -> &[u32] {
        &self.lower
    }

    pub fn upper(&self) -> &[u32] {
        &self.upper
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn contains(&self, x: &[u32]) -> bool {
        x.len() == self.lower.len() && x.iter().zip(&self.lower).zip(&self.upper).all(|((v, l), u)| l <= v && v <= u)
    }

    /// Number of lattice points in the box.
    pub fn lattice_size(&self) -> u128 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u128::from(u - l) + 1).product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceMethod {
    /// Dense exponential up to [`DENSE_LIMIT`] states, otherwise the cheaper
    /// sparse route.
    #[default]
    Auto,
    Dense,
    Krylov,
    Uniformization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceOptions {
    pub t0: f64,
    /// 1-norm accuracy of each sparse evolution segment.
    pub tol: f64,
    pub method: ReferenceMethod,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self { t0: 0.0, tol: 1e-12, method: ReferenceMethod::Auto }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePoint {
    pub t: f64,
    pub p: Vec<f64>,
    /// `1^T p(t)`; one minus the mass that left the box.
    pub retained_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub states: StateSet,
    pub points: Vec<ReferencePoint>,
    pub method: ReferenceMethod,
}

impl ReferenceSolution {
    pub fn at(&self, t: f64) -> Option<&ReferencePoint> {
        self.points.iter().find(|p| p.t == t)
    }
}

/// States reachable from `x0` by admissible firings that stay inside `bounds`,
/// in breadth-first order.
pub fn enumerate_box<K: Kinetics + ?Sized>(kinetics: &K, x0: &[u32], bounds: &BoxSpec) -> Result<StateSet> {
    if x0.len() != kinetics.n_species() || bounds.lower.len() != x0.len() {
        return Err(Error::DimensionMismatch { expected: kinetics.n_species(), found: x0.len() });
    }
    if !bounds.contains(x0) {
        return Err(Error::OutsideBox);
    }
    let mut set = StateSet::from_states(x0.len(), [x0])?;
    let mut dst = alloc::vec![0u32; x0.len()];
    let mut src = alloc::vec![0u32; x0.len()];
    let mut head = 0;
    while head < set.len() {
        src.copy_from_slice(set.state(head));
        head += 1;
        for k in 0..kinetics.n_reactions() {
            if !apply_into(&src, kinetics.stoichiometry(k), &mut dst) || !bounds.contains(&dst) || set.contains(&dst) {
                continue;
            }
            if kinetics.rate(k, &src) > 0.0 {
                set.insert(&dst);
                if set.len() > bounds.cap {
                    return Err(Error::BoxTooLarge { count: set.len() as u128, cap: bounds.cap });
                }
            }
        }
    }
    Ok(set)
}

/// Evolves the point mass at `x0` on the box-restricted state space and
/// returns the distribution at each time in `times` (sorted, `>= t0`).
pub fn full_fsp_reference<K: Kinetics + ?Sized>(
    kinetics: &K,
    x0: &[u32],
    bounds: &BoxSpec,
    times: &[f64],
    opts: &ReferenceOptions,
) -> Result<ReferenceSolution> {
    let mut times: Vec<f64> = times.to_vec();
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.iter().any(|&t| !(t >= opts.t0) || !t.is_finite()) {
        return Err(Error::InvalidConfig("reference times must be finite and not before t0".into()));
    }
    let states = enumerate_box(kinetics, x0, bounds)?;
    let n = states.len();
    let generator = assemble(&states, kinetics, GeneratorMode::Truncated);
    let method = match opts.method {
        ReferenceMethod::Auto if n <= DENSE_LIMIT => ReferenceMethod::Dense,
        ReferenceMethod::Auto => ReferenceMethod::Auto,
        m => m,
    };
    let dense = match method {
        ReferenceMethod::Dense => Some(generator.matrix().to_dense()),
        _ => None,
    };
    let sparse_opts = ExpmvOptions {
        tol: opts.tol,
        method: match method {
            ReferenceMethod::Krylov => ExpmvMethod::Krylov,
            ReferenceMethod::Uniformization => ExpmvMethod::Uniformization,
            _ => ExpmvMethod::Auto,
        },
        max_substeps: 10_000_000,
        ..ExpmvOptions::default()
    };

    let mut p = alloc::vec![0.0; n];
    p[0] = 1.0;
    let mut t = opts.t0;
    let mut points = Vec::with_capacity(times.len());
    for &target in &times {
        let dt = target - t;
        if dt > 0.0 {
            p = match &dense {
                Some(a) => expm_dense(a, dt)?.matvec(&p),
                None => expmv(generator.matrix(), &p, dt, &sparse_opts)?.w,
            };
            for x in &mut p {
                *x = x.max(0.0);
            }
        }
        t = target;
        points.push(ReferencePoint { t, retained_mass: p.iter().sum(), p: p.clone() });
    }
    Ok(ReferenceSolution { states, points, method })
}

/// Per-species means and distances between two distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonMetrics {
    pub mean_adaptive: Vec<f64>,
    pub mean_reference: Vec<f64>,
    pub abs_error: Vec<f64>,
    /// `abs_error / max(|mean_reference|, 1e-30)`.
    pub rel_error: Vec<f64>,
    /// 1-norm distance on the union of the supports.
    pub l1_distance: f64,
}

/// Compares an adaptive distribution against a reference distribution.
pub fn compare(
    adaptive_states: &StateSet,
    adaptive_p: &[f64],
    reference_states: &StateSet,
    reference_p: &[f64],
) -> Result<ComparisonMetrics> {
    if adaptive_states.n_species() != reference_states.n_species() {
        return Err(Error::DimensionMismatch { expected: reference_states.n_species(), found: adaptive_states.n_species() });
    }
    if adaptive_p.len() != adaptive_states.len() {
        return Err(Error::DimensionMismatch { expected: adaptive_states.len(), found: adaptive_p.len() });
    }
    if reference_p.len() != reference_states.len() {
        return Err(Error::DimensionMismatch { expected: reference_states.len(), found: reference_p.len() });
    }
    let mean_adaptive = adaptive_states.means(adaptive_p);
    let mean_reference = reference_states.means(reference_p);
    let abs_error: Vec<f64> = mean_adaptive.iter().zip(&mean_reference).map(|(a, r)| (a - r).abs()).collect();
    let rel_error = abs_error.iter().zip(&mean_reference).map(|(e, r)| e / r.abs().max(1e-30)).collect();
    let mut l1 = 0.0;
    for (x, &pa) in adaptive_states.iter().zip(adaptive_p) {
        let pr = reference_states.index_of(x).map_or(0.0, |j| reference_p[j]);
        l1 += (pa - pr).abs();
    }
    for (x, &pr) in reference_states.iter().zip(reference_p) {
        if !adaptive_states.contains(x) {
            l1 += pr.abs();
        }
    }
    Ok(ComparisonMetrics { mean_adaptive, mean_reference, abs_error, rel_error, l1_distance: l1 })
}
