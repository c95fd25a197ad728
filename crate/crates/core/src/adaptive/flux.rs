//! Outgoing probability flux and the flux-driven time step.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::generator::ExitRates;
use crate::network::{apply_into, Kinetics};
use crate::statespace::StateSet;

use super::SolverConfig;

/// Flux summary of a distribution on a state set.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxDiagnostics {
    /// `Phi(x) = p(x) w(x)` for each state.
    pub per_state: Vec<f64>,
    pub total: f64,
    pub max: f64,
    /// Index of the first state attaining `max`.
    pub argmax: usize,
    /// Probability flux through reactions that leave the set.
    pub boundary_outflux: f64,
}

impl FluxDiagnostics {
    /// Diagnostics from probabilities, exit rates and boundary exit rates.
    pub fn compute(p: &[f64], w: &[f64], boundary: &[f64]) -> Result<Self> {
        if w.len() != p.len() {
            return Err(Error::DimensionMismatch { expected: p.len(), found: w.len() });
        }
        if boundary.len() != p.len() {
            return Err(Error::DimensionMismatch { expected: p.len(), found: boundary.len() });
        }
        let per_state: Vec<f64> = p.iter().zip(w).map(|(p, w)| p * w).collect();
        let mut total = 0.0;
        let mut max = 0.0;
        let mut argmax = 0;
        for (i, &phi) in per_state.iter().enumerate() {
            total += phi;
            if phi > max {
                max = phi;
                argmax = i;
            }
        }
        let boundary_outflux = p.iter().zip(boundary).map(|(p, b)| p * b).sum::<f64>().min(total);
        Ok(Self { per_state, total, max, argmax, boundary_outflux })
    }
}

/// Diagnostics for `p` on `set`, enumerating boundary reactions directly.
pub fn flux_diagnostics<K: Kinetics + ?Sized>(
    p: &[f64],
    exit: &ExitRates,
    set: &StateSet,
    kinetics: &K,
) -> Result<FluxDiagnostics> {
    if set.len() != p.len() {
        return Err(Error::DimensionMismatch { expected: set.len(), found: p.len() });
    }
    let mut dst = alloc::vec![0u32; set.n_species()];
    let boundary: Vec<f64> = set
        .iter()
        .map(|x| {
            (0..kinetics.n_reactions())
                .filter(|&k| !(apply_into(x, kinetics.stoichiometry(k), &mut dst) && set.contains(&dst)))
                .map(|k| kinetics.rate(k, x))
                .filter(|a| *a > 0.0)
                .sum()
        })
        .collect();
    FluxDiagnostics::compute(p, &exit.w, &boundary)
}

/// `clamp(dt_tol / Phi_max, dt_min, dt_max)`, or `dt_max` when there is no flux.
pub fn adaptive_dt(diag: &FluxDiagnostics, cfg: &SolverConfig) -> f64 {
    let (lo, hi) = cfg.dt_bounds();
    if !(diag.max > 0.0) {
        return hi;
    }
    (cfg.dt_tol / diag.max).clamp(lo, hi)
}
