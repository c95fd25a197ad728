//! Running bound on the global 1-norm error of an adaptive run.
//!
//! Each step contributes a model term and a time-stepping term. The model term
//! covers the mass that the compressed dynamics keep inside the set instead of
//! letting it leave, plus the mass removed by pruning. Both move probability
//! without destroying it: reflected outflow stays on the boundary state and
//! removed mass is spread over the survivors by renormalization. Moving mass `m`
//! changes a distribution by up to `2m` in the 1-norm, hence the factors of two.

use alloc::vec::Vec;

use super::flux::FluxDiagnostics;
use super::prune::{PruneParams, PruneReport};

/// Error contributions of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepError {
    /// Time at the end of the step.
    pub t: f64,
    pub dt: f64,
    /// Model error `eps_n`.
    pub model: f64,
    /// Time-stepping error `tau_n`.
    pub stepping: f64,
    /// `(flux_tol * Phi_total + alpha * w_max) * dt`, the a-priori estimate from
    /// the pruning parameters.
    pub a_priori: f64,
    /// Outflow mass over the step: the larger of `Phi_out(t_n) dt` and the
    /// integrated boundary flux.
    pub outflow: f64,
    pub removed_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorLedger {
    pub model_error_bound: f64,
    pub stepping_error_bound: f64,
    pub pruned_mass_total: f64,
    pub records: Vec<StepError>,
}

/// `(flux_tol * phi_total + quantile_tol * w_max) * dt`.
pub fn a_priori_bound(params: &PruneParams, phi_total: f64, w_max: f64, dt: f64) -> f64 {
    (params.flux_tol * phi_total + params.quantile_tol * w_max) * dt
}

impl ErrorLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bound on the 1-norm distance to the exact CME solution.
    pub fn global_bound(&self) -> f64 {
        self.model_error_bound + self.stepping_error_bound
    }

    /// Global bound accumulated over the steps ending at or before `t`.
    pub fn bound_at(&self, t: f64) -> f64 {
        self.records.iter().take_while(|r| r.t <= t).map(|r| r.model + r.stepping).sum()
    }

    /// Records one step.
    ///
    /// `diag` is evaluated at the start of the step, `outflow_integral` is the
    /// boundary flux integrated over the step and `tau` the time-stepping error.
    #[allow(clippy::too_many_arguments)]
    pub fn update(
        &mut self,
        t: f64,
        dt: f64,
        diag: &FluxDiagnostics,
        outflow_integral: f64,
        report: &PruneReport,
        tau: f64,
        params: &PruneParams,
    ) -> StepError {
        let outflow = (diag.boundary_outflux * dt).max(outflow_integral).max(0.0);
        let removed = report.removed_mass.max(0.0);
        let entry = StepError {
            t,
            dt,
            model: 2.0 * (outflow + removed),
            stepping: tau.max(0.0),
            a_priori: a_priori_bound(params, diag.total, report.w_max_removed, dt),
            outflow,
            removed_mass: removed,
        };
        self.model_error_bound += entry.model;
        self.stepping_error_bound += entry.stepping;
        self.pruned_mass_total += removed;
        self.records.push(entry);
        entry
    }
}
