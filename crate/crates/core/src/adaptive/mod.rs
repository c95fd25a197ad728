//! The flux-adaptive FSP solver.
//!
//! Each step expands the active set by a fixed number of reaction firings,
//! assembles the compressed generator, picks `dt` from the largest per-state
//! flux, evolves the distribution with [`crate::expmv`], prunes low-probability
//! states that carry little flux and updates the error ledger.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expmv::{ExpmvMethod, ExpmvOptions};

mod flux;
mod ledger;
mod prune;
mod solver;

pub use flux::{adaptive_dt, flux_diagnostics, FluxDiagnostics};
pub use ledger::{a_priori_bound, ErrorLedger, StepError};
pub use prune::{prune, select as select_pruned, PruneParams, PruneReport};
pub use solver::{run, RunOutput, Snapshot, Solver, StepRecord, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub t0: f64,
    pub tf: f64,
    /// Quantile tolerance `alpha`: mass eligible for pruning per prune.
    pub quantile_tol: f64,
    /// Flux tolerance: candidates with flux at least this fraction of the total
    /// survive. Zero gives probability-only pruning.
    pub flux_tol: f64,
    /// Time-step tolerance: `dt = dt_tol / Phi_max` before clamping.
    pub dt_tol: f64,
    /// Accuracy of each matrix-exponential step (1-norm).
    pub ode_tol: f64,
    /// Defaults to `1e-12 * (tf - t0)`.
    pub dt_min: Option<f64>,
    /// Defaults to `tf - t0`.
    pub dt_max: Option<f64>,
    /// Rounds of reaction firings added to the set before each step.
    pub expansion_radius: usize,
    /// Prune every this many steps.
    pub prune_every: usize,
    /// Times at which distribution snapshots are taken; steps land on them.
    pub checkpoint_times: Vec<f64>,
    pub krylov_dim: usize,
    pub max_substeps: usize,
    pub expmv_method: ExpmvMethod,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            t0: 0.0,
            tf: 1.0,
            quantile_tol: 1e-4,
            flux_tol: 1e-6,
            dt_tol: 0.1,
            ode_tol: 1e-10,
            dt_min: None,
            dt_max: None,
            expansion_radius: 1,
            prune_every: 1,
            checkpoint_times: Vec::new(),
            krylov_dim: 30,
            max_substeps: 100_000,
            expmv_method: ExpmvMethod::Auto,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if !(self.t0.is_finite() && self.tf.is_finite() && self.t0 < self.tf) {
            return bad(format!("need finite t0 < tf, got t0 = {}, tf = {}", self.t0, self.tf));
        }
        if !(self.quantile_tol > 0.0 && self.quantile_tol < 1.0) {
            return bad(format!("quantile_tol must lie in (0, 1), got {}", self.quantile_tol));
        }
        if !(self.flux_tol >= 0.0 && self.flux_tol.is_finite()) {
            return bad(format!("flux_tol must be non-negative, got {}", self.flux_tol));
        }
        if !(self.dt_tol > 0.0 && self.dt_tol.is_finite()) {
            return bad(format!("dt_tol must be positive, got {}", self.dt_tol));
        }
        if !(self.ode_tol > 0.0 && self.ode_tol < 1.0) {
            return bad(format!("ode_tol must lie in (0, 1), got {}", self.ode_tol));
        }
        let (lo, hi) = self.dt_bounds();
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad(format!("need 0 < dt_min <= dt_max, got {lo} and {hi}"));
        }
        if self.prune_every == 0 {
            return bad("prune_every must be at least 1".into());
        }
        if self.checkpoint_times.iter().any(|t| !t.is_finite()) {
            return bad("checkpoint times must be finite".into());
        }
        self.expmv_options().validate()
    }

    /// `(dt_min, dt_max)` with defaults applied.
    pub fn dt_bounds(&self) -> (f64, f64) {
        let span = self.tf - self.t0;
        (self.dt_min.unwrap_or(1e-12 * span), self.dt_max.unwrap_or(span))
    }

    pub fn prune_params(&self) -> PruneParams {
        PruneParams { quantile_tol: self.quantile_tol, flux_tol: self.flux_tol }
    }

    pub fn expmv_options(&self) -> ExpmvOptions {
        ExpmvOptions {
            tol: self.ode_tol,
            krylov_dim: self.krylov_dim,
            max_substeps: self.max_substeps,
            method: self.expmv_method,
            initial_substep: None,
            clamp_negative: true,
        }
    }

    /// Checkpoints inside `[t0, tf]`, sorted and deduplicated.
    pub fn sorted_checkpoints(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self.checkpoint_times.iter().copied().filter(|&t| t >= self.t0 && t <= self.tf).collect();
        c.sort_by(f64::total_cmp);
        c.dedup();
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SolverConfig::default().validate().unwrap();
        let cfg = SolverConfig { t0: 0.0, tf: 100.0, ..SolverConfig::default() };
        assert_eq!(cfg.dt_bounds(), (1e-10, 100.0));
    }

    #[test]
    fn rejects_bad_values() {
        let base = SolverConfig::default();
        for cfg in [
            SolverConfig { quantile_tol: 1.0, ..base.clone() },
            SolverConfig { quantile_tol: 0.0, ..base.clone() },
            SolverConfig { flux_tol: -1.0, ..base.clone() },
            SolverConfig { tf: 0.0, ..base.clone() },
            SolverConfig { dt_min: Some(2.0), dt_max: Some(1.0), ..base.clone() },
            SolverConfig { prune_every: 0, ..base.clone() },
            SolverConfig { ode_tol: 0.0, ..base.clone() },
            SolverConfig { krylov_dim: 0, ..base.clone() },
        ] {
            assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))), "{cfg:?}");
        }
    }

    #[test]
    fn checkpoints_are_filtered_and_sorted() {
        let cfg = SolverConfig { checkpoint_times: alloc::vec![0.5, -1.0, 0.25, 0.5, 3.0], ..SolverConfig::default() };
        assert_eq!(cfg.sorted_checkpoints(), alloc::vec![0.25, 0.5]);
    }
}
