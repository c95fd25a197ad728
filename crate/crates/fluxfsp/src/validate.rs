//! The `validate` subcommand: adaptive run against a fixed-box reference.

use fluxfsp_core::{compare, full_fsp_reference, ReferenceMethod, ReferenceOptions};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output;
use crate::run::{run, RunArtifacts};

#[derive(Debug, Clone, Serialize)]
pub struct CheckpointReport {
    pub t: f64,
    /// 1-norm distance between the adaptive and reference distributions.
    pub l1_error: f64,
    /// Ledger bound accumulated up to `t`.
    pub ledger_bound: f64,
    /// Error of the reference itself: mass that left the box plus the
    /// requested accuracy of each evolution segment.
    pub reference_error: f64,
    pub within_bound: bool,
    pub adaptive_states: usize,
    pub reference_mass: f64,
    pub mean_adaptive: Vec<f64>,
    pub mean_reference: Vec<f64>,
    pub abs_error: Vec<f64>,
    pub rel_error: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub model: String,
    pub species: Vec<String>,
    pub box_lower: Vec<u32>,
    pub box_upper: Vec<u32>,
    pub reference_states: usize,
    pub reference_method: String,
    pub checkpoints: Vec<CheckpointReport>,
    pub passed: bool,
}

/// Runs the adaptive solver (writing the usual run outputs), solves the box
/// reference at every checkpoint and at `tf`, and writes `validation.json`.
///
/// A checkpoint passes when the measured 1-norm error is at most the ledger
/// bound plus the reference's own error; see [`ValidationReport::violation`].
pub fn validate(cfg: &RunConfig, progress: bool) -> CliResult<(ValidationReport, RunArtifacts)> {
    let bounds = cfg
        .validation_box
        .clone()
        .ok_or_else(|| CliError::config("validation needs a box (config \"box\" or --box-upper)"))?;
    let mut cfg = cfg.clone();
    let solver = &mut cfg.solver;
    if !solver.checkpoint_times.contains(&solver.tf) {
        solver.checkpoint_times.push(solver.tf);
    }
    let times = solver.sorted_checkpoints();

    let artifacts = run(&cfg, progress)?;
    let opts = ReferenceOptions { t0: cfg.solver.t0, tol: cfg.reference_tol, method: ReferenceMethod::Auto };
    let reference = full_fsp_reference(&cfg.network, &cfg.x0, &bounds, &times, &opts)?;

    let mut checkpoints = Vec::with_capacity(times.len());
    for (k, point) in reference.points.iter().enumerate() {
        let snap = artifacts
            .snapshots
            .iter()
            .find(|s| s.t == point.t)
            .ok_or_else(|| CliError::Solver(fluxfsp_core::Error::InvalidConfig(format!("no snapshot at t = {}", point.t))))?;
        let m = compare(&snap.states, &snap.p, &reference.states, &point.p)?;
        let ledger_bound = artifacts.ledger.bound_at(point.t);
        let segments = (k + 1) as f64;
        let reference_error = (1.0 - point.retained_mass).max(0.0) + segments * cfg.reference_tol;
        checkpoints.push(CheckpointReport {
            t: point.t,
            l1_error: m.l1_distance,
            ledger_bound,
            reference_error,
            within_bound: m.l1_distance <= ledger_bound + reference_error,
            adaptive_states: snap.states.len(),
            reference_mass: point.retained_mass,
            mean_adaptive: m.mean_adaptive,
            mean_reference: m.mean_reference,
            abs_error: m.abs_error,
            rel_error: m.rel_error,
        });
    }
    let passed = checkpoints.iter().all(|c| c.within_bound);
    let report = ValidationReport {
        model: cfg.model_name.clone(),
        species: cfg.network.species().to_vec(),
        box_lower: bounds.lower().to_vec(),
        box_upper: bounds.upper().to_vec(),
        reference_states: reference.states.len(),
        reference_method: format!("{:?}", reference.method).to_lowercase(),
        checkpoints,
        passed,
    };
    output::write_json(&cfg.output.join("validation.json"), &report)?;
    Ok((report, artifacts))
}

impl ValidationReport {
    /// The first checkpoint that broke the bound, as an error.
    pub fn violation(&self) -> Option<CliError> {
        let c = self.checkpoints.iter().find(|c| !c.within_bound)?;
        Some(CliError::BoundViolation(format!(
            "at t = {}: measured l1 error {:e} exceeds ledger bound {:e} (+ reference error {:e})",
            c.t, c.l1_error, c.ledger_bound, c.reference_error
        )))
    }
}
