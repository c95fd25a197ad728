//! The `run` subcommand.

use std::path::Path;
use std::time::Instant;

use fluxfsp_core::generator::{assemble, GeneratorMode};
use fluxfsp_core::{ErrorLedger, ExpmvMethod, Snapshot, Solver, SolverConfig, StateSet};
use serde::Serialize;

use crate::config::{MethodArg, RunConfig, SolverSection};
use crate::error::CliResult;
use crate::output::{self, TrajectoryWriter};

#[derive(Debug, Clone, Serialize)]
pub struct ErrorSummary {
    /// Global 1-norm bound: model plus time-stepping terms.
    pub total: f64,
    pub model: f64,
    pub stepping: f64,
    pub pruned_mass: f64,
    /// Sum of the per-step a-priori estimates from the pruning parameters.
    pub a_priori_total: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub model: String,
    pub species: Vec<String>,
    pub initial_state: Vec<u32>,
    pub t_final: f64,
    pub steps: usize,
    pub final_means: Vec<f64>,
    /// `||p||_1` of the final distribution.
    pub final_mass: f64,
    pub final_states: usize,
    pub peak_states: usize,
    pub dt_min_taken: f64,
    pub dt_max_taken: f64,
    pub error_bound: ErrorSummary,
    pub solver: SolverSection,
    pub wall_time_s: f64,
}

/// Everything a run produced, for callers that post-process in memory.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub summary: Summary,
    pub states: StateSet,
    pub p: Vec<f64>,
    pub ledger: ErrorLedger,
    pub snapshots: Vec<Snapshot>,
}

fn echo(cfg: &SolverConfig) -> SolverSection {
    SolverSection {
        t0: Some(cfg.t0),
        tf: Some(cfg.tf),
        quantile_tol: Some(cfg.quantile_tol),
        flux_tol: Some(cfg.flux_tol),
        dt_tol: Some(cfg.dt_tol),
        ode_tol: Some(cfg.ode_tol),
        dt_min: Some(cfg.dt_bounds().0),
        dt_max: Some(cfg.dt_bounds().1),
        expansion_radius: Some(cfg.expansion_radius),
        prune_every: Some(cfg.prune_every),
        checkpoint_times: Some(cfg.sorted_checkpoints()),
        krylov_dim: Some(cfg.krylov_dim),
        max_substeps: Some(cfg.max_substeps),
        expmv_method: Some(match cfg.expmv_method {
            ExpmvMethod::Auto => MethodArg::Auto,
            ExpmvMethod::Krylov => MethodArg::Krylov,
            ExpmvMethod::Uniformization => MethodArg::Uniformization,
            ExpmvMethod::Dense => MethodArg::Dense,
        }),
    }
}

/// Runs the adaptive solver and writes `trajectory.csv`, the checkpoint
/// snapshots, `summary.json` and optionally `generator.mtx` into the output
/// directory. With snapshots enabled the final time is always a checkpoint.
pub fn run(cfg: &RunConfig, progress: bool) -> CliResult<RunArtifacts> {
    let dir: &Path = &cfg.output;
    output::create_dir(dir)?;
    let species = cfg.network.species();
    let mut solver_cfg = cfg.solver.clone();
    if cfg.snapshots && !solver_cfg.checkpoint_times.contains(&solver_cfg.tf) {
        solver_cfg.checkpoint_times.push(solver_cfg.tf);
    }

    let started = Instant::now();
    let mut traj = TrajectoryWriter::create(&dir.join("trajectory.csv"), species)?;
    let mut solver = Solver::new(&cfg.network, &cfg.x0, solver_cfg)?;
    let mut snapshots = Vec::new();
    let mut keep = |snap: Option<Snapshot>| -> CliResult<()> {
        if let Some(s) = snap {
            if cfg.snapshots {
                output::write_snapshot(dir, species, &s)?;
            }
            snapshots.push(s);
        }
        Ok(())
    };
    keep(solver.take_snapshot())?;
    let (mut steps, mut peak) = (0, solver.states().len());
    let (mut dt_lo, mut dt_hi) = (f64::INFINITY, 0.0f64);
    while !solver.is_finished() {
        let rec = solver.step()?;
        traj.write(&rec)?;
        steps += 1;
        peak = peak.max(rec.n_states);
        dt_lo = dt_lo.min(rec.dt);
        dt_hi = dt_hi.max(rec.dt);
        if progress {
            eprintln!(
                "step {} t={:.6e} dt={:.3e} |S|={} phi_max={:.3e} bound={:.3e} {:?}",
                rec.step,
                rec.t,
                rec.dt,
                rec.n_states,
                rec.phi_max,
                rec.model_error_bound + rec.stepping_error_bound,
                rec.expmv_method
            );
        }
        keep(solver.take_snapshot())?;
    }
    traj.finish()?;

    let states = solver.states().clone();
    let p = solver.p().to_vec();
    let ledger = solver.ledger().clone();
    if cfg.dump_generator {
        let g = assemble(&states, &cfg.network, GeneratorMode::Compressed);
        output::write_matrix_market(&dir.join("generator.mtx"), g.matrix())?;
        output::write_states(&dir.join("generator_states.csv"), species, &states)?;
    }

    let summary = Summary {
        model: cfg.model_name.clone(),
        species: species.to_vec(),
        initial_state: cfg.x0.to_vec(),
        t_final: solver.t(),
        steps,
        final_means: states.means(&p),
        final_mass: p.iter().sum(),
        final_states: states.len(),
        peak_states: peak,
        dt_min_taken: if steps > 0 { dt_lo } else { 0.0 },
        dt_max_taken: dt_hi,
        error_bound: ErrorSummary {
            total: ledger.global_bound(),
            model: ledger.model_error_bound,
            stepping: ledger.stepping_error_bound,
            pruned_mass: ledger.pruned_mass_total,
            a_priori_total: ledger.records.iter().map(|r| r.a_priori).sum(),
        },
        solver: echo(&cfg.solver),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    output::write_json(&dir.join("summary.json"), &summary)?;
    Ok(RunArtifacts { summary, states, p, ledger, snapshots })
}
