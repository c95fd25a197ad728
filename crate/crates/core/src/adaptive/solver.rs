use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expmv::{expmv_with_outflow, ExpmvMethod};
use crate::generator::{assemble_full, GeneratorMode};
use crate::network::Kinetics;
use crate::statespace::StateSet;

use super::flux::{adaptive_dt, FluxDiagnostics};
use super::ledger::ErrorLedger;
use super::prune::{prune, PruneReport};
use super::SolverConfig;

/// Summary of one completed step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// Time at the end of the step.
    pub t: f64,
    pub dt: f64,
    /// Active states after pruning.
    pub n_states: usize,
    /// Active states after expansion, i.e. the size the step was solved on.
    pub n_expanded: usize,
    pub phi_total: f64,
    pub phi_max: f64,
    pub phi_out: f64,
    pub model_error_bound: f64,
    pub stepping_error_bound: f64,
    pub means: Vec<f64>,
    pub pruned: usize,
    pub expmv_method: ExpmvMethod,
    pub substeps: usize,
    pub clamped_mass: f64,
}

/// Sparse distribution at a checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub states: StateSet,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub steps: Vec<StepRecord>,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn peak_states(&self) -> usize {
        self.steps.iter().map(|s| s.n_states).max().unwrap_or(0)
    }

    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.t == t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub states: StateSet,
    pub p: Vec<f64>,
    pub ledger: ErrorLedger,
    pub trajectory: Trajectory,
}

/// Adaptive solver state. Call [`Solver::step`] until [`Solver::is_finished`].
#[derive(Debug, Clone)]
pub struct Solver<'a, K: Kinetics + ?Sized> {
    kinetics: &'a K,
    cfg: SolverConfig,
    checkpoints: Vec<f64>,
    next_checkpoint: usize,
    states: StateSet,
    p: Vec<f64>,
    t: f64,
    steps: usize,
    ledger: ErrorLedger,
    substep_hint: Option<f64>,
}

impl<'a, K: Kinetics + ?Sized> Solver<'a, K> {
    /// Starts from the point mass at `x0`.
    pub fn new(kinetics: &'a K, x0: &[u32], cfg: SolverConfig) -> Result<Self> {
        if x0.len() != kinetics.n_species() {
            return Err(Error::DimensionMismatch { expected: kinetics.n_species(), found: x0.len() });
        }
        let states = StateSet::from_states(x0.len(), [x0])?;
        Self::with_distribution(kinetics, states, alloc::vec![1.0], cfg)
    }

    /// Starts from an arbitrary distribution, normalized on entry.
    pub fn with_distribution(kinetics: &'a K, states: StateSet, p: Vec<f64>, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        if states.n_species() != kinetics.n_species() {
            return Err(Error::DimensionMismatch { expected: kinetics.n_species(), found: states.n_species() });
        }
        if p.len() != states.len() {
            return Err(Error::DimensionMismatch { expected: states.len(), found: p.len() });
        }
        if states.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let mass: f64 = p.iter().sum();
        if !(mass > 0.0 && mass.is_finite()) || p.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidConfig("initial distribution must be non-negative with positive mass".into()));
        }
        let p = p.into_iter().map(|x| x / mass).collect();
        let checkpoints = cfg.sorted_checkpoints();
        Ok(Self {
            kinetics,
            t: cfg.t0,
            cfg,
            checkpoints,
            next_checkpoint: 0,
            states,
            p,
            steps: 0,
            ledger: ErrorLedger::new(),
            substep_hint: None,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn states(&self) -> &StateSet {
        &self.states
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn ledger(&self) -> &ErrorLedger {
        &self.ledger
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn is_finished(&self) -> bool {
        self.t >= self.cfg.tf
    }

    /// Takes a snapshot if the current time is a pending checkpoint. Drivers
    /// that call [`Solver::step`] directly should call this once before the
    /// first step and after every step.
    pub fn take_snapshot(&mut self) -> Option<Snapshot> {
        let &c = self.checkpoints.get(self.next_checkpoint)?;
        if self.t < c {
            return None;
        }
        while self.next_checkpoint < self.checkpoints.len() && self.checkpoints[self.next_checkpoint] <= self.t {
            self.next_checkpoint += 1;
        }
        Some(Snapshot { t: self.t, states: self.states.clone(), p: self.p.clone() })
    }

    /// Next time the step must not overshoot: the pending checkpoint or `tf`.
    fn landing(&self) -> f64 {
        self.checkpoints
            .get(self.next_checkpoint)
            .copied()
            .filter(|&c| c > self.t)
            .unwrap_or(self.cfg.tf)
            .min(self.cfg.tf)
    }

    /// One step: expand, assemble, choose `dt`, evolve, prune, update the ledger.
    pub fn step(&mut self) -> Result<StepRecord> {
        if self.is_finished() {
            return Err(Error::InvalidConfig("solver already reached tf".into()));
        }
        let kin = self.kinetics;
        let expanded = self.states.expand(kin, self.cfg.expansion_radius);
        let n = expanded.len();
        let mut p = core::mem::take(&mut self.p);
        p.resize(n, 0.0);
        let asm = assemble_full(&expanded, kin, GeneratorMode::Compressed);
        let diag = FluxDiagnostics::compute(&p, &asm.exit_rates.w, &asm.boundary)?;

        let landing = self.landing();
        let mut dt = adaptive_dt(&diag, &self.cfg);
        let mut t_next = self.t + dt;
        if t_next >= landing || landing - t_next <= 1e-12 * (self.cfg.tf - self.cfg.t0) {
            dt = landing - self.t;
            t_next = landing;
        }

        let mut opts = self.cfg.expmv_options();
        opts.initial_substep = self.substep_hint;
        let out = expmv_with_outflow(asm.generator.matrix(), &asm.boundary, &p, dt, &opts)?;
        if out.w.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { t: self.t });
        }
        if out.method == ExpmvMethod::Krylov && out.last_substep > 0.0 && !out.exact {
            self.substep_hint = Some(out.last_substep);
        }
        let tau = if out.exact { 0.0 } else { self.cfg.ode_tol } + out.clamped_mass;

        self.steps += 1;
        let (states, p, report) = if self.steps % self.cfg.prune_every == 0 {
            prune(&expanded, &out.w, &asm.exit_rates.w, &self.cfg.prune_params())?
        } else {
            let mass = out.w.iter().sum();
            (expanded, out.w, PruneReport::unchanged(n, mass))
        };
        self.ledger.update(t_next, dt, &diag, out.outflow, &report, tau, &self.cfg.prune_params());
        self.states = states;
        self.p = p;
        self.t = t_next;

        Ok(StepRecord {
            step: self.steps,
            t: self.t,
            dt,
            n_states: self.states.len(),
            n_expanded: n,
            phi_total: diag.total,
            phi_max: diag.max,
            phi_out: diag.boundary_outflux,
            model_error_bound: self.ledger.model_error_bound,
            stepping_error_bound: self.ledger.stepping_error_bound,
            means: self.states.means(&self.p),
            pruned: report.removed,
            expmv_method: out.method,
            substeps: out.substeps,
            clamped_mass: out.clamped_mass,
        })
    }

    /// Runs to `tf`, recording every step and the checkpoint snapshots.
    pub fn run_to_end(mut self) -> Result<RunOutput> {
        let mut traj = Trajectory::default();
        if let Some(s) = self.take_snapshot() {
            traj.snapshots.push(s);
        }
        while !self.is_finished() {
            let rec = self.step()?;
            traj.steps.push(rec);
            if let Some(s) = self.take_snapshot() {
                traj.snapshots.push(s);
            }
        }
        Ok(RunOutput { states: self.states, p: self.p, ledger: self.ledger, trajectory: traj })
    }
}

/// Runs the adaptive solver from the point mass at `x0`.
pub fn run<K: Kinetics + ?Sized>(kinetics: &K, x0: &[u32], cfg: &SolverConfig) -> Result<RunOutput> {
    Solver::new(kinetics, x0, cfg.clone())?.run_to_end()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::builtin_model;
    use crate::network::{RateLaw, Reaction, ReactionNetwork};

    #[test]
    fn bottleneck_first_step() {
        let (net, x0) = builtin_model("bottleneck").unwrap();
        let cfg = SolverConfig {
            tf: 1e5,
            dt_tol: 1e-5,
            quantile_tol: 1e-12,
            flux_tol: 1e-6,
            expansion_radius: 1,
            ..SolverConfig::default()
        };
        let mut s = Solver::new(&net, &x0, cfg).unwrap();
        let rec = s.step().unwrap();
        assert!((rec.dt - 10.0).abs() < 1e-9);
        let i = s.states().index_of(&[0, 1, 0]).unwrap();
        assert!(s.p()[i] > 0.0);
        let e = s.ledger().records[0];
        assert_eq!(rec.phi_out, 0.0);
        // all outflow is integrated along the step: mass that reached (0, 1, 0)
        // and then fired B -> B + C
        assert!(e.outflow > 0.0 && e.outflow < 1e-4);
        assert_eq!(e.model, 2.0 * e.outflow);
    }

    #[test]
    fn absorbing_state_advances_by_dt_max() {
        let net = ReactionNetwork::new(
            alloc::vec!["A".into()],
            alloc::vec![Reaction::new("A -> 0", [-1], RateLaw::mass_action(1.0, [1]))],
        )
        .unwrap();
        let cfg = SolverConfig { tf: 10.0, dt_max: Some(4.0), ..SolverConfig::default() };
        let mut s = Solver::new(&net, &[0], cfg).unwrap();
        let rec = s.step().unwrap();
        assert_eq!(rec.dt, 4.0);
        assert_eq!(s.p(), &[1.0]);
        assert_eq!(s.ledger().global_bound(), 0.0);
        let out = s.run_to_end().unwrap();
        assert_eq!(out.trajectory.steps.len(), 2);
        assert_eq!(out.trajectory.steps.last().unwrap().t, 10.0);
    }

    #[test]
    fn steps_land_on_checkpoints() {
        let (net, x0) = builtin_model("toggle").unwrap();
        let cfg = SolverConfig {
            tf: 0.5,
            dt_tol: 0.5,
            checkpoint_times: alloc::vec![0.0, 0.123, 0.5],
            ..SolverConfig::default()
        };
        let out = run(&net, &x0, &cfg).unwrap();
        let times: Vec<f64> = out.trajectory.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(times, alloc::vec![0.0, 0.123, 0.5]);
        assert!(out.trajectory.steps.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn robertson_conserves_molecules() {
        let (net, x0) = builtin_model("robertson").unwrap();
        let cfg = SolverConfig { tf: 2e-3, dt_tol: 0.04, expansion_radius: 2, ..SolverConfig::default() };
        let out = run(&net, &x0, &cfg).unwrap();
        for s in &out.trajectory.steps {
            let total: f64 = s.means.iter().sum();
            assert!((total - 1e4).abs() <= 1e4 * 1e-8, "{total}");
        }
    }

    #[test]
    fn probability_only_pruning_freezes_the_bottleneck() {
        let (net, x0) = builtin_model("bottleneck").unwrap();
        let cfg = SolverConfig {
            tf: 1e3,
            dt_tol: 1e-5,
            quantile_tol: 0.9,
            flux_tol: 0.0,
            expansion_radius: 5,
            ..SolverConfig::default()
        };
        let out = run(&net, &x0, &cfg).unwrap();
        assert!(out.trajectory.steps.iter().all(|s| s.n_states == 1 && s.means[2] == 0.0));
    }

    #[test]
    fn mismatched_initial_state_is_rejected() {
        let (net, _) = builtin_model("bottleneck").unwrap();
        assert!(Solver::new(&net, &[1, 0], SolverConfig::default()).is_err());
    }
}
