//! Flux-adaptive finite state projection (FSP) for the chemical master equation.
//!
//! The crate is `no_std` with `alloc`. It contains everything needed to evolve a
//! probability distribution over the population states of a reaction network:
//!
//! * [`network`]: species, stoichiometry, rate laws and the built-in benchmark models.
//! * [`statespace`]: the ordered active state set and forward boundary expansion.
//! * [`generator`]: forward-enumeration assembly of the sparse CME generator.
//! * [`expmv`]: Krylov (Arnoldi) action of the matrix exponential, plus dense and
//!   uniformization routes used as oracles.
//! * [`adaptive`]: flux diagnostics, flux-driven time steps, flux-preserving pruning,
//!   the error ledger and the adaptive solver loop.
//! * [`reference`]: fixed-box FSP reference solutions and comparison metrics.
//!
//! IO, file formats and the command-line interface live in the `fluxfsp` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod adaptive;
pub mod dense;
mod error;
pub mod expmv;
pub mod generator;
pub(crate) mod kernels;
pub(crate) mod math;
pub mod models;
pub mod network;
pub mod reference;
pub mod sparse;
pub mod statespace;

pub use adaptive::{
    adaptive_dt, flux_diagnostics, prune, run, ErrorLedger, FluxDiagnostics, PruneParams,
    PruneReport, RunOutput, Snapshot, Solver, SolverConfig, StepRecord, Trajectory,
};
pub use error::{Error, Result};
pub use expmv::{expmv, expmv_with_outflow, ExpmvMethod, ExpmvOptions, ExpmvOutput};
pub use generator::{assemble, assemble_full, exit_rates, ExitRates, GeneratorMode, SparseGenerator};
pub use models::{builtin_model, BuiltinModel};
pub use network::{Kinetics, RateLaw, Reaction, ReactionNetwork, State};
pub use reference::{
    compare, full_fsp_reference, BoxSpec, ComparisonMetrics, ReferenceMethod, ReferenceOptions,
    ReferenceSolution,
};
pub use statespace::StateSet;
