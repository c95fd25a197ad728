//! Run configuration: JSON config files overlaid by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use fluxfsp_core::models::toggle_switch;
use fluxfsp_core::{BoxSpec, BuiltinModel, ExpmvMethod, ReactionNetwork, SolverConfig, State};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::model_file::ModelFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Auto,
    Krylov,
    Uniformization,
    Dense,
}

impl From<MethodArg> for ExpmvMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => ExpmvMethod::Auto,
            MethodArg::Krylov => ExpmvMethod::Krylov,
            MethodArg::Uniformization => ExpmvMethod::Uniformization,
            MethodArg::Dense => ExpmvMethod::Dense,
        }
    }
}

/// Solver settings. Unset fields keep the lower layer's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub tf: Option<f64>,
    /// Quantile tolerance alpha.
    #[arg(long)]
    pub quantile_tol: Option<f64>,
    /// Flux tolerance; 0 disables flux protection.
    #[arg(long)]
    pub flux_tol: Option<f64>,
    #[arg(long)]
    pub dt_tol: Option<f64>,
    #[arg(long)]
    pub ode_tol: Option<f64>,
    #[arg(long)]
    pub dt_min: Option<f64>,
    #[arg(long)]
    pub dt_max: Option<f64>,
    #[arg(long)]
    pub expansion_radius: Option<usize>,
    #[arg(long)]
    pub prune_every: Option<usize>,
    /// Comma-separated snapshot times.
    #[arg(long, value_delimiter = ',')]
    pub checkpoint_times: Option<Vec<f64>>,
    #[arg(long)]
    pub krylov_dim: Option<usize>,
    #[arg(long)]
    pub max_substeps: Option<usize>,
    #[arg(long, value_enum)]
    pub expmv_method: Option<MethodArg>,
}

impl SolverSection {
    fn overlay(&mut self, top: &SolverSection) {
        macro_rules! take {
            ($($f:ident),*) => { $( if top.$f.is_some() { self.$f = top.$f.clone(); } )* };
        }
        take!(
            t0, tf, quantile_tol, flux_tol, dt_tol, ode_tol, dt_min, dt_max, expansion_radius, prune_every,
            checkpoint_times, krylov_dim, max_substeps, expmv_method
        );
    }

    fn resolve(&self) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            t0: self.t0.unwrap_or(d.t0),
            tf: self.tf.unwrap_or(d.tf),
            quantile_tol: self.quantile_tol.unwrap_or(d.quantile_tol),
            flux_tol: self.flux_tol.unwrap_or(d.flux_tol),
            dt_tol: self.dt_tol.unwrap_or(d.dt_tol),
            ode_tol: self.ode_tol.unwrap_or(d.ode_tol),
            dt_min: self.dt_min.or(d.dt_min),
            dt_max: self.dt_max.or(d.dt_max),
            expansion_radius: self.expansion_radius.unwrap_or(d.expansion_radius),
            prune_every: self.prune_every.unwrap_or(d.prune_every),
            checkpoint_times: self.checkpoint_times.clone().unwrap_or(d.checkpoint_times),
            krylov_dim: self.krylov_dim.unwrap_or(d.krylov_dim),
            max_substeps: self.max_substeps.unwrap_or(d.max_substeps),
            expmv_method: self.expmv_method.map_or(d.expmv_method, Into::into),
        }
    }
}

/// Fixed box for the reference solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxDef {
    #[serde(default)]
    pub lower: Option<Vec<u32>>,
    pub upper: Vec<u32>,
    #[serde(default)]
    pub cap: Option<usize>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<String>,
    pub model_path: Option<PathBuf>,
    pub eta: Option<f64>,
    pub initial_state: Option<Vec<u32>>,
    pub solver: SolverSection,
    pub output: Option<PathBuf>,
    pub snapshots: Option<bool>,
    pub dump_generator: Option<bool>,
    #[serde(rename = "box")]
    pub validation_box: Option<BoxDef>,
    pub reference_tol: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        let mut cfg: ConfigFile =
            serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        // Model paths in a config file are relative to the file.
        if let (Some(mp), Some(dir)) = (&cfg.model_path, path.parent()) {
            if mp.is_relative() {
                cfg.model_path = Some(dir.join(mp));
            }
        }
        Ok(cfg)
    }

    /// Overlays `top` onto `self`; fields set in `top` win.
    pub fn overlay(&mut self, top: &ConfigFile) {
        macro_rules! take {
            ($($f:ident),*) => { $( if top.$f.is_some() { self.$f = top.$f.clone(); } )* };
        }
        take!(model, model_path, eta, initial_state, output, snapshots, dump_generator, validation_box, reference_tol);
        self.solver.overlay(&top.solver);
    }

    pub fn resolve(&self) -> CliResult<RunConfig> {
        let (network, model_name, x0) = match (&self.model, &self.model_path) {
            (Some(_), Some(_)) => return Err(CliError::config("give either a built-in model or a model path, not both")),
            (None, None) => return Err(CliError::config("no model given (use --model or --model-path)")),
            (Some(name), None) => {
                let model: BuiltinModel = name.parse().map_err(|e| CliError::config(format!("{e}")))?;
                let (mut net, x0) = model.build();
                match (model, self.eta) {
                    (BuiltinModel::Toggle, Some(eta)) => {
                        if !(eta > 0.0 && eta.is_finite()) {
                            return Err(CliError::config(format!("eta must be positive, got {eta}")));
                        }
                        net = toggle_switch(eta);
                    }
                    (_, Some(_)) => return Err(CliError::config("eta applies to the toggle model only")),
                    _ => {}
                }
                (net, model.name().to_string(), x0)
            }
            (None, Some(path)) => {
                if self.eta.is_some() {
                    return Err(CliError::config("eta applies to the toggle model only"));
                }
                let (net, x0) = ModelFile::load(path)?.into_network()?;
                (net, path.display().to_string(), x0)
            }
        };
        let x0 = match &self.initial_state {
            Some(x) => {
                network.check_state(x).map_err(|e| CliError::config(format!("invalid initial state: {e}")))?;
                State::from(x.clone())
            }
            None => x0,
        };
        let solver = self.solver.resolve();
        solver.validate().map_err(|e| CliError::config(e.to_string()))?;
        let validation_box = match &self.validation_box {
            None => None,
            Some(b) => {
                let lower = b.lower.clone().unwrap_or_else(|| vec![0; b.upper.len()]);
                let spec = match b.cap {
                    Some(cap) => BoxSpec::with_cap(lower, b.upper.clone(), cap),
                    None => BoxSpec::new(lower, b.upper.clone()),
                };
                let spec = spec.map_err(|e| CliError::config(format!("invalid box: {e}")))?;
                if spec.upper().len() != network.species().len() {
                    return Err(CliError::config("box dimension does not match the model"));
                }
                Some(spec)
            }
        };
        let reference_tol = self.reference_tol.unwrap_or(1e-12);
        if !(reference_tol > 0.0 && reference_tol < 1.0) {
            return Err(CliError::config(format!("reference_tol must lie in (0, 1), got {reference_tol}")));
        }
        Ok(RunConfig {
            network,
            model_name,
            x0,
            solver,
            output: self.output.clone().unwrap_or_else(|| PathBuf::from("fluxfsp-out")),
            snapshots: self.snapshots.unwrap_or(true),
            dump_generator: self.dump_generator.unwrap_or(false),
            validation_box,
            reference_tol,
        })
    }
}

/// Fully resolved configuration of one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub network: ReactionNetwork,
    /// Built-in name or model file path, echoed into the summary.
    pub model_name: String,
    pub x0: State,
    pub solver: SolverConfig,
    pub output: PathBuf,
    pub snapshots: bool,
    pub dump_generator: bool,
    pub validation_box: Option<BoxSpec>,
    pub reference_tol: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(model: &str) -> ConfigFile {
        ConfigFile { model: Some(model.into()), ..ConfigFile::default() }
    }

    #[test]
    fn flags_override_file_values() {
        let mut base: ConfigFile =
            serde_json::from_str(r#"{"model": "bottleneck", "solver": {"tf": 100.0, "flux_tol": 1e-3}}"#).unwrap();
        let flags = ConfigFile {
            solver: SolverSection { tf: Some(5.0), ..SolverSection::default() },
            ..ConfigFile::default()
        };
        base.overlay(&flags);
        let cfg = base.resolve().unwrap();
        assert_eq!(cfg.solver.tf, 5.0);
        assert_eq!(cfg.solver.flux_tol, 1e-3);
        assert_eq!(cfg.solver.quantile_tol, SolverConfig::default().quantile_tol);
        assert_eq!(cfg.x0, State::from([1, 0, 0]));
    }

    #[test]
    fn model_source_must_be_unique() {
        assert_eq!(ConfigFile::default().resolve().unwrap_err().exit_code(), 2);
        let both = ConfigFile { model_path: Some("m.json".into()), ..named("toggle") };
        assert_eq!(both.resolve().unwrap_err().exit_code(), 2);
        assert!(named("lotka").resolve().is_err());
    }

    #[test]
    fn eta_rescales_the_toggle_only() {
        let cfg = ConfigFile { eta: Some(100.0), ..named("toggle") }.resolve().unwrap();
        assert_eq!(cfg.network.propensity(0, &[0, 0]).unwrap(), 42000.0);
        assert!(ConfigFile { eta: Some(2.0), ..named("robertson") }.resolve().is_err());
    }

    #[test]
    fn invalid_solver_values_are_config_errors() {
        let mut c = named("bottleneck");
        c.solver.quantile_tol = Some(1.5);
        assert_eq!(c.resolve().unwrap_err().exit_code(), 2);
        let unknown = serde_json::from_str::<ConfigFile>(r#"{"model": "toggle", "solver": {"alpha": 0.1}}"#);
        assert!(unknown.is_err());
    }

    #[test]
    fn box_defaults_to_zero_lower_corner() {
        let c: ConfigFile =
            serde_json::from_str(r#"{"model": "bottleneck", "box": {"upper": [2, 2, 50]}}"#).unwrap();
        let b = c.resolve().unwrap().validation_box.unwrap();
        assert_eq!(b.lower(), &[0, 0, 0]);
        let bad: ConfigFile = serde_json::from_str(r#"{"model": "bottleneck", "box": {"upper": [2, 2]}}"#).unwrap();
        assert!(bad.resolve().is_err());
    }
}
