//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fluxfsp_core::BuiltinModel;

use crate::bench::bench_assembly;
use crate::config::{BoxDef, ConfigFile, SolverSection};
use crate::error::{CliError, CliResult};
use crate::model_file::ModelFile;
use crate::output;
use crate::run::run;
use crate::validate::validate;

#[derive(Debug, Parser)]
#[command(name = "fluxfsp", version, about = "Flux-adaptive finite state projection for the chemical master equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the adaptive solver and write trajectory, snapshots and summary.
    Run(RunArgs),
    /// Run the adaptive solver and compare it with a fixed-box reference.
    Validate(ValidateArgs),
    /// Time forward-enumeration assembly against the all-pairs baseline.
    BenchAssembly(BenchArgs),
    /// List the built-in models, or print one as model JSON.
    Models(ModelsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in model name.
    #[arg(long)]
    pub model: Option<String>,
    /// Model definition JSON file.
    #[arg(long)]
    pub model_path: Option<PathBuf>,
    /// Volume scaling of the toggle switch production rates.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Comma-separated initial copy numbers.
    #[arg(long, value_delimiter = ',')]
    pub initial_state: Option<Vec<u32>>,
    #[command(flatten)]
    pub solver: SolverSection,
    /// Output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Skip snapshot files.
    #[arg(long)]
    pub no_snapshots: bool,
    /// Also write the final generator as MatrixMarket.
    #[arg(long)]
    pub dump_generator: bool,
    /// Log every step to stderr.
    #[arg(long)]
    pub progress: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated upper corner of the reference box.
    #[arg(long, value_delimiter = ',')]
    pub box_upper: Option<Vec<u32>>,
    /// Comma-separated lower corner (default all zeros).
    #[arg(long, value_delimiter = ',')]
    pub box_lower: Option<Vec<u32>>,
    /// Largest number of reference states.
    #[arg(long)]
    pub box_cap: Option<usize>,
    /// Accuracy of each reference evolution segment.
    #[arg(long)]
    pub reference_tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "robertson")]
    pub model: String,
    #[arg(long)]
    pub model_path: Option<PathBuf>,
    /// Comma-separated state-set sizes.
    #[arg(long, value_delimiter = ',', default_value = "1106,1431")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, short, default_value = "fluxfsp-out")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ModelsArgs {
    /// Print this model as model JSON.
    #[arg(long)]
    pub show: Option<String>,
}

impl RunArgs {
    fn config_file(&self) -> CliResult<ConfigFile> {
        let mut cfg = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let flags = ConfigFile {
            model: self.model.clone(),
            model_path: self.model_path.clone(),
            eta: self.eta,
            initial_state: self.initial_state.clone(),
            solver: self.solver.clone(),
            output: self.output.clone(),
            snapshots: self.no_snapshots.then_some(false),
            dump_generator: self.dump_generator.then_some(true),
            validation_box: None,
            reference_tol: None,
        };
        // A model given on the command line replaces the file's model source.
        if flags.model.is_some() || flags.model_path.is_some() {
            cfg.model = None;
            cfg.model_path = None;
        }
        cfg.overlay(&flags);
        Ok(cfg)
    }
}

fn cmd_run(args: &RunArgs) -> CliResult<()> {
    let cfg = args.config_file()?.resolve()?;
    run(&cfg, args.progress)?;
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> CliResult<()> {
    let mut file = args.run.config_file()?;
    if let Some(upper) = &args.box_upper {
        file.validation_box = Some(BoxDef { lower: args.box_lower.clone(), upper: upper.clone(), cap: args.box_cap });
    } else if let Some(b) = &mut file.validation_box {
        if args.box_lower.is_some() {
            b.lower = args.box_lower.clone();
        }
        if args.box_cap.is_some() {
            b.cap = args.box_cap;
        }
    }
    if args.reference_tol.is_some() {
        file.reference_tol = args.reference_tol;
    }
    let cfg = file.resolve()?;
    let (report, _) = validate(&cfg, args.run.progress)?;
    match report.violation() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn cmd_bench(args: &BenchArgs) -> CliResult<()> {
    let (net, x0, name) = match &args.model_path {
        Some(path) => {
            let (net, x0) = ModelFile::load(path)?.into_network()?;
            (net, x0, path.display().to_string())
        }
        None => {
            let model: BuiltinModel = args.model.parse().map_err(|e| CliError::config(format!("{e}")))?;
            let (net, x0) = model.build();
            (net, x0, model.name().to_string())
        }
    };
    let report = bench_assembly(&name, &net, &x0, &args.sizes, args.trials)?;
    output::create_dir(&args.output)?;
    output::write_json(&args.output.join("bench.json"), &report)?;
    for r in &report.results {
        println!(
            "|S| = {:5}  forward {:.3e} s  all-pairs {:.3e} s  speedup {:.1}x",
            r.n_states, r.forward.median_s, r.all_pairs.median_s, r.speedup
        );
    }
    Ok(())
}

fn cmd_models(args: &ModelsArgs) -> CliResult<()> {
    match &args.show {
        None => {
            for m in BuiltinModel::ALL {
                println!("{:<11} {}", m.name(), m.description());
            }
        }
        Some(name) => {
            let model: BuiltinModel = name.parse().map_err(|e| CliError::config(format!("{e}")))?;
            let (net, x0) = model.build();
            let text = serde_json::to_string_pretty(&ModelFile::from_network(&net, &x0)).expect("model serializes");
            println!("{text}");
        }
    }
    Ok(())
}

/// Caps the global thread pool from `FLUXFSP_THREADS`.
fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("FLUXFSP_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(format!("FLUXFSP_THREADS must be a positive integer, got {value:?}")))?;
    // A pool that already exists (a second call in the same process) keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn dispatch(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Validate(a) => cmd_validate(a),
        Command::BenchAssembly(a) => cmd_bench(a),
        Command::Models(a) => cmd_models(a),
    }
}

/// Parses `args`, runs the subcommand and returns the process exit code.
/// Errors are printed to stderr as a one-line JSON record.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.record());
            e.exit_code()
        }
    }
}
