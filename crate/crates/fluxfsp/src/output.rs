//! Output files: trajectory CSV, sparse snapshots, JSON summaries and
//! MatrixMarket dumps.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use fluxfsp_core::sparse::CscMatrix;
use fluxfsp_core::{Snapshot, StateSet, StepRecord};
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Shortest decimal that parses back to the same `f64`. Plain notation for
/// ordinary magnitudes, exponent notation outside `[1e-5, 1e16)`.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating output directory {}", dir.display()), e))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(format!("creating {}", path.display()), e))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::io(format!("writing {}", path.display()), e.into())
}

pub const TRAJECTORY_COLUMNS: [&str; 8] =
    ["t", "dt", "n_states", "phi_total", "phi_max", "phi_out", "model_err_bound", "step_err_bound"];

/// Streams one row per solver step.
pub struct TrajectoryWriter {
    path: PathBuf,
    out: csv::Writer<BufWriter<File>>,
}

impl TrajectoryWriter {
    pub fn create(path: &Path, species: &[String]) -> CliResult<Self> {
        let mut out = csv::Writer::from_writer(create(path)?);
        let header = TRAJECTORY_COLUMNS.iter().map(|c| c.to_string()).chain(species.iter().map(|s| format!("mean_{s}")));
        out.write_record(header).map_err(|e| csv_err(path, e))?;
        Ok(Self { path: path.to_path_buf(), out })
    }

    pub fn write(&mut self, r: &StepRecord) -> CliResult<()> {
        let fixed = [r.t, r.dt].into_iter().map(fmt_num).chain([r.n_states.to_string()]).chain(
            [r.phi_total, r.phi_max, r.phi_out, r.model_error_bound, r.stepping_error_bound].into_iter().map(fmt_num),
        );
        let row = fixed.chain(r.means.iter().copied().map(fmt_num));
        self.out.write_record(row).map_err(|e| csv_err(&self.path, e))
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.out.flush().map_err(|e| CliError::io(format!("writing {}", self.path.display()), e))
    }
}

pub fn snapshot_path(dir: &Path, t: f64) -> PathBuf {
    dir.join(format!("snapshot_{}.csv", fmt_num(t)))
}

/// Writes the nonzero entries of a distribution, states in lexicographic order.
pub fn write_distribution(path: &Path, species: &[String], states: &StateSet, p: &[f64]) -> CliResult<()> {
    let mut order: Vec<usize> = (0..states.len()).filter(|&i| p[i] != 0.0).collect();
    order.sort_by(|&a, &b| states.state(a).cmp(states.state(b)));
    let mut out = csv::Writer::from_writer(create(path)?);
    out.write_record(species.iter().map(String::as_str).chain(["probability"])).map_err(|e| csv_err(path, e))?;
    for i in order {
        let row = states.state(i).iter().map(|c| c.to_string()).chain([fmt_num(p[i])]);
        out.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

/// Writes the states in set order, one row per matrix index (1-based, as in
/// the MatrixMarket dump).
pub fn write_states(path: &Path, species: &[String], states: &StateSet) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(create(path)?);
    out.write_record(["index"].into_iter().chain(species.iter().map(String::as_str))).map_err(|e| csv_err(path, e))?;
    for (i, x) in states.iter().enumerate() {
        let row = [(i + 1).to_string()].into_iter().chain(x.iter().map(|c| c.to_string()));
        out.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

pub fn write_snapshot(dir: &Path, species: &[String], snap: &Snapshot) -> CliResult<PathBuf> {
    let path = snapshot_path(dir, snap.t);
    write_distribution(&path, species, &snap.states, &snap.p)?;
    Ok(path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| CliError::io(format!("writing {}", path.display()), e.into()))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

/// MatrixMarket coordinate file (1-based indices, general real).
pub fn write_matrix_market(path: &Path, a: &CscMatrix) -> CliResult<()> {
    let io = |e| CliError::io(format!("writing {}", path.display()), e);
    let mut out = create(path)?;
    writeln!(out, "%%MatrixMarket matrix coordinate real general").map_err(io)?;
    writeln!(out, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz()).map_err(io)?;
    for (i, j, v) in a.triplets() {
        writeln!(out, "{} {} {}", i + 1, j + 1, fmt_num(v)).map_err(io)?;
    }
    out.flush().map_err(io)
}
