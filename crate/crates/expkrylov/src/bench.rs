//! Benchmark sweeps over problem sizes and engines, written as CSV.

use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::driver::execute;
use crate::formats::FormatError;

/// Header of the bench CSV. Stable within a version.
pub const BENCH_COLUMNS: [&str; 18] = [
    "problem",
    "size",
    "n",
    "engine",
    "solver",
    "integrator",
    "h",
    "T",
    "tol",
    "expmv_calls",
    "avg_iterations",
    "max_iterations",
    "solver_iterations",
    "max_solver_residual",
    "wall_time",
    "checksum",
    "converged",
    "error",
];

/// One (size, engine) cell. `avg_iterations` is the mean Krylov dimension
/// per `expmv` call; `size` is `nx` for grids and the node target for the
/// synthetic graph.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BenchRecord {
    pub problem: String,
    pub size: usize,
    pub n: usize,
    pub engine: String,
    pub solver: String,
    pub integrator: String,
    pub h: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub tol: f64,
    pub expmv_calls: usize,
    pub avg_iterations: f64,
    pub max_iterations: usize,
    pub solver_iterations: usize,
    pub max_solver_residual: f64,
    pub wall_time: f64,
    pub checksum: String,
    pub converged: bool,
    /// Empty on success.
    pub error: String,
}

/// Cartesian product of sizes and engines on top of a base config.
#[derive(Clone, Debug)]
pub struct Sweep {
    pub base: RunConfig,
    pub sizes: Vec<usize>,
    pub engines: Vec<String>,
}

impl Sweep {
    pub fn cells(&self) -> Vec<RunConfig> {
        let graph = self.base.kind().is_ok_and(|k| k.is_graph());
        let mut out = Vec::new();
        for &size in &self.sizes {
            for engine in &self.engines {
                let mut cfg = self.base.clone();
                if graph {
                    cfg.graph_nodes = size;
                } else {
                    cfg.nx = size;
                }
                cfg.engine = engine.clone();
                out.push(cfg);
            }
        }
        out
    }
}

/// Runs one cell; failures land in `error`.
pub fn run_cell(cfg: &RunConfig) -> BenchRecord {
    let graph = cfg.kind().is_ok_and(|k| k.is_graph());
    let mut rec = BenchRecord {
        problem: cfg.problem.clone(),
        size: if graph { cfg.graph_nodes } else { cfg.nx },
        engine: cfg.engine.clone(),
        solver: if cfg.engine == "polynomial" { "-".into() } else { cfg.solver.clone() },
        integrator: cfg.integrator.clone(),
        h: cfg.h,
        t_end: cfg.t_end,
        tol: cfg.tol,
        ..BenchRecord::default()
    };
    match execute(cfg) {
        Ok(out) => {
            let t = &out.trajectory;
            rec.n = out.n;
            rec.expmv_calls = t.calls.len();
            rec.avg_iterations = t.mean_dimension();
            rec.max_iterations = t.calls.iter().map(|c| c.dimension).max().unwrap_or(0);
            rec.solver_iterations = t.solver_iterations();
            rec.max_solver_residual = t.max_solver_residual();
            rec.wall_time = out.wall_time;
            rec.checksum = out.checksum;
            rec.converged = t.all_converged();
        }
        Err(e) => rec.error = e.to_string(),
    }
    rec
}

/// Runs every cell in order, calling `progress` after each.
pub fn run_sweep(sweep: &Sweep, mut progress: impl FnMut(&BenchRecord)) -> Vec<BenchRecord> {
    sweep
        .cells()
        .iter()
        .map(|cfg| {
            let rec = run_cell(cfg);
            progress(&rec);
            rec
        })
        .collect()
}

pub fn write_csv(path: &Path, records: &[BenchRecord]) -> Result<(), FormatError> {
    let write_err = |e: csv::Error| FormatError::Write { path: path.to_path_buf(), message: e.to_string() };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(write_err)?;
    w.write_record(BENCH_COLUMNS).map_err(write_err)?;
    for r in records {
        w.serialize(r).map_err(write_err)?;
    }
    w.flush().map_err(|e| FormatError::Write { path: path.to_path_buf(), message: e.to_string() })
}
