//! Command-line interface. Exit codes: 0 success, 1 failed checks or bench
//! cells, 2 configuration or input errors, 3 numerical failures.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use expkrylov_core::poles::validate;
use expkrylov_core::problems::{graph_laplacian, largest_connected_component};

use crate::bench::{run_sweep, write_csv, Sweep};
use crate::config::{ConfigError, RunConfig};
use crate::driver::{execute, report, RunError};
use crate::formats::{self, GraphFormat};
use crate::verify::{all_passed, default_fixture_dir, format_table, run_all, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "expkrylov", version, about = "Exponential Runge-Kutta integration with rational Krylov expmv")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one problem; writes trajectory.csv and report.toml to --out.
    Run(ConfigArgs),
    /// Sweep sizes and engines; writes one CSV row per cell.
    Bench(BenchArgs),
    /// Run the oracle suite.
    Verify(VerifyArgs),
    /// Inspect pole files.
    #[command(subcommand)]
    Poles(PolesCommand),
    /// Inspect graph files.
    #[command(subcommand)]
    Graph(GraphCommand),
}

/// Run parameters. Flags override the config file, which overrides the
/// defaults.
#[derive(Debug, Default, Args)]
pub struct ConfigArgs {
    /// TOML config file, or a report.toml from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// ac2d, gm2d, graph-ac or graph-gm.
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long = "graph-file")]
    pub graph_file: Option<PathBuf>,
    /// Edge-list and coordinate indices start at 1.
    #[arg(long = "one-based")]
    pub one_based: bool,
    #[arg(long = "coords-file")]
    pub coords_file: Option<PathBuf>,
    /// Node target of the synthetic road network.
    #[arg(long = "graph-nodes")]
    pub graph_nodes: Option<usize>,
    /// neumann, dirichlet or periodic.
    #[arg(long)]
    pub bc: Option<String>,
    #[arg(long)]
    pub eps2: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub diffusion: Option<f64>,
    #[arg(long)]
    pub integrator: Option<String>,
    /// rational or polynomial.
    #[arg(long)]
    pub engine: Option<String>,
    #[arg(long)]
    pub poles: Option<PathBuf>,
    #[arg(long = "repeated-pole", allow_negative_numbers = true)]
    pub repeated_pole: Option<f64>,
    #[arg(long = "pole-count")]
    pub pole_count: Option<usize>,
    /// direct or iterative.
    #[arg(long)]
    pub solver: Option<String>,
    /// amg, ilu0 or none.
    #[arg(long)]
    pub preconditioner: Option<String>,
    #[arg(long = "solver-tol")]
    pub solver_tol: Option<f64>,
    #[arg(long = "solver-max-iter")]
    pub solver_max_iter: Option<usize>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "m-min")]
    pub m_min: Option<usize>,
    #[arg(long = "m-max")]
    pub m_max: Option<usize>,
    #[arg(long)]
    pub cadence: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Keep every k-th step in the trajectory.
    #[arg(long)]
    pub snapshots: Option<usize>,
}

macro_rules! overlay {
    ($cfg:ident, $args:ident; $($field:ident),* ; $($opt:ident),*) => {
        $(if let Some(v) = $args.$field.clone() { $cfg.$field = v; })*
        $(if $args.$opt.is_some() { $cfg.$opt = $args.$opt.clone(); })*
    };
}

impl ConfigArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        overlay!(cfg, self;
            problem, nx, graph_nodes, bc, eps2, eps, diffusion, integrator, engine, solver, preconditioner,
            solver_tol, solver_max_iter, h, t_end, tol, cadence, seed, out, snapshots;
            graph_file, coords_file, poles, repeated_pole, pole_count, m_min, m_max);
        if self.one_based {
            cfg.one_based = true;
        }
        if self.poles.is_some() && self.repeated_pole.is_none() {
            cfg.repeated_pole = None;
        }
        if self.repeated_pole.is_some() && self.poles.is_none() {
            cfg.poles = None;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Grid sizes nx (node targets for graph problems).
    #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "rational,polynomial")]
    pub engines: Vec<String>,
    /// Output CSV; defaults to <out>/bench.csv.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Directory holding the pole fixtures.
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
    /// Tableau registry to check instead of the built-in one.
    #[arg(long)]
    pub tableaus: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum PolesCommand {
    /// Parse a pole file and report diagnostics.
    Validate {
        file: PathBuf,
        /// Upper spectrum bound of the operator, for singularity warnings.
        #[arg(long = "lambda-max")]
        lambda_max: Option<f64>,
        /// Step size scaling the operator.
        #[arg(long, default_value_t = 1.0)]
        h: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum GraphCommand {
    /// Size, connectivity and spectrum bound of a graph file.
    Info {
        file: PathBuf,
        #[arg(long = "one-based")]
        one_based: bool,
    },
}

fn fail(code: i32, msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    code
}

/// Executes a parsed command and returns the process exit code.
pub fn dispatch(cli: Cli) -> i32 {
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Poles(PolesCommand::Validate { file, lambda_max, h }) => cmd_poles_validate(&file, lambda_max, h),
        Command::Graph(GraphCommand::Info { file, one_based }) => cmd_graph_info(&file, one_based),
    }
}

pub fn cmd_run(args: &ConfigArgs) -> i32 {
    let cfg = match args.resolve() {
        Ok(c) => c,
        Err(e) => return fail(2, e),
    };
    let out = match execute(&cfg) {
        Ok(o) => o,
        Err(e) => return fail(e.exit_code(), e),
    };
    for d in &out.diagnostics {
        eprintln!("{d}");
    }
    if let Err(e) = std::fs::create_dir_all(&cfg.out) {
        return fail(2, format!("cannot create {}: {e}", cfg.out.display()));
    }
    let t = &out.trajectory;
    let written = formats::write_trajectory(&cfg.out.join("trajectory.csv"), &t.times, &t.snapshots)
        .and_then(|_| formats::write_text(&cfg.out.join("report.toml"), &report(&out)));
    if let Err(e) = written {
        return fail(2, RunError::from(e));
    }
    println!(
        "n = {}, steps = {}, expmv calls = {}, mean dimension = {:.2}, max estimate = {:.2e}, wall time = {:.3} s",
        out.n,
        t.steps,
        t.calls.len(),
        t.mean_dimension(),
        t.max_estimate(),
        out.wall_time
    );
    if !t.all_converged() {
        eprintln!("warning: some expmv calls stopped at m_max above tolerance");
    }
    println!("final state checksum {}", out.checksum);
    0
}

pub fn cmd_bench(args: &BenchArgs) -> i32 {
    let base = match args.config.resolve() {
        Ok(c) => c,
        Err(e) => return fail(2, e),
    };
    if args.sizes.is_empty() || args.engines.is_empty() {
        return fail(2, "bench needs at least one size and one engine");
    }
    let csv_path = args.csv.clone().unwrap_or_else(|| base.out.join("bench.csv"));
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        if let Err(e) = std::fs::create_dir_all(dir) {
            return fail(2, format!("cannot create {}: {e}", dir.display()));
        }
    }
    let sweep = Sweep { base, sizes: args.sizes.clone(), engines: args.engines.clone() };
    let records = run_sweep(&sweep, |r| {
        if r.error.is_empty() {
            println!(
                "{} size {} {}: n = {}, avg iterations {:.2}, {:.3} s",
                r.problem, r.size, r.engine, r.n, r.avg_iterations, r.wall_time
            );
        } else {
            println!("{} size {} {}: error: {}", r.problem, r.size, r.engine, r.error);
        }
    });
    if let Err(e) = write_csv(&csv_path, &records) {
        return fail(2, e);
    }
    println!("wrote {}", csv_path.display());
    if records.iter().any(|r| !r.error.is_empty()) {
        1
    } else {
        0
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> i32 {
    let opts = VerifyOptions {
        fixtures: args.fixtures.clone().unwrap_or_else(default_fixture_dir),
        tableaus: args.tableaus.clone(),
    };
    let checks = run_all(&opts);
    print!("{}", format_table(&checks));
    if all_passed(&checks) {
        println!("all checks passed");
        0
    } else {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        println!("failed: {}", failed.join(", "));
        1
    }
}

pub fn cmd_poles_validate(file: &std::path::Path, lambda_max: Option<f64>, h: f64) -> i32 {
    let poles = match formats::load_poles(file) {
        Ok(p) => p,
        Err(e) => return fail(2, e),
    };
    println!("{}: {} poles, kind {}", file.display(), poles.len(), poles.kind().name());
    if let Some((lo, hi)) = poles.interval() {
        println!("interval [{lo}, {hi}]");
    }
    println!("conjugate closed: {}", poles.is_conjugate_closed());
    println!("positive real parts: {}", poles.all_positive_real());
    for note in poles.notes() {
        println!("note: {note}");
    }
    for d in validate(&poles, lambda_max.unwrap_or(0.0), h) {
        println!("{d}");
    }
    0
}

pub fn cmd_graph_info(file: &std::path::Path, one_based: bool) -> i32 {
    let g = match formats::load_graph(file, GraphFormat::detect(file, one_based)) {
        Ok(g) => g,
        Err(e) => return fail(2, e),
    };
    let degrees = g.degrees();
    let max_degree = degrees.iter().copied().fold(0.0, f64::max);
    let mean_degree = degrees.iter().sum::<f64>() / degrees.len().max(1) as f64;
    println!("nodes {}", g.n());
    println!("edges {}", g.edges().len());
    println!("weighted {}", !g.is_unweighted());
    println!("components {}", g.components().len());
    println!("degree mean {mean_degree:.3} max {max_degree}");
    println!("laplacian bound {}", g.laplacian_bound());
    if let Ok(lcc) = largest_connected_component(&g) {
        if lcc.n() < g.n() {
            println!("largest component {} nodes", lcc.n());
        }
    }
    if let Err(e) = graph_laplacian(&g) {
        return fail(2, e);
    }
    0
}
