//! Assembles problems, pole sets and engines from a [`RunConfig`] and runs
//! the time integration.

use std::fmt::Write as _;
use std::time::Instant;

use expkrylov_core::integrators::{integrate, tableau, ExpmvEngine, IntegrateError, PolynomialEngine, RationalEngine, Trajectory};
use expkrylov_core::krylov::{Clock, ExpmvOptions};
use expkrylov_core::poles::{validate, Diagnostic, PoleKind, PoleSet};
use expkrylov_core::problems::{road_like_graph, GiererMeinhardtParams, Graph, Problem, ProblemKind};
use expkrylov_core::solvers::{DirectSolver, IterativeSolver, PreconditionerKind, SolverConfig, SolverMode, SolverStats};
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, RunConfig, DEFAULT_REPEATED_POLE};
use crate::formats::{self, GraphFormat};

/// Wall clock backed by [`Instant`].
#[derive(Clone, Copy, Debug)]
pub struct SystemClock(Instant);

impl SystemClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Format(#[from] formats::FormatError),
    #[error("integration failed: {0}")]
    Numeric(#[from] IntegrateError),
}

impl RunError {
    /// 2 for configuration and input problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Format(_) => 2,
            Self::Numeric(_) => 3,
        }
    }
}

fn gm_params(cfg: &RunConfig, graph: bool) -> GiererMeinhardtParams {
    let mut p = GiererMeinhardtParams::default();
    if graph {
        p = GiererMeinhardtParams { da: 10.0, dh: 1000.0, p: 8.0, mu: 8.0, p_prime: 8.0, nu: 8.0, ..p };
    }
    if let Some(r) = cfg.gm_rate {
        p = GiererMeinhardtParams { p: r, mu: r, p_prime: r, nu: r, ..p };
    }
    GiererMeinhardtParams { da: cfg.da.unwrap_or(p.da), dh: cfg.dh.unwrap_or(p.dh), ..p }
}

/// The graph of a graph problem: the configured file, or the synthetic
/// road network seeded by `cfg.seed`.
pub fn load_graph(cfg: &RunConfig) -> Result<Graph, RunError> {
    let Some(path) = &cfg.graph_file else {
        return road_like_graph(cfg.graph_nodes, cfg.seed).map_err(|e| ConfigError(e.to_string()).into());
    };
    let g = formats::load_graph(path, GraphFormat::detect(path, cfg.one_based))?;
    let g = match &cfg.coords_file {
        Some(c) => {
            let coords = formats::load_coords(c, g.n(), cfg.one_based)?;
            g.with_coords(coords).map_err(|e| ConfigError(e.to_string()))?
        }
        None => g,
    };
    Ok(g)
}

pub fn build_problem(cfg: &RunConfig) -> Result<Problem, RunError> {
    let err = |e: expkrylov_core::problems::ProblemError| RunError::Config(ConfigError(e.to_string()));
    let kind = cfg.kind()?;
    let p = match kind {
        ProblemKind::AllenCahn2d => Problem::allen_cahn_2d(cfg.nx, cfg.eps2, cfg.boundary()?, -1.0, 2.0).map_err(err)?,
        ProblemKind::GiererMeinhardt2d => Problem::gierer_meinhardt_2d(cfg.nx, gm_params(cfg, false), cfg.seed).map_err(err)?,
        ProblemKind::GraphAllenCahn => {
            Problem::graph_allen_cahn(&load_graph(cfg)?, cfg.eps, cfg.diffusion, cfg.seed).map_err(err)?
        }
        ProblemKind::GraphGiererMeinhardt => {
            Problem::graph_gierer_meinhardt(&load_graph(cfg)?, gm_params(cfg, true), cfg.seed).map_err(err)?
        }
    };
    Ok(p)
}

pub fn build_poles(cfg: &RunConfig) -> Result<PoleSet, RunError> {
    if let Some(path) = &cfg.poles {
        return Ok(formats::load_poles(path)?);
    }
    let value = cfg.repeated_pole.unwrap_or(DEFAULT_REPEATED_POLE);
    let count = cfg.pole_count.unwrap_or(72);
    PoleSet::repeated_real(value, count).map_err(|e| ConfigError(format!("invalid repeated pole: {e}")).into())
}

pub fn expmv_options(cfg: &RunConfig, kind: Option<PoleKind>) -> ExpmvOptions {
    let base = match kind {
        Some(k) => ExpmvOptions::rational(k),
        None => ExpmvOptions::polynomial(),
    };
    ExpmvOptions {
        tol: cfg.tol,
        m_min: cfg.m_min.unwrap_or(base.m_min),
        m_max: cfg.m_max.unwrap_or(base.m_max),
        cadence: cfg.cadence,
        ..base
    }
}

pub fn solver_config(cfg: &RunConfig) -> SolverConfig {
    SolverConfig {
        mode: if cfg.solver == "iterative" { SolverMode::Iterative } else { SolverMode::Direct },
        tolerance: cfg.solver_tol,
        max_iterations: cfg.solver_max_iter,
        preconditioner: match cfg.preconditioner.as_str() {
            "ilu0" => PreconditionerKind::Ilu0,
            "none" => PreconditionerKind::None,
            _ => PreconditionerKind::AggregationAmg,
        },
        ..SolverConfig::default()
    }
}

pub fn build_engine(cfg: &RunConfig, poles: Option<PoleSet>) -> Result<Box<dyn ExpmvEngine>, RunError> {
    if cfg.engine == "polynomial" {
        return Ok(Box::new(PolynomialEngine::new(expmv_options(cfg, None))));
    }
    let poles = match poles {
        Some(p) => p,
        None => build_poles(cfg)?,
    };
    let opts = expmv_options(cfg, Some(poles.kind()));
    opts.validate().map_err(|e| ConfigError(e.to_string()))?;
    let sc = solver_config(cfg);
    Ok(if sc.mode == SolverMode::Iterative {
        if !poles.all_positive_real() {
            return Err(ConfigError("the iterative solver needs poles with positive real part; use --solver direct".into()).into());
        }
        let solver = IterativeSolver::new(sc).map_err(|e| ConfigError(e.to_string()))?;
        Box::new(RationalEngine::new(poles, opts, solver))
    } else {
        Box::new(RationalEngine::new(poles, opts, DirectSolver::default()))
    })
}

/// Everything a run produces besides the output files.
#[derive(Debug)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub n: usize,
    pub trajectory: Trajectory,
    /// Seconds spent integrating, factorizations included, assembly and
    /// pole loading excluded.
    pub wall_time: f64,
    pub solver: SolverStats,
    pub diagnostics: Vec<Diagnostic>,
    pub checksum: String,
}

/// First 16 hex digits of SHA-256 over the little-endian state bytes.
pub fn checksum(u: &[f64]) -> String {
    let mut h = Sha256::new();
    for x in u {
        h.update(x.to_le_bytes());
    }
    h.finalize().iter().take(8).fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn execute(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    cfg.validate()?;
    let problem = build_problem(cfg)?;
    let tab = tableau(&cfg.integrator).map_err(|e| ConfigError(e.to_string()))?;
    let (poles, diagnostics) = if cfg.engine == "rational" {
        let poles = build_poles(cfg)?;
        let largest_step = cfg.h.min(cfg.t_end);
        let diags = validate(&poles, problem.spectrum_hint.1, largest_step);
        (Some(poles), diags)
    } else {
        (None, Vec::new())
    };
    let mut engine = build_engine(cfg, poles)?;
    let clock = SystemClock::new();
    let start = clock.seconds();
    let trajectory =
        integrate(&problem, &tab, &problem.u0, 0.0, cfg.h, cfg.t_end, engine.as_mut(), cfg.snapshots, Some(&clock))?;
    let wall_time = clock.seconds() - start;
    Ok(RunOutcome {
        config: cfg.clone(),
        n: problem.n(),
        checksum: checksum(&trajectory.final_state),
        solver: engine.solver_stats(),
        trajectory,
        wall_time,
        diagnostics,
    })
}

/// Plain-text run report: summary lines followed by the config echo.
pub fn report(out: &RunOutcome) -> String {
    let t = &out.trajectory;
    let mut s = String::new();
    let _ = writeln!(s, "# expkrylov run report; rerun with `expkrylov run --config <this file>`");
    for d in &out.diagnostics {
        let _ = writeln!(s, "# {d}");
    }
    let _ = writeln!(s, "[summary]");
    let _ = writeln!(s, "version = \"{}\"", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "n = {}", out.n);
    let _ = writeln!(s, "steps = {}", t.steps);
    let _ = writeln!(s, "final_time = {:?}", t.final_time);
    let _ = writeln!(s, "expmv_calls = {}", t.calls.len());
    let _ = writeln!(s, "mean_dimension = {:.3}", t.mean_dimension());
    let _ = writeln!(s, "max_dimension = {}", t.calls.iter().map(|c| c.dimension).max().unwrap_or(0));
    let _ = writeln!(s, "max_estimate = {:e}", t.max_estimate());
    let _ = writeln!(s, "total_dimension = {}", t.calls.iter().map(|c| c.dimension).sum::<usize>());
    let _ = writeln!(s, "all_converged = {}", t.all_converged());
    let _ = writeln!(s, "solver_iterations = {}", t.solver_iterations());
    let _ = writeln!(s, "max_solver_residual = {:e}", t.max_solver_residual());
    let _ = writeln!(s, "numeric_factorizations = {}", out.solver.numeric_factorizations);
    let _ = writeln!(s, "wall_time_seconds = {:.6}", out.wall_time);
    let _ = writeln!(s, "final_state_checksum = \"{}\"", out.checksum);
    let _ = writeln!(s, "\n[config]");
    s.push_str(&out.config.to_toml());
    s
}
