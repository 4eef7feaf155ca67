//! Run configuration: defaults, a TOML file, then command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use expkrylov_core::integrators::Registry;
use expkrylov_core::problems::{BoundaryCondition, ProblemKind};
use serde::{Deserialize, Serialize};

/// Everything needed to reproduce a run. Field names double as the TOML
/// keys of the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `ac2d`, `gm2d`, `graph-ac` or `graph-gm`.
    pub problem: String,
    pub nx: usize,
    pub bc: String,
    pub graph_file: Option<PathBuf>,
    /// Indices in edge-list files start at 1.
    pub one_based: bool,
    pub coords_file: Option<PathBuf>,
    /// Node target of the synthetic road network used without a graph file.
    pub graph_nodes: usize,
    pub eps2: f64,
    pub eps: f64,
    pub diffusion: f64,
    /// Gierer–Meinhardt diffusivities and the common reaction rate
    /// `p = μ = p' = ν`; unset means the family default.
    pub da: Option<f64>,
    pub dh: Option<f64>,
    pub gm_rate: Option<f64>,
    pub integrator: String,
    /// `rational` or `polynomial`.
    pub engine: String,
    pub poles: Option<PathBuf>,
    pub repeated_pole: Option<f64>,
    pub pole_count: Option<usize>,
    /// `direct` or `iterative`.
    pub solver: String,
    /// `amg`, `ilu0` or `none`.
    pub preconditioner: String,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
    pub h: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub tol: f64,
    pub m_min: Option<usize>,
    pub m_max: Option<usize>,
    pub cadence: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Keep every `snapshots`-th step in the trajectory.
    pub snapshots: usize,
}

/// Default repeated real pole, in units of the step-scaled operator.
pub const DEFAULT_REPEATED_POLE: f64 = 1.0;

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: "ac2d".into(),
            nx: 64,
            bc: "neumann".into(),
            graph_file: None,
            one_based: false,
            coords_file: None,
            graph_nodes: 2640,
            eps2: 0.1,
            eps: 0.05,
            diffusion: 5000.0,
            da: None,
            dh: None,
            gm_rate: None,
            integrator: "sw2".into(),
            engine: "rational".into(),
            poles: None,
            repeated_pole: None,
            pole_count: None,
            solver: "direct".into(),
            preconditioner: "amg".into(),
            solver_tol: 1e-7,
            solver_max_iter: 1000,
            h: 0.05,
            t_end: 1.0,
            tol: 1e-8,
            m_min: None,
            m_max: None,
            cadence: 5,
            seed: 0,
            out: PathBuf::from("out"),
            snapshots: 1,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

impl RunConfig {
    /// Parses a config file, or the `[config]` table of a run report.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError(format!("invalid config: {e}"));
        let mut table: toml::Table = text.parse().map_err(|e| invalid(&e))?;
        if table.contains_key("summary") {
            if let Some(toml::Value::Table(config)) = table.remove("config") {
                table = config;
            }
        }
        table.try_into().map_err(|e| invalid(&e))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|ConfigError(m)| ConfigError(format!("{}: {m}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn kind(&self) -> Result<ProblemKind, ConfigError> {
        self.problem.parse().map_err(|e| ConfigError(format!("{e}")))
    }

    pub fn boundary(&self) -> Result<BoundaryCondition, ConfigError> {
        self.bc.parse().map_err(|e| ConfigError(format!("{e}")))
    }

    /// Checks names, ranges and referenced files.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        let kind = self.kind()?;
        self.boundary()?;
        Registry::builtin().get(&self.integrator).map_err(|e| ConfigError(e.to_string()))?;
        if !matches!(self.engine.as_str(), "rational" | "polynomial") {
            return bad(format!("unknown engine `{}` (expected rational or polynomial)", self.engine));
        }
        if !matches!(self.solver.as_str(), "direct" | "iterative") {
            return bad(format!("unknown solver `{}` (expected direct or iterative)", self.solver));
        }
        if !matches!(self.preconditioner.as_str(), "amg" | "ilu0" | "none") {
            return bad(format!("unknown preconditioner `{}` (expected amg, ilu0 or none)", self.preconditioner));
        }
        if self.poles.is_some() && self.repeated_pole.is_some() {
            return bad("give either a pole file or a repeated pole, not both".into());
        }
        for (name, path) in [("pole", &self.poles), ("graph", &self.graph_file), ("coordinate", &self.coords_file)] {
            if let Some(p) = path {
                if !p.is_file() {
                    return bad(format!("{name} file {} does not exist", p.display()));
                }
            }
        }
        if self.graph_file.is_some() && !kind.is_graph() {
            return bad(format!("--graph-file needs a graph problem, not `{}`", self.problem));
        }
        let positive = [
            ("h", self.h),
            ("T", self.t_end),
            ("tol", self.tol),
            ("solver-tol", self.solver_tol),
            ("eps2", self.eps2),
            ("eps", self.eps),
            ("diffusion", self.diffusion),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        for (name, v) in [("da", self.da), ("dh", self.dh), ("gm-rate", self.gm_rate)] {
            if let Some(v) = v.filter(|v| !(*v > 0.0 && v.is_finite())) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if let Some(v) = self.repeated_pole.filter(|v| *v == 0.0 || !v.is_finite()) {
            return bad(format!("repeated pole must be nonzero and finite, got {v}"));
        }
        if self.nx < 3 && !kind.is_graph() {
            return bad(format!("nx must be at least 3, got {}", self.nx));
        }
        if self.pole_count == Some(0) || self.cadence == 0 || self.snapshots == 0 || self.solver_max_iter == 0 {
            return bad("pole-count, cadence, snapshots and solver-max-iter must be positive".into());
        }
        if let (Some(lo), Some(hi)) = (self.m_min, self.m_max) {
            if lo == 0 || lo > hi {
                return bad(format!("need 1 <= m-min <= m-max, got {lo} and {hi}"));
            }
        }
        Ok(())
    }
}
