//! Benchmark problems `u' = -A u + g(t, u)`: finite-difference and graph
//! Laplacians, reaction terms and initial data.

mod fd;
mod graph;
mod initial;
mod reaction;

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use fd::{fd_coordinates_1d, fd_laplacian_1d, fd_laplacian_2d, BoundaryCondition};
pub use graph::{graph_laplacian, largest_connected_component, road_like_graph, Graph};
pub use initial::{
    allen_cahn_initial_value, initial_condition, seeded_rng, uniform_random, InitialState,
};
pub use reaction::{reaction_allen_cahn, reaction_gierer_meinhardt, GiererMeinhardtParams};

use crate::linalg::{LinalgError, SparseOperator};

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemError {
    GridTooSmall { nx: usize },
    InvalidLength(f64),
    InvalidParameter { name: &'static str, value: f64 },
    NegativeWeight { i: usize, j: usize, w: f64 },
    NodeOutOfRange { node: usize, n: usize },
    EmptyGraph,
    UnknownKind(String),
    UnknownBoundary(String),
    DimensionMismatch { expected: usize, found: usize },
    Linalg(LinalgError),
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GridTooSmall { nx } => write!(f, "grid needs nx >= 3, got {nx}"),
            Self::InvalidLength(l) => write!(f, "domain length must be positive, got {l}"),
            Self::InvalidParameter { name, value } => write!(f, "invalid parameter {name} = {value}"),
            Self::NegativeWeight { i, j, w } => write!(f, "edge ({i}, {j}) has invalid weight {w}"),
            Self::NodeOutOfRange { node, n } => write!(f, "node {node} out of range for {n} nodes"),
            Self::EmptyGraph => write!(f, "graph has no nodes"),
            Self::UnknownKind(k) => write!(
                f,
                "unknown problem kind `{k}` (expected one of: ac2d, gm2d, graph-ac, graph-gm)"
            ),
            Self::UnknownBoundary(b) => write!(
                f,
                "unknown boundary condition `{b}` (expected dirichlet, neumann or periodic)"
            ),
            Self::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Self::Linalg(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ProblemError {}

impl From<LinalgError> for ProblemError {
    fn from(e: LinalgError) -> Self {
        Self::Linalg(e)
    }
}

/// The four benchmark families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    AllenCahn2d,
    GiererMeinhardt2d,
    GraphAllenCahn,
    GraphGiererMeinhardt,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] =
        [Self::AllenCahn2d, Self::GiererMeinhardt2d, Self::GraphAllenCahn, Self::GraphGiererMeinhardt];

    pub fn name(self) -> &'static str {
        match self {
            Self::AllenCahn2d => "ac2d",
            Self::GiererMeinhardt2d => "gm2d",
            Self::GraphAllenCahn => "graph-ac",
            Self::GraphGiererMeinhardt => "graph-gm",
        }
    }

    pub fn is_graph(self) -> bool {
        matches!(self, Self::GraphAllenCahn | Self::GraphGiererMeinhardt)
    }
}

impl FromStr for ProblemKind {
    type Err = ProblemError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ProblemError::UnknownKind(s.into()))
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

type ReactionFn = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;

/// The nonlinearity `g(t, u)`.
#[derive(Clone)]
pub enum Reaction {
    /// `g ≡ 0`.
    Zero,
    /// `g = scale · (u - u³)`.
    AllenCahn { scale: f64 },
    /// Activator block first, inhibitor block second.
    GiererMeinhardt(GiererMeinhardtParams),
    /// Time-independent source term.
    Constant(Vec<f64>),
    Custom(Arc<ReactionFn>),
}

impl fmt::Debug for Reaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::AllenCahn { scale } => write!(f, "AllenCahn {{ scale: {scale} }}"),
            Self::GiererMeinhardt(p) => write!(f, "GiererMeinhardt({p:?})"),
            Self::Constant(v) => write!(f, "Constant(len {})", v.len()),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Reaction {
    pub fn eval(&self, t: f64, u: &[f64]) -> Vec<f64> {
        match self {
            Self::Zero => alloc::vec![0.0; u.len()],
            Self::AllenCahn { scale } => u.iter().map(|&x| scale * (x - x * x * x)).collect(),
            Self::GiererMeinhardt(p) => {
                let n = u.len() / 2;
                let (ga, gh) = reaction_gierer_meinhardt(&u[..n], &u[n..], p);
                let mut g = ga;
                g.extend(gh);
                g
            }
            Self::Constant(v) => v.clone(),
            Self::Custom(f) => f(t, u),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }
}

/// A fully assembled semi-linear system.
#[derive(Clone, Debug)]
pub struct Problem {
    pub operator: SparseOperator,
    pub reaction: Reaction,
    pub u0: Vec<f64>,
    pub params: Vec<(String, f64)>,
    /// `[0, λ_max]` bound on the spectrum of `operator`.
    pub spectrum_hint: (f64, f64),
}

impl Problem {
    pub fn new(operator: SparseOperator, reaction: Reaction, u0: Vec<f64>) -> Result<Self, ProblemError> {
        if operator.n() != u0.len() {
            return Err(ProblemError::DimensionMismatch { expected: operator.n(), found: u0.len() });
        }
        let bound = operator.gershgorin_upper();
        Ok(Self { operator, reaction, u0, params: Vec::new(), spectrum_hint: (0.0, bound) })
    }

    /// `u' = -A u` with the Gershgorin bound as spectrum hint.
    pub fn linear(operator: SparseOperator, u0: Vec<f64>) -> Result<Self, ProblemError> {
        Self::new(operator, Reaction::Zero, u0)
    }

    pub fn n(&self) -> usize {
        self.operator.n()
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn reaction(&self, t: f64, u: &[f64]) -> Vec<f64> {
        self.reaction.eval(t, u)
    }

    fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.push((name.into(), value));
        self
    }

    /// Continuous Allen–Cahn on `[x_min, x_min + L]²`: `A = ε²·Δ_h`, `g = u - u³`,
    /// initial data `0.1 + 0.1 cos(2πx) cos(2πy)`.
    pub fn allen_cahn_2d(
        nx: usize,
        eps2: f64,
        bc: BoundaryCondition,
        x_min: f64,
        length: f64,
    ) -> Result<Self, ProblemError> {
        if !(eps2 > 0.0 && eps2.is_finite()) {
            return Err(ProblemError::InvalidParameter { name: "eps2", value: eps2 });
        }
        let lap = fd_laplacian_2d(nx, length, bc)?;
        let hx = length / nx as f64;
        let xs = fd_coordinates_1d(nx, x_min, length, bc);
        let mut u0 = Vec::with_capacity(nx * nx);
        for &x in &xs {
            for &y in &xs {
                u0.push(allen_cahn_initial_value(x, y));
            }
        }
        let mut p = Self::new(lap.scaled(eps2), Reaction::AllenCahn { scale: 1.0 }, u0)?;
        p.spectrum_hint = (0.0, eps2 * 8.0 / (hx * hx));
        Ok(p.with_param("eps2", eps2).with_param("L_x", length).with_param("h_x", hx))
    }

    /// The standard continuous Allen–Cahn setting: `ε² = 0.1`, Neumann, `[-1, 1]²`.
    pub fn allen_cahn_default(nx: usize) -> Result<Self, ProblemError> {
        Self::allen_cahn_2d(nx, 0.1, BoundaryCondition::Neumann, -1.0, 2.0)
    }

    /// Gierer–Meinhardt on the periodic unit square with block-diagonal
    /// operator `diag(D_a Δ_h, D_h Δ_h)`.
    pub fn gierer_meinhardt_2d(nx: usize, params: GiererMeinhardtParams, seed: u64) -> Result<Self, ProblemError> {
        params.validate()?;
        let lap = fd_laplacian_2d(nx, 1.0, BoundaryCondition::Periodic)?;
        let hx = 1.0 / nx as f64;
        let a = SparseOperator::block_diag(&lap.scaled(params.da), &lap.scaled(params.dh));
        let n = nx * nx;
        let mut u0 = uniform_random(n, 0.4, 0.6, seed);
        u0.extend(core::iter::repeat(0.2).take(n));
        let mut p = Self::new(a, Reaction::GiererMeinhardt(params), u0)?;
        p.spectrum_hint = (0.0, params.da.max(params.dh) * 8.0 / (hx * hx));
        Ok(p.with_gm_params(&params).with_param("L_x", 1.0).with_param("h_x", hx))
    }

    /// Scaled network Allen–Cahn: `A = ε D L`, `g = (u - u³)/ε`, seeded
    /// uniform initial data in `[-1, 1]`.
    pub fn graph_allen_cahn(graph: &Graph, eps: f64, diffusion: f64, seed: u64) -> Result<Self, ProblemError> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(ProblemError::InvalidParameter { name: "eps", value: eps });
        }
        if !(diffusion > 0.0 && diffusion.is_finite()) {
            return Err(ProblemError::InvalidParameter { name: "D", value: diffusion });
        }
        let lap = graph_laplacian(graph)?;
        let u0 = uniform_random(graph.n(), -1.0, 1.0, seed);
        let mut p = Self::new(lap.scaled(eps * diffusion), Reaction::AllenCahn { scale: 1.0 / eps }, u0)?;
        p.spectrum_hint = (0.0, eps * diffusion * graph.laplacian_bound());
        Ok(p.with_param("eps", eps).with_param("D", diffusion))
    }

    pub fn graph_gierer_meinhardt(graph: &Graph, params: GiererMeinhardtParams, seed: u64) -> Result<Self, ProblemError> {
        params.validate()?;
        let lap = graph_laplacian(graph)?;
        let a = SparseOperator::block_diag(&lap.scaled(params.da), &lap.scaled(params.dh));
        let n = graph.n();
        let mut u0 = uniform_random(n, 0.4, 0.6, seed);
        u0.extend(core::iter::repeat(0.2).take(n));
        let mut p = Self::new(a, Reaction::GiererMeinhardt(params), u0)?;
        p.spectrum_hint = (0.0, params.da.max(params.dh) * graph.laplacian_bound());
        Ok(p.with_gm_params(&params))
    }

    fn with_gm_params(self, g: &GiererMeinhardtParams) -> Self {
        self.with_param("D_a", g.da)
            .with_param("D_h", g.dh)
            .with_param("p", g.p)
            .with_param("mu", g.mu)
            .with_param("p'", g.p_prime)
            .with_param("nu", g.nu)
    }
}
