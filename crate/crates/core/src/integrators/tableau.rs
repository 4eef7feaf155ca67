use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

const HEADER: &str = "format expkrylov-tableau 1";

/// Built-in registry text.
pub const BUILTIN_TABLEAUS: &str = include_str!("../../data/tableaus.txt");

/// `coef · φ_phi` contribution to the coupling with stage `source`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub source: usize,
    pub phi: usize,
    pub coef: f64,
}

/// Explicit exponential Runge–Kutta method. Stage indices are 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Tableau {
    name: String,
    order: usize,
    nodes: Vec<f64>,
    stages: Vec<Vec<Term>>,
    weights: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TableauError {
    Unknown { name: String, valid: Vec<String> },
    Parse { line: usize, message: String },
    Invalid { method: String, message: String },
}

impl fmt::Display for TableauError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unknown { name, valid } => {
                write!(f, "unknown integrator `{name}`; valid names: {}", valid.join(", "))
            }
            Self::Parse { line, message } => write!(f, "tableau file line {line}: {message}"),
            Self::Invalid { method, message } => write!(f, "tableau `{method}` is inconsistent: {message}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TableauError {}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl Tableau {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn stages(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn stage_terms(&self, j: usize) -> &[Term] {
        &self.stages[j]
    }

    pub fn weight_terms(&self) -> &[Term] {
        &self.weights
    }

    /// Largest φ index in use.
    pub fn max_phi(&self) -> usize {
        self.stages.iter().flatten().chain(&self.weights).map(|t| t.phi).max().unwrap_or(0)
    }

    /// Expmv calls per step: one per stage with `c_j > 0` plus the update.
    pub fn calls_per_step(&self) -> usize {
        self.nodes.iter().filter(|&&c| c != 0.0).count() + 1
    }

    /// `a_jk(0)` using `φ_l(0) = 1/l!`.
    pub fn stage_at_zero(&self, j: usize, k: usize) -> f64 {
        self.stages[j].iter().filter(|t| t.source == k).map(|t| t.coef / factorial(t.phi)).sum()
    }

    /// `b_j(0)`.
    pub fn weight_at_zero(&self, j: usize) -> f64 {
        self.weights.iter().filter(|t| t.source == j).map(|t| t.coef / factorial(t.phi)).sum()
    }

    /// Checks the explicit shape, `c_1 = 0`, `Σ_k a_jk(0) = c_j` and
    /// `Σ_j b_j(0) = 1`.
    pub fn validate(&self) -> Result<(), TableauError> {
        let bad = |message: String| Err(TableauError::Invalid { method: self.name.clone(), message });
        if self.nodes.is_empty() {
            return bad("no stages".into());
        }
        if self.nodes[0] != 0.0 {
            return bad("the first node must be 0".into());
        }
        for (j, terms) in self.stages.iter().enumerate() {
            if let Some(t) = terms.iter().find(|t| t.source >= j) {
                return bad(format!("stage {} couples to stage {}; the method must be explicit", j + 1, t.source + 1));
            }
            let row: f64 = (0..j).map(|k| self.stage_at_zero(j, k)).sum();
            if crate::math::abs(row - self.nodes[j]) > 1e-12 {
                return bad(format!("stage {} row sum at zero is {row}, node is {}", j + 1, self.nodes[j]));
            }
        }
        let total: f64 = (0..self.stages()).map(|j| self.weight_at_zero(j)).sum();
        if crate::math::abs(total - 1.0) > 1e-12 {
            return bad(format!("weights sum to {total} at zero, expected 1"));
        }
        Ok(())
    }
}

/// Named tableaus in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct Registry {
    methods: Vec<Tableau>,
}

impl Registry {
    /// The registry compiled into the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_TABLEAUS).expect("built-in tableau registry is valid")
    }

    /// Parses and validates every method.
    pub fn parse(text: &str) -> Result<Self, TableauError> {
        let reg = Self::parse_unchecked(text)?;
        for t in &reg.methods {
            t.validate()?;
        }
        Ok(reg)
    }

    /// Parses without the consistency checks.
    pub fn parse_unchecked(text: &str) -> Result<Self, TableauError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, l)) if l == HEADER => {}
            Some((line, l)) => return Err(TableauError::Parse { line, message: format!("expected `{HEADER}`, found `{l}`") }),
            None => return Err(TableauError::Parse { line: 0, message: "empty tableau file".into() }),
        }
        let mut methods = Vec::new();
        let mut current: Option<Tableau> = None;
        for (line, l) in lines {
            let err = |message: String| TableauError::Parse { line, message };
            let fields: Vec<&str> = l.split_whitespace().collect();
            let (key, args) = (fields[0], &fields[1..]);
            if key == "method" {
                if current.is_some() {
                    return Err(err("`method` inside an open block".into()));
                }
                let name = args.first().ok_or_else(|| err("missing method name".into()))?;
                if methods.iter().any(|t: &Tableau| t.name == *name) {
                    return Err(err(format!("duplicate method `{name}`")));
                }
                current = Some(Tableau {
                    name: name.to_string(),
                    order: 0,
                    nodes: Vec::new(),
                    stages: Vec::new(),
                    weights: Vec::new(),
                });
                continue;
            }
            let t = current.as_mut().ok_or_else(|| err(format!("`{key}` outside a method block")))?;
            match key {
                "order" => {
                    t.order = args.first().and_then(|s| s.parse().ok()).ok_or_else(|| err("malformed order".into()))?;
                }
                "nodes" => {
                    t.nodes = args.iter().map(|s| parse_rational(s).ok_or_else(|| err(format!("bad node `{s}`")))).collect::<Result<_, _>>()?;
                    t.stages = alloc::vec![Vec::new(); t.nodes.len()];
                }
                "stage" | "weight" => {
                    let want = if key == "stage" { 4 } else { 3 };
                    if args.len() != want {
                        return Err(err(format!("`{key}` takes {want} fields")));
                    }
                    let idx = |s: &str| s.parse::<usize>().ok().filter(|&v| v >= 1).ok_or_else(|| err(format!("bad index `{s}`")));
                    let coef = parse_rational(args[want - 1]).ok_or_else(|| err(format!("bad coefficient `{}`", args[want - 1])))?;
                    let phi = idx(args[want - 2])?;
                    let s = t.nodes.len();
                    if key == "stage" {
                        let (j, k) = (idx(args[0])?, idx(args[1])?);
                        if j > s || k > s {
                            return Err(err("stage index beyond the node count".into()));
                        }
                        t.stages[j - 1].push(Term { source: k - 1, phi, coef });
                    } else {
                        let j = idx(args[0])?;
                        if j > s {
                            return Err(err("weight index beyond the node count".into()));
                        }
                        t.weights.push(Term { source: j - 1, phi, coef });
                    }
                }
                "end" => methods.push(current.take().expect("open block")),
                other => return Err(err(format!("unknown keyword `{other}`"))),
            }
        }
        if let Some(t) = current {
            return Err(TableauError::Parse { line: 0, message: format!("method `{}` is missing `end`", t.name) });
        }
        Ok(Self { methods })
    }

    pub fn names(&self) -> Vec<String> {
        self.methods.iter().map(|t| t.name.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&Tableau, TableauError> {
        self.methods
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| TableauError::Unknown { name: name.to_string(), valid: self.names() })
    }
}

/// Built-in tableau by name.
pub fn tableau(name: &str) -> Result<Tableau, TableauError> {
    Registry::builtin().get(name).cloned()
}

fn parse_rational(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((a, b)) => {
            let (a, b) = (a.parse::<f64>().ok()?, b.parse::<f64>().ok()?);
            (b != 0.0).then(|| a / b)
        }
        None => s.parse().ok(),
    }
}
