//! Pole sets for the rational Krylov space.
//!
//! Poles are stored in the positive-real convention: a finite pole `ξ`
//! produces the shifted system `(ξ I + α A) x = b`, so every `ξ` with
//! `Re ξ > 0` is safe for a positive semi-definite `A`. Files written in the
//! opposite convention declare `# convention=negative-real` and are negated
//! on load.
//!
//! Text format:
//!
//! ```text
//! # kind=complex
//! # interval=0,1e6
//! # convention=positive-real
//! 6.0812284103609 1.2150883471844505
//! 6.0812284103609 -1.2150883471844505
//! ```
//!
//! Other `#` lines are free-form notes and are kept verbatim.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::C64;

/// Relative tolerance for matching conjugate partners.
pub const CONJUGATE_TOL: f64 = 1e-12;

/// Relative distance below which `validate` flags a pole as too close to
/// the negated spectrum.
pub const NEAR_SPECTRUM_TOL: f64 = 1e-8;

/// One Arnoldi pole; `Infinite` gives a polynomial step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Pole {
    Finite(C64),
    Infinite,
}

impl Pole {
    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    /// `1/ξ`, zero for `∞`.
    pub fn inverse(&self) -> C64 {
        match self {
            Self::Finite(z) => z.inv(),
            Self::Infinite => C64::new(0.0, 0.0),
        }
    }
}

impl fmt::Display for Pole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(z) => write!(f, "{z}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoleKind {
    RepeatedReal,
    Complex,
}

impl PoleKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::RepeatedReal => "repeated-real",
            Self::Complex => "complex",
        }
    }
}

impl FromStr for PoleKind {
    type Err = PoleError;

    fn from_str(s: &str) -> Result<Self, PoleError> {
        match s.trim() {
            "repeated-real" => Ok(Self::RepeatedReal),
            "complex" | "complex-file" => Ok(Self::Complex),
            other => Err(PoleError::Parse { line: 0, message: format!("unknown pole kind `{other}`") }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    PositiveReal,
    NegativeReal,
}

impl FromStr for Convention {
    type Err = PoleError;

    fn from_str(s: &str) -> Result<Self, PoleError> {
        match s.trim() {
            "positive-real" => Ok(Self::PositiveReal),
            "negative-real" => Ok(Self::NegativeReal),
            other => Err(PoleError::Parse { line: 0, message: format!("unknown convention `{other}`") }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PoleError {
    ZeroPole { index: usize },
    NonFinite { index: usize },
    Empty,
    /// Pole `index` has no adjacent conjugate partner.
    NotConjugateClosed { index: usize, pole: C64 },
    NotRepeated { index: usize },
    Parse { line: usize, message: String },
}

impl fmt::Display for PoleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ZeroPole { index } => write!(f, "pole {index} is zero"),
            Self::NonFinite { index } => write!(f, "pole {index} is not finite"),
            Self::Empty => write!(f, "pole set is empty"),
            Self::NotConjugateClosed { index, pole } => {
                write!(f, "pole {index} ({pole}) has no adjacent conjugate partner")
            }
            Self::NotRepeated { index } => write!(f, "pole {index} differs from the repeated value"),
            Self::Parse { line, message } => write!(f, "line {line}: {message}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PoleError {}

/// Ordered finite poles with metadata. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleSet {
    poles: Vec<C64>,
    kind: PoleKind,
    interval: Option<(f64, f64)>,
    conjugate_closed: bool,
    notes: Vec<String>,
}

impl PoleSet {
    /// `value` repeated `count` times.
    pub fn repeated_real(value: f64, count: usize) -> Result<Self, PoleError> {
        if count == 0 {
            return Err(PoleError::Empty);
        }
        if !value.is_finite() {
            return Err(PoleError::NonFinite { index: 0 });
        }
        if value == 0.0 {
            return Err(PoleError::ZeroPole { index: 0 });
        }
        Ok(Self {
            poles: alloc::vec![C64::new(value, 0.0); count],
            kind: PoleKind::RepeatedReal,
            interval: None,
            conjugate_closed: true,
            notes: Vec::new(),
        })
    }

    /// Checks finiteness, nonzero entries and, for complex sets, adjacent
    /// conjugate pairs.
    pub fn from_list(poles: Vec<C64>, kind: PoleKind, interval: Option<(f64, f64)>) -> Result<Self, PoleError> {
        let set = Self::unchecked(poles, kind, interval)?;
        if let Some((index, pole)) = first_unpaired(&set.poles) {
            return Err(PoleError::NotConjugateClosed { index, pole });
        }
        Ok(set)
    }

    /// As [`from_list`](Self::from_list) but accepts sets that are not
    /// closed under conjugation.
    pub fn from_list_unclosed(poles: Vec<C64>, kind: PoleKind, interval: Option<(f64, f64)>) -> Result<Self, PoleError> {
        Self::unchecked(poles, kind, interval)
    }

    fn unchecked(poles: Vec<C64>, kind: PoleKind, interval: Option<(f64, f64)>) -> Result<Self, PoleError> {
        if poles.is_empty() {
            return Err(PoleError::Empty);
        }
        for (index, z) in poles.iter().enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(PoleError::NonFinite { index });
            }
            if z.re == 0.0 && z.im == 0.0 {
                return Err(PoleError::ZeroPole { index });
            }
        }
        if kind == PoleKind::RepeatedReal {
            if let Some(index) = poles.iter().position(|z| *z != poles[0] || z.im != 0.0) {
                return Err(PoleError::NotRepeated { index });
            }
        }
        let conjugate_closed = first_unpaired(&poles).is_none();
        Ok(Self { poles, kind, interval, conjugate_closed, notes: Vec::new() })
    }

    pub fn poles(&self) -> &[C64] {
        &self.poles
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn kind(&self) -> PoleKind {
        self.kind
    }

    pub fn interval(&self) -> Option<(f64, f64)> {
        self.interval
    }

    pub fn is_conjugate_closed(&self) -> bool {
        self.conjugate_closed
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn with_notes(mut self, notes: Vec<String>) -> Self {
        self.notes = notes;
        self
    }

    /// Pole `i` as an Arnoldi pole; past the end of the set, `∞`.
    pub fn get(&self, i: usize) -> Pole {
        self.poles.get(i).map_or(Pole::Infinite, |z| Pole::Finite(*z))
    }

    /// Whether every pole has `Re ξ > 0` (required by the iterative solver).
    pub fn all_positive_real(&self) -> bool {
        self.poles.iter().all(|z| z.re > 0.0)
    }

    /// Parses the text format, flipping signs for negative-real files.
    pub fn parse(text: &str) -> Result<Self, PoleError> {
        Self::parse_with(text, false)
    }

    /// `allow_unclosed` skips the conjugate-closure check.
    pub fn parse_with(text: &str, allow_unclosed: bool) -> Result<Self, PoleError> {
        let mut kind = None;
        let mut interval = None;
        let mut convention = Convention::PositiveReal;
        let mut notes = Vec::new();
        let mut poles = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                let at = |e: PoleError| match e {
                    PoleError::Parse { message, .. } => PoleError::Parse { line: line_no, message },
                    other => other,
                };
                match comment.split_once('=') {
                    Some(("kind", v)) => kind = Some(v.parse::<PoleKind>().map_err(at)?),
                    Some(("convention", v)) => convention = v.parse::<Convention>().map_err(at)?,
                    Some(("interval", v)) => interval = Some(parse_interval(v).ok_or_else(|| PoleError::Parse {
                        line: line_no,
                        message: format!("malformed interval `{v}`"),
                    })?),
                    _ => notes.push(comment.to_string()),
                }
                continue;
            }
            let mut fields = line.split_whitespace();
            let mut next = |what: &str| -> Result<f64, PoleError> {
                let tok = fields.next().ok_or_else(|| PoleError::Parse {
                    line: line_no,
                    message: format!("missing {what} part"),
                })?;
                tok.parse::<f64>().map_err(|_| PoleError::Parse {
                    line: line_no,
                    message: format!("invalid number `{tok}`"),
                })
            };
            let re = next("real")?;
            let im = next("imaginary")?;
            if fields.next().is_some() {
                return Err(PoleError::Parse { line: line_no, message: "expected two fields `re im`".into() });
            }
            let z = C64::new(re, im);
            poles.push(if convention == Convention::NegativeReal { -z } else { z });
        }
        let kind = kind.unwrap_or(PoleKind::Complex);
        let set = if allow_unclosed {
            Self::from_list_unclosed(poles, kind, interval)?
        } else {
            Self::from_list(poles, kind, interval)?
        };
        Ok(set.with_notes(notes))
    }

    /// Serializes in the positive-real convention with shortest round-trip
    /// float formatting.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# kind={}\n", self.kind.name()));
        if let Some((lo, hi)) = self.interval {
            out.push_str(&format!("# interval={lo},{hi}\n"));
        }
        out.push_str("# convention=positive-real\n");
        for note in &self.notes {
            out.push_str(&format!("# {note}\n"));
        }
        for z in &self.poles {
            out.push_str(&format!("{} {}\n", z.re, z.im));
        }
        out
    }
}

fn parse_interval(v: &str) -> Option<(f64, f64)> {
    let (a, b) = v.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn first_unpaired(poles: &[C64]) -> Option<(usize, C64)> {
    let mut i = 0;
    while i < poles.len() {
        let z = poles[i];
        if crate::math::abs(z.im) <= CONJUGATE_TOL * z.norm() {
            i += 1;
            continue;
        }
        match poles.get(i + 1) {
            Some(w) if (*w - z.conj()).norm() <= CONJUGATE_TOL * z.norm() => i += 2,
            _ => return Some((i, z)),
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Diagnostic {
    /// `ξ I + scale·A` may be singular: the pole is within the tolerance of
    /// the negated spectrum interval.
    NearSpectrum { index: usize, pole: C64, distance: f64 },
    /// `Re ξ ≤ 0`: only the direct solver accepts this pole.
    DirectOnly { index: usize, pole: C64 },
}

impl Diagnostic {
    pub fn is_warning(&self) -> bool {
        matches!(self, Self::NearSpectrum { .. })
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NearSpectrum { index, pole, distance } => write!(
                f,
                "warning: pole {index} ({pole}) lies {distance:e} from the negated spectrum; the shifted system may be singular"
            ),
            Self::DirectOnly { index, pole } => {
                write!(f, "note: pole {index} ({pole}) has Re <= 0 and needs the direct solver")
            }
        }
    }
}

/// Diagnostics for `poles` against the spectrum `[0, lambda_max]` of `A`
/// scaled by `scale`. Never fails.
pub fn validate(poles: &PoleSet, lambda_max: f64, scale: f64) -> Vec<Diagnostic> {
    let width = lambda_max * scale;
    let threshold = NEAR_SPECTRUM_TOL * width;
    let mut out = Vec::new();
    for (index, &pole) in poles.poles().iter().enumerate() {
        let nearest = pole.re.clamp(-width, 0.0);
        let distance = (pole - C64::new(nearest, 0.0)).norm();
        if distance <= threshold {
            out.push(Diagnostic::NearSpectrum { index, pole, distance });
        } else if pole.re <= 0.0 {
            out.push(Diagnostic::DirectOnly { index, pole });
        }
    }
    out
}
