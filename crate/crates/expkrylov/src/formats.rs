//! Text formats: graph edge lists, MatrixMarket adjacency matrices, node
//! coordinates and pole files, plus the CSV writers used by the CLI.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use expkrylov_core::poles::{PoleError, PoleSet};
use expkrylov_core::problems::{Graph, ProblemError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Syntax { path: PathBuf, line: usize, message: String },
    #[error("{path}: {source}")]
    Graph { path: PathBuf, source: ProblemError },
    #[error("{path}: {source}")]
    Poles { path: PathBuf, source: PoleError },
    #[error("cannot write {path}: {message}")]
    Write { path: PathBuf, message: String },
}

/// Graph file flavours.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList { one_based: bool },
    MatrixMarket,
}

impl GraphFormat {
    /// `.mtx` files are MatrixMarket, everything else an edge list.
    pub fn detect(path: &Path, one_based: bool) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("mtx") => Self::MatrixMarket,
            _ => Self::EdgeList { one_based },
        }
    }
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

fn syntax(path: &Path, line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { path: path.to_path_buf(), line, message: message.into() }
}

pub fn load_graph(path: &Path, format: GraphFormat) -> Result<Graph, FormatError> {
    let text = read(path)?;
    match format {
        GraphFormat::EdgeList { one_based } => parse_edge_list(&text, one_based, path),
        GraphFormat::MatrixMarket => parse_matrix_market(&text, path),
    }
}

/// Whitespace-separated `i j [w]` records; `#` and `%` start comments.
/// Missing weights are 1. The node count is the largest index plus one.
pub fn parse_edge_list(text: &str, one_based: bool, path: &Path) -> Result<Graph, FormatError> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split(['#', '%']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(syntax(path, no + 1, format!("expected `i j [w]`, found `{line}`")));
        }
        let node = |s: &str| -> Result<usize, FormatError> {
            let v: usize = s.parse().map_err(|_| syntax(path, no + 1, format!("invalid node index `{s}`")))?;
            if one_based {
                v.checked_sub(1).ok_or_else(|| syntax(path, no + 1, "index 0 in a 1-based file"))
            } else {
                Ok(v)
            }
        };
        let (i, j) = (node(fields[0])?, node(fields[1])?);
        let w = match fields.get(2) {
            Some(s) => s.parse::<f64>().map_err(|_| syntax(path, no + 1, format!("invalid weight `{s}`")))?,
            None => 1.0,
        };
        if !(w >= 0.0 && w.is_finite()) {
            return Err(syntax(path, no + 1, format!("edge weights must be nonnegative and finite, got {w}")));
        }
        n = n.max(i + 1).max(j + 1);
        edges.push((i, j, w));
    }
    Graph::from_edges(n, edges).map_err(|source| FormatError::Graph { path: path.to_path_buf(), source })
}

/// Coordinate-format adjacency matrix. `general` matrices must be
/// symmetric; diagonal entries are ignored.
pub fn parse_matrix_market(text: &str, path: &Path) -> Result<Graph, FormatError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| syntax(path, 1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" || tokens[2] != "coordinate" {
        return Err(syntax(path, 1, "expected `%%MatrixMarket matrix coordinate <field> <symmetry>`"));
    }
    let pattern = match tokens[3].as_str() {
        "real" | "integer" => false,
        "pattern" => true,
        other => return Err(syntax(path, 1, format!("unsupported field `{other}`"))),
    };
    let symmetric = match tokens[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(syntax(path, 1, format!("unsupported symmetry `{other}`"))),
    };
    let mut body = lines.filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'));
    let (size_no, size_line) = body.next().ok_or_else(|| syntax(path, 2, "missing size line"))?;
    let size: Vec<usize> = size_line
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| syntax(path, size_no + 1, format!("invalid size `{s}`"))))
        .collect::<Result<_, _>>()?;
    let [rows, cols, nnz] = size[..] else {
        return Err(syntax(path, size_no + 1, "size line needs `rows cols entries`"));
    };
    if rows != cols {
        return Err(syntax(path, size_no + 1, format!("adjacency matrix must be square, got {rows}x{cols}")));
    }
    let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut count = 0;
    for (no, line) in body {
        let f: Vec<&str> = line.split_whitespace().collect();
        let want = if pattern { 2 } else { 3 };
        if f.len() != want {
            return Err(syntax(path, no + 1, format!("expected {want} fields, found {}", f.len())));
        }
        let idx = |s: &str| -> Result<usize, FormatError> {
            match s.parse::<usize>() {
                Ok(v) if (1..=rows).contains(&v) => Ok(v - 1),
                _ => Err(syntax(path, no + 1, format!("index `{s}` outside 1..={rows}"))),
            }
        };
        let (i, j) = (idx(f[0])?, idx(f[1])?);
        let w = if pattern {
            1.0
        } else {
            f[2].parse::<f64>().map_err(|_| syntax(path, no + 1, format!("invalid value `{}`", f[2])))?
        };
        if !(w >= 0.0 && w.is_finite()) {
            return Err(syntax(path, no + 1, format!("adjacency weights must be nonnegative and finite, got {w}")));
        }
        count += 1;
        if i != j {
            entries.insert((i, j), w);
        }
    }
    if count != nnz {
        return Err(syntax(path, size_no + 1, format!("header announces {nnz} entries, file has {count}")));
    }
    let mut edges = Vec::with_capacity(entries.len());
    for (&(i, j), &w) in &entries {
        if symmetric {
            edges.push((i, j, w));
        } else if i < j {
            match entries.get(&(j, i)) {
                Some(&v) if v == w => edges.push((i, j, w)),
                _ => {
                    return Err(syntax(path, 1, format!("general matrix is not symmetric at ({}, {})", i + 1, j + 1)));
                }
            }
        } else if !entries.contains_key(&(j, i)) {
            return Err(syntax(path, 1, format!("general matrix is not symmetric at ({}, {})", i + 1, j + 1)));
        }
    }
    Graph::from_edges(rows, edges).map_err(|source| FormatError::Graph { path: path.to_path_buf(), source })
}

/// `id,x,y` rows (header optional). Returns coordinates indexed by id.
pub fn parse_coords_csv(text: &str, n: usize, one_based: bool, path: &Path) -> Result<Vec<(f64, f64)>, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut coords = vec![None; n];
    for (k, rec) in reader.records().enumerate() {
        let line = k + 1;
        let rec = rec.map_err(|e| syntax(path, line, e.to_string()))?;
        if k == 0 && rec.get(0).is_some_and(|f| f.eq_ignore_ascii_case("id")) {
            continue;
        }
        if rec.len() != 3 {
            return Err(syntax(path, line, "expected `id,x,y`"));
        }
        let id: usize = rec[0].parse().map_err(|_| syntax(path, line, format!("invalid id `{}`", &rec[0])))?;
        let id = if one_based { id.checked_sub(1).ok_or_else(|| syntax(path, line, "id 0 in a 1-based file"))? } else { id };
        if id >= n {
            return Err(syntax(path, line, format!("id {id} outside the graph's {n} nodes")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| syntax(path, line, format!("invalid coordinate `{s}`")));
        coords[id] = Some((num(&rec[1])?, num(&rec[2])?));
    }
    coords
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| syntax(path, 0, format!("no coordinates for node {i}"))))
        .collect()
}

pub fn load_coords(path: &Path, n: usize, one_based: bool) -> Result<Vec<(f64, f64)>, FormatError> {
    parse_coords_csv(&read(path)?, n, one_based, path)
}

pub fn load_poles(path: &Path) -> Result<PoleSet, FormatError> {
    let text = read(path)?;
    PoleSet::parse(&text).map_err(|source| FormatError::Poles { path: path.to_path_buf(), source })
}

pub fn save_poles(path: &Path, poles: &PoleSet) -> Result<(), FormatError> {
    fs::write(path, poles.to_text()).map_err(|e| FormatError::Write { path: path.to_path_buf(), message: e.to_string() })
}

/// States longer than this are written as a sampled subset plus norms.
pub const FULL_TRAJECTORY_LIMIT: usize = 10_000;

/// Column header of the trajectory CSV for state length `n`.
pub fn trajectory_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    if n <= FULL_TRAJECTORY_LIMIT {
        h.extend((0..n).map(|i| format!("u{i}")));
    } else {
        h.push("norm2".into());
        h.push("norm_inf".into());
        h.extend(sampled_indices(n).map(|i| format!("u{i}")));
    }
    h
}

fn sampled_indices(n: usize) -> impl Iterator<Item = usize> {
    (0..n).step_by(n.div_ceil(1000))
}

/// One row per snapshot: `t` followed by the state (or norms and a sample).
pub fn write_trajectory(path: &Path, times: &[f64], snapshots: &[Vec<f64>]) -> Result<(), FormatError> {
    let err = |e: &dyn std::fmt::Display| FormatError::Write { path: path.to_path_buf(), message: e.to_string() };
    let n = snapshots.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_path(path).map_err(|e| err(&e))?;
    w.write_record(trajectory_header(n)).map_err(|e| err(&e))?;
    for (t, u) in times.iter().zip(snapshots) {
        let mut row = vec![fmt_f64(*t)];
        if n <= FULL_TRAJECTORY_LIMIT {
            row.extend(u.iter().map(|&x| fmt_f64(x)));
        } else {
            let norm2 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            let inf = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            row.push(fmt_f64(norm2));
            row.push(fmt_f64(inf));
            row.extend(sampled_indices(n).map(|i| fmt_f64(u[i])));
        }
        w.write_record(&row).map_err(|e| err(&e))?;
    }
    w.flush().map_err(|e| err(&e))
}

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    let mut f = fs::File::create(path).map_err(|e| FormatError::Write { path: path.to_path_buf(), message: e.to_string() })?;
    f.write_all(text.as_bytes()).map_err(|e| FormatError::Write { path: path.to_path_buf(), message: e.to_string() })
}
