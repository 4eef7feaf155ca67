use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use rand::Rng;

use super::{initial::seeded_rng, ProblemError};
use crate::linalg::SparseOperator;
use crate::math;

/// Undirected simple weighted graph. Edges are stored once as `(i, j, w)`
/// with `i < j` and `w > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    coords: Option<Vec<(f64, f64)>>,
    original_ids: Vec<usize>,
}

impl Graph {
    /// Canonicalizes an edge list: self-loops are dropped, reversed and
    /// repeated edges are merged by summing weights, zero weights vanish.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, ProblemError> {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, w) in edges {
            for node in [i, j] {
                if node >= n {
                    return Err(ProblemError::NodeOutOfRange { node, n });
                }
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(ProblemError::NegativeWeight { i, j, w });
            }
            if i == j {
                continue;
            }
            *merged.entry((i.min(j), i.max(j))).or_insert(0.0) += w;
        }
        let edges = merged.into_iter().filter(|(_, w)| *w > 0.0).map(|((i, j), w)| (i, j, w)).collect();
        Ok(Self { n, edges, coords: None, original_ids: (0..n).collect() })
    }

    pub fn with_coords(mut self, coords: Vec<(f64, f64)>) -> Result<Self, ProblemError> {
        if coords.len() != self.n {
            return Err(ProblemError::DimensionMismatch { expected: self.n, found: coords.len() });
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    /// Node ids in the graph this one was extracted from.
    pub fn original_ids(&self) -> &[usize] {
        &self.original_ids
    }

    pub fn is_unweighted(&self) -> bool {
        self.edges.iter().all(|e| e.2 == 1.0)
    }

    /// Weighted degrees `W·1`.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = alloc::vec![0.0; self.n];
        for &(i, j, w) in &self.edges {
            d[i] += w;
            d[j] += w;
        }
        d
    }

    /// `λ_max(L) ≤ 2·max degree`, and `≤ n` for unweighted graphs.
    pub fn laplacian_bound(&self) -> f64 {
        let dmax = self.degrees().into_iter().fold(0.0, f64::max);
        let b = 2.0 * dmax;
        if self.is_unweighted() {
            b.min(self.n as f64)
        } else {
            b
        }
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = alloc::vec![Vec::new(); self.n];
        for &(i, j, _) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    /// Connected components as sorted node lists, in order of their
    /// smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = alloc::vec![false; self.n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            queue.push_back(s);
            let mut comp = Vec::new();
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// `L = diag(W·1) - W`. Every row carries an explicit diagonal entry.
pub fn graph_laplacian(g: &Graph) -> Result<SparseOperator, ProblemError> {
    let mut t = Vec::with_capacity(g.n + 2 * g.edges.len());
    for (i, d) in g.degrees().into_iter().enumerate() {
        t.push((i, i, d));
    }
    for &(i, j, w) in &g.edges {
        if !(w > 0.0) {
            return Err(ProblemError::NegativeWeight { i, j, w });
        }
        t.push((i, j, -w));
        t.push((j, i, -w));
    }
    Ok(SparseOperator::from_triplets(g.n, &t)?)
}

/// Node-induced subgraph on the largest component (first one on ties),
/// relabeled in ascending original order.
pub fn largest_connected_component(g: &Graph) -> Result<Graph, ProblemError> {
    if g.n == 0 {
        return Err(ProblemError::EmptyGraph);
    }
    let comps = g.components();
    let mut best = &comps[0];
    for c in &comps[1..] {
        if c.len() > best.len() {
            best = c;
        }
    }
    Ok(induced_subgraph(g, best))
}

/// Subgraph on the sorted node list `nodes`, relabeled `0..nodes.len()`.
fn induced_subgraph(g: &Graph, nodes: &[usize]) -> Graph {
    let mut new_id = alloc::vec![usize::MAX; g.n];
    for (k, &v) in nodes.iter().enumerate() {
        new_id[v] = k;
    }
    let edges = g
        .edges
        .iter()
        .filter(|e| new_id[e.0] != usize::MAX && new_id[e.1] != usize::MAX)
        .map(|&(i, j, w)| (new_id[i], new_id[j], w))
        .collect();
    let coords = g.coords.as_ref().map(|c| nodes.iter().map(|&v| c[v]).collect());
    let original_ids = nodes.iter().map(|&v| g.original_ids[v]).collect();
    Graph { n: nodes.len(), edges, coords, original_ids }
}

/// Synthetic planar road-like network: a jittered grid with random edge
/// deletions and occasional diagonals, reduced to its largest component and
/// then to the first `target_nodes` nodes of a breadth-first sweep, so the
/// result is connected with exactly `target_nodes` nodes whenever the
/// component is large enough.
/// Degrees stay at most 8, so `λ_max(L) ≲ 8`.
pub fn road_like_graph(target_nodes: usize, seed: u64) -> Result<Graph, ProblemError> {
    let side = math::ceil(math::sqrt(target_nodes as f64 / 0.97)) as usize;
    let side = side.max(2);
    let mut rng = seeded_rng(seed);
    let id = |r: usize, c: usize| r * side + c;
    let mut coords = Vec::with_capacity(side * side);
    for r in 0..side {
        for c in 0..side {
            let jx: f64 = rng.random_range(-0.3..0.3);
            let jy: f64 = rng.random_range(-0.3..0.3);
            coords.push((c as f64 + jx, r as f64 + jy));
        }
    }
    let mut edges = Vec::new();
    for r in 0..side {
        for c in 0..side {
            if c + 1 < side && rng.random_bool(0.82) {
                edges.push((id(r, c), id(r, c + 1), 1.0));
            }
            if r + 1 < side && rng.random_bool(0.82) {
                edges.push((id(r, c), id(r + 1, c), 1.0));
            }
            if r + 1 < side && c + 1 < side && rng.random_bool(0.04) {
                edges.push((id(r, c), id(r + 1, c + 1), 1.0));
            }
        }
    }
    let g = Graph::from_edges(side * side, edges)?.with_coords(coords)?;
    let lcc = largest_connected_component(&g)?;
    if lcc.n <= target_nodes {
        return Ok(lcc);
    }
    let adj = lcc.adjacency();
    let mut seen = alloc::vec![false; lcc.n];
    let mut order = Vec::with_capacity(target_nodes);
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        if order.len() == target_nodes {
            break;
        }
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.sort_unstable();
    Ok(induced_subgraph(&lcc, &order))
}
