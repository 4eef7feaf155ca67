use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::linalg::SparseOperator;

/// Fill-reducing symmetric permutation for the direct solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ordering {
    /// Approximate minimum degree (needs the `std` feature).
    #[cfg(feature = "std")]
    Amd,
    /// Reverse Cuthill–McKee.
    Rcm,
    Natural,
}

impl Default for Ordering {
    #[cfg(feature = "std")]
    fn default() -> Self {
        Self::Amd
    }

    #[cfg(not(feature = "std"))]
    fn default() -> Self {
        Self::Rcm
    }
}

impl Ordering {
    /// `perm[k]` is the original index placed at position `k`.
    pub fn permutation(self, a: &SparseOperator) -> Vec<usize> {
        match self {
            #[cfg(feature = "std")]
            Self::Amd => amd_ordering(a),
            Self::Rcm => rcm_ordering(a),
            Self::Natural => (0..a.n()).collect(),
        }
    }
}

#[cfg(feature = "std")]
fn amd_ordering(a: &SparseOperator) -> Vec<usize> {
    let n = a.n();
    if n == 0 {
        return Vec::new();
    }
    // Symmetric pattern with the full diagonal; CSR arrays double as CSC.
    let pattern = super::RealCsr::shifted(a, 1.0, 0.0);
    match amd::order::<usize>(n, &pattern.row_ptr, &pattern.col_idx, &amd::Control::default()) {
        Ok((p, _, _)) => p,
        Err(_) => rcm_ordering(a),
    }
}

/// Reverse Cuthill–McKee, started in every component from a
/// pseudo-peripheral node.
pub fn rcm_ordering(a: &SparseOperator) -> Vec<usize> {
    let n = a.n();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| a.row(i).0.iter().copied().filter(|&j| j != i).collect())
        .collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut placed = alloc::vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut dist = alloc::vec![usize::MAX; n];
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| degree[i]);
    for &seed in &by_degree {
        if placed[seed] {
            continue;
        }
        let start = peripheral(seed, &adj, &placed, &mut dist);
        let mut queue = VecDeque::new();
        placed[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !placed[w]).collect();
            next.sort_by_key(|&w| degree[w]);
            for w in next {
                placed[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn peripheral(seed: usize, adj: &[Vec<usize>], placed: &[bool], dist: &mut [usize]) -> usize {
    let mut start = seed;
    let mut depth = 0;
    for _ in 0..4 {
        let (far, d) = farthest(start, adj, placed, dist);
        if d <= depth {
            break;
        }
        depth = d;
        start = far;
    }
    start
}

fn farthest(start: usize, adj: &[Vec<usize>], placed: &[bool], dist: &mut [usize]) -> (usize, usize) {
    let mut visited = alloc::vec![start];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut best = (start, 0);
    while let Some(v) = queue.pop_front() {
        let d = dist[v];
        if d > best.1 || (d == best.1 && adj[v].len() < adj[best.0].len()) {
            best = (v, d);
        }
        for &w in &adj[v] {
            if !placed[w] && dist[w] == usize::MAX {
                dist[w] = d + 1;
                visited.push(w);
                queue.push_back(w);
            }
        }
    }
    for v in visited {
        dist[v] = usize::MAX;
    }
    best
}
