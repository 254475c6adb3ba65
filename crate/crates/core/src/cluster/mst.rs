use std::cmp::Ordering;

use serde::Serialize;

use super::matrix::DistanceMatrix;
use super::union_find::UnionFind;
use crate::error::{Error, Result};

/// Undirected weighted edge with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MstEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

impl MstEdge {
    pub fn new(a: usize, b: usize, weight: f64) -> Self {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        Self { a, b, weight }
    }

    /// Total order by weight, then endpoint pair.
    pub(crate) fn order(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
    }
}

/// Distance from each point to its `k`-th nearest neighbor, counting the
/// point itself as the first (so `k = 1` gives all zeros).
pub fn core_distances(matrix: &DistanceMatrix, k: usize) -> Result<Vec<f64>> {
    let n = matrix.len();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "core_k must lie in 1..={n}, got {k}"
        )));
    }
    Ok((0..n)
        .map(|i| {
            let mut row = matrix.row(i).to_vec();
            row.sort_by(f64::total_cmp);
            row[k - 1]
        })
        .collect())
}

/// Minimum spanning tree of the complete mutual-reachability graph, where
/// `w(i, j) = max(core_i, core_j, d(i, j))`.
///
/// Kruskal over all edges ordered by `(weight, a, b)`; the returned edges are
/// in acceptance order, which is also that order.
pub fn mst(matrix: &DistanceMatrix, core_k: usize) -> Result<Vec<MstEdge>> {
    let n = matrix.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "a spanning tree needs at least 2 topics, got {n}"
        )));
    }
    let core = core_distances(matrix, core_k)?;
    let mut edges: Vec<MstEdge> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| MstEdge::new(i, j, matrix.get(i, j).max(core[i]).max(core[j])))
        .collect();
    edges.sort_by(MstEdge::order);

    let mut uf = UnionFind::new(n);
    let mut tree = Vec::with_capacity(n - 1);
    for e in edges {
        if uf.union(e.a, e.b).is_some() {
            tree.push(e);
            if tree.len() == n - 1 {
                break;
            }
        }
    }
    Ok(tree)
}
