use serde::Serialize;

use super::mst::MstEdge;
use super::union_find::UnionFind;
use crate::error::{Error, Result};

/// One agglomeration step. Node ids `0..n` are leaves; merge `k` creates node
/// `n + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

/// Single-linkage merge tree over `n` leaves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dendrogram {
    n_leaves: usize,
    merges: Vec<Merge>,
    zero_distance: f64,
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn root(&self) -> usize {
        self.n_leaves + self.merges.len() - 1
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        node < self.n_leaves
    }

    pub fn size(&self, node: usize) -> usize {
        if self.is_leaf(node) {
            1
        } else {
            self.merges[node - self.n_leaves].size
        }
    }

    /// Leaves under `node`, ascending.
    pub fn members(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.size(node));
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            if self.is_leaf(x) {
                out.push(x);
            } else {
                let m = &self.merges[x - self.n_leaves];
                stack.push(m.left);
                stack.push(m.right);
            }
        }
        out.sort_unstable();
        out
    }

    /// Merges as `(distance, members of one side, members of the other)`,
    /// sides ordered by their smallest member.
    pub fn merge_sequence(&self) -> Vec<(f64, Vec<usize>, Vec<usize>)> {
        self.merges
            .iter()
            .map(|m| {
                let (l, r) = (self.members(m.left), self.members(m.right));
                if l[0] <= r[0] {
                    (m.distance, l, r)
                } else {
                    (m.distance, r, l)
                }
            })
            .collect()
    }

    /// Stand-in used for zero merge distances when converting to `1/d`.
    pub fn zero_distance(&self) -> f64 {
        self.zero_distance
    }

    pub fn set_zero_distance(&mut self, eps: f64) {
        assert!(eps > 0.0 && eps.is_finite(), "zero-distance stand-in must be positive");
        self.zero_distance = eps;
    }

    /// `1/d`, with zero distances replaced by the stand-in.
    pub fn lambda(&self, distance: f64) -> f64 {
        if distance > 0.0 {
            1.0 / distance
        } else {
            1.0 / self.zero_distance
        }
    }
}

/// Factor applied to the smallest positive distance to obtain the stand-in
/// for zero distances.
pub const ZERO_DISTANCE_FACTOR: f64 = 1e-3;

/// Builds the single-linkage dendrogram by merging components along the
/// spanning-tree edges in increasing `(weight, a, b)` order.
pub fn build_hierarchy(n_leaves: usize, edges: &[MstEdge]) -> Result<Dendrogram> {
    if n_leaves == 0 {
        return Err(Error::MalformedTree("no leaves".into()));
    }
    if edges.len() + 1 != n_leaves {
        return Err(Error::MalformedTree(format!(
            "{} edges cannot span {n_leaves} leaves",
            edges.len()
        )));
    }
    let mut sorted = edges.to_vec();
    sorted.sort_by(MstEdge::order);

    let mut uf = UnionFind::new(n_leaves);
    let mut component_node: Vec<usize> = (0..n_leaves).collect();
    let mut merges = Vec::with_capacity(edges.len());
    for e in &sorted {
        if e.a >= n_leaves || e.b >= n_leaves {
            return Err(Error::MalformedTree(format!(
                "edge ({}, {}) references a missing leaf",
                e.a, e.b
            )));
        }
        if !(e.weight >= 0.0) || !e.weight.is_finite() {
            return Err(Error::MalformedTree(format!("invalid edge weight {}", e.weight)));
        }
        let (ra, rb) = (uf.find(e.a), uf.find(e.b));
        let Some(root) = uf.union(ra, rb) else {
            return Err(Error::MalformedTree(format!(
                "edge ({}, {}) closes a cycle; input is not a spanning tree",
                e.a, e.b
            )));
        };
        let (left, right) = (component_node[ra], component_node[rb]);
        let size = size_of(n_leaves, &merges, left) + size_of(n_leaves, &merges, right);
        merges.push(Merge {
            left,
            right,
            distance: e.weight,
            size,
        });
        component_node[root] = n_leaves + merges.len() - 1;
    }

    let min_positive = sorted
        .iter()
        .map(|e| e.weight)
        .find(|w| *w > 0.0)
        .unwrap_or(1.0);
    Ok(Dendrogram {
        n_leaves,
        merges,
        zero_distance: min_positive * ZERO_DISTANCE_FACTOR,
    })
}

fn size_of(n_leaves: usize, merges: &[Merge], node: usize) -> usize {
    if node < n_leaves {
        1
    } else {
        merges[node - n_leaves].size
    }
}
