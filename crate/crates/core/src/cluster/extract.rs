//! Condensed-tree construction and stability-based cluster selection.
//!
//! Walking the dendrogram from the root, a split only creates new clusters
//! when both sides keep at least `min_cluster_size` points. Otherwise the
//! small side's points leave the current cluster at that split's
//! `lambda = 1/d`, and the large side carries on as the same cluster.
//!
//! A cluster's stability is `sum over its points of (lambda_leave - lambda_birth)`,
//! where a point that moves into a child cluster leaves at the child's birth.

use std::collections::VecDeque;

use serde::Serialize;

use super::hierarchy::Dendrogram;
use crate::error::{Error, Result};

pub const NOISE: i32 = -1;

/// Node of the condensed tree. Id 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondensedCluster {
    pub id: usize,
    pub parent: Option<usize>,
    pub birth_lambda: f64,
    pub size: usize,
    pub stability: f64,
    pub selected: bool,
    /// Final cluster label when selected.
    pub label: Option<i32>,
}

/// Where and when a point leaves the condensed tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointExit {
    pub point: usize,
    pub cluster: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondensedTree {
    pub clusters: Vec<CondensedCluster>,
    pub exits: Vec<PointExit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Per-point cluster label, [`NOISE`] for outliers.
    pub labels: Vec<i32>,
    /// Stability of each selected cluster, indexed by label.
    pub stabilities: Vec<f64>,
    pub tree: CondensedTree,
}

struct Node {
    parent: Option<usize>,
    birth: f64,
    size: usize,
    children: Vec<usize>,
    // (lambda, number of points) for everything leaving this cluster
    departures: Vec<(f64, usize)>,
}

/// Condenses `dendrogram` and selects the most stable non-overlapping
/// clusters. The root is never selected, except when every merge happens at
/// distance zero: then all points coincide and form one cluster (provided
/// there are at least `min_cluster_size` of them).
pub fn extract_clusters(dendrogram: &Dendrogram, min_cluster_size: usize) -> Result<Selection> {
    if min_cluster_size < 2 {
        return Err(Error::InvalidParameter(format!(
            "min_cluster_size must be at least 2, got {min_cluster_size}"
        )));
    }
    let n = dendrogram.n_leaves();
    let mut nodes = vec![Node {
        parent: None,
        birth: 0.0,
        size: n,
        children: Vec::new(),
        departures: Vec::new(),
    }];
    let mut exits: Vec<Option<PointExit>> = vec![None; n];

    let mut fall_out = |nodes: &mut Vec<Node>, node: usize, cluster: usize, lambda: f64| {
        for point in dendrogram.members(node) {
            exits[point] = Some(PointExit {
                point,
                cluster,
                lambda,
            });
        }
        nodes[cluster].departures.push((lambda, dendrogram.size(node)));
    };

    let mut queue = VecDeque::from([(dendrogram.root(), 0usize)]);
    while let Some((node, cluster)) = queue.pop_front() {
        if dendrogram.is_leaf(node) {
            let birth = nodes[cluster].birth;
            fall_out(&mut nodes, node, cluster, birth);
            continue;
        }
        let merge = dendrogram.merges()[node - n];
        let lambda = dendrogram.lambda(merge.distance);
        let (left, right) = (merge.left, merge.right);
        let left_big = dendrogram.size(left) >= min_cluster_size;
        let right_big = dendrogram.size(right) >= min_cluster_size;
        match (left_big, right_big) {
            (true, true) => {
                for child in [left, right] {
                    let id = nodes.len();
                    let size = dendrogram.size(child);
                    nodes.push(Node {
                        parent: Some(cluster),
                        birth: lambda,
                        size,
                        children: Vec::new(),
                        departures: Vec::new(),
                    });
                    nodes[cluster].children.push(id);
                    nodes[cluster].departures.push((lambda, size));
                    queue.push_back((child, id));
                }
            }
            (true, false) => {
                fall_out(&mut nodes, right, cluster, lambda);
                queue.push_back((left, cluster));
            }
            (false, true) => {
                fall_out(&mut nodes, left, cluster, lambda);
                queue.push_back((right, cluster));
            }
            (false, false) => {
                fall_out(&mut nodes, left, cluster, lambda);
                fall_out(&mut nodes, right, cluster, lambda);
            }
        }
    }
    let exits: Vec<PointExit> = exits
        .into_iter()
        .map(|e| e.expect("every point leaves the condensed tree"))
        .collect();

    let stability: Vec<f64> = nodes
        .iter()
        .map(|c| {
            c.departures
                .iter()
                .map(|&(lambda, size)| (lambda - c.birth) * size as f64)
                .sum()
        })
        .collect();

    let mut selected = vec![false; nodes.len()];
    let coincident = n >= 2 && dendrogram.merges().iter().all(|m| m.distance == 0.0);
    if coincident {
        selected[0] = n >= min_cluster_size;
    } else {
        // Children always carry larger ids than their parent.
        let mut propagated = vec![0.0; nodes.len()];
        for c in (1..nodes.len()).rev() {
            let children_sum: f64 = nodes[c].children.iter().map(|&k| propagated[k]).sum();
            if stability[c] > children_sum {
                selected[c] = true;
                propagated[c] = stability[c];
                let mut stack = nodes[c].children.clone();
                while let Some(k) = stack.pop() {
                    selected[k] = false;
                    stack.extend_from_slice(&nodes[k].children);
                }
            } else {
                propagated[c] = children_sum;
            }
        }
    }

    // Assign each point to its nearest selected ancestor.
    let mut owner = vec![None; n];
    for exit in &exits {
        let mut c = Some(exit.cluster);
        while let Some(id) = c {
            if selected[id] {
                owner[exit.point] = Some(id);
                break;
            }
            c = nodes[id].parent;
        }
    }

    // Labels by decreasing size, then smallest member.
    let mut chosen: Vec<(usize, usize, usize)> = (0..nodes.len())
        .filter(|&c| selected[c])
        .map(|c| {
            let first = owner.iter().position(|o| *o == Some(c)).unwrap_or(usize::MAX);
            (c, nodes[c].size, first)
        })
        .collect();
    chosen.sort_by(|x, y| y.1.cmp(&x.1).then(x.2.cmp(&y.2)));
    let mut label_of = vec![None; nodes.len()];
    for (label, &(c, _, _)) in chosen.iter().enumerate() {
        label_of[c] = Some(label as i32);
    }

    let labels = owner
        .iter()
        .map(|o| o.and_then(|c| label_of[c]).unwrap_or(NOISE))
        .collect();
    let stabilities = chosen.iter().map(|&(c, _, _)| stability[c]).collect();
    let clusters = nodes
        .iter()
        .enumerate()
        .map(|(id, node)| CondensedCluster {
            id,
            parent: node.parent,
            birth_lambda: node.birth,
            size: node.size,
            stability: stability[id],
            selected: selected[id],
            label: label_of[id],
        })
        .collect();

    Ok(Selection {
        labels,
        stabilities,
        tree: CondensedTree { clusters, exits },
    })
}
