//! HDBSCAN over a precomputed distance matrix.
//!
//! The pipeline is: mutual-reachability minimum spanning tree ([`mst`]),
//! single-linkage dendrogram ([`build_hierarchy`]), condensed tree with
//! stability-based selection ([`extract_clusters`]), then medoid distances
//! for reporting ([`medoid_distances`]).

mod extract;
mod hierarchy;
mod matrix;
mod medoid;
mod mst;
mod union_find;

use serde::{Deserialize, Serialize};

pub use extract::{extract_clusters, CondensedCluster, CondensedTree, PointExit, Selection, NOISE};
pub use hierarchy::{build_hierarchy, Dendrogram, Merge, ZERO_DISTANCE_FACTOR};
pub use matrix::{DistanceMatrix, Provenance};
pub use medoid::{medoid_distances, medoids};
pub use mst::{core_distances, mst, MstEdge};

use crate::error::Result;

pub const DEFAULT_MIN_CLUSTER_SIZE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hdbscan {
    pub min_cluster_size: usize,
    /// Neighbor rank defining core distances; 1 gives plain single linkage.
    pub core_k: usize,
}

impl Default for Hdbscan {
    fn default() -> Self {
        Self {
            min_cluster_size: DEFAULT_MIN_CLUSTER_SIZE,
            core_k: DEFAULT_MIN_CLUSTER_SIZE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    /// Per-topic label; [`NOISE`] marks outliers.
    pub labels: Vec<i32>,
    /// Indexed by label.
    pub stabilities: Vec<f64>,
    /// Indexed by label.
    pub medoids: Vec<usize>,
    /// Normalized distance to the cluster medoid; `None` for noise.
    pub centroid_distance: Vec<Option<f64>>,
    pub dendrogram: Dendrogram,
    pub tree: CondensedTree,
}

impl ClusterResult {
    pub fn n_clusters(&self) -> usize {
        self.stabilities.len()
    }

    pub fn members(&self, label: i32) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == label).collect()
    }

    pub fn n_noise(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }
}

impl Hdbscan {
    pub fn fit(&self, matrix: &DistanceMatrix) -> Result<ClusterResult> {
        let edges = mst(matrix, self.core_k)?;
        let mut dendrogram = build_hierarchy(matrix.len(), &edges)?;
        if let Some(eps) = matrix.min_positive() {
            dendrogram.set_zero_distance(eps * ZERO_DISTANCE_FACTOR);
        }
        let selection = extract_clusters(&dendrogram, self.min_cluster_size)?;
        let medoids = medoids(matrix, &selection.labels);
        let centroid_distance = medoid_distances(matrix, &selection.labels);
        Ok(ClusterResult {
            labels: selection.labels,
            stabilities: selection.stabilities,
            medoids,
            centroid_distance,
            dendrogram,
            tree: selection.tree,
        })
    }
}
