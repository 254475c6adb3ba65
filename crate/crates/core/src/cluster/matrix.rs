use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::{aligned_distance, Alignment};
use crate::error::{Error, Result};
use crate::metrics::MetricKind;
use crate::tdv::Tdv;

/// Metric and alignment a matrix was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub metric: MetricKind,
    pub alignment: Alignment,
}

/// Symmetric pairwise distance table over a fixed, ordered set of topics.
///
/// When built from TDVs the per-pair alignment shift is kept alongside:
/// `shift(i, j)` is the shift applied to topic `j` when compared against `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    topic_ids: Vec<String>,
    values: Vec<f64>,
    shifts: Vec<i64>,
    provenance: Option<Provenance>,
}

impl DistanceMatrix {
    /// Validates and wraps a square table given row by row.
    pub fn new(topic_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = topic_ids.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!(
                "distance matrix must be {n}x{n} to match its topic list"
            )));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidInput(format!("non-zero diagonal at {i}")));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "entry ({i}, {j}) = {v} is negative or non-finite"
                    )));
                }
                if v != values[j * n + i] {
                    return Err(Error::InvalidInput(format!("asymmetric entry ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            topic_ids,
            values,
            shifts: vec![0; n * n],
            provenance: None,
        })
    }

    /// Computes all pairwise aligned distances on the current rayon pool.
    ///
    /// Each pair is evaluated independently and written to a fixed slot, so
    /// the result does not depend on scheduling or thread count.
    pub fn compute(tdvs: &[Tdv], metric: MetricKind, alignment: Alignment) -> Result<Self> {
        let n = tdvs.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let results = pairs
            .par_iter()
            .map(|&(i, j)| aligned_distance(&tdvs[i], &tdvs[j], metric, alignment))
            .collect::<Result<Vec<_>>>()?;

        let mut values = vec![0.0; n * n];
        let mut shifts = vec![0; n * n];
        for (&(i, j), r) in pairs.iter().zip(results) {
            values[i * n + j] = r.distance;
            values[j * n + i] = r.distance;
            shifts[i * n + j] = r.shift;
            shifts[j * n + i] = -r.shift;
        }
        Ok(Self {
            topic_ids: tdvs.iter().map(|t| t.topic_id().to_owned()).collect(),
            values,
            shifts,
            provenance: Some(Provenance { metric, alignment }),
        })
    }

    pub fn len(&self) -> usize {
        self.topic_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topic_ids.is_empty()
    }

    pub fn topic_ids(&self) -> &[String] {
        &self.topic_ids
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn shift(&self, i: usize, j: usize) -> i64 {
        self.shifts[i * self.len() + j]
    }

    /// Smallest strictly positive entry, if any.
    pub fn min_positive(&self) -> Option<f64> {
        self.values
            .iter()
            .copied()
            .filter(|v| *v > 0.0)
            .min_by(f64::total_cmp)
    }

    /// Same topics with every distance passed through `f`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = self.len();
        let rows = (0..n)
            .map(|i| self.row(i).iter().map(|&v| f(v)).collect())
            .collect();
        let mut out = Self::new(self.topic_ids.clone(), rows)?;
        out.shifts = self.shifts.clone();
        out.provenance = self.provenance;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t{i}")).collect()
    }

    #[test]
    fn validation() {
        assert!(DistanceMatrix::new(ids(2), vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
        assert!(DistanceMatrix::new(ids(2), vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(DistanceMatrix::new(ids(2), vec![vec![0.5, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::new(ids(2), vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::new(ids(3), vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn computed_matrix_is_symmetric_with_antisymmetric_shifts() {
        let tdvs = vec![
            Tdv::new("a", vec![1.0, 0.0, 0.0, 0.0]).unwrap(),
            Tdv::new("b", vec![0.0, 0.0, 1.0, 0.0]).unwrap(),
            Tdv::new("c", vec![0.0, 0.5, 0.5, 0.0]).unwrap(),
        ];
        let m = DistanceMatrix::compute(&tdvs, MetricKind::Sad, Alignment::PairwiseExhaustive).unwrap();
        assert_eq!(m.len(), 3);
        for i in 0..3 {
            assert_eq!(m.get(i, i), 0.0);
            for j in 0..3 {
                assert_eq!(m.get(i, j), m.get(j, i));
                assert_eq!(m.shift(i, j), -m.shift(j, i));
            }
        }
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.shift(0, 1), -2);
        assert_eq!(m.min_positive(), Some(0.5));
        assert_eq!(
            m.provenance(),
            Some(Provenance {
                metric: MetricKind::Sad,
                alignment: Alignment::PairwiseExhaustive
            })
        );
    }
}
