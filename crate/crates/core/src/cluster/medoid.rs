use super::extract::NOISE;
use super::matrix::DistanceMatrix;

/// Member of each cluster minimizing the summed distance to its co-members;
/// ties go to the lowest index. Indexed by label.
pub fn medoids(matrix: &DistanceMatrix, labels: &[i32]) -> Vec<usize> {
    let n_clusters = labels.iter().copied().max().map_or(0, |m| (m + 1).max(0) as usize);
    (0..n_clusters)
        .map(|c| {
            let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c as i32).collect();
            let mut best = (f64::INFINITY, usize::MAX);
            for &i in &members {
                let total: f64 = members.iter().map(|&j| matrix.get(i, j)).sum();
                if total < best.0 {
                    best = (total, i);
                }
            }
            best.1
        })
        .collect()
}

/// Distance of each clustered topic to its cluster's medoid, divided by the
/// largest such distance in the cluster. `None` for noise.
pub fn medoid_distances(matrix: &DistanceMatrix, labels: &[i32]) -> Vec<Option<f64>> {
    let centers = medoids(matrix, labels);
    let raw: Vec<Option<f64>> = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| (l != NOISE).then(|| matrix.get(i, centers[l as usize])))
        .collect();
    let mut spread = vec![0.0_f64; centers.len()];
    for (i, d) in raw.iter().enumerate() {
        if let Some(d) = d {
            let c = labels[i] as usize;
            spread[c] = spread[c].max(*d);
        }
    }
    raw.iter()
        .enumerate()
        .map(|(i, d)| {
            d.map(|d| {
                let s = spread[labels[i] as usize];
                if s > 0.0 {
                    d / s
                } else {
                    0.0
                }
            })
        })
        .collect()
}
