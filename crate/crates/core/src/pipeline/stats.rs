use std::collections::BTreeMap;
use std::hash::Hash;

/// Adjusted Rand index between two labelings of the same items. Every
/// distinct label, noise included, counts as its own group.
///
/// Returns 1 when both partitions are trivial in the same way (the index is
/// otherwise undefined there).
pub fn adjusted_rand_index<A: Ord + Hash, B: Ord + Hash>(truth: &[A], predicted: &[B]) -> f64 {
    assert_eq!(truth.len(), predicted.len(), "labelings must cover the same items");
    let pairs = |n: u64| (n * n.saturating_sub(1) / 2) as f64;

    let mut table: BTreeMap<(&A, &B), u64> = BTreeMap::new();
    let mut rows: BTreeMap<&A, u64> = BTreeMap::new();
    let mut cols: BTreeMap<&B, u64> = BTreeMap::new();
    for (a, b) in truth.iter().zip(predicted) {
        *table.entry((a, b)).or_default() += 1;
        *rows.entry(a).or_default() += 1;
        *cols.entry(b).or_default() += 1;
    }
    let index: f64 = table.values().map(|&n| pairs(n)).sum();
    let row_sum: f64 = rows.values().map(|&n| pairs(n)).sum();
    let col_sum: f64 = cols.values().map(|&n| pairs(n)).sum();
    let total = pairs(truth.len() as u64);
    if total == 0.0 {
        return 1.0;
    }
    let expected = row_sum * col_sum / total;
    let max_index = 0.5 * (row_sum + col_sum);
    if max_index == expected {
        return 1.0;
    }
    (index - expected) / (max_index - expected)
}

/// Mean and population standard deviation, summed in input order.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}
