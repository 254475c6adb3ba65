//! Topic series and topic distribution vectors (TDVs).
//!
//! A [`TopicSeries`] holds raw per-day activity counts. Preprocessing turns it
//! into a [`Tdv`]: an optionally smoothed, unit-mass vector of the same length
//! that the distance, alignment and ephemerality code consume.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|sum - 1|` for a vector to count as normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_SMOOTHING_WINDOW: usize = 3;

/// Raw daily counts for one topic, one entry per consecutive day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicSeries {
    topic_id: String,
    start_date: NaiveDate,
    counts: Vec<u64>,
}

impl TopicSeries {
    pub fn new(topic_id: impl Into<String>, start_date: NaiveDate, counts: Vec<u64>) -> Result<Self> {
        let topic_id = topic_id.into();
        if counts.is_empty() {
            return Err(Error::InvalidInput(format!(
                "topic `{topic_id}` has an empty count vector"
            )));
        }
        Ok(Self {
            topic_id,
            start_date,
            counts,
        })
    }

    pub fn topic_id(&self) -> &str {
        &self.topic_id
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start_date
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn as_reals(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

/// Record of how a [`Tdv`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preprocessing {
    /// Smoothing window; 1 means no smoothing.
    pub window: usize,
    pub normalized: bool,
}

/// Topic distribution vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tdv {
    topic_id: String,
    values: Vec<f64>,
    meta: Preprocessing,
}

impl Tdv {
    /// Wraps already-computed values. The normalized flag is derived from the
    /// mass of `values`.
    pub fn new(topic_id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        Self::with_meta(topic_id.into(), values, 1)
    }

    fn with_meta(topic_id: String, values: Vec<f64>, window: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput(format!(
                "topic `{topic_id}` has an empty vector"
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "topic `{topic_id}` has a negative or non-finite value {bad}"
            )));
        }
        let normalized = (mass(&values) - 1.0).abs() <= NORMALIZATION_TOLERANCE;
        Ok(Self {
            topic_id,
            values,
            meta: Preprocessing { window, normalized },
        })
    }

    /// Same topic and provenance, different values (zero-padded copies).
    pub(crate) fn padded(&self, values: Vec<f64>) -> Self {
        Self {
            topic_id: self.topic_id.clone(),
            values,
            meta: self.meta,
        }
    }

    pub fn topic_id(&self) -> &str {
        &self.topic_id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn meta(&self) -> Preprocessing {
        self.meta
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.meta.normalized
    }

    pub fn mass(&self) -> f64 {
        mass(&self.values)
    }

    pub(crate) fn ensure_normalized(&self) -> Result<()> {
        if self.meta.normalized {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "topic `{}` is not normalized (mass {})",
                self.topic_id,
                self.mass()
            )))
        }
    }

    /// Index of the largest value; ties resolve to the earliest index.
    pub fn argmax(&self) -> usize {
        argmax(&self.values)
    }

    /// Mass-weighted mean of the 0-based day index.
    pub fn center_of_mass(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(m, v)| m as f64 * v)
            .sum()
    }
}

pub(crate) fn mass(values: &[f64]) -> f64 {
    values.iter().sum()
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Centered moving average over an odd `window`. Near the ends the window is
/// truncated and the mean is taken over the elements that exist.
pub fn smooth(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "smoothing window must be odd and positive, got {window}"
        )));
    }
    if window > values.len() {
        return Err(Error::InvalidParameter(format!(
            "smoothing window {window} exceeds series length {}",
            values.len()
        )));
    }
    let half = (window - 1) / 2;
    let last = values.len() - 1;
    Ok((0..values.len())
        .map(|m| {
            let lo = m.saturating_sub(half);
            let hi = (m + half).min(last);
            let sum: f64 = values[lo..=hi].iter().sum();
            sum / (hi - lo + 1) as f64
        })
        .collect())
}

/// Scales `values` to unit mass.
pub fn normalize(topic_id: impl Into<String>, values: &[f64]) -> Result<Tdv> {
    normalize_with_window(topic_id.into(), values, 1)
}

fn normalize_with_window(topic_id: String, values: &[f64], window: usize) -> Result<Tdv> {
    if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidInput(format!(
            "topic `{topic_id}` has a negative or non-finite value {bad}"
        )));
    }
    let total = mass(values);
    if total <= 0.0 {
        return Err(Error::DegenerateTopic(topic_id));
    }
    let scaled = values.iter().map(|v| v / total).collect();
    Tdv::with_meta(topic_id, scaled, window)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PreprocessOrder {
    #[default]
    SmoothThenNormalize,
    /// Normalizes first. Truncated smoothing then loses mass at the edges,
    /// so the result is generally not unit-mass and is flagged as such.
    NormalizeThenSmooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preprocess {
    pub window: usize,
    pub order: PreprocessOrder,
}

impl Default for Preprocess {
    fn default() -> Self {
        Self {
            window: DEFAULT_SMOOTHING_WINDOW,
            order: PreprocessOrder::default(),
        }
    }
}

impl Preprocess {
    pub fn apply(&self, series: &TopicSeries) -> Result<Tdv> {
        let raw = series.as_reals();
        let id = series.topic_id().to_owned();
        match self.order {
            PreprocessOrder::SmoothThenNormalize => {
                let smoothed = smooth(&raw, self.window)?;
                normalize_with_window(id, &smoothed, self.window)
            }
            PreprocessOrder::NormalizeThenSmooth => {
                let unit = normalize_with_window(id.clone(), &raw, 1)?;
                let smoothed = smooth(unit.values(), self.window)?;
                Tdv::with_meta(id, smoothed, self.window)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn day0() -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 8, 15).unwrap()
    }

    #[test]
    fn smooth_examples() {
        assert_eq!(smooth(&[0.0, 9.0, 0.0], 1).unwrap(), vec![0.0, 9.0, 0.0]);
        assert_eq!(smooth(&[0.0, 9.0, 0.0], 3).unwrap(), vec![4.5, 3.0, 4.5]);
        assert_eq!(smooth(&[3.0; 4], 3).unwrap(), vec![3.0; 4]);
    }

    #[test]
    fn smooth_rejects_bad_windows() {
        for w in [0, 2, 4] {
            assert!(matches!(
                smooth(&[1.0; 5], w),
                Err(Error::InvalidParameter(_))
            ));
        }
        assert!(matches!(
            smooth(&[1.0; 2], 3),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn normalize_examples() {
        let t = normalize("t", &[2.0, 2.0, 4.0]).unwrap();
        assert_eq!(t.values(), &[0.25, 0.25, 0.5]);
        assert!(t.is_normalized());
        assert_eq!(normalize("t", &[5.0]).unwrap().values(), &[1.0]);
        assert!(matches!(
            normalize("t", &[0.0, 0.0, 0.0]),
            Err(Error::DegenerateTopic(_))
        ));
    }

    #[test]
    fn empty_series_rejected() {
        assert!(TopicSeries::new("t", day0(), vec![]).is_err());
    }

    #[test]
    fn constant_series_becomes_uniform() {
        let s = TopicSeries::new("c", day0(), vec![7; 9]).unwrap();
        let t = Preprocess::default().apply(&s).unwrap();
        for v in t.values() {
            assert!((v - 1.0 / 9.0).abs() < 1e-15);
        }
        assert_eq!(t.meta().window, 3);
    }

    #[test]
    fn normalize_then_smooth_loses_edge_mass() {
        let s = TopicSeries::new("e", day0(), vec![10, 0, 0, 0, 0]).unwrap();
        let t = Preprocess {
            window: 3,
            order: PreprocessOrder::NormalizeThenSmooth,
        }
        .apply(&s)
        .unwrap();
        assert!(!t.is_normalized());
        assert!(t.ensure_normalized().is_err());
    }

    proptest! {
        #[test]
        fn normalize_preserves_argmax_set(counts in prop::collection::vec(0u64..50, 1..60)) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let raw: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            let t = normalize("p", &raw).unwrap();
            let max_raw = raw.iter().cloned().fold(f64::MIN, f64::max);
            let max_t = t.values().iter().cloned().fold(f64::MIN, f64::max);
            for (r, v) in raw.iter().zip(t.values()) {
                prop_assert_eq!(*r == max_raw, *v == max_t);
            }
            prop_assert!((t.mass() - 1.0).abs() <= NORMALIZATION_TOLERANCE);
        }

        #[test]
        fn padded_smoothing_conserves_mass(
            counts in prop::collection::vec(0u64..1000, 1..80),
            half in 0usize..4,
        ) {
            let window = 2 * half + 1;
            let mut padded = vec![0.0; half];
            padded.extend(counts.iter().map(|&c| c as f64));
            padded.extend(std::iter::repeat_n(0.0, half));
            prop_assume!(window <= padded.len());
            let smoothed = smooth(&padded, window).unwrap();
            let last = padded.len() - 1;
            // Each mean times its in-range window size recovers the window
            // sum; summed over positions that is `window` times the mass.
            let recovered: f64 = smoothed
                .iter()
                .enumerate()
                .map(|(m, v)| v * ((m + half).min(last) - m.saturating_sub(half) + 1) as f64)
                .sum();
            let total: f64 = counts.iter().map(|&c| c as f64).sum();
            prop_assert!((recovered - window as f64 * total).abs() <= 1e-9 * (1.0 + total));
            for m in half..padded.len().saturating_sub(half) {
                let full: f64 = padded[m - half..=m + half].iter().sum();
                prop_assert!((smoothed[m] * window as f64 - full).abs() <= 1e-9 * (1.0 + full));
            }
        }

        #[test]
        fn preprocessing_is_deterministic(counts in prop::collection::vec(0u64..100, 3..40)) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let s = TopicSeries::new("d", day0(), counts).unwrap();
            let a = Preprocess::default().apply(&s).unwrap();
            let b = Preprocess::default().apply(&s).unwrap();
            let bits = |t: &Tdv| t.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&a), bits(&b));
        }
    }
}
