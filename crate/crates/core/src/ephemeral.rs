//! Ephemerality measures: how quickly a topic gathers the bulk of its
//! activity, relative to how long it is active.
//!
//! * `e_orig`: share of the active period left after reaching the mass
//!   threshold (80% by default).
//! * `e_filtered`: same idea after trimming a fraction of mass from either
//!   end, which removes sensitivity to stray early or late activity.
//! * `e_sorted`: days are sorted by activity, so only the number of days
//!   needed to reach the threshold matters, not where they are.
//!
//! The two latter measures span a 2x2 table of topic shapes; see
//! [`categorize`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tdv::Tdv;

pub const DEFAULT_MASS_THRESHOLD: f64 = 0.8;
pub const DEFAULT_TRIM_FRACTION: f64 = 0.1;

/// Slack on cumulative-mass comparisons so that e.g. ten days of 0.1 reach
/// 0.8 on the eighth day despite summation rounding.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// How `e_sorted` is read when placing topics in the quadrant table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// The formula value as is: bursty topics score low.
    #[default]
    Verbatim,
    /// `1 - e_sorted`: bursty topics score high.
    Flipped,
}

impl Orientation {
    pub fn apply(self, e_sorted: f64) -> f64 {
        match self {
            Orientation::Verbatim => e_sorted,
            Orientation::Flipped => 1.0 - e_sorted,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Verbatim => "verbatim",
            Orientation::Flipped => "flipped",
        })
    }
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "verbatim" => Ok(Orientation::Verbatim),
            "flipped" => Ok(Orientation::Flipped),
            other => Err(Error::InvalidParameter(format!("unknown orientation `{other}`"))),
        }
    }
}

/// Where the trimmed middle section of `e_filtered` starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrimReading {
    /// First day whose cumulative mass reaches the trim fraction.
    #[default]
    Cumulative,
    /// First day whose own mass reaches the trim fraction; falls back to the
    /// first active day when no single day is that large.
    PerDay,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Thresholds {
    /// Split each measure at its median over the analyzed topics.
    #[default]
    Median,
    /// `sorted` applies to the oriented `e_sorted`.
    Fixed { filtered: f64, sorted: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EphemeralityParams {
    pub mass_threshold: f64,
    pub trim_fraction: f64,
    pub thresholds: Thresholds,
    pub orientation: Orientation,
    pub trim_reading: TrimReading,
}

impl Default for EphemeralityParams {
    fn default() -> Self {
        Self {
            mass_threshold: DEFAULT_MASS_THRESHOLD,
            trim_fraction: DEFAULT_TRIM_FRACTION,
            thresholds: Thresholds::default(),
            orientation: Orientation::default(),
            trim_reading: TrimReading::default(),
        }
    }
}

impl EphemeralityParams {
    pub fn low_cut(&self) -> f64 {
        self.trim_fraction
    }

    pub fn high_cut(&self) -> f64 {
        1.0 - self.trim_fraction
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.mass_threshold) {
            return Err(Error::InvalidParameter(format!(
                "mass threshold must lie in (0, 1), got {}",
                self.mass_threshold
            )));
        }
        if !(self.trim_fraction >= 0.0 && self.trim_fraction < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "trim fraction must lie in [0, 0.5), got {}",
                self.trim_fraction
            )));
        }
        if let Thresholds::Fixed { filtered, sorted } = self.thresholds {
            if !open_unit(filtered) || !open_unit(sorted) {
                return Err(Error::InvalidParameter(format!(
                    "category thresholds must lie in (0, 1), got ({filtered}, {sorted})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Uniform,
    Rollercoaster,
    Burst,
    Undefined,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Uniform => "uniform",
            Category::Rollercoaster => "rollercoaster",
            Category::Burst => "burst",
            Category::Undefined => "undefined",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measures {
    pub e_orig: f64,
    pub e_filtered: f64,
    pub e_sorted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EphemeralityReport {
    pub topic_id: String,
    pub e_orig: f64,
    pub e_filtered: f64,
    pub e_sorted: f64,
    pub category: Category,
}

/// Thresholds actually used for categorization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedThresholds {
    pub filtered: f64,
    /// On the oriented `e_sorted` scale.
    pub sorted: f64,
    pub orientation: Orientation,
}

/// First and last active day.
fn active_span(t: &Tdv) -> Result<(usize, usize)> {
    let v = t.values();
    let start = v.iter().position(|x| *x > 0.0);
    let end = v.iter().rposition(|x| *x > 0.0);
    match (start, end) {
        (Some(s), Some(e)) => {
            t.ensure_normalized()?;
            Ok((s, e))
        }
        _ => Err(Error::DegenerateTopic(t.topic_id().to_owned())),
    }
}

/// First index whose prefix sum reaches `target`.
fn first_reaching(values: &[f64], target: f64) -> usize {
    let mut acc = 0.0;
    for (m, v) in values.iter().enumerate() {
        acc += v;
        if acc >= target - MASS_TOLERANCE {
            return m;
        }
    }
    values.len() - 1
}

pub fn e_orig(t: &Tdv, params: &EphemeralityParams) -> Result<f64> {
    let (start, end) = active_span(t)?;
    if start == end {
        return Ok(1.0);
    }
    let reach = first_reaching(t.values(), params.mass_threshold);
    let ratio = (reach - start) as f64 / (end - start) as f64;
    Ok((1.0 - ratio).clamp(0.0, 1.0))
}

pub fn e_filtered(t: &Tdv, params: &EphemeralityParams) -> Result<f64> {
    let (start, end) = active_span(t)?;
    if start == end {
        return Ok(1.0);
    }
    let v = t.values();
    let lo = match params.trim_reading {
        TrimReading::Cumulative => first_reaching(v, params.low_cut()),
        TrimReading::PerDay => v
            .iter()
            .position(|x| *x >= params.low_cut() - MASS_TOLERANCE)
            .unwrap_or(start),
    }
    .max(start);
    let hi = first_reaching(v, params.high_cut());
    let ratio = (hi as f64 - lo as f64) / (end - start) as f64;
    Ok((1.0 - ratio).clamp(0.0, 1.0))
}

pub fn e_sorted(t: &Tdv, params: &EphemeralityParams) -> Result<f64> {
    active_span(t)?;
    let mut sorted = t.values().to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let active = sorted.iter().filter(|x| **x > 0.0).count();
    let k = first_reaching(&sorted, params.mass_threshold) + 1;
    let value = (k as f64 / active as f64) / params.mass_threshold;
    Ok(value.min(1.0))
}

pub fn measure(t: &Tdv, params: &EphemeralityParams) -> Result<Measures> {
    Ok(Measures {
        e_orig: e_orig(t, params)?,
        e_filtered: e_filtered(t, params)?,
        e_sorted: e_sorted(t, params)?,
    })
}

/// Quadrant rule. A value strictly above its threshold is "high".
///
/// | | e_sorted low | e_sorted high |
/// |---|---|---|
/// | e_filtered low | Uniform | Rollercoaster |
/// | e_filtered high | Undefined | Burst |
pub fn categorize(e_filtered: f64, e_sorted: f64, thresholds: &ResolvedThresholds) -> Category {
    let high_filtered = e_filtered > thresholds.filtered;
    let high_sorted = thresholds.orientation.apply(e_sorted) > thresholds.sorted;
    match (high_filtered, high_sorted) {
        (false, false) => Category::Uniform,
        (false, true) => Category::Rollercoaster,
        (true, true) => Category::Burst,
        (true, false) => Category::Undefined,
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

pub fn resolve_thresholds(measures: &[Measures], params: &EphemeralityParams) -> ResolvedThresholds {
    let (filtered, sorted) = match params.thresholds {
        Thresholds::Fixed { filtered, sorted } => (filtered, sorted),
        Thresholds::Median => {
            let f: Vec<f64> = measures.iter().map(|m| m.e_filtered).collect();
            let s: Vec<f64> = measures.iter().map(|m| params.orientation.apply(m.e_sorted)).collect();
            (median(&f).unwrap_or(0.5), median(&s).unwrap_or(0.5))
        }
    };
    ResolvedThresholds {
        filtered,
        sorted,
        orientation: params.orientation,
    }
}

/// Scores every topic and places it in the quadrant table.
pub fn assess(tdvs: &[Tdv], params: &EphemeralityParams) -> Result<(Vec<EphemeralityReport>, ResolvedThresholds)> {
    params.validate()?;
    let measures = tdvs
        .iter()
        .map(|t| measure(t, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(build_reports(tdvs, &measures, params))
}

pub(crate) fn build_reports(
    tdvs: &[Tdv],
    measures: &[Measures],
    params: &EphemeralityParams,
) -> (Vec<EphemeralityReport>, ResolvedThresholds) {
    let thresholds = resolve_thresholds(measures, params);
    let reports = tdvs
        .iter()
        .zip(measures)
        .map(|(t, m)| EphemeralityReport {
            topic_id: t.topic_id().to_owned(),
            e_orig: m.e_orig,
            e_filtered: m.e_filtered,
            e_sorted: m.e_sorted,
            category: categorize(m.e_filtered, m.e_sorted, &thresholds),
        })
        .collect();
    (reports, thresholds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tdv::normalize;
    use proptest::prelude::*;

    fn p() -> EphemeralityParams {
        EphemeralityParams::default()
    }

    fn tdv(values: &[f64]) -> Tdv {
        normalize("t", values).unwrap()
    }

    #[test]
    fn single_day_topic_is_maximally_ephemeral() {
        let t = tdv(&[0.0, 0.0, 3.0, 0.0]);
        let m = measure(&t, &p()).unwrap();
        assert_eq!((m.e_orig, m.e_filtered, m.e_sorted), (1.0, 1.0, 1.0));
    }

    #[test]
    fn uniform_ten_days() {
        let t = tdv(&[1.0; 10]);
        assert!((e_orig(&t, &p()).unwrap() - (1.0 - 7.0 / 9.0)).abs() < 1e-9);
        assert!((e_filtered(&t, &p()).unwrap() - (1.0 - 8.0 / 9.0)).abs() < 1e-9);
        assert!((e_sorted(&t, &p()).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn early_burst_saturates_e_orig() {
        let mut v = vec![0.0; 222];
        v[0] = 0.8;
        v[221] = 0.2;
        assert_eq!(e_orig(&tdv(&v), &p()).unwrap(), 1.0);
    }

    #[test]
    fn central_burst_e_filtered() {
        assert_eq!(e_filtered(&tdv(&[0.05, 0.9, 0.05]), &p()).unwrap(), 1.0);
    }

    #[test]
    fn concentrated_peak_e_sorted() {
        let mut v = vec![0.1 / 9.0; 10];
        v[4] = 0.9;
        assert!((e_sorted(&tdv(&v), &p()).unwrap() - 0.125).abs() < 1e-9);
    }

    #[test]
    fn zero_vector_is_degenerate() {
        let t = Tdv::new("z", vec![0.0; 4]).unwrap();
        assert!(matches!(e_orig(&t, &p()), Err(Error::DegenerateTopic(_))));
        assert!(matches!(e_filtered(&t, &p()), Err(Error::DegenerateTopic(_))));
        assert!(matches!(e_sorted(&t, &p()), Err(Error::DegenerateTopic(_))));
    }

    #[test]
    fn unnormalized_input_rejected() {
        let t = Tdv::new("u", vec![2.0, 3.0]).unwrap();
        assert!(matches!(e_orig(&t, &p()), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn per_day_trim_reading() {
        let params = EphemeralityParams {
            trim_reading: TrimReading::PerDay,
            ..p()
        };
        // No single day carries 0.1: the middle section starts at the first
        // active day, so the value is below the cumulative reading.
        let t = tdv(&[1.0; 20]);
        let per_day = e_filtered(&t, &params).unwrap();
        let cumulative = e_filtered(&t, &p()).unwrap();
        assert!((per_day - (1.0 - 17.0 / 19.0)).abs() < 1e-9);
        assert!((cumulative - (1.0 - 16.0 / 19.0)).abs() < 1e-9);
    }

    #[test]
    fn quadrants() {
        let th = ResolvedThresholds {
            filtered: 0.5,
            sorted: 0.5,
            orientation: Orientation::Verbatim,
        };
        assert_eq!(categorize(0.2, 0.3, &th), Category::Uniform);
        assert_eq!(categorize(0.2, 0.8, &th), Category::Rollercoaster);
        assert_eq!(categorize(0.8, 0.8, &th), Category::Burst);
        assert_eq!(categorize(0.8, 0.3, &th), Category::Undefined);
        let flipped = ResolvedThresholds {
            orientation: Orientation::Flipped,
            ..th
        };
        assert_eq!(categorize(0.8, 0.2, &flipped), Category::Burst);
        assert_eq!(categorize(0.2, 0.9, &flipped), Category::Uniform);
    }

    #[test]
    fn median_thresholds() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn params_validation() {
        assert!(p().validate().is_ok());
        assert_eq!((p().low_cut(), p().high_cut()), (0.1, 0.9));
        for bad in [
            EphemeralityParams { mass_threshold: 1.0, ..p() },
            EphemeralityParams { trim_fraction: 0.5, ..p() },
            EphemeralityParams {
                thresholds: Thresholds::Fixed { filtered: 0.0, sorted: 0.5 },
                ..p()
            },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidParameter(_))));
        }
    }

    proptest! {
        #[test]
        fn ranges(counts in prop::collection::vec(0u32..100, 1..120)) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let raw: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            let m = measure(&tdv(&raw), &p()).unwrap();
            for v in [m.e_orig, m.e_filtered, m.e_sorted] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(m.e_sorted > 0.0);
        }
    }
}
