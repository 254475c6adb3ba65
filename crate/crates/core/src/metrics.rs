//! Distances between topic distribution vectors.
//!
//! All four measures treat a TDV as a discrete probability distribution over
//! days and are bounded to `[0, 1]`:
//!
//! * SAD: half the L1 distance.
//! * KS: largest gap between the cumulative forms.
//! * HDA: Hellinger distance (square roots emphasize low-mass days).
//! * NDS: norm of the difference of squares (emphasizes peaks).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tdv::Tdv;

/// Largest excursion outside `[0, 1]` attributed to rounding.
const RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Sad,
    Ks,
    Hda,
    Nds,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [MetricKind::Sad, MetricKind::Ks, MetricKind::Hda, MetricKind::Nds];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Sad => "sad",
            MetricKind::Ks => "ks",
            MetricKind::Hda => "hda",
            MetricKind::Nds => "nds",
        }
    }

    pub fn distance(self, a: &Tdv, b: &Tdv) -> Result<f64> {
        check_pair(a, b)?;
        Ok(slice_distance(self, a.values(), b.values()))
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sad" => Ok(MetricKind::Sad),
            "ks" => Ok(MetricKind::Ks),
            "hda" => Ok(MetricKind::Hda),
            "nds" => Ok(MetricKind::Nds),
            other => Err(Error::InvalidParameter(format!("unknown metric `{other}`"))),
        }
    }
}

/// Prefix sums of a normalized TDV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulativeTdv {
    topic_id: String,
    values: Vec<f64>,
}

impl CumulativeTdv {
    pub fn topic_id(&self) -> &str {
        &self.topic_id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn cumulate(a: &Tdv) -> Result<CumulativeTdv> {
    a.ensure_normalized()?;
    let values = a
        .values()
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    Ok(CumulativeTdv {
        topic_id: a.topic_id().to_owned(),
        values,
    })
}

pub fn d_sad(a: &Tdv, b: &Tdv) -> Result<f64> {
    MetricKind::Sad.distance(a, b)
}

pub fn d_ks(a: &Tdv, b: &Tdv) -> Result<f64> {
    MetricKind::Ks.distance(a, b)
}

pub fn d_hda(a: &Tdv, b: &Tdv) -> Result<f64> {
    MetricKind::Hda.distance(a, b)
}

pub fn d_nds(a: &Tdv, b: &Tdv) -> Result<f64> {
    MetricKind::Nds.distance(a, b)
}

pub(crate) fn check_pair(a: &Tdv, b: &Tdv) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::IncompatibleVectors {
            left: a.len(),
            right: b.len(),
        });
    }
    a.ensure_normalized()?;
    b.ensure_normalized()
}

/// Distance between two equal-length unit-mass slices. No validation.
pub(crate) fn slice_distance(metric: MetricKind, a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    accumulate(metric, a.iter().copied().zip(b.iter().copied()))
}

/// Evaluates `metric` over day-aligned value pairs, in day order.
///
/// Every distance in the crate (plain, padded or shifted) goes through this
/// function, so the same pairs in the same order give bit-identical results.
pub(crate) fn accumulate<I>(metric: MetricKind, pairs: I) -> f64
where
    I: Iterator<Item = (f64, f64)>,
{
    let raw = match metric {
        MetricKind::Sad => 0.5 * pairs.map(|(x, y)| (x - y).abs()).sum::<f64>(),
        MetricKind::Ks => {
            let (mut cx, mut cy, mut gap) = (0.0_f64, 0.0_f64, 0.0_f64);
            for (x, y) in pairs {
                cx += x;
                cy += y;
                gap = gap.max((cx - cy).abs());
            }
            gap
        }
        MetricKind::Hda => {
            let s: f64 = pairs
                .map(|(x, y)| {
                    let d = x.sqrt() - y.sqrt();
                    d * d
                })
                .sum();
            (0.5 * s).sqrt()
        }
        MetricKind::Nds => {
            let s: f64 = pairs
                .map(|(x, y)| {
                    let d = x * x - y * y;
                    d * d
                })
                .sum();
            (0.5 * s).sqrt()
        }
    };
    debug_assert!(
        (-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&raw),
        "{metric} distance {raw} outside [0, 1]"
    );
    raw.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tdv(values: &[f64]) -> Tdv {
        Tdv::new("t", values.to_vec()).unwrap()
    }

    #[test]
    fn sad_examples() {
        assert_eq!(d_sad(&tdv(&[0.5, 0.5]), &tdv(&[0.5, 0.5])).unwrap(), 0.0);
        assert_eq!(d_sad(&tdv(&[1.0, 0.0]), &tdv(&[0.0, 1.0])).unwrap(), 1.0);
        let d = d_sad(&tdv(&[0.5, 0.5, 0.0]), &tdv(&[0.25, 0.25, 0.5])).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cumulate_examples() {
        assert_eq!(cumulate(&tdv(&[1.0])).unwrap().values(), &[1.0]);
        assert_eq!(cumulate(&tdv(&[0.25, 0.25, 0.5])).unwrap().values(), &[0.25, 0.5, 1.0]);
        assert_eq!(cumulate(&tdv(&[0.0, 0.0, 1.0])).unwrap().values(), &[0.0, 0.0, 1.0]);
        let raw = Tdv::new("u", vec![0.5, 0.2]).unwrap();
        assert!(matches!(cumulate(&raw), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn ks_examples() {
        assert_eq!(d_ks(&tdv(&[0.2, 0.8]), &tdv(&[0.2, 0.8])).unwrap(), 0.0);
        assert_eq!(d_ks(&tdv(&[1.0, 0.0]), &tdv(&[0.0, 1.0])).unwrap(), 1.0);
        let d = d_ks(&tdv(&[0.5, 0.5, 0.0]), &tdv(&[0.25, 0.25, 0.5])).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hda_examples() {
        let a = tdv(&[0.1, 0.3, 0.6]);
        assert_eq!(d_hda(&a, &a).unwrap(), 0.0);
        assert_eq!(d_hda(&tdv(&[1.0, 0.0]), &tdv(&[0.0, 1.0])).unwrap(), 1.0);
        let d = d_hda(&tdv(&[0.5, 0.5]), &tdv(&[1.0, 0.0])).unwrap();
        assert!((d - 0.541196100146197).abs() < 1e-12);
    }

    #[test]
    fn nds_examples() {
        let a = tdv(&[0.1, 0.3, 0.6]);
        assert_eq!(d_nds(&a, &a).unwrap(), 0.0);
        assert_eq!(d_nds(&tdv(&[1.0, 0.0]), &tdv(&[0.0, 1.0])).unwrap(), 1.0);
        // sqrt(0.1875^2 + 0.3125^2) / sqrt(2)
        let d = d_nds(&tdv(&[0.5, 0.5]), &tdv(&[0.25, 0.75])).unwrap();
        assert!((d - 0.2576941016011038).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let a = tdv(&[0.5, 0.5]);
        let b = tdv(&[0.2, 0.3, 0.5]);
        for m in MetricKind::ALL {
            assert!(matches!(
                m.distance(&a, &b),
                Err(Error::IncompatibleVectors { left: 2, right: 3 })
            ));
        }
        let raw = Tdv::new("u", vec![2.0, 2.0]).unwrap();
        for m in MetricKind::ALL {
            assert!(matches!(m.distance(&a, &raw), Err(Error::InvalidInput(_))));
        }
    }

    #[test]
    fn ks_depends_on_day_order() {
        let a = tdv(&[0.5, 0.0, 0.5]);
        let b = tdv(&[0.0, 1.0, 0.0]);
        let pa = tdv(&[0.5, 0.5, 0.0]);
        let pb = tdv(&[0.0, 0.0, 1.0]);
        // Permutation [0, 2, 1] applied to both.
        assert_eq!(d_sad(&a, &b).unwrap(), d_sad(&pa, &pb).unwrap());
        assert_ne!(d_ks(&a, &b).unwrap(), d_ks(&pa, &pb).unwrap());
    }

    #[test]
    fn parse_names() {
        for m in MetricKind::ALL {
            assert_eq!(m.name().parse::<MetricKind>().unwrap(), m);
        }
        assert!("l2".parse::<MetricKind>().is_err());
    }

    fn unit_vector(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], len)
            .prop_filter("needs mass", |v| v.iter().sum::<f64>() > 0.0)
            .prop_map(|v| {
                let s: f64 = v.iter().sum();
                v.into_iter().map(|x| x / s).collect()
            })
    }

    fn triple() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        (1usize..40).prop_flat_map(|n| (unit_vector(n..n + 1), unit_vector(n..n + 1), unit_vector(n..n + 1)))
    }

    proptest! {
        #[test]
        fn axioms((a, b, c) in triple()) {
            let (a, b, c) = (tdv(&a), tdv(&b), tdv(&c));
            for m in MetricKind::ALL {
                let ab = m.distance(&a, &b).unwrap();
                prop_assert_eq!(ab, m.distance(&b, &a).unwrap());
                prop_assert_eq!(m.distance(&a, &a).unwrap(), 0.0);
                prop_assert!((0.0..=1.0).contains(&ab));
                if m != MetricKind::Nds {
                    let ac = m.distance(&a, &c).unwrap();
                    let cb = m.distance(&c, &b).unwrap();
                    prop_assert!(ab <= ac + cb + 1e-12, "{} triangle: {} > {} + {}", m, ab, ac, cb);
                }
            }
        }

        #[test]
        fn sad_saturates_iff_disjoint((a, b, _) in triple()) {
            let disjoint = a.iter().zip(&b).all(|(x, y)| *x == 0.0 || *y == 0.0);
            let d = d_sad(&tdv(&a), &tdv(&b)).unwrap();
            prop_assert_eq!(disjoint, (d - 1.0).abs() < 1e-12);
        }

        #[test]
        fn permutation_invariance((a, b, _) in triple(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut order: Vec<usize> = (0..a.len()).collect();
            order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let pa: Vec<f64> = order.iter().map(|&i| a[i]).collect();
            let pb: Vec<f64> = order.iter().map(|&i| b[i]).collect();
            let (a, b, pa, pb) = (tdv(&a), tdv(&b), tdv(&pa), tdv(&pb));
            for m in [MetricKind::Sad, MetricKind::Hda, MetricKind::Nds] {
                let d = m.distance(&a, &b).unwrap();
                let dp = m.distance(&pa, &pb).unwrap();
                prop_assert!((d - dp).abs() < 1e-12);
            }
        }
    }
}
