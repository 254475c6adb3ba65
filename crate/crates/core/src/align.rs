//! Rigid integer-day alignment of TDV pairs.
//!
//! A shift `s` pairs day `i` of `a` with day `i - s` of `b`. Materialized, the
//! pair is zero-padded to a common length `M + |s|`: for `s >= 0`, `b` gets
//! `s` leading zeros and `a` gets `s` trailing zeros, and the other way round
//! for negative shifts. Padding adds no mass, so both vectors stay unit-mass.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{accumulate, check_pair, MetricKind};
use crate::tdv::Tdv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alignment {
    None,
    MaxPeak,
    CenterOfMass,
    PairwiseExhaustive,
}

impl Alignment {
    pub const ALL: [Alignment; 4] = [
        Alignment::None,
        Alignment::MaxPeak,
        Alignment::CenterOfMass,
        Alignment::PairwiseExhaustive,
    ];

    /// Command-line spelling.
    pub fn name(self) -> &'static str {
        match self {
            Alignment::None => "none",
            Alignment::MaxPeak => "max",
            Alignment::CenterOfMass => "mean",
            Alignment::PairwiseExhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Alignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Alignment::None),
            "max" => Ok(Alignment::MaxPeak),
            "mean" => Ok(Alignment::CenterOfMass),
            "exhaustive" => Ok(Alignment::PairwiseExhaustive),
            other => Err(Error::InvalidParameter(format!("unknown alignment `{other}`"))),
        }
    }
}

/// Two zero-padded TDVs of equal length, plus the shift applied to `b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignedPair {
    pub a: Tdv,
    pub b: Tdv,
    pub shift: i64,
    pub padded_length: usize,
}

impl AlignedPair {
    fn build(a: &Tdv, b: &Tdv, shift: i64) -> Self {
        let padded_length = a.len() + shift.unsigned_abs() as usize;
        let (off_a, off_b) = offsets(shift);
        Self {
            a: a.padded(pad(a.values(), off_a, padded_length)),
            b: b.padded(pad(b.values(), off_b, padded_length)),
            shift,
            padded_length,
        }
    }

    pub fn distance(&self, metric: MetricKind) -> f64 {
        accumulate(
            metric,
            self.a.values().iter().copied().zip(self.b.values().iter().copied()),
        )
    }
}

/// Result of aligning one pair without materializing the padded vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedDistance {
    pub shift: i64,
    pub distance: f64,
}

fn offsets(shift: i64) -> (usize, usize) {
    if shift >= 0 {
        (0, shift as usize)
    } else {
        (shift.unsigned_abs() as usize, 0)
    }
}

fn pad(values: &[f64], offset: usize, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    out[offset..offset + values.len()].copy_from_slice(values);
    out
}

/// Value pairs of the padded alignment, in padded-day order.
fn shifted_pairs<'a>(a: &'a [f64], b: &'a [f64], shift: i64) -> impl Iterator<Item = (f64, f64)> + 'a {
    let len = a.len() + shift.unsigned_abs() as usize;
    let (off_a, off_b) = offsets(shift);
    let at = |v: &[f64], off: usize, j: usize| j.checked_sub(off).and_then(|i| v.get(i)).copied().unwrap_or(0.0);
    (0..len).map(move |j| (at(a, off_a, j), at(b, off_b, j)))
}

pub(crate) fn shifted_distance(metric: MetricKind, a: &[f64], b: &[f64], shift: i64) -> f64 {
    accumulate(metric, shifted_pairs(a, b, shift))
}

fn max_shift(a: &Tdv, b: &Tdv) -> i64 {
    a.argmax() as i64 - b.argmax() as i64
}

fn mean_shift(a: &Tdv, b: &Tdv) -> i64 {
    // f64::round rounds half away from zero.
    (a.center_of_mass() - b.center_of_mass()).round() as i64
}

/// Shifts in tie-break priority: 0, -1, +1, -2, +2, ...
fn candidate_shifts(len: usize) -> impl Iterator<Item = i64> {
    let reach = len as i64 - 1;
    std::iter::once(0).chain((1..=reach).flat_map(|k| [-k, k]))
}

fn exhaustive_search(metric: MetricKind, a: &[f64], b: &[f64]) -> ShiftedDistance {
    let mut best = ShiftedDistance {
        shift: 0,
        distance: f64::INFINITY,
    };
    for shift in candidate_shifts(a.len()) {
        let distance = shifted_distance(metric, a, b, shift);
        if distance < best.distance {
            best = ShiftedDistance { shift, distance };
        }
    }
    best
}

/// Aligns `b` so its highest day (first on ties) sits on `a`'s.
pub fn align_max(a: &Tdv, b: &Tdv) -> Result<AlignedPair> {
    check_pair(a, b)?;
    Ok(AlignedPair::build(a, b, max_shift(a, b)))
}

/// Aligns the centers of mass, rounded to whole days.
pub fn align_mean(a: &Tdv, b: &Tdv) -> Result<AlignedPair> {
    check_pair(a, b)?;
    Ok(AlignedPair::build(a, b, mean_shift(a, b)))
}

/// Tries every shift in `[-(M-1), M-1]` and keeps the one minimizing
/// `metric`. Ties go to the smaller `|shift|`, then to the negative shift.
pub fn align_exhaustive(a: &Tdv, b: &Tdv, metric: MetricKind) -> Result<(AlignedPair, f64)> {
    check_pair(a, b)?;
    let best = exhaustive_search(metric, a.values(), b.values());
    Ok((AlignedPair::build(a, b, best.shift), best.distance))
}

pub fn align(a: &Tdv, b: &Tdv, alignment: Alignment, metric: MetricKind) -> Result<AlignedPair> {
    let shift = aligned_distance(a, b, metric, alignment)?.shift;
    Ok(AlignedPair::build(a, b, shift))
}

/// Distance of `a` and `b` under `metric` after `alignment`.
pub fn aligned_distance(a: &Tdv, b: &Tdv, metric: MetricKind, alignment: Alignment) -> Result<ShiftedDistance> {
    check_pair(a, b)?;
    let (a_vals, b_vals) = (a.values(), b.values());
    let shift = match alignment {
        Alignment::None => 0,
        Alignment::MaxPeak => max_shift(a, b),
        Alignment::CenterOfMass => mean_shift(a, b),
        Alignment::PairwiseExhaustive => return Ok(exhaustive_search(metric, a_vals, b_vals)),
    };
    Ok(ShiftedDistance {
        shift,
        distance: shifted_distance(metric, a_vals, b_vals, shift),
    })
}
