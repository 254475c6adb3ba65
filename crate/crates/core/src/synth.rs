//! Labeled synthetic topic series.
//!
//! Each series is a deterministic function of its [`ShapeSpec`]: a noiseless
//! profile, multiplicative lognormal day-level jitter, rescaling to the
//! requested total, and rounding to integer counts as the very last step.

use std::f64::consts::PI;
use std::fmt;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tdv::TopicSeries;

pub const DEFAULT_LENGTH: usize = 222;
pub const DEFAULT_BASELINE: f64 = 0.05;

/// Jitter draws are truncated at this many standard deviations.
const JITTER_CLIP: f64 = 3.0;

/// Profile family. `width` is the span in days covered by a burst at two
/// standard deviations either side of its center (Gaussian sigma = width / 4).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Uniform,
    Burst {
        center: f64,
        width: f64,
    },
    /// `bursts` equal peaks spaced `separation` days apart, centered on
    /// `center`.
    Rollercoaster {
        center: f64,
        width: f64,
        bursts: usize,
        separation: f64,
    },
    /// `1 + cos(2 pi (m - phase) / period)`.
    Seasonal {
        period: f64,
        phase: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Uniform,
    Burst,
    Rollercoaster,
    Seasonal,
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShapeKind::Uniform => "uniform",
            ShapeKind::Burst => "burst",
            ShapeKind::Rollercoaster => "rollercoaster",
            ShapeKind::Seasonal => "seasonal",
        })
    }
}

impl Shape {
    pub fn kind(&self) -> ShapeKind {
        match self {
            Shape::Uniform => ShapeKind::Uniform,
            Shape::Burst { .. } => ShapeKind::Burst,
            Shape::Rollercoaster { .. } => ShapeKind::Rollercoaster,
            Shape::Seasonal { .. } => ShapeKind::Seasonal,
        }
    }

    /// Moves the shape `days` later in time.
    pub fn shifted(&self, days: f64) -> Shape {
        match *self {
            Shape::Uniform => Shape::Uniform,
            Shape::Burst { center, width } => Shape::Burst {
                center: center + days,
                width,
            },
            Shape::Rollercoaster {
                center,
                width,
                bursts,
                separation,
            } => Shape::Rollercoaster {
                center: center + days,
                width,
                bursts,
                separation,
            },
            Shape::Seasonal { period, phase } => Shape::Seasonal {
                period,
                phase: phase + days,
            },
        }
    }

    fn burst_centers(&self) -> Vec<f64> {
        match *self {
            Shape::Burst { center, .. } => vec![center],
            Shape::Rollercoaster {
                center,
                bursts,
                separation,
                ..
            } => {
                let mid = (bursts as f64 - 1.0) / 2.0;
                (0..bursts)
                    .map(|i| center + (i as f64 - mid) * separation)
                    .collect()
            }
            _ => Vec::new(),
        }
    }
}

fn default_length() -> usize {
    DEFAULT_LENGTH
}

fn default_baseline() -> f64 {
    DEFAULT_BASELINE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default = "default_length")]
    pub length: usize,
    pub total_mass: u64,
    /// Standard deviation of the log-jitter; 0 disables noise.
    #[serde(default)]
    pub noise: f64,
    /// Share of the mass spread evenly under burst-type profiles.
    #[serde(default = "default_baseline")]
    pub baseline: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ShapeSpec {
    pub fn new(shape: Shape, total_mass: u64) -> Self {
        Self {
            shape,
            length: DEFAULT_LENGTH,
            total_mass,
            noise: 0.0,
            baseline: DEFAULT_BASELINE,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.length == 0 {
            return bad("length must be at least 1".into());
        }
        if self.total_mass == 0 {
            return bad("total_mass must be positive".into());
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad(format!("noise must be a non-negative real, got {}", self.noise));
        }
        if !(0.0..1.0).contains(&self.baseline) {
            return bad(format!("baseline must lie in [0, 1), got {}", self.baseline));
        }
        match self.shape {
            Shape::Uniform => {}
            Shape::Burst { width, .. } | Shape::Rollercoaster { width, .. } if !(width >= 1.0) => {
                return bad(format!("burst width must be at least 1, got {width}"));
            }
            Shape::Rollercoaster {
                bursts, separation, ..
            } if bursts < 2 || !(separation >= 1.0) => {
                return bad(format!(
                    "rollercoaster needs at least 2 bursts at least 1 day apart, got {bursts} bursts {separation} apart"
                ));
            }
            Shape::Seasonal { period, phase } if !(period > 0.0) || !phase.is_finite() => {
                return bad(format!("seasonal period must be positive, got {period}"));
            }
            _ => {}
        }
        let last = (self.length - 1) as f64;
        if let Some(c) = self
            .shape
            .burst_centers()
            .into_iter()
            .find(|c| !(0.0..=last).contains(c))
        {
            return bad(format!("burst center {c} outside 0..={last}"));
        }
        Ok(())
    }

    /// Noiseless unit-mass profile.
    pub fn profile(&self) -> Vec<f64> {
        let len = self.length;
        let raw: Vec<f64> = match self.shape {
            Shape::Uniform => vec![1.0; len],
            Shape::Burst { width, .. } | Shape::Rollercoaster { width, .. } => {
                let sigma = width / 4.0;
                let centers = self.shape.burst_centers();
                let peaks: Vec<f64> = (0..len)
                    .map(|m| {
                        centers
                            .iter()
                            .map(|c| (-0.5 * ((m as f64 - c) / sigma).powi(2)).exp())
                            .sum()
                    })
                    .collect();
                let peak_mass: f64 = peaks.iter().sum();
                let floor = self.baseline / len as f64;
                peaks
                    .iter()
                    .map(|p| (1.0 - self.baseline) * p / peak_mass + floor)
                    .collect()
            }
            Shape::Seasonal { period, phase } => (0..len)
                .map(|m| 1.0 + (2.0 * PI * (m as f64 - phase) / period).cos())
                .collect(),
        };
        let total: f64 = raw.iter().sum();
        raw.iter().map(|v| v / total).collect()
    }
}

/// A generated series with its ground-truth shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub series: TopicSeries,
    pub label: ShapeKind,
}

pub fn generate(topic_id: impl Into<String>, start_date: NaiveDate, spec: &ShapeSpec) -> Result<Generated> {
    spec.validate()?;
    let mut values = spec.profile();
    if spec.noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        for v in values.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v *= (spec.noise * z.clamp(-JITTER_CLIP, JITTER_CLIP)).exp();
        }
    }
    let total: f64 = values.iter().sum();
    let scale = spec.total_mass as f64 / total;
    let counts = values.iter().map(|v| (v * scale).round() as u64).collect();
    Ok(Generated {
        series: TopicSeries::new(topic_id, start_date, counts)?,
        label: spec.shape.kind(),
    })
}

/// A block of `count` topics sharing one spec. Topic `i` uses seed
/// `spec.seed + i` and is displaced by a whole number of days drawn
/// uniformly from `-shift_range..=shift_range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureGroup {
    pub prefix: String,
    pub count: usize,
    pub spec: ShapeSpec,
    #[serde(default)]
    pub shift_range: u32,
}

/// Contents of a fixture file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSet {
    pub start_date: NaiveDate,
    pub groups: Vec<FixtureGroup>,
}

impl FixtureSet {
    pub fn generate(&self) -> Result<Vec<Generated>> {
        let mut out = Vec::new();
        for group in &self.groups {
            for i in 0..group.count {
                let seed = group.spec.seed.wrapping_add(i as u64);
                let mut spec = group.spec.clone();
                spec.seed = seed;
                if group.shift_range > 0 {
                    let range = group.shift_range as i64;
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5417_0000_0000);
                    let days = rng.random_range(-range..=range);
                    spec.shape = spec.shape.shifted(days as f64);
                }
                out.push(generate(format!("{}-{i:03}", group.prefix), self.start_date, &spec)?);
            }
        }
        Ok(out)
    }
}
