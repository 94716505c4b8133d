//! Chromatic-diagram coordinates and torus geometry.
//!
//! A composer becomes a point `(x, y)` whose coordinates are averaged degrees
//! of that composer's major and minor works respectively. Averaging over the
//! whole plane (not just the integer lattice) and identifying degrees twelve
//! apart gives the diagram the topology of a torus with a marked point at
//! `(0, 0)`, the C-major/a-minor origin. Plotting always uses the raw
//! (unwrapped) coordinates; the wraparound only enters through
//! [`torus_distance`].

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{partition_by_mode, Corpus, CorpusError, Work};
use crate::keycalc::Mode;

/// How per-mode degree sums are turned into coordinates.
///
/// `TotalCount` divides both sums by the composer's total work count (the
/// default). `PerModeCount` divides each sum by its own mode's count, i.e.
/// a true per-mode mean; an empty mode contributes coordinate 0 by
/// convention under both readings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    #[serde(rename = "total")]
    TotalCount,
    #[serde(rename = "permode")]
    PerModeCount,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Normalization::TotalCount => write!(f, "total"),
            Normalization::PerModeCount => write!(f, "permode"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    #[default]
    #[serde(rename = "unweighted")]
    Unweighted,
    #[serde(rename = "weighted")]
    DistributionWeighted,
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weighting::Unweighted => write!(f, "unweighted"),
            Weighting::DistributionWeighted => write!(f, "weighted"),
        }
    }
}

/// A composer's position on the chromatic diagram, with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramPoint {
    /// Averaged major degree.
    pub x: f64,
    /// Averaged minor degree.
    pub y: f64,
    pub composer_id: String,
    pub weighting: Weighting,
    pub normalization: Normalization,
    pub year_cutoff: Option<i32>,
}

impl DiagramPoint {
    pub fn coords(&self) -> (f64, f64) {
        (self.x, self.y)
    }
}

/// Fractions of a composer's works per mode; the two always sum to exactly 1
/// because the minor fraction is computed as the complement.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFraction {
    pub major_fraction: f64,
    pub minor_fraction: f64,
    pub composer_id: String,
}

/// Period of the doubly-periodic identification, 12 by default (the twelve
/// tonally distinct keys).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TorusMetricConfig {
    period: u32,
}

impl TorusMetricConfig {
    pub fn new(period: u32) -> Result<TorusMetricConfig, DiagramError> {
        if period < 1 {
            return Err(DiagramError::InvalidPeriod(period));
        }
        Ok(TorusMetricConfig { period })
    }

    pub fn period(&self) -> u32 {
        self.period
    }
}

impl Default for TorusMetricConfig {
    fn default() -> Self {
        TorusMetricConfig { period: 12 }
    }
}

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("unknown composer {0:?}")]
    UnknownComposer(String),
    #[error("composer {0:?} has no works")]
    EmptyCatalog(String),
    #[error("no weight for degree {degree} in {mode} mode")]
    MissingWeight { degree: i8, mode: Mode },
    #[error("torus period must be >= 1, got {0}")]
    InvalidPeriod(u32),
}

impl From<CorpusError> for DiagramError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::UnknownComposer(id) => DiagramError::UnknownComposer(id),
            // partition_by_mode only raises UnknownComposer.
            other => DiagramError::UnknownComposer(other.to_string()),
        }
    }
}

fn degree_sum(works: &[&Work]) -> i64 {
    works.iter().map(|w| w.key.degree().0 as i64).sum()
}

/// One composer's unweighted diagram point.
///
/// With `TotalCount`, both per-mode degree sums are divided by the composer's
/// total work count; with `PerModeCount`, each sum is divided by its own
/// mode's count (0 for an empty mode). Sums are accumulated in integers, so
/// the result is exact up to the final division.
pub fn aggregate_point(
    corpus: &Corpus,
    composer_id: &str,
    normalization: Normalization,
) -> Result<DiagramPoint, DiagramError> {
    let (majors, minors) = partition_by_mode(corpus, composer_id)?;
    let total = majors.len() + minors.len();
    if total == 0 {
        return Err(DiagramError::EmptyCatalog(composer_id.to_string()));
    }
    let (sum_major, sum_minor) = (degree_sum(&majors), degree_sum(&minors));
    let (x, y) = match normalization {
        Normalization::TotalCount => (
            sum_major as f64 / total as f64,
            sum_minor as f64 / total as f64,
        ),
        Normalization::PerModeCount => (
            per_mode_mean(sum_major, majors.len()),
            per_mode_mean(sum_minor, minors.len()),
        ),
    };
    Ok(DiagramPoint {
        x,
        y,
        composer_id: composer_id.to_string(),
        weighting: Weighting::Unweighted,
        normalization,
        year_cutoff: None,
    })
}

fn per_mode_mean(sum: i64, count: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        sum as f64 / count as f64
    }
}

/// Weights over (degree, mode) pairs used by [`weighted_point`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightTable {
    weights: BTreeMap<(i8, Mode), f64>,
}

impl WeightTable {
    pub fn new() -> WeightTable {
        WeightTable::default()
    }

    pub fn insert(&mut self, degree: i8, mode: Mode, weight: f64) {
        self.weights.insert((degree, mode), weight);
    }

    pub fn get(&self, degree: i8, mode: Mode) -> Option<f64> {
        self.weights.get(&(degree, mode)).copied()
    }

    /// Same weight for a degree in both modes, as produced by a pooled
    /// degree distribution.
    pub fn from_degree_weights<I: IntoIterator<Item = (i8, f64)>>(weights: I) -> WeightTable {
        let mut table = WeightTable::new();
        for (degree, w) in weights {
            table.insert(degree, Mode::Major, w);
            table.insert(degree, Mode::Minor, w);
        }
        table
    }

    /// Constant weight `c` for every degree in the ordinary window.
    pub fn uniform(c: f64) -> WeightTable {
        WeightTable::from_degree_weights((-7..=7).map(|d| (d, c)))
    }
}

/// One composer's weighted diagram point: each work contributes its degree
/// multiplied by the weight of its (degree, mode) cell, and both sums are
/// divided by the composer's total work count. The division is by the work
/// count, not by the sum of applied weights; see
/// [`weighted_point_renormalized`] for the weighted-mean variant.
pub fn weighted_point(
    corpus: &Corpus,
    composer_id: &str,
    weights: &WeightTable,
) -> Result<DiagramPoint, DiagramError> {
    weighted_point_impl(corpus, composer_id, weights, false)
}

/// Variant of [`weighted_point`] that divides each coordinate by the sum of
/// the weights applied to that mode (a true weighted mean per mode; empty
/// modes give 0). Not the default anywhere.
pub fn weighted_point_renormalized(
    corpus: &Corpus,
    composer_id: &str,
    weights: &WeightTable,
) -> Result<DiagramPoint, DiagramError> {
    weighted_point_impl(corpus, composer_id, weights, true)
}

fn weighted_point_impl(
    corpus: &Corpus,
    composer_id: &str,
    weights: &WeightTable,
    renormalize: bool,
) -> Result<DiagramPoint, DiagramError> {
    let (majors, minors) = partition_by_mode(corpus, composer_id)?;
    let total = majors.len() + minors.len();
    if total == 0 {
        return Err(DiagramError::EmptyCatalog(composer_id.to_string()));
    }
    let mut sums = [0.0f64; 2];
    let mut weight_sums = [0.0f64; 2];
    for (slot, works) in [(0, &majors), (1, &minors)] {
        for work in works {
            let degree = work.key.degree().0;
            let mode = work.key.mode();
            let w = weights
                .get(degree, mode)
                .ok_or(DiagramError::MissingWeight { degree, mode })?;
            sums[slot] += w * degree as f64;
            weight_sums[slot] += w;
        }
    }
    let divide = |slot: usize| {
        if renormalize {
            if weight_sums[slot] == 0.0 {
                0.0
            } else {
                sums[slot] / weight_sums[slot]
            }
        } else {
            sums[slot] / total as f64
        }
    };
    Ok(DiagramPoint {
        x: divide(0),
        y: divide(1),
        composer_id: composer_id.to_string(),
        weighting: Weighting::DistributionWeighted,
        normalization: Normalization::TotalCount,
        year_cutoff: None,
    })
}

/// Fraction of major and minor works for one composer. The minor fraction is
/// the exact complement of the major fraction, so the pair always lies on
/// the x + y = 1 line.
pub fn mode_fractions(corpus: &Corpus, composer_id: &str) -> Result<ModeFraction, DiagramError> {
    let (majors, minors) = partition_by_mode(corpus, composer_id)?;
    let total = majors.len() + minors.len();
    if total == 0 {
        return Err(DiagramError::EmptyCatalog(composer_id.to_string()));
    }
    let major_fraction = majors.len() as f64 / total as f64;
    Ok(ModeFraction {
        major_fraction,
        minor_fraction: 1.0 - major_fraction,
        composer_id: composer_id.to_string(),
    })
}

/// Ratio of major to minor fractions; positive infinity for an all-major
/// composer.
pub fn preference_ratio(f: &ModeFraction) -> f64 {
    if f.minor_fraction == 0.0 {
        f64::INFINITY
    } else {
        f.major_fraction / f.minor_fraction
    }
}

/// Distance between two coordinates on one axis of the torus: the shorter
/// way around. Computed on |a - b| so it is exactly symmetric.
fn axis_distance(a: f64, b: f64, period: f64) -> f64 {
    let r = (a - b).abs().rem_euclid(period);
    r.min(period - r)
}

/// Euclidean distance on the torus: each axis difference is reduced modulo
/// the period and the shorter way around is taken, so with period 12 no axis
/// contributes more than 6.
pub fn torus_distance(p: &DiagramPoint, q: &DiagramPoint, cfg: &TorusMetricConfig) -> f64 {
    torus_distance_xy(p.coords(), q.coords(), cfg)
}

/// [`torus_distance`] on bare coordinate pairs.
pub fn torus_distance_xy(a: (f64, f64), b: (f64, f64), cfg: &TorusMetricConfig) -> f64 {
    let period = cfg.period as f64;
    let dx = axis_distance(a.0, b.0, period);
    let dy = axis_distance(a.1, b.1, period);
    (dx * dx + dy * dy).sqrt()
}

/// Planar Euclidean distance, for the non-wrapped reading of the diagram.
pub fn planar_distance_xy(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    (dx * dx + dy * dy).sqrt()
}
