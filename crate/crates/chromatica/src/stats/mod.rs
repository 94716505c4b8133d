//! Degree histograms, the pooled degree distribution, goodness-of-fit
//! testing, and centroid/cluster analysis of composer points.

mod cluster;
mod gof;

pub use cluster::{cluster, ClusterResult, CutCriterion, Linkage, PointMetric};
pub use gof::{cvm_statistic, cvm_test, Candidate, FitParams, GofMethod, GofResult};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::corpus::Corpus;
use crate::diagram::DiagramPoint;
use crate::keycalc::Mode;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("no {0} works in histogram")]
    EmptyMode(Mode),
    #[error("histogram has no observations")]
    EmptyHistogram,
    #[error("need at least 8 samples, got {0}")]
    TooFewSamples(usize),
    #[error("need at least 100 bootstrap replicates, got {0}")]
    TooFewReps(u32),
    #[error("samples are degenerate (no spread under the fitted family)")]
    DegenerateSamples,
    #[error("samples contain non-finite values")]
    NonFiniteSamples,
    #[error("empty point set")]
    EmptyPointSet,
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("invalid cut: {0}")]
    InvalidCut(String),
    #[error("duplicate composer id {0:?} in point set")]
    DuplicateComposer(String),
}

/// Exact per-degree, per-mode counts over a corpus, with the pooled
/// (major + minor) view kept alongside. Bins always cover at least the
/// ordinary [-7, 7] window, zero-filled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeHistogram {
    counts: BTreeMap<(i8, Mode), u64>,
    combined: BTreeMap<i8, u64>,
}

impl DegreeHistogram {
    pub fn count(&self, degree: i8, mode: Mode) -> u64 {
        self.counts.get(&(degree, mode)).copied().unwrap_or(0)
    }

    pub fn combined(&self, degree: i8) -> u64 {
        self.combined.get(&degree).copied().unwrap_or(0)
    }

    /// Degrees of all bins, ascending.
    pub fn degrees(&self) -> Vec<i8> {
        self.combined.keys().copied().collect()
    }

    pub fn total(&self) -> u64 {
        self.combined.values().sum()
    }

    pub fn mode_total(&self, mode: Mode) -> u64 {
        self.counts
            .iter()
            .filter(|((_, m), _)| *m == mode)
            .map(|(_, c)| c)
            .sum()
    }
}

/// Count every work of the corpus into its (degree, mode) cell. An empty
/// corpus yields the all-zero histogram.
pub fn histogram(corpus: &Corpus) -> DegreeHistogram {
    let mut counts = BTreeMap::new();
    let mut combined = BTreeMap::new();
    for d in -7..=7i8 {
        counts.insert((d, Mode::Major), 0);
        counts.insert((d, Mode::Minor), 0);
        combined.insert(d, 0);
    }
    for work in corpus.works() {
        let d = work.key.degree().0;
        *counts.entry((d, work.key.mode())).or_insert(0) += 1;
        // Keep both modes' bins present for any extended degree we see.
        counts.entry((d, Mode::Major)).or_insert(0);
        counts.entry((d, Mode::Minor)).or_insert(0);
        *combined.entry(d).or_insert(0) += 1;
    }
    DegreeHistogram { counts, combined }
}

/// The most popular degree per mode. Ties are broken toward the smallest
/// absolute degree and then toward the negative one.
pub fn mode_peaks(h: &DegreeHistogram) -> Result<(i8, i8), StatsError> {
    let peak = |mode: Mode| -> Result<i8, StatsError> {
        let mut best: Option<(u64, i8)> = None;
        for (&(d, m), &count) in &h.counts {
            if m != mode || count == 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((bc, bd)) => count > bc || (count == bc && (d.abs(), d) < (bd.abs(), bd)),
            };
            if better {
                best = Some((count, d));
            }
        }
        best.map(|(_, d)| d).ok_or(StatsError::EmptyMode(mode))
    };
    Ok((peak(Mode::Major)?, peak(Mode::Minor)?))
}

/// Scale of a [`DegreeDistribution`]: sums to 1 or to 100.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Probability,
    Percentage,
}

/// Normalized pooled degree distribution P(k).
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    p: BTreeMap<i8, f64>,
    pub scale: Scale,
}

impl DegreeDistribution {
    pub fn get(&self, degree: i8) -> Option<f64> {
        self.p.get(&degree).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i8, f64)> + '_ {
        self.p.iter().map(|(&d, &p)| (d, p))
    }

    pub fn sum(&self) -> f64 {
        self.p.values().sum()
    }
}

/// Normalize the pooled histogram into P(k) on the requested scale.
pub fn distribution(h: &DegreeHistogram, scale: Scale) -> Result<DegreeDistribution, StatsError> {
    let total = h.total();
    if total == 0 {
        return Err(StatsError::EmptyHistogram);
    }
    let factor = match scale {
        Scale::Probability => 1.0,
        Scale::Percentage => 100.0,
    };
    let p = h
        .combined
        .iter()
        .map(|(&d, &c)| (d, factor * c as f64 / total as f64))
        .collect();
    Ok(DegreeDistribution { p, scale })
}

/// Arithmetic mean of the points' raw (unwrapped) coordinates.
pub fn centroid(points: &[DiagramPoint]) -> Result<(f64, f64), StatsError> {
    centroid_xy(&points.iter().map(|p| p.coords()).collect::<Vec<_>>())
}

/// [`centroid`] on bare coordinate pairs.
pub fn centroid_xy(points: &[(f64, f64)]) -> Result<(f64, f64), StatsError> {
    if points.is_empty() {
        return Err(StatsError::EmptyPointSet);
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    Ok((sx / n, sy / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::testfix::{thirty_keys, work};

    #[test]
    fn thirty_key_histogram_is_uniform() {
        let h = histogram(&thirty_keys());
        for d in -7..=7i8 {
            assert_eq!(h.count(d, Mode::Major), 1, "major count at {d}");
            assert_eq!(h.count(d, Mode::Minor), 1, "minor count at {d}");
            assert_eq!(h.combined(d), 2, "combined count at {d}");
        }
        assert_eq!(h.total(), 30);
        assert_eq!(h.mode_total(Mode::Major), 15);
    }

    #[test]
    fn empty_corpus_histogram_is_all_zero() {
        let h = histogram(&Corpus::from_works(vec![]));
        assert_eq!(h.total(), 0);
        assert_eq!(h.degrees().len(), 15);
        assert!(h.degrees().iter().all(|&d| h.combined(d) == 0));
    }

    #[test]
    fn histogram_conserves_counts() {
        let corpus = Corpus::from_works(vec![
            work("x", "1", None, "C"),
            work("x", "2", None, "C"),
            work("x", "3", None, "g"),
            work("y", "4", None, "D"),
        ]);
        let h = histogram(&corpus);
        assert_eq!(h.total() as usize, corpus.len());
        for d in h.degrees() {
            assert_eq!(
                h.combined(d),
                h.count(d, Mode::Major) + h.count(d, Mode::Minor)
            );
        }
        assert_eq!(h.count(0, Mode::Major), 2);
        assert_eq!(h.count(-2, Mode::Minor), 1);
        assert_eq!(h.count(2, Mode::Major), 1);
    }

    #[test]
    fn peak_examples() {
        let corpus = Corpus::from_works(vec![
            work("x", "1", None, "C"),
            work("x", "2", None, "C"),
            work("x", "3", None, "G"),
            work("x", "4", None, "e"),
        ]);
        let (major, minor) = mode_peaks(&histogram(&corpus)).unwrap();
        assert_eq!(major, 0);
        assert_eq!(minor, 1);
    }

    #[test]
    fn peak_tie_prefers_small_negative_degree() {
        // Majors D, D, Bb, Bb: degrees +2 and -2 tie; -2 wins.
        let corpus = Corpus::from_works(vec![
            work("x", "1", None, "D"),
            work("x", "2", None, "D"),
            work("x", "3", None, "Bb"),
            work("x", "4", None, "Bb"),
            work("x", "5", None, "a"),
        ]);
        let (major, _) = mode_peaks(&histogram(&corpus)).unwrap();
        assert_eq!(major, -2);
    }

    #[test]
    fn peak_of_empty_mode_is_an_error() {
        let corpus = Corpus::from_works(vec![work("x", "1", None, "C")]);
        assert!(matches!(
            mode_peaks(&histogram(&corpus)),
            Err(StatsError::EmptyMode(Mode::Minor))
        ));
    }

    #[test]
    fn distribution_examples() {
        let corpus = Corpus::from_works(vec![
            work("x", "1", None, "C"),
            work("x", "2", None, "C"),
            work("x", "3", None, "a"),
            work("x", "4", None, "G"),
        ]);
        let h = histogram(&corpus);
        let p = distribution(&h, Scale::Probability).unwrap();
        assert_eq!(p.get(0), Some(0.75));
        assert_eq!(p.get(1), Some(0.25));
        let pct = distribution(&h, Scale::Percentage).unwrap();
        assert_eq!(pct.get(0), Some(75.0));
        assert_eq!(pct.get(1), Some(25.0));
    }

    #[test]
    fn thirty_key_distribution_is_uniform() {
        let p = distribution(&histogram(&thirty_keys()), Scale::Probability).unwrap();
        for d in -7..=7i8 {
            assert_eq!(p.get(d), Some(2.0 / 30.0));
        }
        assert!((p.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_distribution_is_an_error() {
        let h = histogram(&Corpus::from_works(vec![]));
        assert!(matches!(
            distribution(&h, Scale::Probability),
            Err(StatsError::EmptyHistogram)
        ));
    }

    #[test]
    fn centroid_examples() {
        assert_eq!(centroid_xy(&[(1.0, 1.0), (-1.0, -1.0)]).unwrap(), (0.0, 0.0));
        assert_eq!(
            centroid_xy(&[(2.0, 0.0), (0.0, 2.0), (1.0, 1.0)]).unwrap(),
            (1.0, 1.0)
        );
        assert!(matches!(
            centroid_xy(&[]),
            Err(StatsError::EmptyPointSet)
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn distribution_sums_to_scale(
                keys in prop::collection::vec(
                    prop::sample::select(vec!["C", "G", "F", "d", "bb", "C#", "ab"]),
                    1..60,
                )
            ) {
                let works = keys
                    .into_iter()
                    .enumerate()
                    .map(|(i, k)| work("x", &format!("w{i}"), None, k))
                    .collect();
                let h = histogram(&Corpus::from_works(works));
                let p = distribution(&h, Scale::Probability).unwrap();
                prop_assert!((p.sum() - 1.0).abs() < 1e-12);
                let pct = distribution(&h, Scale::Percentage).unwrap();
                prop_assert!((pct.sum() - 100.0).abs() < 1e-9);
            }

            #[test]
            fn centroid_is_shift_equivariant(
                points in prop::collection::vec((-7.0f64..7.0, -7.0f64..7.0), 1..40),
                tx in -5.0f64..5.0,
                ty in -5.0f64..5.0,
            ) {
                let (cx, cy) = centroid_xy(&points).unwrap();
                let shifted: Vec<_> = points.iter().map(|p| (p.0 + tx, p.1 + ty)).collect();
                let (sx, sy) = centroid_xy(&shifted).unwrap();
                prop_assert!((sx - (cx + tx)).abs() < 1e-9);
                prop_assert!((sy - (cy + ty)).abs() < 1e-9);
            }
        }
    }
}
