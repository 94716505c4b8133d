//! Cumulative-mean career trajectories on the chromatic diagram.
//!
//! A trajectory samples the diagram once per year in which the composer
//! produced a dated work: the sample at year Y is the aggregate point over
//! everything dated `<= Y`. Cumulative averaging is the primary mode —
//! single-year averages fluctuate too much to read — but [`yearly_points`]
//! is available for comparison output. Undated works are excluded and
//! counted.

use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, Work};
use crate::diagram::Normalization;
use crate::keycalc::Mode;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub year: i32,
    pub point: (f64, f64),
    pub cumulative_work_count: usize,
}

/// A composer's path over their active years. Sample years are strictly
/// increasing and the final sample equals the aggregate point over the
/// composer's full dated sub-corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub composer_id: String,
    pub normalization: Normalization,
    pub samples: Vec<TrajectorySample>,
    /// Works without a year, excluded from every sample.
    pub undated_excluded: usize,
}

#[derive(Debug, Error)]
pub enum CareerError {
    #[error("unknown composer {0:?}")]
    UnknownComposer(String),
    #[error("composer {0:?} has no dated works")]
    NoDatedWorks(String),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
}

impl From<CorpusError> for CareerError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::UnknownComposer(id) => CareerError::UnknownComposer(id),
            CorpusError::NoDatedWorks(id) => CareerError::NoDatedWorks(id),
            other => CareerError::UnknownComposer(other.to_string()),
        }
    }
}

/// Dated works of one composer, sorted by year (stable within a year).
fn dated_works<'a>(
    corpus: &'a Corpus,
    composer_id: &str,
) -> Result<(Vec<&'a Work>, usize), CareerError> {
    if corpus.composer(composer_id).is_none() {
        return Err(CareerError::UnknownComposer(composer_id.to_string()));
    }
    let all: Vec<&Work> = corpus
        .works()
        .iter()
        .filter(|w| w.composer_id == composer_id)
        .collect();
    let undated = all.iter().filter(|w| w.year.is_none()).count();
    let mut dated: Vec<&Work> = all.into_iter().filter(|w| w.year.is_some()).collect();
    if dated.is_empty() {
        return Err(CareerError::NoDatedWorks(composer_id.to_string()));
    }
    dated.sort_by_key(|w| w.year);
    Ok((dated, undated))
}

struct RunningSums {
    major_sum: i64,
    minor_sum: i64,
    majors: usize,
    minors: usize,
}

impl RunningSums {
    fn new() -> Self {
        RunningSums {
            major_sum: 0,
            minor_sum: 0,
            majors: 0,
            minors: 0,
        }
    }

    fn add(&mut self, work: &Work) {
        let d = work.key.degree().0 as i64;
        match work.key.mode() {
            Mode::Major => {
                self.major_sum += d;
                self.majors += 1;
            }
            Mode::Minor => {
                self.minor_sum += d;
                self.minors += 1;
            }
        }
    }

    /// Same arithmetic as the aggregate point: integer sums, one division.
    fn point(&self, normalization: Normalization) -> (f64, f64) {
        let ratio = |sum: i64, count: usize| {
            if count == 0 {
                0.0
            } else {
                sum as f64 / count as f64
            }
        };
        match normalization {
            Normalization::TotalCount => {
                let total = self.majors + self.minors;
                (
                    self.major_sum as f64 / total as f64,
                    self.minor_sum as f64 / total as f64,
                )
            }
            Normalization::PerModeCount => (
                ratio(self.major_sum, self.majors),
                ratio(self.minor_sum, self.minors),
            ),
        }
    }

    fn count(&self) -> usize {
        self.majors + self.minors
    }
}

/// Cumulative-mean trajectory: one sample per distinct composition year,
/// ascending, each equal to the aggregate point over all works dated up to
/// and including that year. Because the running sums are integers, every
/// sample is exactly what a fresh aggregate over the year slice computes.
pub fn trajectory(
    corpus: &Corpus,
    composer_id: &str,
    normalization: Normalization,
) -> Result<Trajectory, CareerError> {
    let (dated, undated) = dated_works(corpus, composer_id)?;
    let mut sums = RunningSums::new();
    let mut samples = Vec::new();
    let mut iter = dated.iter().peekable();
    while let Some(work) = iter.next() {
        sums.add(work);
        let year = work.year.expect("dated works only");
        let year_ends = iter
            .peek()
            .is_none_or(|next| next.year.expect("dated works only") != year);
        if year_ends {
            samples.push(TrajectorySample {
                year,
                point: sums.point(normalization),
                cumulative_work_count: sums.count(),
            });
        }
    }
    Ok(Trajectory {
        composer_id: composer_id.to_string(),
        normalization,
        samples,
        undated_excluded: undated,
    })
}

/// Single-year averages (not cumulative): the aggregate point over just the
/// works of each distinct year. Comparison output only.
pub fn yearly_points(
    corpus: &Corpus,
    composer_id: &str,
    normalization: Normalization,
) -> Result<Vec<TrajectorySample>, CareerError> {
    let (dated, _) = dated_works(corpus, composer_id)?;
    let mut out = Vec::new();
    let mut sums = RunningSums::new();
    let mut iter = dated.iter().peekable();
    while let Some(work) = iter.next() {
        sums.add(work);
        let year = work.year.expect("dated works only");
        let year_ends = iter
            .peek()
            .is_none_or(|next| next.year.expect("dated works only") != year);
        if year_ends {
            out.push(TrajectorySample {
                year,
                point: sums.point(normalization),
                cumulative_work_count: sums.count(),
            });
            sums = RunningSums::new();
        }
    }
    Ok(out)
}

/// A year-tagged step of the cumulative mean: (year, (dx, dy)).
pub type TrajectoryDelta = (i32, (f64, f64));

/// Year-over-year steps of a trajectory: the difference between consecutive
/// sample points, tagged with the later year. The largest steps are the
/// turns a career narrative points at.
pub fn trajectory_deltas(t: &Trajectory) -> Result<Vec<TrajectoryDelta>, CareerError> {
    if t.samples.len() < 2 {
        return Err(CareerError::TooFewSamples(t.samples.len()));
    }
    Ok(t.samples
        .windows(2)
        .map(|w| {
            (
                w[1].year,
                (w[1].point.0 - w[0].point.0, w[1].point.1 - w[0].point.1),
            )
        })
        .collect())
}
