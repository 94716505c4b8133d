//! Corpus ingestion, validation, and indexing.
//!
//! The canonical interchange format is a UTF-8 CSV with the exact header
//! `composer,catalog_id,title,year,key`; `title` and `year` may be empty and
//! the `key` column uses the notation accepted by [`crate::keycalc::parse_key`].
//! A JSON cache mirrors the same data with keys rendered canonically and a
//! stable field order, so identical input bytes always produce identical
//! cache bytes.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::time::SystemTime;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::keycalc::{parse_key_with, Key, KeyConfig, KeyError, Mode};

/// Expected CSV header, in order.
pub const CSV_HEADER: [&str; 5] = ["composer", "catalog_id", "title", "year", "key"];

/// Plausible composition-year window; anything outside is a data error.
pub const MIN_YEAR: i32 = 1400;
pub const MAX_YEAR: i32 = 2100;

/// Default per-composer work-count threshold used by [`validate`].
pub const DEFAULT_WORK_THRESHOLD: usize = 50;

/// One composition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Work {
    pub composer_id: String,
    /// Opus/KV/BWV-style catalog label; free-form, not assumed chronological.
    pub catalog_id: String,
    pub title: Option<String>,
    pub year: Option<i32>,
    pub key: Key,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composer {
    pub id: String,
    pub display_name: String,
    /// Stable 1-based label used on charts; assigned alphabetically when absent.
    pub index: Option<u32>,
}

/// Where a corpus came from. The ingestion timestamp is informational and
/// excluded from equality and from the JSON cache.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub source: String,
    pub sha256: String,
    pub ingested_at: SystemTime,
}

/// A validated, immutable collection of works with a composer index.
///
/// Invariants upheld by construction: every `work.composer_id` resolves to
/// exactly one composer, composer ids are unique, and every work has a
/// definite mode (its key always does).
#[derive(Debug, Clone)]
pub struct Corpus {
    composers: Vec<Composer>,
    works: Vec<Work>,
    provenance: Provenance,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        // Content equality: the ingestion timestamp is deliberately ignored.
        self.composers == other.composers
            && self.works == other.works
            && self.provenance.sha256 == other.provenance.sha256
    }
}

impl Corpus {
    /// Build a corpus from bare works (fixtures, tests, generated data).
    /// Composers are derived from the works, alphabetically ordered.
    pub fn from_works(works: Vec<Work>) -> Corpus {
        let ids: BTreeSet<&str> = works.iter().map(|w| w.composer_id.as_str()).collect();
        let composers = ids
            .into_iter()
            .map(|id| Composer {
                id: id.to_string(),
                display_name: id.to_string(),
                index: None,
            })
            .collect();
        Corpus {
            composers,
            works,
            provenance: Provenance {
                source: "<memory>".to_string(),
                sha256: String::new(),
                ingested_at: SystemTime::UNIX_EPOCH,
            },
        }
    }

    pub fn composers(&self) -> &[Composer] {
        &self.composers
    }

    pub fn works(&self) -> &[Work] {
        &self.works
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn composer(&self, id: &str) -> Option<&Composer> {
        self.composers.iter().find(|c| c.id == id)
    }

    /// Works of one composer in corpus order.
    pub fn works_of<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Work> + 'a {
        self.works.iter().filter(move |w| w.composer_id == id)
    }

    pub fn len(&self) -> usize {
        self.works.len()
    }

    pub fn is_empty(&self) -> bool {
        self.works.is_empty()
    }

    /// Count of works per mode over the whole corpus.
    pub fn mode_counts(&self) -> (usize, usize) {
        let majors = self
            .works
            .iter()
            .filter(|w| w.key.mode() == Mode::Major)
            .count();
        (majors, self.works.len() - majors)
    }

    /// 1-based chart label for a composer: the explicit `index` field when
    /// present, otherwise the composer's alphabetical rank.
    pub fn label_index(&self, id: &str) -> Option<u32> {
        let composer = self.composer(id)?;
        if let Some(idx) = composer.index {
            return Some(idx);
        }
        let rank = self
            .composers
            .iter()
            .filter(|c| c.id.as_str() < id)
            .count() as u32;
        Some(rank + 1)
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {reason}")]
    FileUnreadable { path: String, reason: String },
    #[error("schema mismatch in {path}: {detail}")]
    SchemaMismatch { path: String, detail: String },
    #[error("{path}:{line}: {cause}")]
    RowError {
        path: String,
        line: u64,
        cause: RowErrorKind,
    },
    #[error("unknown composer {0:?}")]
    UnknownComposer(String),
    #[error("composer {0:?} has no dated works")]
    NoDatedWorks(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RowErrorKind {
    #[error("{0}")]
    BadKey(#[from] KeyError),
    #[error("bad year {value:?}: {reason}")]
    BadYear { value: String, reason: String },
    #[error("empty {0} field")]
    EmptyField(&'static str),
    #[error("{0}")]
    Malformed(String),
}

/// Strict ingestion fails on the first bad row; lenient ingestion skips bad
/// rows and records a diagnostic for each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    pub strictness: Strictness,
    pub key_config: KeyConfig,
}

/// Non-fatal observations made while ingesting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestDiagnostic {
    SkippedRow { line: u64, cause: RowErrorKind },
    /// A year span like `1717-1723` was collapsed to its first year.
    YearRangeCollapsed { line: u64, raw: String, used: i32 },
}

impl fmt::Display for IngestDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestDiagnostic::SkippedRow { line, cause } => {
                write!(f, "line {line}: skipped row: {cause}")
            }
            IngestDiagnostic::YearRangeCollapsed { line, raw, used } => {
                write!(f, "line {line}: year span {raw:?} collapsed to {used}")
            }
        }
    }
}

#[derive(Debug)]
pub struct IngestOutcome {
    pub corpus: Corpus,
    pub diagnostics: Vec<IngestDiagnostic>,
}

fn read_file(path: &Path) -> Result<Vec<u8>, CorpusError> {
    std::fs::read(path).map_err(|e| CorpusError::FileUnreadable {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

/// Ingest a corpus CSV (see module docs for the schema). Deterministic:
/// the same bytes always yield the same corpus.
pub fn ingest_csv(path: &Path, options: &IngestOptions) -> Result<IngestOutcome, CorpusError> {
    let bytes = read_file(path)?;
    let path_str = path.display().to_string();
    if std::str::from_utf8(&bytes).is_err() {
        return Err(CorpusError::FileUnreadable {
            path: path_str,
            reason: "not valid UTF-8".to_string(),
        });
    }
    ingest_csv_bytes(&bytes, &path_str, options)
}

fn ingest_csv_bytes(
    bytes: &[u8],
    path: &str,
    options: &IngestOptions,
) -> Result<IngestOutcome, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes);

    let headers = reader
        .headers()
        .map_err(|e| CorpusError::SchemaMismatch {
            path: path.to_string(),
            detail: e.to_string(),
        })?
        .clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != CSV_HEADER {
        return Err(CorpusError::SchemaMismatch {
            path: path.to_string(),
            detail: format!(
                "expected header `{}`, found `{}`",
                CSV_HEADER.join(","),
                found.join(",")
            ),
        });
    }

    let mut works = Vec::new();
    let mut diagnostics = Vec::new();
    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or_default();
                let cause = RowErrorKind::Malformed(format!("unreadable csv record: {e}"));
                match options.strictness {
                    Strictness::Strict => {
                        return Err(CorpusError::RowError {
                            path: path.to_string(),
                            line,
                            cause,
                        })
                    }
                    Strictness::Lenient => {
                        diagnostics.push(IngestDiagnostic::SkippedRow { line, cause });
                        continue;
                    }
                }
            }
        };
        let line = record.position().map(|p| p.line()).unwrap_or_default();
        match parse_row(&record, options.key_config) {
            Ok((work, collapsed)) => {
                if let Some((raw, used)) = collapsed {
                    diagnostics.push(IngestDiagnostic::YearRangeCollapsed { line, raw, used });
                }
                works.push(work);
            }
            Err(cause) => match options.strictness {
                Strictness::Strict => {
                    return Err(CorpusError::RowError {
                        path: path.to_string(),
                        line,
                        cause,
                    })
                }
                Strictness::Lenient => {
                    diagnostics.push(IngestDiagnostic::SkippedRow { line, cause });
                }
            },
        }
    }

    let mut corpus = Corpus::from_works(works);
    corpus.provenance = Provenance {
        source: path.to_string(),
        sha256: sha256_hex(bytes),
        ingested_at: SystemTime::now(),
    };
    Ok(IngestOutcome {
        corpus,
        diagnostics,
    })
}

type CollapsedYear = Option<(String, i32)>;

fn parse_row(
    record: &csv::StringRecord,
    key_config: KeyConfig,
) -> Result<(Work, CollapsedYear), RowErrorKind> {
    if record.len() != CSV_HEADER.len() {
        return Err(RowErrorKind::Malformed(format!(
            "expected {} fields, found {}",
            CSV_HEADER.len(),
            record.len()
        )));
    }
    let composer_id = record[0].trim();
    if composer_id.is_empty() {
        return Err(RowErrorKind::EmptyField("composer"));
    }
    let catalog_id = record[1].trim();
    if catalog_id.is_empty() {
        return Err(RowErrorKind::EmptyField("catalog_id"));
    }
    let title = match record[2].trim() {
        "" => None,
        t => Some(t.to_string()),
    };
    let (year, collapsed) = parse_year(record[3].trim())?;
    let key = parse_key_with(record[4].trim(), key_config)?;
    Ok((
        Work {
            composer_id: composer_id.to_string(),
            catalog_id: catalog_id.to_string(),
            title,
            year,
            key,
        },
        collapsed,
    ))
}

fn check_year_range(year: i32, raw: &str) -> Result<i32, RowErrorKind> {
    if (MIN_YEAR..=MAX_YEAR).contains(&year) {
        Ok(year)
    } else {
        Err(RowErrorKind::BadYear {
            value: raw.to_string(),
            reason: format!("outside [{MIN_YEAR}, {MAX_YEAR}]"),
        })
    }
}

/// Empty -> no year; `1761` -> that year; `1717-1723` -> first year plus a
/// collapse note. Anything else is a row error.
fn parse_year(raw: &str) -> Result<(Option<i32>, CollapsedYear), RowErrorKind> {
    if raw.is_empty() {
        return Ok((None, None));
    }
    if let Ok(y) = raw.parse::<i32>() {
        return Ok((Some(check_year_range(y, raw)?), None));
    }
    if let Some((first, second)) = raw.split_once('-') {
        if let (Ok(a), Ok(_)) = (first.trim().parse::<i32>(), second.trim().parse::<i32>()) {
            let a = check_year_range(a, raw)?;
            return Ok((Some(a), Some((raw.to_string(), a))));
        }
    }
    Err(RowErrorKind::BadYear {
        value: raw.to_string(),
        reason: "not an integer year or year span".to_string(),
    })
}

// ---------------------------------------------------------------------------
// JSON cache
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct CorpusDoc {
    composers: Vec<ComposerDoc>,
    works: Vec<WorkDoc>,
    provenance: ProvenanceDoc,
}

#[derive(Debug, Serialize, Deserialize)]
struct ComposerDoc {
    id: String,
    display_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    index: Option<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WorkDoc {
    composer: String,
    catalog_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    year: Option<i32>,
    key: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProvenanceDoc {
    source: String,
    sha256: String,
}

/// Render the normalized JSON cache: stable field order, canonical key
/// spellings, no timestamps. Byte-reproducible for identical input corpora.
pub fn to_cache_json(corpus: &Corpus) -> String {
    let doc = CorpusDoc {
        composers: corpus
            .composers
            .iter()
            .map(|c| ComposerDoc {
                id: c.id.clone(),
                display_name: c.display_name.clone(),
                index: c.index,
            })
            .collect(),
        works: corpus
            .works
            .iter()
            .map(|w| WorkDoc {
                composer: w.composer_id.clone(),
                catalog_id: w.catalog_id.clone(),
                title: w.title.clone(),
                year: w.year,
                key: w.key.canonical(),
            })
            .collect(),
        provenance: ProvenanceDoc {
            source: corpus.provenance.source.clone(),
            sha256: corpus.provenance.sha256.clone(),
        },
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("corpus doc serializes");
    out.push('\n');
    out
}

/// Ingest a JSON cache produced by [`to_cache_json`]. The document's
/// provenance is restored, so a CSV corpus and its re-ingested cache compare
/// equal under content equality.
pub fn ingest_json(path: &Path, options: &IngestOptions) -> Result<IngestOutcome, CorpusError> {
    let bytes = read_file(path)?;
    let path_str = path.display().to_string();
    let doc: CorpusDoc =
        serde_json::from_slice(&bytes).map_err(|e| CorpusError::SchemaMismatch {
            path: path_str.clone(),
            detail: e.to_string(),
        })?;

    let mut composers: Vec<Composer> = doc
        .composers
        .into_iter()
        .map(|c| Composer {
            id: c.id,
            display_name: c.display_name,
            index: c.index,
        })
        .collect();
    composers.sort_by(|a, b| a.id.cmp(&b.id));
    let ids: BTreeSet<&str> = composers.iter().map(|c| c.id.as_str()).collect();
    if ids.len() != composers.len() {
        return Err(CorpusError::SchemaMismatch {
            path: path_str,
            detail: "duplicate composer ids".to_string(),
        });
    }

    let mut works = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, w) in doc.works.into_iter().enumerate() {
        let line = (i + 1) as u64;
        let resolved = if !ids.contains(w.composer.as_str()) {
            Err(RowErrorKind::Malformed(format!(
                "work references unknown composer {:?}",
                w.composer
            )))
        } else {
            parse_key_with(&w.key, options.key_config).map_err(RowErrorKind::from)
        };
        match resolved {
            Ok(key) => works.push(Work {
                composer_id: w.composer,
                catalog_id: w.catalog_id,
                title: w.title,
                year: w.year,
                key,
            }),
            Err(cause) => match options.strictness {
                Strictness::Strict => {
                    return Err(CorpusError::RowError {
                        path: path_str,
                        line,
                        cause,
                    })
                }
                Strictness::Lenient => {
                    diagnostics.push(IngestDiagnostic::SkippedRow { line, cause })
                }
            },
        }
    }

    Ok(IngestOutcome {
        corpus: Corpus {
            composers,
            works,
            provenance: Provenance {
                source: doc.provenance.source,
                sha256: doc.provenance.sha256,
                ingested_at: SystemTime::now(),
            },
        },
        diagnostics,
    })
}

// ---------------------------------------------------------------------------
// Validation and slicing
// ---------------------------------------------------------------------------

/// Advisory findings from [`validate`]; none of them block analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    /// The composer's catalog is below the inclusion threshold.
    BelowWorkThreshold {
        composer_id: String,
        works: usize,
        threshold: usize,
    },
    /// The work cannot participate in career analyses.
    MissingYear {
        composer_id: String,
        catalog_id: String,
    },
    /// Degree outside the ordinary [-7, 7] window (extended-range keys).
    OutOfRangeDegree {
        composer_id: String,
        catalog_id: String,
        degree: i8,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::BelowWorkThreshold {
                composer_id,
                works,
                threshold,
            } => write!(
                f,
                "composer {composer_id} has {works} works, below threshold {threshold}"
            ),
            Diagnostic::MissingYear {
                composer_id,
                catalog_id,
            } => write!(
                f,
                "work {composer_id}/{catalog_id} has no year (excluded from career analysis)"
            ),
            Diagnostic::OutOfRangeDegree {
                composer_id,
                catalog_id,
                degree,
            } => write!(
                f,
                "work {composer_id}/{catalog_id} has degree {degree} outside [-7, 7]"
            ),
        }
    }
}

/// Check a corpus against the inclusion rules with the default threshold.
pub fn validate(corpus: &Corpus) -> Vec<Diagnostic> {
    validate_with(corpus, DEFAULT_WORK_THRESHOLD)
}

/// Like [`validate`] with an explicit work-count threshold. Never mutates
/// the corpus and never fails; the result is a list of advisories in a
/// deterministic order (composers alphabetically, then works in corpus
/// order).
pub fn validate_with(corpus: &Corpus, threshold: usize) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for composer in &corpus.composers {
        let n = corpus.works_of(&composer.id).count();
        if n < threshold {
            out.push(Diagnostic::BelowWorkThreshold {
                composer_id: composer.id.clone(),
                works: n,
                threshold,
            });
        }
    }
    for work in &corpus.works {
        if work.year.is_none() {
            out.push(Diagnostic::MissingYear {
                composer_id: work.composer_id.clone(),
                catalog_id: work.catalog_id.clone(),
            });
        }
        let d = work.key.degree().0;
        if d.abs() > 7 {
            out.push(Diagnostic::OutOfRangeDegree {
                composer_id: work.composer_id.clone(),
                catalog_id: work.catalog_id.clone(),
                degree: d,
            });
        }
    }
    out
}

/// Split one composer's works by mode, preserving corpus order. The two
/// halves are disjoint and together exhaust the composer's works.
pub fn partition_by_mode<'a>(
    corpus: &'a Corpus,
    composer_id: &str,
) -> Result<(Vec<&'a Work>, Vec<&'a Work>), CorpusError> {
    if corpus.composer(composer_id).is_none() {
        return Err(CorpusError::UnknownComposer(composer_id.to_string()));
    }
    let (mut majors, mut minors) = (Vec::new(), Vec::new());
    for work in corpus.works.iter().filter(|w| w.composer_id == composer_id) {
        match work.key.mode() {
            Mode::Major => majors.push(work),
            Mode::Minor => minors.push(work),
        }
    }
    Ok((majors, minors))
}

/// A year-bounded sub-corpus plus the count of undated works that could not
/// participate.
#[derive(Debug)]
pub struct YearSlice {
    pub corpus: Corpus,
    pub undated_excluded: usize,
}

/// Sub-corpus of one composer's works dated `<= last_year`. Works without a
/// year are excluded and counted. Slicing is monotone in `last_year`.
pub fn slice_by_year(
    corpus: &Corpus,
    composer_id: &str,
    last_year: i32,
) -> Result<YearSlice, CorpusError> {
    let composer = corpus
        .composer(composer_id)
        .ok_or_else(|| CorpusError::UnknownComposer(composer_id.to_string()))?
        .clone();
    let all: Vec<&Work> = corpus
        .works
        .iter()
        .filter(|w| w.composer_id == composer_id)
        .collect();
    let undated = all.iter().filter(|w| w.year.is_none()).count();
    if undated == all.len() {
        return Err(CorpusError::NoDatedWorks(composer_id.to_string()));
    }
    let works: Vec<Work> = all
        .into_iter()
        .filter(|w| w.year.is_some_and(|y| y <= last_year))
        .cloned()
        .collect();
    Ok(YearSlice {
        corpus: Corpus {
            composers: vec![composer],
            works,
            provenance: corpus.provenance.clone(),
        },
        undated_excluded: undated,
    })
}
