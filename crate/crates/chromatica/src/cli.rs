//! Command-line orchestration.
//!
//! One subcommand per analysis artifact: `validate`, `degrees`, `histogram`,
//! `fractions`, `diagram`, `career`, `cluster`, `gof`, and `render`. Table
//! subcommands print CSV to stdout or write it to `--out` (a `.json`
//! extension selects the JSON mirror); `--svg` adds the chart. `render`
//! re-plots a table written by another subcommand, inferring the chart kind
//! from the header, and produces byte-identical SVG to the fused command.
//!
//! Exit status: 0 on success, 1 on user error (flags, missing files,
//! schema), 2 on data error (malformed rows in strict mode, degenerate or
//! insufficient data). Output files are written atomically and inputs are
//! never modified.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::career::{self, CareerError};
use crate::corpus::{self, Corpus, CorpusError, IngestOptions, IngestOutcome, Strictness};
use crate::diagram::{self, DiagramError, Normalization, WeightTable};
use crate::render::{
    format_sig6, render, round_sig6, HistBin, PlotData, PlotKind, PlotPoint, PlotSpec,
    RenderError, TrajPoint,
};
use crate::stats::{
    self, Candidate, CutCriterion, FitParams, GofResult, Linkage, PointMetric, Scale, StatsError,
};

/// Parse `argv` (without the program name) and execute one subcommand.
pub fn run<I, S>(argv: I) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let full: Vec<OsString> = std::iter::once(OsString::from("chromatica"))
        .chain(argv.into_iter().map(Into::into))
        .collect();
    let cli = match Cli::try_parse_from(full) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[derive(Parser)]
#[command(
    name = "chromatica",
    version,
    about = "Key-signature stylometry: degrees, chromatic-diagram analytics, deterministic charts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus file: CSV with header `composer,catalog_id,title,year,key`,
    /// or a JSON cache written by `validate --out`
    #[arg(long, value_name = "PATH")]
    corpus: PathBuf,
    /// Fail on the first malformed row (default)
    #[arg(long, conflicts_with = "lenient")]
    strict: bool,
    /// Skip malformed rows, reporting each on the diagnostic stream
    #[arg(long)]
    lenient: bool,
}

impl CorpusArgs {
    fn load(&self) -> Result<IngestOutcome, CliError> {
        let options = IngestOptions {
            strictness: if self.lenient {
                Strictness::Lenient
            } else {
                Strictness::Strict
            },
            ..Default::default()
        };
        let is_json = self
            .corpus
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let outcome = if is_json {
            corpus::ingest_json(&self.corpus, &options)?
        } else {
            corpus::ingest_csv(&self.corpus, &options)?
        };
        Ok(outcome)
    }

    /// Load and report ingest diagnostics on stderr.
    fn load_reporting(&self) -> Result<Corpus, CliError> {
        let outcome = self.load()?;
        for d in &outcome.diagnostics {
            eprintln!("{}: {d}", self.corpus.display());
        }
        Ok(outcome.corpus)
    }
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum NormalizationArg {
    #[default]
    Total,
    Permode,
}

impl From<NormalizationArg> for Normalization {
    fn from(a: NormalizationArg) -> Self {
        match a {
            NormalizationArg::Total => Normalization::TotalCount,
            NormalizationArg::Permode => Normalization::PerModeCount,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum LinkageArg {
    Single,
    #[default]
    Complete,
    Average,
}

impl From<LinkageArg> for Linkage {
    fn from(a: LinkageArg) -> Self {
        match a {
            LinkageArg::Single => Linkage::Single,
            LinkageArg::Complete => Linkage::Complete,
            LinkageArg::Average => Linkage::Average,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum CandidateArg {
    #[default]
    Normal,
    Cauchy,
    Poisson,
}

impl From<CandidateArg> for Candidate {
    fn from(a: CandidateArg) -> Self {
        match a {
            CandidateArg::Normal => Candidate::Normal,
            CandidateArg::Cauchy => Candidate::Cauchy,
            CandidateArg::Poisson => Candidate::Poisson,
        }
    }
}

/// `k=<count>` or `h=<distance>`.
fn parse_cut(s: &str) -> Result<CutCriterion, String> {
    let (kind, value) = s
        .split_once('=')
        .ok_or_else(|| "expected k=<count> or h=<distance>".to_string())?;
    match kind {
        "k" => value
            .parse::<usize>()
            .map(CutCriterion::ClusterCount)
            .map_err(|e| format!("bad cluster count {value:?}: {e}")),
        "h" => value
            .parse::<f64>()
            .map(CutCriterion::DistanceThreshold)
            .map_err(|e| format!("bad distance threshold {value:?}: {e}")),
        other => Err(format!("unknown cut kind {other:?}, expected k or h")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a corpus, report diagnostics, optionally write the JSON cache
    Validate {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Write the normalized corpus cache (JSON) here
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Per-work degree table
    Degrees {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Restrict to one composer
        #[arg(long)]
        composer: Option<String>,
        /// Write the table here instead of stdout (.json selects the JSON mirror)
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Degree histogram per mode plus the pooled distribution
    Histogram {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Restrict to one composer
        #[arg(long)]
        composer: Option<String>,
        /// Write the table here instead of stdout (.json selects the JSON mirror)
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Also write the chart (SVG) here
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
    },
    /// Major/minor fractions per composer
    Fractions {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Restrict to one composer
        #[arg(long)]
        composer: Option<String>,
        /// Write the table here instead of stdout (.json selects the JSON mirror)
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Also write the chart (SVG) here
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
    },
    /// Composer points on the chromatic diagram
    Diagram {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Restrict to one composer
        #[arg(long)]
        composer: Option<String>,
        /// Weight each work by the pooled corpus degree distribution
        /// (percentage scale)
        #[arg(long)]
        weighted: bool,
        #[arg(long, value_enum, default_value_t)]
        normalization: NormalizationArg,
        /// Write the table here instead of stdout (.json selects the JSON mirror)
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Also write the chart (SVG) here
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
    },
    /// Cumulative-mean career trajectory for one composer
    Career {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        composer: String,
        #[arg(long, value_enum, default_value_t)]
        normalization: NormalizationArg,
        /// Write the table here instead of stdout (.json selects the JSON mirror)
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Also write the chart (SVG) here
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
    },
    /// Agglomerative clustering of composer diagram points
    Cluster {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_enum, default_value_t)]
        linkage: LinkageArg,
        /// Stop at k=<count> clusters or at merge distance h=<d>
        #[arg(long, value_parser = parse_cut, default_value = "k=2")]
        cut: CutCriterion,
        #[arg(long, value_enum, default_value_t)]
        normalization: NormalizationArg,
        /// Write the JSON report here instead of stdout
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Goodness-of-fit test of the degree data against a candidate family
    Gof {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Restrict to one composer
        #[arg(long)]
        composer: Option<String>,
        #[arg(long, value_enum, default_value_t)]
        candidate: CandidateArg,
        /// Parametric bootstrap replicates
        #[arg(long, default_value_t = 1000)]
        reps: u32,
        /// Bootstrap seed; CHROMATICA_SEED is the fallback
        #[arg(long, env = "CHROMATICA_SEED", default_value_t = 0)]
        seed: u64,
        /// Write the JSON report here instead of stdout
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Re-plot a table produced by histogram/fractions/diagram/career
    Render {
        /// The data table (CSV); the chart kind is inferred from its header
        #[arg(long, value_name = "PATH")]
        corpus: PathBuf,
        /// Write the chart (SVG) here
        #[arg(long, value_name = "PATH")]
        svg: PathBuf,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Career(#[from] CareerError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("cannot write {path}: {reason}")]
    Write { path: String, reason: String },
    #[error("{0}")]
    Usage(String),
    #[error("{path}:{line}: {reason}")]
    Table {
        path: String,
        line: u64,
        reason: String,
    },
}

impl CliError {
    /// 1 = user error (flags, files, schema), 2 = data error.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Corpus(e) => match e {
                CorpusError::RowError { .. } | CorpusError::NoDatedWorks(_) => 2,
                _ => 1,
            },
            CliError::Diagram(e) => match e {
                DiagramError::UnknownComposer(_) | DiagramError::InvalidPeriod(_) => 1,
                _ => 2,
            },
            CliError::Stats(e) => match e {
                StatsError::InvalidCut(_) | StatsError::TooFewReps(_) => 1,
                _ => 2,
            },
            CliError::Career(e) => match e {
                CareerError::UnknownComposer(_) => 1,
                _ => 2,
            },
            CliError::Render(_) | CliError::Write { .. } | CliError::Usage(_) => 1,
            CliError::Table { .. } => 2,
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { corpus, out } => cmd_validate(&corpus, out.as_deref()),
        Command::Degrees {
            corpus,
            composer,
            out,
        } => cmd_degrees(&corpus, composer.as_deref(), out.as_deref()),
        Command::Histogram {
            corpus,
            composer,
            out,
            svg,
        } => cmd_histogram(&corpus, composer.as_deref(), out.as_deref(), svg.as_deref()),
        Command::Fractions {
            corpus,
            composer,
            out,
            svg,
        } => cmd_fractions(&corpus, composer.as_deref(), out.as_deref(), svg.as_deref()),
        Command::Diagram {
            corpus,
            composer,
            weighted,
            normalization,
            out,
            svg,
        } => cmd_diagram(
            &corpus,
            composer.as_deref(),
            weighted,
            normalization,
            out.as_deref(),
            svg.as_deref(),
        ),
        Command::Career {
            corpus,
            composer,
            normalization,
            out,
            svg,
        } => cmd_career(
            &corpus,
            &composer,
            normalization.into(),
            out.as_deref(),
            svg.as_deref(),
        ),
        Command::Cluster {
            corpus,
            linkage,
            cut,
            normalization,
            out,
        } => cmd_cluster(&corpus, linkage.into(), cut, normalization.into(), out.as_deref()),
        Command::Gof {
            corpus,
            composer,
            candidate,
            reps,
            seed,
            out,
        } => cmd_gof(
            &corpus,
            composer.as_deref(),
            candidate.into(),
            reps,
            seed,
            out.as_deref(),
        ),
        Command::Render { corpus, svg } => cmd_render(&corpus, &svg),
    }
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let fail = |reason: String| CliError::Write {
        path: path.display().to_string(),
        reason,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(e.to_string()))?;
    tmp.write_all(bytes).map_err(|e| fail(e.to_string()))?;
    tmp.persist(path).map_err(|e| fail(e.to_string()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn wants_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// CSV to stdout, or CSV/JSON (by extension) to `--out`.
fn emit_table(out: Option<&Path>, csv: &str, json: &str) -> Result<(), CliError> {
    match out {
        None => {
            print!("{csv}");
            Ok(())
        }
        Some(path) if wants_json(path) => write_atomic(path, json.as_bytes()),
        Some(path) => write_atomic(path, csv.as_bytes()),
    }
}

fn emit_json(out: Option<&Path>, json: &str) -> Result<(), CliError> {
    match out {
        None => {
            print!("{json}");
            Ok(())
        }
        Some(path) => write_atomic(path, json.as_bytes()),
    }
}

fn emit_svg(svg: Option<&Path>, data: &PlotData, spec: &PlotSpec) -> Result<(), CliError> {
    let Some(path) = svg else { return Ok(()) };
    let document = render(data, spec)?;
    write_atomic(path, document.as_bytes())
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

fn json_doc<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("doc serializes");
    out.push('\n');
    out
}

/// Composers to analyze: the filtered one (must exist), or everyone with at
/// least one work, alphabetically.
fn target_composers(corpus: &Corpus, filter: Option<&str>) -> Result<Vec<String>, CliError> {
    match filter {
        Some(id) => {
            if corpus.composer(id).is_none() {
                return Err(CorpusError::UnknownComposer(id.to_string()).into());
            }
            Ok(vec![id.to_string()])
        }
        None => Ok(corpus
            .composers()
            .iter()
            .filter(|c| corpus.works_of(&c.id).next().is_some())
            .map(|c| c.id.clone())
            .collect()),
    }
}

/// 1-based chart indices: an explicit composer index wins, otherwise the
/// rank within the plotted set. A table re-plotted by `render` carries no
/// explicit indices, so rank assignment keeps the two paths identical.
fn label_indices(corpus: &Corpus, ids: &[String]) -> Vec<u32> {
    let sorted: Vec<&String> = {
        let mut v: Vec<&String> = ids.iter().collect();
        v.sort();
        v
    };
    ids.iter()
        .map(|id| {
            corpus
                .composer(id)
                .and_then(|c| c.index)
                .unwrap_or_else(|| {
                    sorted.iter().position(|s| *s == id).expect("id present") as u32 + 1
                })
        })
        .collect()
}

fn filtered_corpus(corpus: &Corpus, filter: Option<&str>) -> Result<Corpus, CliError> {
    match filter {
        None => Ok(corpus.clone()),
        Some(id) => {
            if corpus.composer(id).is_none() {
                return Err(CorpusError::UnknownComposer(id.to_string()).into());
            }
            Ok(Corpus::from_works(
                corpus.works_of(id).cloned().collect(),
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_validate(args: &CorpusArgs, out: Option<&Path>) -> Result<(), CliError> {
    let outcome = args.load()?;
    let corpus = &outcome.corpus;
    let (majors, minors) = corpus.mode_counts();
    println!("works: {}", corpus.len());
    println!("composers: {}", corpus.composers().len());
    println!("major: {majors}");
    println!("minor: {minors}");
    println!("ingest diagnostics: {}", outcome.diagnostics.len());
    for d in &outcome.diagnostics {
        println!("  {d}");
    }
    let diagnostics = corpus::validate(corpus);
    println!("validation diagnostics: {}", diagnostics.len());
    for d in &diagnostics {
        println!("  {d}");
    }
    if let Some(path) = out {
        write_atomic(path, corpus::to_cache_json(corpus).as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DegreeRow {
    composer: String,
    catalog_id: String,
    key: String,
    degree: i8,
}

fn cmd_degrees(
    args: &CorpusArgs,
    composer: Option<&str>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let corpus = args.load_reporting()?;
    let corpus = filtered_corpus(&corpus, composer)?;
    let rows: Vec<DegreeRow> = corpus
        .works()
        .iter()
        .map(|w| DegreeRow {
            composer: w.composer_id.clone(),
            catalog_id: w.catalog_id.clone(),
            key: w.key.canonical(),
            degree: w.key.degree().0,
        })
        .collect();
    let csv = csv_table(
        &["composer", "catalog_id", "key", "degree"],
        &rows
            .iter()
            .map(|r| {
                vec![
                    r.composer.clone(),
                    r.catalog_id.clone(),
                    r.key.clone(),
                    r.degree.to_string(),
                ]
            })
            .collect::<Vec<_>>(),
    );
    emit_table(out, &csv, &json_doc(&rows))
}

pub(crate) const HISTOGRAM_HEADER: [&str; 5] =
    ["degree", "major_count", "minor_count", "combined", "p"];

#[derive(Serialize)]
struct HistogramRow {
    degree: i8,
    major_count: u64,
    minor_count: u64,
    combined: u64,
    p: f64,
}

fn histogram_rows(corpus: &Corpus) -> Result<Vec<HistogramRow>, CliError> {
    let h = stats::histogram(corpus);
    let p = stats::distribution(&h, Scale::Probability)?;
    Ok(h.degrees()
        .into_iter()
        .map(|d| HistogramRow {
            degree: d,
            major_count: h.count(d, crate::keycalc::Mode::Major),
            minor_count: h.count(d, crate::keycalc::Mode::Minor),
            combined: h.combined(d),
            p: round_sig6(p.get(d).unwrap_or(0.0)),
        })
        .collect())
}

fn histogram_plot(rows: &[HistogramRow]) -> PlotData {
    PlotData::HistogramPair(
        rows.iter()
            .map(|r| HistBin {
                degree: r.degree,
                major: r.major_count,
                minor: r.minor_count,
                combined: r.combined,
            })
            .collect(),
    )
}

fn cmd_histogram(
    args: &CorpusArgs,
    composer: Option<&str>,
    out: Option<&Path>,
    svg: Option<&Path>,
) -> Result<(), CliError> {
    let corpus = args.load_reporting()?;
    let corpus = filtered_corpus(&corpus, composer)?;
    let rows = histogram_rows(&corpus)?;
    let csv = csv_table(
        &HISTOGRAM_HEADER,
        &rows
            .iter()
            .map(|r| {
                vec![
                    r.degree.to_string(),
                    r.major_count.to_string(),
                    r.minor_count.to_string(),
                    r.combined.to_string(),
                    format_sig6(r.p),
                ]
            })
            .collect::<Vec<_>>(),
    );
    emit_table(out, &csv, &json_doc(&rows))?;
    emit_svg(svg, &histogram_plot(&rows), &PlotSpec::new(PlotKind::HistogramPair))
}

pub(crate) const FRACTIONS_HEADER: [&str; 4] = [
    "composer",
    "major_fraction",
    "minor_fraction",
    "preference_ratio",
];

#[derive(Serialize)]
struct FractionRow {
    composer: String,
    major_fraction: f64,
    minor_fraction: f64,
    /// Positive infinity (all-major) serializes as null in JSON and as
    /// `inf` in CSV.
    preference_ratio: f64,
}

fn cmd_fractions(
    args: &CorpusArgs,
    composer: Option<&str>,
    out: Option<&Path>,
    svg: Option<&Path>,
) -> Result<(), CliError> {
    let corpus = args.load_reporting()?;
    let ids = target_composers(&corpus, composer)?;
    let mut rows = Vec::new();
    for id in &ids {
        let f = diagram::mode_fractions(&corpus, id)?;
        rows.push(FractionRow {
            composer: id.clone(),
            major_fraction: round_sig6(f.major_fraction),
            minor_fraction: round_sig6(f.minor_fraction),
            preference_ratio: round_sig6(diagram::preference_ratio(&f)),
        });
    }
    let csv = csv_table(
        &FRACTIONS_HEADER,
        &rows
            .iter()
            .map(|r| {
                vec![
                    r.composer.clone(),
                    format_sig6(r.major_fraction),
                    format_sig6(r.minor_fraction),
                    format_sig6(r.preference_ratio),
                ]
            })
            .collect::<Vec<_>>(),
    );
    emit_table(out, &csv, &json_doc(&rows))?;
    let indices = label_indices(&corpus, &ids);
    let points: Vec<PlotPoint> = rows
        .iter()
        .zip(indices)
        .map(|(r, index)| PlotPoint {
            name: r.composer.clone(),
            index,
            x: r.major_fraction,
            y: r.minor_fraction,
        })
        .collect();
    emit_svg(
        svg,
        &PlotData::FractionScatter(points),
        &PlotSpec::new(PlotKind::FractionScatter),
    )
}

pub(crate) const DIAGRAM_HEADER: [&str; 5] = ["composer", "x", "y", "weighting", "normalization"];

#[derive(Serialize)]
struct PointRow {
    composer: String,
    x: f64,
    y: f64,
    weighting: String,
    normalization: String,
}

fn cmd_diagram(
    args: &CorpusArgs,
    composer: Option<&str>,
    weighted: bool,
    normalization: NormalizationArg,
    out: Option<&Path>,
    svg: Option<&Path>,
) -> Result<(), CliError> {
    if weighted && matches!(normalization, NormalizationArg::Permode) {
        return Err(CliError::Usage(
            "weighted points are always total-count normalized; drop --normalization permode"
                .to_string(),
        ));
    }
    let corpus = args.load_reporting()?;
    let ids = target_composers(&corpus, composer)?;
    let weights = if weighted {
        // Pooled corpus distribution on the percentage scale.
        let h = stats::histogram(&corpus);
        let dist = stats::distribution(&h, Scale::Percentage)?;
        Some(WeightTable::from_degree_weights(dist.iter()))
    } else {
        None
    };
    let normalization: Normalization = normalization.into();
    let mut rows = Vec::new();
    for id in &ids {
        let point = match &weights {
            Some(w) => diagram::weighted_point(&corpus, id, w)?,
            None => diagram::aggregate_point(&corpus, id, normalization)?,
        };
        rows.push(PointRow {
            composer: id.clone(),
            x: round_sig6(point.x),
            y: round_sig6(point.y),
            weighting: point.weighting.to_string(),
            normalization: point.normalization.to_string(),
        });
    }
    let csv = csv_table(
        &DIAGRAM_HEADER,
        &rows
            .iter()
            .map(|r| {
                vec![
                    r.composer.clone(),
                    format_sig6(r.x),
                    format_sig6(r.y),
                    r.weighting.clone(),
                    r.normalization.clone(),
                ]
            })
            .collect::<Vec<_>>(),
    );
    emit_table(out, &csv, &json_doc(&rows))?;
    let indices = label_indices(&corpus, &ids);
    let points: Vec<PlotPoint> = rows
        .iter()
        .zip(indices)
        .map(|(r, index)| PlotPoint {
            name: r.composer.clone(),
            index,
            x: r.x,
            y: r.y,
        })
        .collect();
    emit_svg(
        svg,
        &PlotData::DiagramScatter(points),
        &PlotSpec::new(PlotKind::DiagramScatter),
    )
}

pub(crate) const CAREER_HEADER: [&str; 5] = ["composer", "year", "x", "y", "cumulative_count"];

#[derive(Serialize)]
struct TrajectoryRow {
    year: i32,
    x: f64,
    y: f64,
    cumulative_count: usize,
}

#[derive(Serialize)]
struct TrajectoryDoc {
    composer: String,
    normalization: String,
    undated_excluded: usize,
    samples: Vec<TrajectoryRow>,
}

fn cmd_career(
    args: &CorpusArgs,
    composer: &str,
    normalization: Normalization,
    out: Option<&Path>,
    svg: Option<&Path>,
) -> Result<(), CliError> {
    let corpus = args.load_reporting()?;
    let t = career::trajectory(&corpus, composer, normalization)?;
    let doc = TrajectoryDoc {
        composer: t.composer_id.clone(),
        normalization: normalization.to_string(),
        undated_excluded: t.undated_excluded,
        samples: t
            .samples
            .iter()
            .map(|s| TrajectoryRow {
                year: s.year,
                x: round_sig6(s.point.0),
                y: round_sig6(s.point.1),
                cumulative_count: s.cumulative_work_count,
            })
            .collect(),
    };
    let csv = csv_table(
        &CAREER_HEADER,
        &doc.samples
            .iter()
            .map(|s| {
                vec![
                    doc.composer.clone(),
                    s.year.to_string(),
                    format_sig6(s.x),
                    format_sig6(s.y),
                    s.cumulative_count.to_string(),
                ]
            })
            .collect::<Vec<_>>(),
    );
    emit_table(out, &csv, &json_doc(&doc))?;
    let points: Vec<TrajPoint> = doc
        .samples
        .iter()
        .map(|s| TrajPoint {
            year: s.year,
            x: s.x,
            y: s.y,
        })
        .collect();
    emit_svg(
        svg,
        &PlotData::TrajectoryPath {
            composer: doc.composer.clone(),
            points,
        },
        &PlotSpec::new(PlotKind::TrajectoryPath),
    )
}

fn cmd_cluster(
    args: &CorpusArgs,
    linkage: Linkage,
    cut: CutCriterion,
    normalization: Normalization,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let corpus = args.load_reporting()?;
    let ids = target_composers(&corpus, None)?;
    let points: Vec<diagram::DiagramPoint> = ids
        .iter()
        .map(|id| diagram::aggregate_point(&corpus, id, normalization))
        .collect::<Result<_, _>>()?;
    let mut result = stats::cluster(&points, linkage, cut, PointMetric::Planar)?;
    result.centroid = (round_sig6(result.centroid.0), round_sig6(result.centroid.1));
    emit_json(out, &json_doc(&result))
}

fn rounded_gof(r: &GofResult) -> GofResult {
    let mut rounded = r.clone();
    rounded.statistic = round_sig6(r.statistic);
    rounded.p_value = round_sig6(r.p_value);
    rounded.params = match r.params {
        FitParams::Normal { mean, sd } => FitParams::Normal {
            mean: round_sig6(mean),
            sd: round_sig6(sd),
        },
        FitParams::Cauchy { location, scale } => FitParams::Cauchy {
            location: round_sig6(location),
            scale: round_sig6(scale),
        },
        FitParams::Poisson { lambda, shift } => FitParams::Poisson {
            lambda: round_sig6(lambda),
            shift,
        },
    };
    rounded
}

fn cmd_gof(
    args: &CorpusArgs,
    composer: Option<&str>,
    candidate: Candidate,
    reps: u32,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let corpus = args.load_reporting()?;
    let corpus = filtered_corpus(&corpus, composer)?;
    let samples: Vec<f64> = corpus
        .works()
        .iter()
        .map(|w| w.key.degree().0 as f64)
        .collect();
    let result = stats::cvm_test(&samples, candidate, reps, seed)?;
    emit_json(out, &json_doc(&rounded_gof(&result)))
}

// ---------------------------------------------------------------------------
// render: re-plot an exported table
// ---------------------------------------------------------------------------

fn cmd_render(table: &Path, svg: &Path) -> Result<(), CliError> {
    let bytes = std::fs::read(table).map_err(|e| {
        CliError::Corpus(CorpusError::FileUnreadable {
            path: table.display().to_string(),
            reason: e.to_string(),
        })
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes.as_slice());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Usage(format!("{}: {e}", table.display())))?
        .iter()
        .map(|h| h.to_string())
        .collect();
    let records = read_records(&mut reader, table)?;
    let path = table.display().to_string();

    let (data, spec) = if headers == DIAGRAM_HEADER {
        let points = scatter_points(&records, &path, 1, 2)?;
        (
            PlotData::DiagramScatter(points),
            PlotSpec::new(PlotKind::DiagramScatter),
        )
    } else if headers == FRACTIONS_HEADER {
        let points = scatter_points(&records, &path, 1, 2)?;
        (
            PlotData::FractionScatter(points),
            PlotSpec::new(PlotKind::FractionScatter),
        )
    } else if headers == HISTOGRAM_HEADER {
        let mut bins = Vec::new();
        for (line, record) in &records {
            bins.push(HistBin {
                degree: parse_cell(&path, *line, record, 0)?,
                major: parse_cell(&path, *line, record, 1)?,
                minor: parse_cell(&path, *line, record, 2)?,
                combined: parse_cell(&path, *line, record, 3)?,
            });
        }
        (
            PlotData::HistogramPair(bins),
            PlotSpec::new(PlotKind::HistogramPair),
        )
    } else if headers == CAREER_HEADER {
        let composer = records
            .first()
            .map(|(_, r)| r[0].to_string())
            .unwrap_or_default();
        let mut points = Vec::new();
        for (line, record) in &records {
            points.push(TrajPoint {
                year: parse_cell(&path, *line, record, 1)?,
                x: parse_cell(&path, *line, record, 2)?,
                y: parse_cell(&path, *line, record, 3)?,
            });
        }
        (
            PlotData::TrajectoryPath { composer, points },
            PlotSpec::new(PlotKind::TrajectoryPath),
        )
    } else {
        return Err(CliError::Usage(format!(
            "{path}: unrecognized table header `{}`; expected one of the diagram, fractions, \
             histogram, or career layouts",
            headers.join(",")
        )));
    };

    emit_svg(Some(svg), &data, &spec)
}

type NumberedRecord = (u64, csv::StringRecord);

fn read_records(
    reader: &mut csv::Reader<&[u8]>,
    table: &Path,
) -> Result<Vec<NumberedRecord>, CliError> {
    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Table {
            path: table.display().to_string(),
            line: e.position().map(|p| p.line()).unwrap_or_default(),
            reason: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or_default();
        records.push((line, record));
    }
    Ok(records)
}

fn parse_cell<T: std::str::FromStr>(
    path: &str,
    line: u64,
    record: &csv::StringRecord,
    index: usize,
) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    let cell = record.get(index).ok_or_else(|| CliError::Table {
        path: path.to_string(),
        line,
        reason: format!("missing field {index}"),
    })?;
    cell.trim().parse().map_err(|e| CliError::Table {
        path: path.to_string(),
        line,
        reason: format!("bad value {cell:?}: {e}"),
    })
}

/// Labeled points from (name, x, y) columns; indices are ranks within the
/// file's composer set.
fn scatter_points(
    records: &[NumberedRecord],
    path: &str,
    x_col: usize,
    y_col: usize,
) -> Result<Vec<PlotPoint>, CliError> {
    let names: BTreeSet<&str> = records.iter().map(|(_, r)| r.get(0).unwrap_or("")).collect();
    let rank = |name: &str| names.iter().position(|n| *n == name).unwrap_or(0) as u32 + 1;
    let mut points = Vec::new();
    for (line, record) in records {
        let name = record.get(0).unwrap_or("").to_string();
        points.push(PlotPoint {
            index: rank(&name),
            x: parse_cell(path, *line, record, x_col)?,
            y: parse_cell(path, *line, record, y_col)?,
            name,
        });
    }
    Ok(points)
}
