//! Key-signature stylometry for classical-music corpora.
//!
//! The crate ingests catalogs of works (composer, catalog id, year, key),
//! derives the signed accidental count ("degree") of every key, and places
//! composers and careers on a two-dimensional chromatic diagram whose axes
//! are the averaged major and minor degrees. On top of that sit histogram
//! and distribution exports, Cramér–von Mises goodness-of-fit testing with
//! a parametric bootstrap, agglomerative clustering of composer points, and
//! deterministic SVG chart emission.
//!
//! All analyses are pure functions over an immutable [`corpus::Corpus`];
//! identical inputs produce byte-identical CSV/JSON/SVG outputs.

pub mod career;
pub mod cli;
pub mod corpus;
pub mod diagram;
pub mod keycalc;
pub mod render;
pub mod stats;

pub use career::{Trajectory, TrajectorySample};
pub use corpus::{Composer, Corpus, Work};
pub use diagram::{DiagramPoint, ModeFraction, Normalization, TorusMetricConfig, Weighting};
pub use keycalc::{Degree, Key, KeyConfig, Letter, Mode};
pub use stats::{DegreeDistribution, DegreeHistogram, GofResult, Scale};
