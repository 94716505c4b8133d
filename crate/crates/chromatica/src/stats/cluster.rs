//! Agglomerative hierarchical clustering of composer points.
//!
//! The point sets here are tiny (tens of composers), so the implementation
//! favors a transparent O(n³) merge loop over sophistication. Determinism is
//! part of the contract: ties in merge distance are broken by the
//! lexicographically smallest pair of cluster representatives (a cluster is
//! represented by its smallest composer id), and final labels are assigned
//! by representative order, so permuting the input leaves the assignment map
//! unchanged.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{centroid, StatsError};
use crate::diagram::{planar_distance_xy, torus_distance_xy, DiagramPoint, TorusMetricConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    #[default]
    Complete,
    Average,
}

/// Where to stop merging: at a target cluster count, or once the next merge
/// distance would exceed a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CutCriterion {
    #[serde(rename = "k")]
    ClusterCount(usize),
    #[serde(rename = "h")]
    DistanceThreshold(f64),
}

/// Distance between points: plain Euclidean, or Euclidean on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointMetric {
    #[default]
    Planar,
    Torus(TorusMetricConfig),
}

impl PointMetric {
    fn distance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        match self {
            PointMetric::Planar => planar_distance_xy(a, b),
            PointMetric::Torus(cfg) => torus_distance_xy(a, b, cfg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterResult {
    /// Composer id -> cluster label; labels are 0-based, ordered by each
    /// cluster's smallest composer id.
    pub assignments: BTreeMap<String, usize>,
    pub linkage: Linkage,
    pub cut: CutCriterion,
    pub metric: PointMetric,
    /// Centroid of all input points, by plain coordinate averaging.
    pub centroid: (f64, f64),
}

impl ClusterResult {
    /// Members per cluster, labels ascending.
    pub fn clusters(&self) -> Vec<Vec<&str>> {
        let n_labels = self.assignments.values().max().map_or(0, |m| m + 1);
        let mut out = vec![Vec::new(); n_labels];
        for (id, &label) in &self.assignments {
            out[label].push(id.as_str());
        }
        out
    }
}

struct ClusterState {
    /// Indices into the input point slice.
    members: Vec<usize>,
    /// Smallest composer id among members; the tie-break key.
    representative: String,
}

fn linkage_distance(
    linkage: Linkage,
    a: &ClusterState,
    b: &ClusterState,
    dist: &[Vec<f64>],
) -> f64 {
    let mut acc = match linkage {
        Linkage::Single => f64::INFINITY,
        Linkage::Complete => f64::NEG_INFINITY,
        Linkage::Average => 0.0,
    };
    for &i in &a.members {
        for &j in &b.members {
            let d = dist[i][j];
            acc = match linkage {
                Linkage::Single => acc.min(d),
                Linkage::Complete => acc.max(d),
                Linkage::Average => acc + d,
            };
        }
    }
    match linkage {
        Linkage::Average => acc / (a.members.len() * b.members.len()) as f64,
        _ => acc,
    }
}

/// Cluster the points under the given linkage, metric, and cut.
///
/// Errors: fewer than two points, duplicate composer ids, a cluster-count
/// cut outside 1..=n, or a non-finite/negative distance threshold.
pub fn cluster(
    points: &[DiagramPoint],
    linkage: Linkage,
    cut: CutCriterion,
    metric: PointMetric,
) -> Result<ClusterResult, StatsError> {
    let n = points.len();
    if n < 2 {
        return Err(StatsError::TooFewPoints(n));
    }
    for (i, p) in points.iter().enumerate() {
        if points[..i].iter().any(|q| q.composer_id == p.composer_id) {
            return Err(StatsError::DuplicateComposer(p.composer_id.clone()));
        }
    }
    match cut {
        CutCriterion::ClusterCount(k) if k < 1 || k > n => {
            return Err(StatsError::InvalidCut(format!(
                "cluster count {k} outside 1..={n}"
            )));
        }
        CutCriterion::DistanceThreshold(h) if h.is_nan() || h < 0.0 => {
            return Err(StatsError::InvalidCut(format!(
                "distance threshold {h} must be a non-negative number"
            )));
        }
        _ => {}
    }

    let dist: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| metric.distance(points[i].coords(), points[j].coords()))
                .collect()
        })
        .collect();

    let mut clusters: Vec<ClusterState> = (0..n)
        .map(|i| ClusterState {
            members: vec![i],
            representative: points[i].composer_id.clone(),
        })
        .collect();

    loop {
        if let CutCriterion::ClusterCount(k) = cut {
            if clusters.len() == k {
                break;
            }
        }
        if clusters.len() == 1 {
            break;
        }

        // Best merge: smallest linkage distance, ties by smallest
        // (representative, representative) pair.
        let mut best: Option<(f64, (&str, &str), usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let d = linkage_distance(linkage, &clusters[i], &clusters[j], &dist);
                let (ra, rb) = (
                    clusters[i].representative.as_str(),
                    clusters[j].representative.as_str(),
                );
                let pair = if ra <= rb { (ra, rb) } else { (rb, ra) };
                let better = match &best {
                    None => true,
                    Some((bd, bp, _, _)) => d < *bd || (d == *bd && pair < *bp),
                };
                if better {
                    best = Some((d, pair, i, j));
                }
            }
        }
        let (d, _, i, j) = best.expect("at least two clusters remain");
        if let CutCriterion::DistanceThreshold(h) = cut {
            if d > h {
                break;
            }
        }

        let absorbed = clusters.swap_remove(j);
        let target = &mut clusters[i];
        target.members.extend(absorbed.members);
        if absorbed.representative < target.representative {
            target.representative = absorbed.representative;
        }
    }

    clusters.sort_by(|a, b| a.representative.cmp(&b.representative));
    let mut assignments = BTreeMap::new();
    for (label, state) in clusters.iter().enumerate() {
        for &i in &state.members {
            assignments.insert(points[i].composer_id.clone(), label);
        }
    }

    Ok(ClusterResult {
        assignments,
        linkage,
        cut,
        metric,
        centroid: centroid(points)?,
    })
}
