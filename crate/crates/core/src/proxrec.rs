//! Proximal-recurrence clustering.
//!
//! Every unobserved event anchors one candidate cluster made of the events
//! within `r` of it. Candidates are ranked densest first and accepted
//! greedily, skipping any candidate whose anchor lies within `r` of an
//! already accepted anchor. Anchors are always real event locations.

use std::cmp::Reverse;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{pair_distance, DistanceMatrix, MatrixKind};
use crate::error::{Error, Result};
use crate::model::{EventNode, GeoPoint, Located, NetworkConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchoredCluster {
    /// Index of the anchor within the clustered sequence.
    pub anchor_index: usize,
    pub anchor_location: GeoPoint,
    /// Ascending; always contains `anchor_index`.
    pub member_indices: Vec<usize>,
    pub density: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSelection {
    pub clusters: Vec<AnchoredCluster>,
    pub radius_km: f64,
    pub requested_n: usize,
}

impl ClusterSelection {
    pub fn anchors(&self) -> impl Iterator<Item = GeoPoint> + '_ {
        self.clusters.iter().map(|c| c.anchor_location)
    }
}

/// `N(i) = { j : DM[i][j] <= r }`, each ascending.
pub fn neighborhoods(dm: &DistanceMatrix, radius_km: f64) -> Result<Vec<Vec<usize>>> {
    dm.expect_kind(MatrixKind::Unipartite)?;
    Ok((0..dm.rows())
        .into_par_iter()
        .map(|i| {
            dm.row(i)
                .iter()
                .enumerate()
                .filter(|(_, &d)| d <= radius_km)
                .map(|(j, _)| j)
                .collect()
        })
        .collect())
}

/// Same result as `neighborhoods(&unipartite_matrix(points))` without
/// holding the `m x m` matrix in memory.
pub fn neighborhoods_streamed(
    points: &[GeoPoint],
    radius_km: f64,
    earth_radius_km: f64,
) -> Vec<Vec<usize>> {
    (0..points.len())
        .into_par_iter()
        .map(|i| {
            (0..points.len())
                .filter(|&j| pair_distance(points, i, j, earth_radius_km) <= radius_km)
                .collect()
        })
        .collect()
}

fn clusters_from_neighborhoods(
    points: &[GeoPoint],
    neighborhoods: Vec<Vec<usize>>,
) -> Vec<AnchoredCluster> {
    neighborhoods
        .into_iter()
        .enumerate()
        .map(|(i, members)| AnchoredCluster {
            anchor_index: i,
            anchor_location: points[i],
            density: members.len(),
            member_indices: members,
        })
        .collect()
}

/// One candidate per event, anchored at that event.
pub fn build_clusters(
    unobserved: &[EventNode],
    dm: &DistanceMatrix,
    radius_km: f64,
) -> Result<Vec<AnchoredCluster>> {
    dm.expect_kind(MatrixKind::Unipartite)?;
    if dm.rows() != unobserved.len() {
        return Err(Error::DimensionMismatch {
            expected: unobserved.len(),
            found: dm.rows(),
        });
    }
    let points: Vec<GeoPoint> = unobserved.iter().map(Located::location).collect();
    Ok(clusters_from_neighborhoods(&points, neighborhoods(dm, radius_km)?))
}

/// Greedy maximal-dense selection of at most `n` candidates.
///
/// Candidates are visited by density descending, then anchor index
/// ascending. A candidate is accepted iff its anchor is farther than
/// `radius_km` from every accepted anchor.
pub fn select_maximal_dense(
    candidates: &[AnchoredCluster],
    n: usize,
    radius_km: f64,
    earth_radius_km: f64,
) -> Result<ClusterSelection> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let mut order: Vec<&AnchoredCluster> = candidates.iter().collect();
    order.sort_by_key(|c| (Reverse(c.density), c.anchor_index));

    let mut accepted: Vec<AnchoredCluster> = Vec::with_capacity(n.min(candidates.len()));
    for candidate in order {
        if accepted.len() == n {
            break;
        }
        let clear = accepted
            .iter()
            .all(|a| anchor_distance(a, candidate, earth_radius_km) > radius_km);
        if clear {
            accepted.push(candidate.clone());
        }
    }
    Ok(ClusterSelection {
        clusters: accepted,
        radius_km,
        requested_n: n,
    })
}

// Lower anchor index first, matching the unipartite matrix entry.
fn anchor_distance(a: &AnchoredCluster, b: &AnchoredCluster, earth_radius_km: f64) -> f64 {
    let (lo, hi) = if a.anchor_index <= b.anchor_index { (a, b) } else { (b, a) };
    pair_distance(&[lo.anchor_location, hi.anchor_location], 0, 1, earth_radius_km)
}

/// Top `config.insert_count` maximal-dense clusters among `unobserved`.
pub fn proximal_recurrence(
    unobserved: &[EventNode],
    config: &NetworkConfig,
) -> Result<ClusterSelection> {
    proximal_recurrence_n(unobserved, config, config.insert_count)
}

pub(crate) fn proximal_recurrence_n(
    unobserved: &[EventNode],
    config: &NetworkConfig,
    n: usize,
) -> Result<ClusterSelection> {
    if unobserved.is_empty() {
        return Err(Error::EmptyInput("unobserved events"));
    }
    let points: Vec<GeoPoint> = unobserved.iter().map(Located::location).collect();
    let hoods = neighborhoods_streamed(&points, config.radius_km, config.earth_radius_km);
    let candidates = clusters_from_neighborhoods(&points, hoods);
    select_maximal_dense(&candidates, n, config.radius_km, config.earth_radius_km)
}
