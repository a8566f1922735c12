use rayon::prelude::*;

use super::{mean_point, BaselineKind, BaselineParams, BaselineResult};
use crate::distance::pair_distance;
use crate::error::{Error, Result};
use crate::model::GeoPoint;

pub const DEFAULT_MIN_PTS: usize = 3;

/// Density-based clustering over haversine distances.
///
/// A point is core when at least `min_pts` points (itself included) lie
/// within `eps_km`. Clusters are the connected components of core points;
/// a border point joins the cluster of its nearest core neighbour, with
/// exact ties going to the core with the smaller `(lat, lon)`. Labels are
/// numbered by each cluster's lowest member index.
pub fn dbscan(
    points: &[GeoPoint],
    eps_km: f64,
    min_pts: usize,
    earth_radius_km: f64,
) -> Result<BaselineResult> {
    if !(eps_km.is_finite() && eps_km > 0.0) {
        return Err(Error::InvalidConfig(format!("eps_km must be positive, got {eps_km}")));
    }
    if min_pts == 0 {
        return Err(Error::InvalidConfig("min_pts must be at least 1".into()));
    }
    let n = points.len();
    let neighbours: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .filter_map(|j| {
                    let d = pair_distance(points, i, j, earth_radius_km);
                    (d <= eps_km).then_some((j, d))
                })
                .collect()
        })
        .collect();
    let core: Vec<bool> = neighbours.iter().map(|nb| nb.len() >= min_pts).collect();

    // components of the core graph
    let mut component = vec![usize::MAX; n];
    let mut components = 0;
    for start in 0..n {
        if !core[start] || component[start] != usize::MAX {
            continue;
        }
        component[start] = components;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for &(j, _) in &neighbours[i] {
                if core[j] && component[j] == usize::MAX {
                    component[j] = components;
                    stack.push(j);
                }
            }
        }
        components += 1;
    }

    for i in 0..n {
        if core[i] {
            continue;
        }
        let nearest = neighbours[i]
            .iter()
            .filter(|(j, _)| core[*j])
            .min_by(|(a, da), (b, db)| {
                da.total_cmp(db)
                    .then(points[*a].lat.total_cmp(&points[*b].lat))
                    .then(points[*a].lon.total_cmp(&points[*b].lon))
            });
        if let Some(&(j, _)) = nearest {
            component[i] = component[j];
        }
    }

    // relabel by lowest member index
    let mut relabel = vec![usize::MAX; components];
    let mut next = 0;
    let assignments: Vec<Option<usize>> = component
        .iter()
        .map(|&c| {
            (c != usize::MAX).then(|| {
                if relabel[c] == usize::MAX {
                    relabel[c] = next;
                    next += 1;
                }
                relabel[c]
            })
        })
        .collect();

    let mut result = BaselineResult {
        strategy: BaselineKind::Dbscan,
        centroids: vec![],
        assignments,
        params: BaselineParams::Dbscan { eps_km, min_pts },
        seed: 0,
        points: points.to_vec(),
    };
    result.centroids = cluster_means(&result);
    Ok(result)
}

fn cluster_means(result: &BaselineResult) -> Vec<GeoPoint> {
    let clusters = result.cluster_sizes().len();
    (0..clusters)
        .filter_map(|label| {
            mean_point(
                result
                    .points
                    .iter()
                    .zip(&result.assignments)
                    .filter(|(_, a)| **a == Some(label))
                    .map(|(p, _)| *p),
            )
        })
        .collect()
}

/// One synthesized centroid per cluster (member mean), ordered by label.
pub fn dbscan_centroids(result: &BaselineResult) -> Result<Vec<GeoPoint>> {
    if result.strategy != BaselineKind::Dbscan {
        return Err(Error::WrongStrategy("dbscan"));
    }
    let centroids = cluster_means(result);
    if centroids.is_empty() {
        return Err(Error::NoClusters);
    }
    Ok(centroids)
}
