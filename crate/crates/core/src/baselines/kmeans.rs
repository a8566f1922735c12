use rand::Rng;
use rayon::prelude::*;

use super::{mean_point, BaselineKind, BaselineParams, BaselineResult};
use crate::distance::haversine;
use crate::error::{Error, Result};
use crate::model::GeoPoint;
use crate::rng::{stream, substream};

pub const DEFAULT_MAX_ITERS: usize = 300;

/// Lloyd's k-means with k-means++ seeding.
///
/// Points are assigned to the nearest centroid by haversine distance;
/// centroids are arithmetic means in degree space.
pub fn kmeans(
    points: &[GeoPoint],
    k: usize,
    max_iters: usize,
    seed: u64,
    earth_radius_km: f64,
) -> Result<BaselineResult> {
    kmeans_traced(points, k, max_iters, seed, earth_radius_km).map(|(r, _)| r)
}

/// As [`kmeans`], also returning the assignment cost after the seeding step
/// and after every Lloyd iteration.
pub fn kmeans_traced(
    points: &[GeoPoint],
    k: usize,
    max_iters: usize,
    seed: u64,
    earth_radius_km: f64,
) -> Result<(BaselineResult, Vec<f64>)> {
    if k == 0 || k > points.len() {
        return Err(Error::BadK {
            k,
            points: points.len(),
        });
    }
    if max_iters == 0 {
        return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
    }
    let mut centroids = plus_plus(points, k, seed, earth_radius_km);
    let (mut labels, mut dists) = assign(points, &centroids, earth_radius_km);
    let mut trace = vec![dists.iter().sum::<f64>()];

    for _ in 0..max_iters {
        centroids = update(points, &labels, &dists, k);
        let (next_labels, next_dists) = assign(points, &centroids, earth_radius_km);
        trace.push(next_dists.iter().sum());
        let stable = next_labels == labels;
        labels = next_labels;
        dists = next_dists;
        if stable {
            break;
        }
    }

    let result = BaselineResult {
        strategy: BaselineKind::Kmeans,
        centroids,
        assignments: labels.into_iter().map(Some).collect(),
        params: BaselineParams::Kmeans { k, max_iters },
        seed,
        points: points.to_vec(),
    };
    Ok((result, trace))
}

fn plus_plus(points: &[GeoPoint], k: usize, seed: u64, earth_radius_km: f64) -> Vec<GeoPoint> {
    let mut rng = substream(seed, stream::KMEANS);
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..points.len())]);
    let mut nearest: Vec<f64> = points
        .iter()
        .map(|p| haversine(*p, centroids[0], earth_radius_km).powi(2))
        .collect();

    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen_range(0.0..total);
            let mut chosen = nearest.len() - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if w > 0.0 && target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            // guard against rounding landing on a zero-weight tail
            while nearest[chosen] == 0.0 {
                chosen -= 1;
            }
            chosen
        } else {
            rng.gen_range(0..points.len())
        };
        let c = points[pick];
        centroids.push(c);
        for (slot, p) in nearest.iter_mut().zip(points) {
            *slot = slot.min(haversine(*p, c, earth_radius_km).powi(2));
        }
    }
    centroids
}

/// Nearest centroid per point, ties to the lowest centroid index.
fn assign(points: &[GeoPoint], centroids: &[GeoPoint], earth_radius_km: f64) -> (Vec<usize>, Vec<f64>) {
    points
        .par_iter()
        .map(|p| {
            let mut best = (0, f64::INFINITY);
            for (c, centroid) in centroids.iter().enumerate() {
                let d = haversine(*p, *centroid, earth_radius_km);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .unzip()
}

fn update(points: &[GeoPoint], labels: &[usize], dists: &[f64], k: usize) -> Vec<GeoPoint> {
    let mut members: Vec<Vec<GeoPoint>> = vec![Vec::new(); k];
    for (p, &l) in points.iter().zip(labels) {
        members[l].push(*p);
    }
    // Empty clusters take the point farthest from its own centroid; each
    // point is used for at most one reseed.
    let mut spare: Vec<f64> = dists.to_vec();
    members
        .into_iter()
        .map(|m| {
            mean_point(m).unwrap_or_else(|| {
                let (far, _) = spare
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
                spare[far] = f64::NEG_INFINITY;
                points[far]
            })
        })
        .collect()
}
