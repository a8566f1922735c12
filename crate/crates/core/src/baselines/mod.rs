//! Comparison strategies: k-means, DBSCAN, statistical mode and grid binning.
//!
//! Each produces candidate observer locations from a point set so that it
//! can be run through the same insertion pipeline as proximal recurrence.

mod dbscan;
mod grid;
mod kmeans;
mod mode;

use serde::{Deserialize, Serialize};

use crate::distance::haversine;
use crate::model::GeoPoint;

pub use dbscan::{dbscan, dbscan_centroids, DEFAULT_MIN_PTS};
pub use grid::{grid_binning, DEFAULT_BIN_SIZE_DEG};
pub use kmeans::{kmeans, kmeans_traced, DEFAULT_MAX_ITERS};
pub use mode::{mode_clustering, MODE_DECIMALS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Kmeans,
    Dbscan,
    Mode,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "lowercase")]
pub enum BaselineParams {
    Kmeans { k: usize, max_iters: usize },
    Dbscan { eps_km: f64, min_pts: usize },
    Mode { n: usize },
    Grid { bin_size_deg: f64, n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub strategy: BaselineKind,
    pub centroids: Vec<GeoPoint>,
    /// Cluster label per input point. `None` is DBSCAN noise, or for mode
    /// and grid a point outside the top `n` groups.
    pub assignments: Vec<Option<usize>>,
    pub params: BaselineParams,
    pub seed: u64,
    #[serde(skip)]
    pub(crate) points: Vec<GeoPoint>,
}

impl BaselineResult {
    /// Number of points carrying each label, indexed by label.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![];
        for label in self.assignments.iter().flatten() {
            if *label >= sizes.len() {
                sizes.resize(label + 1, 0);
            }
            sizes[*label] += 1;
        }
        sizes
    }
}

/// Sum of distances from each assigned point to its centroid.
pub fn assignment_cost(result: &BaselineResult, earth_radius_km: f64) -> f64 {
    result
        .points
        .iter()
        .zip(&result.assignments)
        .filter_map(|(p, a)| a.map(|a| haversine(*p, result.centroids[a], earth_radius_km)))
        .sum()
}

pub(crate) fn mean_point(points: impl IntoIterator<Item = GeoPoint>) -> Option<GeoPoint> {
    let (mut lat, mut lon, mut n) = (0.0, 0.0, 0usize);
    for p in points {
        lat += p.lat;
        lon += p.lon;
        n += 1;
    }
    (n > 0).then(|| GeoPoint {
        lat: lat / n as f64,
        lon: lon / n as f64,
    })
}
