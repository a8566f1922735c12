//! Haversine distances and dense distance matrices, in kilometers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GeoPoint, Located};

/// Great-circle distance between `a` and `b` on a sphere of the given radius.
///
/// The argument of `asin` is clamped so antipodal points cannot produce NaN.
#[inline]
pub fn haversine(a: GeoPoint, b: GeoPoint, earth_radius_km: f64) -> f64 {
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();

    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * earth_radius_km * h.clamp(0.0, 1.0).sqrt().asin()
}

/// Distance between `points[i]` and `points[j]`, evaluated with the lower
/// index first. This is the exact value [`unipartite_matrix`] stores at both
/// `(i, j)` and `(j, i)`.
#[inline]
pub fn pair_distance(points: &[GeoPoint], i: usize, j: usize, earth_radius_km: f64) -> f64 {
    match i.cmp(&j) {
        std::cmp::Ordering::Equal => 0.0,
        std::cmp::Ordering::Less => haversine(points[i], points[j], earth_radius_km),
        std::cmp::Ordering::Greater => haversine(points[j], points[i], earth_radius_km),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Bipartite,
    Unipartite,
}

impl MatrixKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MatrixKind::Bipartite => "bipartite",
            MatrixKind::Unipartite => "unipartite",
        }
    }
}

/// Dense row-major distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    kind: MatrixKind,
}

impl DistanceMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn expect_kind(&self, expected: MatrixKind) -> Result<()> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(Error::KindMismatch {
                expected: expected.as_str(),
                found: self.kind.as_str(),
            })
        }
    }
}

/// `values[i][j] = haversine(observer_i, event_j)`.
pub fn bipartite_matrix<O: Located + Sync, E: Located + Sync>(
    observers: &[O],
    events: &[E],
    earth_radius_km: f64,
) -> Result<DistanceMatrix> {
    if observers.is_empty() {
        return Err(Error::EmptyInput("observers"));
    }
    if events.is_empty() {
        return Err(Error::EmptyInput("events"));
    }
    let cols = events.len();
    let event_points: Vec<GeoPoint> = events.iter().map(Located::location).collect();
    let mut values = vec![0.0; observers.len() * cols];
    values
        .par_chunks_mut(cols)
        .zip(observers.par_iter())
        .for_each(|(row, observer)| {
            let o = observer.location();
            for (slot, &e) in row.iter_mut().zip(&event_points) {
                *slot = haversine(o, e, earth_radius_km);
            }
        });
    Ok(DistanceMatrix {
        rows: observers.len(),
        cols,
        values,
        kind: MatrixKind::Bipartite,
    })
}

/// Square symmetric matrix over `nodes`. The upper triangle is computed and
/// mirrored, so the result is exactly symmetric with a zero diagonal.
pub fn unipartite_matrix<T: Located + Sync>(
    nodes: &[T],
    earth_radius_km: f64,
) -> Result<DistanceMatrix> {
    if nodes.is_empty() {
        return Err(Error::EmptyInput("events"));
    }
    let m = nodes.len();
    let points: Vec<GeoPoint> = nodes.iter().map(Located::location).collect();
    let mut values = vec![0.0; m * m];
    values.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
        for j in i + 1..m {
            row[j] = haversine(points[i], points[j], earth_radius_km);
        }
    });
    for i in 0..m {
        for j in 0..i {
            values[i * m + j] = values[j * m + i];
        }
    }
    Ok(DistanceMatrix {
        rows: m,
        cols: m,
        values,
        kind: MatrixKind::Unipartite,
    })
}
