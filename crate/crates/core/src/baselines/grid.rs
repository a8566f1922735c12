use std::cmp::Reverse;
use std::collections::HashMap;

use super::{BaselineKind, BaselineParams, BaselineResult};
use crate::error::{Error, Result};
use crate::model::GeoPoint;

/// Roughly 0.2 km of latitude.
pub const DEFAULT_BIN_SIZE_DEG: f64 = 0.002;

fn bin_of(p: GeoPoint, size: f64) -> (i64, i64) {
    ((p.lat / size).floor() as i64, (p.lon / size).floor() as i64)
}

fn center(bin: (i64, i64), size: f64) -> GeoPoint {
    GeoPoint {
        lat: ((bin.0 as f64 + 0.5) * size).clamp(-90.0, 90.0),
        lon: ((bin.1 as f64 + 0.5) * size).clamp(-180.0, 180.0),
    }
}

/// Histogram binning on a lat/lon grid anchored at (0, 0).
///
/// Bins are half-open `[low, high)` on both axes. The `n` fullest bins win,
/// ties by bin index ascending; each centroid is its bin center.
pub fn grid_binning(points: &[GeoPoint], bin_size_deg: f64, n: usize) -> Result<BaselineResult> {
    if !(bin_size_deg.is_finite() && bin_size_deg > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "bin_size_deg must be positive, got {bin_size_deg}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    let mut counts: HashMap<(i64, i64), usize> = HashMap::new();
    for &p in points {
        *counts.entry(bin_of(p, bin_size_deg)).or_default() += 1;
    }
    let mut ranked: Vec<((i64, i64), usize)> = counts.into_iter().collect();
    ranked.sort_by_key(|&(bin, c)| (Reverse(c), bin));
    ranked.truncate(n);

    let label: HashMap<(i64, i64), usize> = ranked.iter().enumerate().map(|(i, (b, _))| (*b, i)).collect();
    Ok(BaselineResult {
        strategy: BaselineKind::Grid,
        centroids: ranked.iter().map(|&(b, _)| center(b, bin_size_deg)).collect(),
        assignments: points
            .iter()
            .map(|p| label.get(&bin_of(*p, bin_size_deg)).copied())
            .collect(),
        params: BaselineParams::Grid { bin_size_deg, n },
        seed: 0,
        points: points.to_vec(),
    })
}
