use std::cmp::Reverse;
use std::collections::HashMap;

use super::{BaselineKind, BaselineParams, BaselineResult};
use crate::error::{Error, Result};
use crate::model::GeoPoint;

/// Coordinates are grouped after rounding to this many decimals (~1 cm).
pub const MODE_DECIMALS: i32 = 7;

fn key(p: GeoPoint) -> (i64, i64) {
    let scale = 10f64.powi(MODE_DECIMALS);
    ((p.lat * scale).round() as i64, (p.lon * scale).round() as i64)
}

/// The `n` most frequent locations.
///
/// Ranked by multiplicity, then by rounded `(lat, lon)` ascending. Each
/// centroid is a real input coordinate: the smallest exact point in its group.
pub fn mode_clustering(points: &[GeoPoint], n: usize) -> Result<BaselineResult> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    let mut groups: HashMap<(i64, i64), (usize, GeoPoint)> = HashMap::new();
    for &p in points {
        groups
            .entry(key(p))
            .and_modify(|(count, rep)| {
                *count += 1;
                if (p.lat, p.lon) < (rep.lat, rep.lon) {
                    *rep = p;
                }
            })
            .or_insert((1, p));
    }
    let mut ranked: Vec<((i64, i64), usize, GeoPoint)> =
        groups.into_iter().map(|(k, (c, rep))| (k, c, rep)).collect();
    ranked.sort_by_key(|&(k, c, _)| (Reverse(c), k));
    ranked.truncate(n);

    let label: HashMap<(i64, i64), usize> = ranked.iter().enumerate().map(|(i, (k, _, _))| (*k, i)).collect();
    Ok(BaselineResult {
        strategy: BaselineKind::Mode,
        centroids: ranked.iter().map(|&(_, _, rep)| rep).collect(),
        assignments: points.iter().map(|p| label.get(&key(*p)).copied()).collect(),
        params: BaselineParams::Mode { n },
        seed: 0,
        points: points.to_vec(),
    })
}
