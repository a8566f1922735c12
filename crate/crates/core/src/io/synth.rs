//! Seeded synthetic observers and events with planted clusters.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ingest::BoundingBox;
use crate::distance::haversine;
use crate::error::{Error, Result};
use crate::model::{EventNode, GeoPoint, Membership, ObserverNode, MEAN_EARTH_RADIUS_KM};
use crate::rng::{stream, substream};

const KM_PER_DEG_LAT: f64 = 111.19;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedCluster {
    pub center: GeoPoint,
    pub count: usize,
    pub spread_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_observers: usize,
    pub n_background_events: usize,
    pub planted_clusters: Vec<PlantedCluster>,
    pub bounding_box: BoundingBox,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub observers: Vec<ObserverNode>,
    /// Background events first, then each planted cluster in order.
    pub events: Vec<EventNode>,
    /// Planted cluster centers.
    pub ground_truth: Vec<GeoPoint>,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let b = &self.bounding_box;
        let zero_area = b.lat_min == b.lat_max || b.lon_min == b.lon_max;
        if zero_area && (self.n_observers > 0 || self.n_background_events > 0) {
            return Err(Error::ImpossibleSpec(
                "zero-area bounding box with uniform draws".into(),
            ));
        }
        for (i, c) in self.planted_clusters.iter().enumerate() {
            if !(c.spread_km.is_finite() && c.spread_km >= 0.0) {
                return Err(Error::ImpossibleSpec(format!("cluster {i}: bad spread {}", c.spread_km)));
            }
            if !b.contains(c.center) {
                return Err(Error::ImpossibleSpec(format!("cluster {i}: center outside bounding box")));
            }
            if c.count > 0 && c.spread_km > 0.0 && c.center.lat.abs() + c.spread_km / KM_PER_DEG_LAT >= 89.0 {
                return Err(Error::ImpossibleSpec(format!("cluster {i}: too close to a pole")));
            }
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, b: &BoundingBox) -> GeoPoint {
    GeoPoint {
        lat: rng.gen_range(b.lat_min..=b.lat_max),
        lon: rng.gen_range(b.lon_min..=b.lon_max),
    }
}

/// Uniform in the lat/lon box around `center`, rejected until within
/// `spread_km` by haversine distance.
fn near(rng: &mut ChaCha8Rng, center: GeoPoint, spread_km: f64) -> GeoPoint {
    if spread_km == 0.0 {
        return center;
    }
    let dlat = spread_km / KM_PER_DEG_LAT * 1.01;
    let dlon = (dlat / center.lat.to_radians().cos()).min(180.0);
    loop {
        let lat = center.lat + rng.gen_range(-dlat..=dlat);
        let mut lon = center.lon + rng.gen_range(-dlon..=dlon);
        if lon > 180.0 {
            lon -= 360.0;
        } else if lon < -180.0 {
            lon += 360.0;
        }
        let p = GeoPoint { lat, lon };
        if haversine(center, p, MEAN_EARTH_RADIUS_KM) <= spread_km {
            return p;
        }
    }
}

pub fn synth_generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let b = &spec.bounding_box;

    let mut rng = substream(spec.seed, stream::SYNTH_OBSERVERS);
    let observers = (0..spec.n_observers)
        .map(|i| ObserverNode {
            id: format!("obs-{i:05}"),
            location: uniform(&mut rng, b),
            membership: Membership::Synthetic,
            source: "synthetic".into(),
            mobility: Default::default(),
        })
        .collect();

    let mut locations: Vec<GeoPoint> = Vec::new();
    let mut rng = substream(spec.seed, stream::SYNTH_BACKGROUND);
    locations.extend((0..spec.n_background_events).map(|_| uniform(&mut rng, b)));
    for (i, c) in spec.planted_clusters.iter().enumerate() {
        let mut rng = substream(spec.seed, stream::PLANTED_BASE + i as u64);
        locations.extend((0..c.count).map(|_| near(&mut rng, c.center, c.spread_km)));
    }
    let events = locations
        .into_iter()
        .enumerate()
        .map(|(i, location)| {
            let mut e = EventNode::new(format!("evt-{i:06}"), location);
            e.event_type = "SYN".into();
            e.type_text = "SYNTHETIC".into();
            e
        })
        .collect();

    Ok(SyntheticData {
        observers,
        events,
        ground_truth: spec.planted_clusters.iter().map(|c| c.center).collect(),
    })
}

/// `count` centers uniform in `bbox`, pairwise at least `min_separation_km`
/// apart where the box allows it. Gives up on separation after 10 000 draws
/// per center.
pub fn random_centers(bbox: &BoundingBox, count: usize, min_separation_km: f64, seed: u64) -> Vec<GeoPoint> {
    let mut rng = substream(seed, stream::SYNTH_CENTERS);
    let mut centers: Vec<GeoPoint> = Vec::with_capacity(count);
    while centers.len() < count {
        let mut candidate = uniform(&mut rng, bbox);
        for _ in 0..10_000 {
            if centers
                .iter()
                .all(|c| haversine(*c, candidate, MEAN_EARTH_RADIUS_KM) >= min_separation_km)
            {
                break;
            }
            candidate = uniform(&mut rng, bbox);
        }
        centers.push(candidate);
    }
    centers
}

/// Writes observers in the ingestion schema.
pub fn write_observers_csv<W: Write>(out: W, observers: &[ObserverNode]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "membership", "data_source", "mobility", "address", "latitude", "longitude", "x", "y"])
        .map_err(csv_err)?;
    for o in observers {
        let membership = serde_json::to_value(o.membership)?;
        let mobility = serde_json::to_value(o.mobility)?;
        w.write_record([
            o.id.as_str(),
            membership.as_str().unwrap_or_default(),
            o.source.as_str(),
            mobility.as_str().unwrap_or_default(),
            "",
            &o.location.lat.to_string(),
            &o.location.lon.to_string(),
            "",
            "",
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes events in the ingestion schema.
pub fn write_events_csv<W: Write>(out: W, events: &[EventNode]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["nopd_item", "type", "type_text", "priority", "latitude", "longitude"])
        .map_err(csv_err)?;
    for e in events {
        w.write_record([
            e.id.as_str(),
            e.event_type.as_str(),
            e.type_text.as_str(),
            &e.priority.map(|p| p.to_string()).unwrap_or_default(),
            &e.location.lat.to_string(),
            &e.location.lon.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Unreadable(format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::ingest::{read_events, read_observers};

    fn nola() -> BoundingBox {
        BoundingBox::new(29.90, -90.15, 30.00, -90.00).unwrap()
    }

    fn spec(seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            n_observers: 20,
            n_background_events: 200,
            planted_clusters: vec![
                PlantedCluster { center: GeoPoint::new(29.95, -90.07).unwrap(), count: 20, spread_km: 0.05 },
                PlantedCluster { center: GeoPoint::new(29.92, -90.02).unwrap(), count: 7, spread_km: 0.0 },
            ],
            bounding_box: nola(),
            seed,
        }
    }

    #[test]
    fn observers_only() {
        let s = SyntheticSpec {
            n_observers: 2,
            n_background_events: 0,
            planted_clusters: vec![],
            bounding_box: nola(),
            seed: 1,
        };
        let d = synth_generate(&s).unwrap();
        assert_eq!((d.observers.len(), d.events.len()), (2, 0));
        assert!(d.observers.iter().all(|o| nola().contains(o.location)));
    }

    #[test]
    fn deterministic() {
        let a = synth_generate(&spec(9)).unwrap();
        let b = synth_generate(&spec(9)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, synth_generate(&spec(10)).unwrap());
    }

    #[test]
    fn planted_members_within_spread() {
        let d = synth_generate(&spec(3)).unwrap();
        let center = GeoPoint::new(29.95, -90.07).unwrap();
        let planted = &d.events[200..220];
        assert!(planted.iter().all(|e| haversine(center, e.location, 6371.0) <= 0.05));
        assert!(d.events[220..].iter().all(|e| e.location == GeoPoint::new(29.92, -90.02).unwrap()));
        assert_eq!(d.ground_truth.len(), 2);
    }

    #[test]
    fn adding_a_cluster_keeps_earlier_draws() {
        let base = synth_generate(&spec(4)).unwrap();
        let mut more = spec(4);
        more.planted_clusters.push(PlantedCluster { center: GeoPoint::new(29.98, -90.1).unwrap(), count: 5, spread_km: 0.1 });
        let bigger = synth_generate(&more).unwrap();
        assert_eq!(&bigger.events[..base.events.len()], &base.events[..]);
        assert_eq!(bigger.observers, base.observers);
    }

    #[test]
    fn impossible_specs() {
        let flat = BoundingBox::new(29.9, -90.1, 29.9, -90.0).unwrap();
        let s = SyntheticSpec { n_observers: 1, n_background_events: 0, planted_clusters: vec![], bounding_box: flat, seed: 0 };
        assert!(matches!(synth_generate(&s), Err(Error::ImpossibleSpec(_))));

        let mut s = spec(0);
        s.planted_clusters[0].center = GeoPoint::new(10.0, 10.0).unwrap();
        assert!(matches!(synth_generate(&s), Err(Error::ImpossibleSpec(_))));

        let mut s = spec(0);
        s.planted_clusters[0].spread_km = -1.0;
        assert!(matches!(synth_generate(&s), Err(Error::ImpossibleSpec(_))));
    }

    #[test]
    fn csv_round_trip() {
        let mut s = spec(5);
        s.n_background_events = 1000 - 27;
        let d = synth_generate(&s).unwrap();
        let mut buf = vec![];
        write_events_csv(&mut buf, &d.events).unwrap();
        let (events, report) = read_events(buf.as_slice()).unwrap();
        assert_eq!(report.rows_accepted, 1000);
        assert_eq!(report.rows_rejected, 0);
        assert_eq!(events, d.events);

        let mut buf = vec![];
        write_observers_csv(&mut buf, &d.observers).unwrap();
        let (observers, _) = read_observers(buf.as_slice()).unwrap();
        assert_eq!(observers, d.observers);
    }

    #[test]
    fn centers_are_separated() {
        let c = random_centers(&nola(), 5, 1.0, 2);
        assert_eq!(c.len(), 5);
        for i in 0..5 {
            assert!(nola().contains(c[i]));
            for j in i + 1..5 {
                assert!(haversine(c[i], c[j], 6371.0) >= 1.0);
            }
        }
    }
}
