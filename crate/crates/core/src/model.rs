//! Domain types shared by every pipeline stage.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Field, Result};

/// A WGS84 latitude/longitude pair in degrees.
///
/// Construct through [`GeoPoint::new`]; the fields are public for reading but
/// values outside `[-90, 90]` x `[-180, 180]` are never produced by this crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        validate_geopoint(lat, lon)
    }
}

/// Checks finiteness and range. Values are stored exactly as given
/// (no longitude wrapping).
pub fn validate_geopoint(lat: f64, lon: f64) -> Result<GeoPoint> {
    if !lat.is_finite() {
        return Err(Error::NonFinite { field: Field::Lat });
    }
    if !lon.is_finite() {
        return Err(Error::NonFinite { field: Field::Lon });
    }
    if !(-90.0..=90.0).contains(&lat) {
        return Err(Error::OutOfRange {
            field: Field::Lat,
            value: lat,
        });
    }
    if !(-180.0..=180.0).contains(&lon) {
        return Err(Error::OutOfRange {
            field: Field::Lon,
            value: lon,
        });
    }
    Ok(GeoPoint { lat, lon })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    #[default]
    City,
    Private,
    Synthetic,
    Planned,
}

impl std::str::FromStr for Membership {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "" | "city" => Ok(Membership::City),
            "private" => Ok(Membership::Private),
            "synthetic" => Ok(Membership::Synthetic),
            "planned" => Ok(Membership::Planned),
            other => Err(format!("unknown membership `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mobility {
    #[default]
    Stationary,
    Mobile,
}

impl std::str::FromStr for Mobility {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "" | "stationary" | "fixed" => Ok(Mobility::Stationary),
            "mobile" => Ok(Mobility::Mobile),
            other => Err(format!("unknown mobility `{other}`")),
        }
    }
}

/// A camera or sensor: one vertex of the observer side of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverNode {
    pub id: String,
    pub location: GeoPoint,
    pub membership: Membership,
    pub source: String,
    /// Ingested for completeness; single-snapshot analysis ignores it.
    pub mobility: Mobility,
}

impl ObserverNode {
    pub fn new(id: impl Into<String>, location: GeoPoint) -> Self {
        ObserverNode {
            id: id.into(),
            location,
            membership: Membership::City,
            source: String::new(),
            mobility: Mobility::Stationary,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventTimestamps {
    pub create: Option<String>,
    pub dispatch: Option<String>,
    pub arrive: Option<String>,
    pub closed: Option<String>,
}

/// An incident: one vertex of the observable side of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventNode {
    pub id: String,
    pub location: GeoPoint,
    pub event_type: String,
    pub type_text: String,
    /// 3 is the highest priority, 0 the lowest.
    pub priority: Option<u8>,
    pub timestamps: Option<EventTimestamps>,
}

impl EventNode {
    pub fn new(id: impl Into<String>, location: GeoPoint) -> Self {
        EventNode {
            id: id.into(),
            location,
            event_type: String::new(),
            type_text: String::new(),
            priority: None,
            timestamps: None,
        }
    }
}

pub const MAX_PRIORITY: u8 = 3;

pub fn validate_priority(priority: i64) -> Result<u8> {
    if (0..=MAX_PRIORITY as i64).contains(&priority) {
        Ok(priority as u8)
    } else {
        Err(Error::OutOfRange {
            field: Field::Priority,
            value: priority as f64,
        })
    }
}

/// Anything with an id and a location.
pub trait Located {
    fn id(&self) -> &str;
    fn location(&self) -> GeoPoint;
}

impl Located for ObserverNode {
    fn id(&self) -> &str {
        &self.id
    }
    fn location(&self) -> GeoPoint {
        self.location
    }
}

impl Located for EventNode {
    fn id(&self) -> &str {
        &self.id
    }
    fn location(&self) -> GeoPoint {
        self.location
    }
}

impl Located for GeoPoint {
    fn id(&self) -> &str {
        ""
    }
    fn location(&self) -> GeoPoint {
        *self
    }
}

/// Rejects the first repeated id in `nodes`.
pub fn ensure_unique_ids<T: Located>(nodes: &[T]) -> Result<()> {
    let mut seen = HashSet::with_capacity(nodes.len());
    for node in nodes {
        if !seen.insert(node.id()) {
            return Err(Error::DuplicateId(node.id().to_string()));
        }
    }
    Ok(())
}

pub const DEFAULT_RADIUS_KM: f64 = 0.2;
pub const DEFAULT_INSERT_COUNT: usize = 100;
pub const MEAN_EARTH_RADIUS_KM: f64 = 6371.0;

/// Observational range, insertion budget and sphere radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Observational range `r`, kilometers.
    pub radius_km: f64,
    /// Number of observers to insert.
    pub insert_count: usize,
    pub earth_radius_km: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        default_config()
    }
}

pub fn default_config() -> NetworkConfig {
    NetworkConfig {
        radius_km: DEFAULT_RADIUS_KM,
        insert_count: DEFAULT_INSERT_COUNT,
        earth_radius_km: MEAN_EARTH_RADIUS_KM,
    }
}

impl NetworkConfig {
    pub fn with_radius_km(self, radius_km: f64) -> Result<Self> {
        NetworkConfig { radius_km, ..self }.validated()
    }

    pub fn with_insert_count(self, insert_count: usize) -> Result<Self> {
        NetworkConfig {
            insert_count,
            ..self
        }
        .validated()
    }

    pub fn with_earth_radius_km(self, earth_radius_km: f64) -> Result<Self> {
        NetworkConfig {
            earth_radius_km,
            ..self
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.radius_km.is_finite() && self.radius_km > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "radius_km must be positive, got {}",
                self.radius_km
            )));
        }
        if self.insert_count < 1 {
            return Err(Error::InvalidConfig(
                "insert_count must be at least 1".into(),
            ));
        }
        if !(self.earth_radius_km.is_finite() && self.earth_radius_km > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "earth_radius_km must be positive, got {}",
                self.earth_radius_km
            )));
        }
        Ok(self)
    }
}
