//! Header-driven CSV ingestion for observer and event files.
//!
//! Column names are matched case-insensitively and in any order. A bad row
//! never aborts a load: it is counted and its reason recorded.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    validate_geopoint, validate_priority, EventNode, EventTimestamps, GeoPoint, ObserverNode,
};
use crate::planner::PLANNED_ID_PREFIX;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_accepted: usize,
    pub rows_rejected: usize,
    pub rejection_reasons: BTreeMap<String, usize>,
}

impl IngestReport {
    fn accept(&mut self) {
        self.rows_read += 1;
        self.rows_accepted += 1;
    }

    fn reject(&mut self, reason: String) {
        self.rows_read += 1;
        self.rows_rejected += 1;
        *self.rejection_reasons.entry(reason).or_default() += 1;
    }
}

/// Closed lat/lon rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lat_min: f64,
    pub lon_min: f64,
    pub lat_max: f64,
    pub lon_max: f64,
}

impl BoundingBox {
    pub fn new(lat_min: f64, lon_min: f64, lat_max: f64, lon_max: f64) -> Result<Self> {
        validate_geopoint(lat_min, lon_min)?;
        validate_geopoint(lat_max, lon_max)?;
        if lat_min > lat_max || lon_min > lon_max {
            return Err(Error::InvalidConfig(
                "bounding box minimum exceeds maximum".into(),
            ));
        }
        Ok(BoundingBox {
            lat_min,
            lon_min,
            lat_max,
            lon_max,
        })
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        (self.lat_min..=self.lat_max).contains(&p.lat) && (self.lon_min..=self.lon_max).contains(&p.lon)
    }
}

impl std::str::FromStr for BoundingBox {
    type Err = Error;

    /// `lat_min,lon_min,lat_max,lon_max`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidConfig(format!("bad bounding box `{s}`")))?;
        match parts[..] {
            [a, b, c, d] => BoundingBox::new(a, b, c, d),
            _ => Err(Error::InvalidConfig(format!(
                "bounding box needs 4 values, got `{s}`"
            ))),
        }
    }
}

struct Columns {
    index: HashMap<String, usize>,
}

impl Columns {
    fn new(headers: &csv::StringRecord) -> Self {
        Columns {
            index: headers
                .iter()
                .enumerate()
                .map(|(i, h)| (h.trim().trim_start_matches('\u{feff}').to_ascii_lowercase(), i))
                .collect(),
        }
    }

    fn has(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    fn require(&self, name: &str) -> Result<()> {
        if self.has(name) {
            Ok(())
        } else {
            Err(Error::MissingColumn(name.to_string()))
        }
    }

    fn get<'r>(&self, row: &'r csv::StringRecord, name: &str) -> Option<&'r str> {
        self.index
            .get(name)
            .and_then(|&i| row.get(i))
            .map(str::trim)
    }
}

fn reader<R: Read>(input: R) -> Result<(csv::Reader<R>, Columns)> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Unreadable(e.to_string()))?
        .clone();
    Ok((rdr, Columns::new(&headers)))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Unreadable(format!("{}: {e}", path.display())))
}

fn required<'r>(cols: &Columns, row: &'r csv::StringRecord, name: &str) -> std::result::Result<&'r str, String> {
    match cols.get(row, name) {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(format!("MissingValue({name})")),
    }
}

fn number(cols: &Columns, row: &csv::StringRecord, name: &str) -> std::result::Result<f64, String> {
    required(cols, row, name)?
        .parse::<f64>()
        .map_err(|_| format!("BadNumber({name})"))
}

fn point(lat: f64, lon: f64) -> std::result::Result<GeoPoint, String> {
    validate_geopoint(lat, lon).map_err(|e| match e {
        Error::OutOfRange { field, .. } => format!("OutOfRange({field})"),
        Error::NonFinite { field } => format!("NonFinite({field})"),
        other => other.kind().to_string(),
    })
}

fn check_id(id: &str, seen: &mut HashSet<String>) -> std::result::Result<(), String> {
    if id.starts_with(PLANNED_ID_PREFIX) {
        return Err("ReservedId".into());
    }
    if !seen.insert(id.to_string()) {
        return Err("DuplicateId".into());
    }
    Ok(())
}

pub fn load_observers_csv(path: &Path) -> Result<(Vec<ObserverNode>, IngestReport)> {
    read_observers(open(path)?)
}

/// Columns: id, membership, data_source, mobility, address, latitude,
/// longitude, x, y. Only id, latitude and longitude are required; the
/// address and planar x/y columns are accepted and ignored.
pub fn read_observers<R: Read>(input: R) -> Result<(Vec<ObserverNode>, IngestReport)> {
    let (mut rdr, cols) = reader(input)?;
    for name in ["id", "latitude", "longitude"] {
        cols.require(name)?;
    }
    let mut report = IngestReport::default();
    let mut seen = HashSet::new();
    let mut out = vec![];
    for row in rdr.records() {
        let parsed = row.map_err(|_| "MalformedRow".to_string()).and_then(|row| {
            let id = required(&cols, &row, "id")?;
            let location = point(number(&cols, &row, "latitude")?, number(&cols, &row, "longitude")?)?;
            let membership = cols
                .get(&row, "membership")
                .unwrap_or("")
                .parse()
                .map_err(|_| "BadValue(membership)".to_string())?;
            let mobility = cols
                .get(&row, "mobility")
                .unwrap_or("")
                .parse()
                .map_err(|_| "BadValue(mobility)".to_string())?;
            check_id(id, &mut seen)?;
            Ok(ObserverNode {
                id: id.to_string(),
                location,
                membership,
                source: cols.get(&row, "data_source").unwrap_or("").to_string(),
                mobility,
            })
        });
        match parsed {
            Ok(node) => {
                report.accept();
                out.push(node);
            }
            Err(reason) => report.reject(reason),
        }
    }
    Ok((out, report))
}

pub fn load_events_csv(path: &Path) -> Result<(Vec<EventNode>, IngestReport)> {
    read_events(open(path)?)
}

/// `"(29.95, -90.07)"` into its two numbers.
fn parse_geolocation(text: &str) -> std::result::Result<(f64, f64), String> {
    let inner = text.trim().trim_start_matches('(').trim_end_matches(')');
    let mut parts = inner.split(',').map(|p| p.trim().parse::<f64>());
    match (parts.next(), parts.next(), parts.next()) {
        (Some(Ok(lat)), Some(Ok(lon)), None) => Ok((lat, lon)),
        _ => Err("BadValue(geolocation)".into()),
    }
}

/// Leading integer of a priority code such as `2` or `1A`; empty is absent.
fn parse_priority(text: &str) -> std::result::Result<Option<u8>, String> {
    let digits: String = text.chars().take_while(|c| c.is_ascii_digit() || *c == '-').collect();
    if text.is_empty() {
        return Ok(None);
    }
    let value: i64 = digits.parse().map_err(|_| "BadNumber(priority)".to_string())?;
    validate_priority(value)
        .map(Some)
        .map_err(|_| "OutOfRange(priority)".to_string())
}

/// Columns: nopd_item (id), type, type_text, priority, and either
/// latitude + longitude or a combined `geolocation` column. The
/// time_create, time_dispatch, time_arrive and time_closed columns are
/// optional; any other columns are ignored.
pub fn read_events<R: Read>(input: R) -> Result<(Vec<EventNode>, IngestReport)> {
    let (mut rdr, cols) = reader(input)?;
    cols.require("nopd_item")?;
    let split = cols.has("latitude") || cols.has("longitude");
    if split || !cols.has("geolocation") {
        cols.require("latitude")?;
        cols.require("longitude")?;
    }
    let stamp = |row: &csv::StringRecord, name: &str| {
        cols.get(row, name).filter(|v| !v.is_empty()).map(str::to_string)
    };
    let mut report = IngestReport::default();
    let mut seen = HashSet::new();
    let mut out = vec![];
    for row in rdr.records() {
        let parsed = row.map_err(|_| "MalformedRow".to_string()).and_then(|row| {
            let id = required(&cols, &row, "nopd_item")?;
            let (lat, lon) = if split {
                (number(&cols, &row, "latitude")?, number(&cols, &row, "longitude")?)
            } else {
                parse_geolocation(required(&cols, &row, "geolocation")?)?
            };
            let location = point(lat, lon)?;
            let priority = parse_priority(cols.get(&row, "priority").unwrap_or(""))?;
            let timestamps = EventTimestamps {
                create: stamp(&row, "time_create"),
                dispatch: stamp(&row, "time_dispatch"),
                arrive: stamp(&row, "time_arrive"),
                closed: stamp(&row, "time_closed"),
            };
            check_id(id, &mut seen)?;
            Ok(EventNode {
                id: id.to_string(),
                location,
                event_type: cols.get(&row, "type").unwrap_or("").to_string(),
                type_text: cols.get(&row, "type_text").unwrap_or("").to_string(),
                priority,
                timestamps: (timestamps != EventTimestamps::default()).then_some(timestamps),
            })
        });
        match parsed {
            Ok(node) => {
                report.accept();
                out.push(node);
            }
            Err(reason) => report.reject(reason),
        }
    }
    Ok((out, report))
}

/// Keeps events whose type is allow-listed (an empty list keeps every
/// type) and, when a box is given, whose location lies inside it.
pub fn filter_events(
    events: Vec<EventNode>,
    type_allowlist: &HashSet<String>,
    bbox: Option<&BoundingBox>,
) -> Vec<EventNode> {
    events
        .into_iter()
        .filter(|e| type_allowlist.is_empty() || type_allowlist.contains(&e.event_type))
        .filter(|e| bbox.map_or(true, |b| b.contains(e.location)))
        .collect()
}

/// One type code per line; blank lines and `#` comments are skipped.
pub fn load_type_allowlist(path: &Path) -> Result<HashSet<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Unreadable(format!("{}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}
