//! JSON and CSV artifacts written by the pipeline.
//!
//! JSON output is canonical: keys sorted, two-space indentation, a trailing
//! newline, and every derived real rounded to 9 significant digits.
//! Coordinates (`lat`, `lon`) are written at full precision so that planned
//! observer locations survive a round trip exactly.

use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::metrics::{CoverageStats, DegreeHistogram, ShiftSummary};
use crate::model::{GeoPoint, Membership, NetworkConfig, ObserverNode};
use crate::network::NetworkState;
use crate::planner::{ComparisonRow, InsertionMode, InsertionPlan, Strategy};

const EXACT_KEYS: [&str; 2] = ["lat", "lon"];

/// Rounds to 9 significant digits.
pub fn round_sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

fn canonicalize(value: &mut Value, exact: bool) {
    match value {
        Value::Number(n) if !exact && n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig9).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|v| canonicalize(v, exact)),
        Value::Object(map) => {
            for (k, v) in map.iter_mut() {
                canonicalize(v, EXACT_KEYS.contains(&k.as_str()));
            }
        }
        _ => {}
    }
}

pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    canonicalize(&mut v, false);
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    Ok(text)
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_canonical_json(value)?.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Unreadable(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub observer_count: usize,
    pub event_count: usize,
    pub radius_km: f64,
    pub observed: usize,
    pub unobserved: usize,
    pub centrality: Vec<usize>,
    pub fingerprint: String,
}

impl From<&NetworkState> for StateSummary {
    fn from(s: &NetworkState) -> Self {
        StateSummary {
            observer_count: s.observers().len(),
            event_count: s.events().len(),
            radius_km: s.radius_km(),
            observed: s.observed().len(),
            unobserved: s.unobserved().len(),
            centrality: s.centrality().to_vec(),
            fingerprint: s.fingerprint(),
        }
    }
}

/// Event ids on each side of the partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub observed: Vec<String>,
    pub unobserved: Vec<String>,
}

impl From<&NetworkState> for Classification {
    fn from(s: &NetworkState) -> Self {
        let ids = |idx: &[usize]| idx.iter().map(|&e| s.events()[e].id.clone()).collect();
        Classification {
            observed: ids(s.observed()),
            unobserved: ids(s.unobserved()),
        }
    }
}

impl Classification {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        let rows = self
            .observed
            .iter()
            .map(|id| (id, "observed"))
            .chain(self.unobserved.iter().map(|id| (id, "unobserved")));
        w.write_record(["id", "status"]).map_err(to_io)?;
        for (id, status) in rows {
            w.write_record([id.as_str(), status]).map_err(to_io)?;
        }
        finish(w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedSite {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanArtifact {
    pub strategy: Strategy,
    pub mode: InsertionMode,
    pub seed: u64,
    pub state_fingerprint: String,
    pub new_observers: Vec<PlannedSite>,
}

impl From<&InsertionPlan> for PlanArtifact {
    fn from(p: &InsertionPlan) -> Self {
        PlanArtifact {
            strategy: p.strategy,
            mode: p.mode,
            seed: p.seed,
            state_fingerprint: p.state_fingerprint.clone(),
            new_observers: p
                .new_observers
                .iter()
                .map(|o| PlannedSite {
                    id: o.id.clone(),
                    lat: o.location.lat,
                    lon: o.location.lon,
                })
                .collect(),
        }
    }
}

impl PlanArtifact {
    /// Rebuilds the plan; per-round strategy details are not stored.
    pub fn into_plan(self) -> Result<InsertionPlan> {
        let strategy = self.strategy;
        let new_observers = self
            .new_observers
            .into_iter()
            .map(|site| {
                Ok(ObserverNode {
                    id: site.id,
                    location: GeoPoint::new(site.lat, site.lon)?,
                    membership: Membership::Planned,
                    source: strategy.name().to_string(),
                    mobility: Default::default(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(InsertionPlan {
            strategy,
            mode: self.mode,
            seed: self.seed,
            state_fingerprint: self.state_fingerprint,
            new_observers,
            sources: vec![],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageArtifact {
    pub radius_km: f64,
    pub event_count: usize,
    pub coverage: CoverageStats,
}

/// Histograms of original, inserted and combined degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub original: DegreeHistogram,
    pub inserted: Option<DegreeHistogram>,
    pub combined: Option<DegreeHistogram>,
    pub coverage: CoverageStats,
    pub shift: Option<ShiftSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonArtifact {
    pub config: NetworkConfig,
    pub seed: u64,
    pub mode: InsertionMode,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonArtifact {
    /// One row per strategy, plot-ready.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record([
            "strategy",
            "mode",
            "planned",
            "observed_before",
            "observed_after",
            "observed_delta",
            "fraction_observed_after",
            "inserted_mean_degree",
            "mean_before",
            "mean_after",
            "median_before",
            "median_after",
            "skewness_before",
            "skewness_after",
        ])
        .map_err(to_io)?;
        let mode = serde_json::to_value(self.mode)?;
        for r in &self.rows {
            let s = &r.shift;
            let num = |x: f64| round_sig9(x).to_string();
            w.write_record([
                r.strategy.name().to_string(),
                mode.as_str().unwrap_or_default().to_string(),
                r.planned.to_string(),
                r.coverage_before.observed.to_string(),
                r.coverage_after.observed.to_string(),
                r.observed_delta.to_string(),
                num(r.coverage_after.fraction_observed),
                s.inserted_mean.map(num).unwrap_or_default(),
                num(s.mean_before),
                num(s.mean_after),
                num(s.median_before),
                num(s.median_after),
                num(s.skewness_before),
                num(s.skewness_after),
            ])
            .map_err(to_io)?;
        }
        finish(w)
    }
}

pub fn histogram_csv(h: &DegreeHistogram) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["bin_low", "bin_high", "count"]).map_err(to_io)?;
    for (i, c) in h.counts.iter().enumerate() {
        w.write_record([h.bin_edges[i].to_string(), h.bin_edges[i + 1].to_string(), c.to_string()])
            .map_err(to_io)?;
    }
    finish(w)
}

pub fn coverage_csv(c: &CoverageStats) -> Result<String> {
    Ok(format!(
        "observed,unobserved,fraction_observed\n{},{},{}\n",
        c.observed,
        c.unobserved,
        round_sig9(c.fraction_observed)
    ))
}

fn to_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e)))
}
