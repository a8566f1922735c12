//! File formats: CSV ingestion, synthetic fixtures and JSON/CSV artifacts.

pub mod artifacts;
pub mod ingest;
pub mod synth;

pub use artifacts::{read_json, to_canonical_json, write_atomic, write_json};
pub use ingest::{
    filter_events, load_events_csv, load_observers_csv, load_type_allowlist, read_events,
    read_observers, BoundingBox, IngestReport,
};
pub use synth::{random_centers, synth_generate, PlantedCluster, SyntheticData, SyntheticSpec};
