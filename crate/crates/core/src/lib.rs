//! Ranged observer-observable bipartite networks.
//!
//! Observers (cameras, sensors) and events (incidents) are geolocated
//! points. An observer sees every event within an observational radius `r`;
//! the number of events it sees is its degree centrality. Events nobody sees
//! are clustered by proximal recurrence to propose new observer sites, and
//! the result is compared against k-means, DBSCAN, mode and grid baselines.

pub mod baselines;
pub mod distance;
pub mod error;
pub mod io;
pub mod metrics;
pub mod model;
pub mod network;
pub mod planner;
pub mod proxrec;
pub mod rng;

pub use error::{Error, Result};
pub use model::{default_config, EventNode, GeoPoint, NetworkConfig, ObserverNode};
pub use network::{init_stroobnet, NetworkState};
