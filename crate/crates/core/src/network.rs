//! The ranged observer-observable bipartite network.
//!
//! An observer `o` and an event `e` are linked when `DM[o][e] <= r`. The
//! degree of an observer (its centrality) is the number of events it can see;
//! an event is observed when at least one observer links to it.

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::distance::{bipartite_matrix, DistanceMatrix, MatrixKind};
use crate::error::{Error, Result};
use crate::model::{ensure_unique_ids, EventNode, NetworkConfig, ObserverNode};

/// Unweighted observer-event links, sorted by `(observer, event)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkSet {
    links: Vec<(usize, usize)>,
}

impl LinkSet {
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().copied()
    }

    pub fn contains(&self, observer: usize, event: usize) -> bool {
        self.links.binary_search(&(observer, event)).is_ok()
    }

    pub fn as_slice(&self) -> &[(usize, usize)] {
        &self.links
    }
}

/// All pairs within `radius_km`; a distance exactly equal to the radius links.
pub fn link_set(dm: &DistanceMatrix, radius_km: f64) -> Result<LinkSet> {
    dm.expect_kind(MatrixKind::Bipartite)?;
    let links = (0..dm.rows())
        .into_par_iter()
        .flat_map_iter(|o| {
            dm.row(o)
                .iter()
                .enumerate()
                .filter(move |(_, &d)| d <= radius_km)
                .map(move |(e, _)| (o, e))
        })
        .collect();
    Ok(LinkSet { links })
}

/// Per-observer count of events within `radius_km`.
pub fn observer_centrality(dm: &DistanceMatrix, radius_km: f64) -> Result<Vec<usize>> {
    dm.expect_kind(MatrixKind::Bipartite)?;
    Ok((0..dm.rows())
        .into_par_iter()
        .map(|o| dm.row(o).iter().filter(|&&d| d <= radius_km).count())
        .collect())
}

/// Per-event count of observers within `radius_km`.
pub fn event_observations(dm: &DistanceMatrix, radius_km: f64) -> Result<Vec<usize>> {
    dm.expect_kind(MatrixKind::Bipartite)?;
    let mut counts = vec![0usize; dm.cols()];
    for o in 0..dm.rows() {
        for (count, &d) in counts.iter_mut().zip(dm.row(o)) {
            if d <= radius_km {
                *count += 1;
            }
        }
    }
    Ok(counts)
}

/// Splits event indices into `(observed, unobserved)`, both ascending.
pub fn classify_events(dm: &DistanceMatrix, radius_km: f64) -> Result<(Vec<usize>, Vec<usize>)> {
    let observations = event_observations(dm, radius_km)?;
    Ok(partition(&observations))
}

fn partition(observations: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let (observed, unobserved): (Vec<usize>, Vec<usize>) =
        (0..observations.len()).partition(|&e| observations[e] > 0);
    (observed, unobserved)
}

/// An immutable snapshot of the network for one radius.
#[derive(Debug, Clone)]
pub struct NetworkState {
    observers: Vec<ObserverNode>,
    events: Vec<EventNode>,
    radius_km: f64,
    earth_radius_km: f64,
    links: LinkSet,
    centrality: Vec<usize>,
    observations: Vec<usize>,
    observed: Vec<usize>,
    unobserved: Vec<usize>,
}

/// Builds the distance matrix, links, centrality and event partition.
pub fn init_stroobnet(
    observers: Vec<ObserverNode>,
    events: Vec<EventNode>,
    config: &NetworkConfig,
) -> Result<NetworkState> {
    let config = config.validated()?;
    ensure_unique_ids(&observers)?;
    ensure_unique_ids(&events)?;
    let dm = bipartite_matrix(&observers, &events, config.earth_radius_km)?;
    let r = config.radius_km;
    let links = link_set(&dm, r)?;
    let centrality = observer_centrality(&dm, r)?;
    let observations = event_observations(&dm, r)?;
    let (observed, unobserved) = partition(&observations);
    let state = NetworkState {
        observers,
        events,
        radius_km: r,
        earth_radius_km: config.earth_radius_km,
        links,
        centrality,
        observations,
        observed,
        unobserved,
    };
    state.check_invariants()?;
    Ok(state)
}

impl NetworkState {
    pub fn observers(&self) -> &[ObserverNode] {
        &self.observers
    }

    pub fn events(&self) -> &[EventNode] {
        &self.events
    }

    pub fn radius_km(&self) -> f64 {
        self.radius_km
    }

    pub fn earth_radius_km(&self) -> f64 {
        self.earth_radius_km
    }

    pub fn links(&self) -> &LinkSet {
        &self.links
    }

    pub fn centrality(&self) -> &[usize] {
        &self.centrality
    }

    pub fn observations(&self) -> &[usize] {
        &self.observations
    }

    /// Observed event indices (OE), ascending.
    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    /// Unobserved event indices (UE), ascending.
    pub fn unobserved(&self) -> &[usize] {
        &self.unobserved
    }

    pub fn unobserved_events(&self) -> Vec<EventNode> {
        self.unobserved.iter().map(|&e| self.events[e].clone()).collect()
    }

    /// Partition and handshake invariants.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.events.len();
        if self.centrality.len() != self.observers.len() || self.observations.len() != n {
            return Err(Error::Invariant("count vectors have the wrong length".into()));
        }
        if self.observed.len() + self.unobserved.len() != n {
            return Err(Error::Invariant("OE and UE do not cover all events".into()));
        }
        let mut seen = vec![false; n];
        for &e in self.observed.iter().chain(&self.unobserved) {
            if e >= n || std::mem::replace(&mut seen[e], true) {
                return Err(Error::Invariant(format!("event {e} is misclassified")));
            }
        }
        if self.observed.iter().any(|&e| self.observations[e] == 0)
            || self.unobserved.iter().any(|&e| self.observations[e] != 0)
        {
            return Err(Error::Invariant("partition disagrees with observation counts".into()));
        }
        let links = self.links.len();
        if self.centrality.iter().sum::<usize>() != links
            || self.observations.iter().sum::<usize>() != links
        {
            return Err(Error::Invariant("degree sums disagree with link count".into()));
        }
        Ok(())
    }

    /// Digest of the inputs that define this state. Plans carry it so they
    /// are only applied to the state they were built from.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.radius_km.to_bits().to_le_bytes());
        hasher.update(self.earth_radius_km.to_bits().to_le_bytes());
        hasher.update((self.observers.len() as u64).to_le_bytes());
        for o in &self.observers {
            hasher.update(o.id.as_bytes());
            hasher.update([0]);
            hasher.update(o.location.lat.to_bits().to_le_bytes());
            hasher.update(o.location.lon.to_bits().to_le_bytes());
        }
        hasher.update((self.events.len() as u64).to_le_bytes());
        for e in &self.events {
            hasher.update(e.id.as_bytes());
            hasher.update([0]);
            hasher.update(e.location.lat.to_bits().to_le_bytes());
            hasher.update(e.location.lon.to_bits().to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
