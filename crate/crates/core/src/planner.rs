//! Observer insertion: turn a strategy's centroids into planned observers,
//! rebuild the network and measure what changed.

use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use crate::baselines::{
    self, dbscan, grid_binning, kmeans, mode_clustering, BaselineResult, DEFAULT_BIN_SIZE_DEG,
    DEFAULT_MAX_ITERS, DEFAULT_MIN_PTS,
};
use crate::distance::{bipartite_matrix, haversine};
use crate::error::{Error, Result};
use crate::metrics::{coverage_stats, shift_summary, CoverageStats, ShiftSummary};
use crate::model::{EventNode, GeoPoint, Located, Membership, NetworkConfig, ObserverNode};
use crate::network::{init_stroobnet, observer_centrality, NetworkState};
use crate::proxrec::{self, ClusterSelection};

/// Ids of planned observers start with this; ingestion rejects it.
pub const PLANNED_ID_PREFIX: &str = "planned:";

/// Tuning knobs for the baseline strategies. `None` means "derive from the
/// network config" (k = insert count, eps = radius).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyParams {
    pub k: Option<usize>,
    pub max_iters: usize,
    pub eps_km: Option<f64>,
    pub min_pts: usize,
    pub bin_size_deg: f64,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            k: None,
            max_iters: DEFAULT_MAX_ITERS,
            eps_km: None,
            min_pts: DEFAULT_MIN_PTS,
            bin_size_deg: DEFAULT_BIN_SIZE_DEG,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    ProximalRecurrence,
    Kmeans,
    Dbscan,
    Mode,
    Grid,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::ProximalRecurrence,
        Strategy::Kmeans,
        Strategy::Dbscan,
        Strategy::Mode,
        Strategy::Grid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::ProximalRecurrence => "proximal_recurrence",
            Strategy::Kmeans => "kmeans",
            Strategy::Dbscan => "dbscan",
            Strategy::Mode => "mode",
            Strategy::Grid => "grid",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "proximal_recurrence" | "proxrec" => Ok(Strategy::ProximalRecurrence),
            "kmeans" | "k_means" => Ok(Strategy::Kmeans),
            "dbscan" => Ok(Strategy::Dbscan),
            "mode" => Ok(Strategy::Mode),
            "grid" => Ok(Strategy::Grid),
            _ => Err(Error::UnknownStrategy(s.to_string())),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InsertionMode {
    #[default]
    Batch,
    /// Re-analyses the unobserved set after every placement.
    Iterative,
}

impl std::str::FromStr for InsertionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "batch" => Ok(InsertionMode::Batch),
            "iterative" => Ok(InsertionMode::Iterative),
            other => Err(Error::InvalidConfig(format!("unknown insertion mode `{other}`"))),
        }
    }
}

/// What a strategy produced for one planning round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PlanSource {
    Selection(ClusterSelection),
    Baseline(BaselineResult),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsertionPlan {
    pub strategy: Strategy,
    pub mode: InsertionMode,
    pub seed: u64,
    pub state_fingerprint: String,
    pub new_observers: Vec<ObserverNode>,
    /// One entry per planning round: a single entry in batch mode.
    pub sources: Vec<PlanSource>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsertionReport {
    pub strategy: Strategy,
    pub mode: InsertionMode,
    pub before: CoverageStats,
    pub after: CoverageStats,
    /// Degree of each planned observer over the original unobserved events.
    pub new_node_degrees: Vec<usize>,
    pub observed_delta: usize,
}

/// Candidate locations for up to `n` observers over `points`, in strategy order.
fn propose(
    strategy: Strategy,
    events: &[EventNode],
    n: usize,
    config: &NetworkConfig,
    params: &StrategyParams,
    seed: u64,
) -> Result<(Vec<GeoPoint>, PlanSource)> {
    let points: Vec<GeoPoint> = events.iter().map(Located::location).collect();
    let r = config.earth_radius_km;
    let (mut sites, source) = match strategy {
        Strategy::ProximalRecurrence => {
            let selection = proxrec::proximal_recurrence_n(events, config, n)?;
            (selection.anchors().collect(), PlanSource::Selection(selection))
        }
        Strategy::Kmeans => {
            let k = params.k.unwrap_or(n).min(points.len());
            let result = kmeans(&points, k, params.max_iters, seed, r)?;
            (largest_first(&result, &result.centroids), PlanSource::Baseline(result))
        }
        Strategy::Dbscan => {
            let eps = params.eps_km.unwrap_or(config.radius_km);
            let result = dbscan(&points, eps, params.min_pts, r)?;
            let centroids = match baselines::dbscan_centroids(&result) {
                Ok(c) => largest_first(&result, &c),
                Err(Error::NoClusters) => vec![],
                Err(e) => return Err(e),
            };
            (centroids, PlanSource::Baseline(result))
        }
        Strategy::Mode => {
            let result = mode_clustering(&points, n)?;
            (result.centroids.clone(), PlanSource::Baseline(result))
        }
        Strategy::Grid => {
            let result = grid_binning(&points, params.bin_size_deg, n)?;
            (result.centroids.clone(), PlanSource::Baseline(result))
        }
    };
    sites.truncate(n);
    Ok((sites, source))
}

/// Centroids reordered by cluster size descending, then label.
fn largest_first(result: &BaselineResult, centroids: &[GeoPoint]) -> Vec<GeoPoint> {
    let mut sizes = result.cluster_sizes();
    sizes.resize(centroids.len(), 0);
    let mut labels: Vec<usize> = (0..centroids.len()).collect();
    labels.sort_by_key(|&l| (Reverse(sizes[l]), l));
    labels.into_iter().map(|l| centroids[l]).collect()
}

fn planned_observer(strategy: Strategy, index: usize, location: GeoPoint) -> ObserverNode {
    ObserverNode {
        id: format!("{PLANNED_ID_PREFIX}{}-{index:04}", strategy.name()),
        location,
        membership: Membership::Planned,
        source: strategy.name().to_string(),
        mobility: Default::default(),
    }
}

/// Plans up to `config.insert_count` new observers for the unobserved events.
pub fn plan_insertions(
    state: &NetworkState,
    strategy: Strategy,
    params: &StrategyParams,
    config: &NetworkConfig,
    mode: InsertionMode,
    seed: u64,
) -> Result<InsertionPlan> {
    let config = config.validated()?;
    if state.unobserved().is_empty() {
        return Err(Error::NothingUnobserved);
    }
    let n = config.insert_count;
    let (sites, sources) = match mode {
        InsertionMode::Batch => {
            let (sites, source) = propose(strategy, &state.unobserved_events(), n, &config, params, seed)?;
            (sites, vec![source])
        }
        InsertionMode::Iterative => iterate(state, strategy, params, &config, seed)?,
    };
    Ok(InsertionPlan {
        strategy,
        mode,
        seed,
        state_fingerprint: state.fingerprint(),
        new_observers: sites
            .into_iter()
            .enumerate()
            .map(|(i, p)| planned_observer(strategy, i, p))
            .collect(),
        sources,
    })
}

// One placement per round against the events still unobserved. Coverage
// only grows, so reclassifying means marking the events near the new site.
fn iterate(
    state: &NetworkState,
    strategy: Strategy,
    params: &StrategyParams,
    config: &NetworkConfig,
    seed: u64,
) -> Result<(Vec<GeoPoint>, Vec<PlanSource>)> {
    let events = state.events();
    let mut open: Vec<bool> = vec![false; events.len()];
    for &e in state.unobserved() {
        open[e] = true;
    }
    if strategy == Strategy::ProximalRecurrence {
        return Ok(iterate_proximal(state, &mut open, config));
    }
    let mut sites = vec![];
    let mut sources = vec![];
    for _ in 0..config.insert_count {
        let remaining: Vec<EventNode> = events
            .iter()
            .zip(&open)
            .filter(|(_, &o)| o)
            .map(|(e, _)| e.clone())
            .collect();
        if remaining.is_empty() {
            break;
        }
        let (found, source) = propose(strategy, &remaining, 1, config, params, seed)?;
        let Some(&site) = found.first() else { break };
        for (e, slot) in events.iter().zip(open.iter_mut()) {
            if *slot && haversine(site, e.location, config.earth_radius_km) <= config.radius_km {
                *slot = false;
            }
        }
        sites.push(site);
        sources.push(source);
    }
    Ok((sites, sources))
}

/// Iterative proximal recurrence without recomputing neighbourhoods.
///
/// Restricting the original neighbourhoods to the still-open events gives
/// exactly the neighbourhoods of a fresh run on those events, because the
/// open events keep their relative order.
fn iterate_proximal(
    state: &NetworkState,
    open: &mut [bool],
    config: &NetworkConfig,
) -> (Vec<GeoPoint>, Vec<PlanSource>) {
    let ue = state.unobserved();
    let points: Vec<GeoPoint> = ue.iter().map(|&e| state.events()[e].location).collect();
    let hoods = proxrec::neighborhoods_streamed(&points, config.radius_km, config.earth_radius_km);
    let mut live: Vec<bool> = ue.iter().map(|&e| open[e]).collect();

    let mut sites = vec![];
    let mut sources = vec![];
    for _ in 0..config.insert_count {
        let mut best: Option<(usize, usize)> = None;
        for i in (0..points.len()).filter(|&i| live[i]) {
            let density = hoods[i].iter().filter(|&&j| live[j]).count();
            if best.map_or(true, |(_, d)| density > d) {
                best = Some((i, density));
            }
        }
        let Some((anchor, density)) = best else { break };

        // positions within the open subsequence
        let mut rank = vec![usize::MAX; points.len()];
        for (pos, i) in (0..points.len()).filter(|&i| live[i]).enumerate() {
            rank[i] = pos;
        }
        let members: Vec<usize> = hoods[anchor].iter().filter(|&&j| live[j]).map(|&j| rank[j]).collect();
        sources.push(PlanSource::Selection(ClusterSelection {
            clusters: vec![proxrec::AnchoredCluster {
                anchor_index: rank[anchor],
                anchor_location: points[anchor],
                member_indices: members,
                density,
            }],
            radius_km: config.radius_km,
            requested_n: 1,
        }));

        let site = points[anchor];
        for (k, &e) in ue.iter().enumerate() {
            if live[k] && haversine(site, state.events()[e].location, config.earth_radius_km) <= config.radius_km {
                live[k] = false;
                open[e] = false;
            }
        }
        sites.push(site);
    }
    (sites, sources)
}

/// Adds the planned observers and rebuilds the network.
pub fn apply_insertions(
    state: &NetworkState,
    plan: &InsertionPlan,
    config: &NetworkConfig,
) -> Result<(NetworkState, InsertionReport)> {
    if plan.state_fingerprint != state.fingerprint()
        || config.radius_km != state.radius_km()
        || config.earth_radius_km != state.earth_radius_km()
    {
        return Err(Error::StateMismatch);
    }
    let observers: Vec<ObserverNode> = state
        .observers()
        .iter()
        .chain(&plan.new_observers)
        .cloned()
        .collect();
    let after = init_stroobnet(observers, state.events().to_vec(), config)?;

    let new_node_degrees = if plan.new_observers.is_empty() || state.unobserved().is_empty() {
        vec![0; plan.new_observers.len()]
    } else {
        let dm = bipartite_matrix(&plan.new_observers, &state.unobserved_events(), config.earth_radius_km)?;
        observer_centrality(&dm, config.radius_km)?
    };
    let before_stats = coverage_stats(state);
    let after_stats = coverage_stats(&after);
    if after_stats.observed < before_stats.observed {
        return Err(Error::Invariant("insertion shrank the observed set".into()));
    }
    let report = InsertionReport {
        strategy: plan.strategy,
        mode: plan.mode,
        before: before_stats,
        after: after_stats,
        new_node_degrees,
        observed_delta: after_stats.observed - before_stats.observed,
    };
    Ok((after, report))
}

/// One strategy's outcome in a side-by-side comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub strategy: Strategy,
    pub mode: InsertionMode,
    pub planned: usize,
    pub coverage_before: CoverageStats,
    pub coverage_after: CoverageStats,
    pub observed_delta: usize,
    pub new_node_degrees: Vec<usize>,
    pub shift: ShiftSummary,
}

/// Runs every strategy from the same state.
pub fn compare_strategies(
    state: &NetworkState,
    strategies: &[Strategy],
    params: &StrategyParams,
    config: &NetworkConfig,
    mode: InsertionMode,
    seed: u64,
) -> Result<Vec<ComparisonRow>> {
    strategies
        .iter()
        .map(|&strategy| {
            let plan = plan_insertions(state, strategy, params, config, mode, seed)?;
            let (_, report) = apply_insertions(state, &plan, config)?;
            Ok(ComparisonRow {
                strategy,
                mode,
                planned: plan.new_observers.len(),
                coverage_before: report.before,
                coverage_after: report.after,
                observed_delta: report.observed_delta,
                shift: shift_summary(state.centrality(), &report.new_node_degrees)?,
                new_node_degrees: report.new_node_degrees,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::default_config;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    fn east(pt: GeoPoint, km: f64) -> GeoPoint {
        p(pt.lat, pt.lon + km / (111.32 * pt.lat.to_radians().cos()))
    }

    fn north(pt: GeoPoint, km: f64) -> GeoPoint {
        p(pt.lat + km / 111.2, pt.lon)
    }

    /// Observers far away from three separated blobs plus sparse noise.
    fn planted(seed: u64) -> NetworkState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = p(29.95, -90.07);
        let mut events = vec![];
        for (b, size) in [(0.0, 12), (2.0, 9), (4.0, 6)] {
            let c = east(base, b);
            for _ in 0..size {
                events.push(north(east(c, rng.gen_range(-0.04..0.04)), rng.gen_range(-0.04..0.04)));
            }
        }
        for _ in 0..15 {
            events.push(north(east(base, rng.gen_range(-3.0..7.0)), rng.gen_range(3.0..6.0)));
        }
        let events = events.into_iter().enumerate().map(|(i, l)| EventNode::new(format!("e{i}"), l)).collect();
        let observers = vec![ObserverNode::new("o0", north(base, -5.0)), ObserverNode::new("o1", north(base, 10.0))];
        init_stroobnet(observers, events, &default_config()).unwrap()
    }

    fn cfg(n: usize) -> NetworkConfig {
        default_config().with_insert_count(n).unwrap()
    }

    #[test]
    fn strategy_names_parse() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!(matches!("unknown".parse::<Strategy>(), Err(Error::UnknownStrategy(_))));
    }

    #[test]
    fn nothing_unobserved() {
        let here = p(29.95, -90.07);
        let s = init_stroobnet(vec![ObserverNode::new("o", here)], vec![EventNode::new("e", here)], &default_config()).unwrap();
        let r = plan_insertions(&s, Strategy::Mode, &StrategyParams::default(), &default_config(), InsertionMode::Batch, 0);
        assert!(matches!(r, Err(Error::NothingUnobserved)));
    }

    #[test]
    fn single_unobserved_event_any_strategy() {
        let here = p(29.95, -90.07);
        let far = p(30.5, -90.07);
        let s = init_stroobnet(vec![ObserverNode::new("o", here)], vec![EventNode::new("e", far)], &default_config()).unwrap();
        for strategy in [Strategy::ProximalRecurrence, Strategy::Kmeans, Strategy::Mode] {
            for mode in [InsertionMode::Batch, InsertionMode::Iterative] {
                let plan = plan_insertions(&s, strategy, &StrategyParams::default(), &default_config(), mode, 1).unwrap();
                assert_eq!(plan.new_observers.len(), 1, "{strategy} {mode:?}");
                assert_eq!(plan.new_observers[0].location, far);
                assert_eq!(plan.new_observers[0].membership, Membership::Planned);
                assert!(plan.new_observers[0].id.starts_with(PLANNED_ID_PREFIX));
            }
        }
    }

    #[test]
    fn batch_and_iterative_coincide_on_separated_blobs() {
        for seed in 0..10 {
            let s = planted(seed);
            let batch = plan_insertions(&s, Strategy::ProximalRecurrence, &StrategyParams::default(), &cfg(3), InsertionMode::Batch, 0).unwrap();
            let iter = plan_insertions(&s, Strategy::ProximalRecurrence, &StrategyParams::default(), &cfg(3), InsertionMode::Iterative, 0).unwrap();
            let locs = |p: &InsertionPlan| p.new_observers.iter().map(|o| o.location).collect::<Vec<_>>();
            assert_eq!(locs(&batch), locs(&iter), "seed {seed}");
            assert_eq!(iter.sources.len(), 3);
        }
    }

    #[test]
    fn colocated_insertion_observes_event() {
        let s = planted(1);
        let target = s.unobserved()[0];
        let plan = InsertionPlan {
            strategy: Strategy::Mode,
            mode: InsertionMode::Batch,
            seed: 0,
            state_fingerprint: s.fingerprint(),
            new_observers: vec![planned_observer(Strategy::Mode, 0, s.events()[target].location)],
            sources: vec![],
        };
        let (after, report) = apply_insertions(&s, &plan, &default_config()).unwrap();
        assert!(report.observed_delta >= 1);
        assert!(after.observed().contains(&target));
        after.check_invariants().unwrap();
    }

    #[test]
    fn empty_plan_is_identity() {
        let s = planted(2);
        let plan = InsertionPlan {
            strategy: Strategy::Grid,
            mode: InsertionMode::Batch,
            seed: 0,
            state_fingerprint: s.fingerprint(),
            new_observers: vec![],
            sources: vec![],
        };
        let (after, report) = apply_insertions(&s, &plan, &default_config()).unwrap();
        assert_eq!(report.before, report.after);
        assert_eq!(report.observed_delta, 0);
        assert_eq!(after.centrality(), s.centrality());
    }

    #[test]
    fn anchor_degree_equals_density() {
        for seed in 0..10 {
            let s = planted(seed);
            let plan = plan_insertions(&s, Strategy::ProximalRecurrence, &StrategyParams::default(), &cfg(5), InsertionMode::Batch, 0).unwrap();
            let (_, report) = apply_insertions(&s, &plan, &cfg(5)).unwrap();
            let PlanSource::Selection(sel) = &plan.sources[0] else { panic!() };
            let ue = s.unobserved_events();
            for (cluster, &degree) in sel.clusters.iter().zip(&report.new_node_degrees) {
                let recount = ue.iter().filter(|e| haversine(cluster.anchor_location, e.location, 6371.0) <= 0.2).count();
                assert_eq!(degree, cluster.density);
                assert_eq!(degree, recount);
            }
        }
    }

    #[test]
    fn mismatched_state_rejected() {
        let a = planted(3);
        let b = planted(4);
        let plan = plan_insertions(&a, Strategy::Mode, &StrategyParams::default(), &cfg(2), InsertionMode::Batch, 0).unwrap();
        assert!(matches!(apply_insertions(&b, &plan, &cfg(2)), Err(Error::StateMismatch)));
        let wider = cfg(2).with_radius_km(0.3).unwrap();
        assert!(matches!(apply_insertions(&a, &plan, &wider), Err(Error::StateMismatch)));
    }

    #[test]
    fn proximal_fast_path_matches_generic_rounds() {
        for seed in 0..10 {
            let s = planted(seed);
            let config = cfg(6);
            let mut open = vec![false; s.events().len()];
            for &e in s.unobserved() {
                open[e] = true;
            }
            let (fast_sites, fast_sources) = iterate_proximal(&s, &mut open.clone(), &config);

            let mut sites = vec![];
            let mut sources = vec![];
            for _ in 0..config.insert_count {
                let remaining: Vec<EventNode> =
                    s.events().iter().zip(&open).filter(|(_, &o)| o).map(|(e, _)| e.clone()).collect();
                if remaining.is_empty() {
                    break;
                }
                let (found, source) =
                    propose(Strategy::ProximalRecurrence, &remaining, 1, &config, &StrategyParams::default(), 0).unwrap();
                for (e, slot) in s.events().iter().zip(open.iter_mut()) {
                    if haversine(found[0], e.location, 6371.0) <= 0.2 {
                        *slot = false;
                    }
                }
                sites.push(found[0]);
                sources.push(source);
            }
            assert_eq!(fast_sites, sites, "seed {seed}");
            assert_eq!(fast_sources, sources, "seed {seed}");
        }
    }

    #[test]
    fn iterative_never_worse_than_batch_for_proximal_recurrence() {
        for seed in 0..25 {
            let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
            let base = p(29.95, -90.07);
            let events: Vec<_> = (0..120)
                .map(|i| EventNode::new(format!("e{i}"), north(east(base, rng.gen_range(0.0..1.5)), rng.gen_range(0.0..1.5))))
                .collect();
            let s = init_stroobnet(vec![ObserverNode::new("o", north(base, -3.0))], events, &default_config()).unwrap();
            let run = |mode| {
                let plan = plan_insertions(&s, Strategy::ProximalRecurrence, &StrategyParams::default(), &cfg(6), mode, 0).unwrap();
                apply_insertions(&s, &plan, &cfg(6)).unwrap().1.after.unobserved
            };
            assert!(run(InsertionMode::Iterative) <= run(InsertionMode::Batch), "seed {seed}");
        }
    }

    #[test]
    fn every_strategy_keeps_coverage_monotone() {
        let s = planted(5);
        let rows = compare_strategies(&s, &Strategy::ALL, &StrategyParams::default(), &cfg(3), InsertionMode::Batch, 7).unwrap();
        assert_eq!(rows.len(), 5);
        for row in &rows {
            assert!(row.coverage_after.observed >= row.coverage_before.observed);
            assert!(row.planned <= 3);
        }
    }
}
