//! `stroobnet` command-line pipeline.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use stroobnet::error::ErrorClass;
use stroobnet::io::artifacts::{
    coverage_csv, histogram_csv, Classification, ComparisonArtifact, DegreeReport, PlanArtifact,
    StateSummary,
};
use stroobnet::io::synth::{write_events_csv, write_observers_csv};
use stroobnet::io::{
    filter_events, load_events_csv, load_observers_csv, load_type_allowlist, random_centers,
    read_json, synth_generate, to_canonical_json, write_atomic, BoundingBox, PlantedCluster,
    SyntheticSpec,
};
use stroobnet::metrics::{coverage_stats, degree_histogram, shift_summary, HistogramSource, DEFAULT_BIN_WIDTH};
use stroobnet::planner::{
    apply_insertions, compare_strategies, plan_insertions, InsertionMode, Strategy, StrategyParams,
};
use stroobnet::{default_config, init_stroobnet, Error, NetworkConfig, NetworkState, Result};

const NOLA_BBOX: &str = "29.90,-90.15,30.00,-90.00";

#[derive(Parser)]
#[command(name = "stroobnet", version, about = "Observer/event coverage networks and observer placement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: GlobalOpts,
}

#[derive(Args)]
struct GlobalOpts {
    /// Observation radius in kilometres.
    #[arg(long, global = true, default_value_t = 0.2)]
    radius_km: f64,
    /// Number of observers to plan.
    #[arg(long, global = true, default_value_t = 100)]
    insert_count: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// DBSCAN neighbourhood radius (defaults to --radius-km).
    #[arg(long, global = true)]
    eps_km: Option<f64>,
    #[arg(long, global = true, default_value_t = stroobnet::baselines::DEFAULT_MIN_PTS)]
    min_pts: usize,
    /// k-means cluster count (defaults to --insert-count).
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true, default_value_t = stroobnet::baselines::DEFAULT_BIN_SIZE_DEG)]
    bin_size_deg: f64,
    /// Directory to also write artifacts into.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    observers: PathBuf,
    #[arg(long)]
    events: PathBuf,
    /// File of allowed event type codes, one per line.
    #[arg(long)]
    types: Option<PathBuf>,
    /// lat_min,lon_min,lat_max,lon_max
    #[arg(long)]
    bbox: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate input files and print ingestion reports.
    Ingest {
        #[arg(long)]
        observers: Option<PathBuf>,
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long)]
        types: Option<PathBuf>,
        #[arg(long)]
        bbox: Option<String>,
    },
    /// Build the network and print a state summary.
    Build(Inputs),
    /// List observed and unobserved events.
    Classify(Inputs),
    /// Plan new observer sites.
    Plan {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        strategy: String,
        #[arg(long, default_value = "batch")]
        mode: String,
    },
    /// Apply a saved plan and report the coverage change.
    Apply {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Run several strategies from the same state side by side.
    Compare {
        #[command(flatten)]
        inputs: Inputs,
        /// Comma-separated strategy names.
        #[arg(long, default_value = "proximal_recurrence,kmeans,dbscan,mode,grid")]
        strategies: String,
        #[arg(long, default_value = "batch")]
        mode: String,
    },
    /// Generate a synthetic fixture (observers.csv, events.csv, ground_truth.json).
    Synth {
        #[arg(long, default_value_t = 500)]
        n_observers: usize,
        #[arg(long, default_value_t = 200)]
        n_background: usize,
        #[arg(long, default_value_t = 5)]
        clusters: usize,
        #[arg(long, default_value_t = 20)]
        cluster_size: usize,
        #[arg(long, default_value_t = 0.05)]
        spread_km: f64,
        /// Minimum distance between planted centres.
        #[arg(long, default_value_t = 1.0)]
        min_separation_km: f64,
        #[arg(long, default_value = NOLA_BBOX)]
        bbox: String,
    },
    /// Degree histograms and coverage, optionally with a plan applied.
    Report {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
        bin_width: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code: u8 = match e.class() {
                ErrorClass::Input => 2,
                ErrorClass::Config => 3,
                ErrorClass::Invariant => 4,
            };
            let record = json!({ "error": e.kind(), "message": e.to_string(), "exit_code": code });
            eprint!("{}", to_canonical_json(&record).unwrap_or_else(|_| format!("{record}\n")));
            ExitCode::from(code)
        }
    }
}

struct Ctx {
    opts: GlobalOpts,
}

impl Ctx {
    fn config(&self) -> Result<NetworkConfig> {
        default_config()
            .with_radius_km(self.opts.radius_km)?
            .with_insert_count(self.opts.insert_count)
    }

    fn params(&self) -> StrategyParams {
        StrategyParams {
            k: self.opts.k,
            eps_km: self.opts.eps_km,
            min_pts: self.opts.min_pts,
            bin_size_deg: self.opts.bin_size_deg,
            ..StrategyParams::default()
        }
    }

    /// Prints `text` and writes it to `<out-dir>/<name>` when requested.
    fn emit_text(&self, name: &str, text: &str) -> Result<()> {
        print!("{text}");
        self.save(name, text)
    }

    fn save(&self, name: &str, text: &str) -> Result<()> {
        if let Some(dir) = &self.opts.out_dir {
            write_atomic(&dir.join(name), text.as_bytes())?;
        }
        Ok(())
    }

    fn emit_json<T: Serialize>(&self, stem: &str, value: &T) -> Result<()> {
        self.emit_text(&format!("{stem}.json"), &to_canonical_json(value)?)
    }

    fn json_only(&self, what: &str) -> Result<()> {
        match self.opts.format {
            Format::Json => Ok(()),
            Format::Csv => Err(Error::InvalidConfig(format!("{what} output is JSON only"))),
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx { opts: cli.opts };
    match cli.command {
        Command::Ingest { observers, events, types, bbox } => {
            ctx.json_only("ingest")?;
            if observers.is_none() && events.is_none() {
                return Err(Error::InvalidConfig("ingest needs --observers and/or --events".into()));
            }
            let mut out = serde_json::Map::new();
            if let Some(path) = observers {
                let (_, report) = load_observers_csv(&path)?;
                out.insert("observers".into(), serde_json::to_value(report)?);
            }
            if let Some(path) = events {
                let (events, report) = load_events_csv(&path)?;
                let kept = apply_filters(events, types.as_deref(), bbox.as_deref())?;
                out.insert("events".into(), serde_json::to_value(report)?);
                out.insert("events_after_filter".into(), kept.len().into());
            }
            ctx.emit_json("ingest", &out)
        }
        Command::Build(inputs) => {
            ctx.json_only("build")?;
            let state = load_state(&inputs, &ctx.config()?)?;
            ctx.emit_json("state", &StateSummary::from(&state))
        }
        Command::Classify(inputs) => {
            let state = load_state(&inputs, &ctx.config()?)?;
            let c = Classification::from(&state);
            match ctx.opts.format {
                Format::Json => ctx.emit_json("classification", &c),
                Format::Csv => ctx.emit_text("classification.csv", &c.to_csv()?),
            }
        }
        Command::Plan { inputs, strategy, mode } => {
            ctx.json_only("plan")?;
            let strategy: Strategy = strategy.parse()?;
            let mode: InsertionMode = mode.parse()?;
            let config = ctx.config()?;
            let state = load_state(&inputs, &config)?;
            let plan = plan_insertions(&state, strategy, &ctx.params(), &config, mode, ctx.opts.seed)?;
            ctx.emit_json("plan", &PlanArtifact::from(&plan))
        }
        Command::Apply { inputs, plan } => {
            ctx.json_only("apply")?;
            let config = ctx.config()?;
            let state = load_state(&inputs, &config)?;
            let plan = read_json::<PlanArtifact>(&plan)?.into_plan()?;
            let (after, report) = apply_insertions(&state, &plan, &config)?;
            ctx.emit_json("apply", &json!({ "report": report, "after": StateSummary::from(&after) }))
        }
        Command::Compare { inputs, strategies, mode } => {
            let strategies = strategies
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(str::parse)
                .collect::<Result<Vec<Strategy>>>()?;
            if strategies.is_empty() {
                return Err(Error::InvalidConfig("no strategies given".into()));
            }
            let mode: InsertionMode = mode.parse()?;
            let config = ctx.config()?;
            let state = load_state(&inputs, &config)?;
            let rows = compare_strategies(&state, &strategies, &ctx.params(), &config, mode, ctx.opts.seed)?;
            let artifact = ComparisonArtifact { config, seed: ctx.opts.seed, mode, rows };
            match ctx.opts.format {
                Format::Json => ctx.emit_json("compare", &artifact),
                Format::Csv => ctx.emit_text("compare.csv", &artifact.to_csv()?),
            }
        }
        Command::Synth {
            n_observers,
            n_background,
            clusters,
            cluster_size,
            spread_km,
            min_separation_km,
            bbox,
        } => {
            ctx.json_only("synth")?;
            let bounding_box: BoundingBox = bbox.parse()?;
            let seed = ctx.opts.seed;
            let planted_clusters = random_centers(&bounding_box, clusters, min_separation_km, seed)
                .into_iter()
                .map(|center| PlantedCluster { center, count: cluster_size, spread_km })
                .collect();
            let spec = SyntheticSpec {
                n_observers,
                n_background_events: n_background,
                planted_clusters,
                bounding_box,
                seed,
            };
            let data = synth_generate(&spec)?;
            let dir = ctx.opts.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
            let mut buf = vec![];
            write_observers_csv(&mut buf, &data.observers)?;
            write_atomic(&dir.join("observers.csv"), &buf)?;
            let mut buf = vec![];
            write_events_csv(&mut buf, &data.events)?;
            write_atomic(&dir.join("events.csv"), &buf)?;
            let summary = json!({
                "spec": spec,
                "observers": data.observers.len(),
                "events": data.events.len(),
                "ground_truth": data.ground_truth,
            });
            let text = to_canonical_json(&summary)?;
            write_atomic(&dir.join("ground_truth.json"), text.as_bytes())?;
            print!("{text}");
            Ok(())
        }
        Command::Report { inputs, plan, bin_width } => {
            let config = ctx.config()?;
            let state = load_state(&inputs, &config)?;
            let original = degree_histogram(state.centrality(), bin_width, HistogramSource::Original)?;
            let mut report = DegreeReport {
                original,
                inserted: None,
                combined: None,
                coverage: coverage_stats(&state),
                shift: None,
            };
            if let Some(path) = plan {
                let plan = read_json::<PlanArtifact>(&path)?.into_plan()?;
                let (after, applied) = apply_insertions(&state, &plan, &config)?;
                let inserted = &applied.new_node_degrees;
                if !inserted.is_empty() {
                    let combined: Vec<usize> = state.centrality().iter().chain(inserted).copied().collect();
                    report.inserted = Some(degree_histogram(inserted, bin_width, HistogramSource::Inserted)?);
                    report.combined = Some(degree_histogram(&combined, bin_width, HistogramSource::Combined)?);
                    report.shift = Some(shift_summary(state.centrality(), inserted)?);
                }
                report.coverage = coverage_stats(&after);
            }
            match ctx.opts.format {
                Format::Json => ctx.emit_json("report", &report),
                Format::Csv => {
                    ctx.save("coverage.csv", &coverage_csv(&report.coverage)?)?;
                    ctx.save("histogram_original.csv", &histogram_csv(&report.original)?)?;
                    if let Some(h) = &report.inserted {
                        ctx.save("histogram_inserted.csv", &histogram_csv(h)?)?;
                    }
                    let shown = report.combined.as_ref().unwrap_or(&report.original);
                    if let Some(h) = &report.combined {
                        ctx.save("histogram_combined.csv", &histogram_csv(h)?)?;
                    }
                    print!("{}", histogram_csv(shown)?);
                    Ok(())
                }
            }
        }
    }
}

fn apply_filters(
    events: Vec<stroobnet::EventNode>,
    types: Option<&Path>,
    bbox: Option<&str>,
) -> Result<Vec<stroobnet::EventNode>> {
    let allow = match types {
        Some(p) => load_type_allowlist(p)?,
        None => HashSet::new(),
    };
    let bbox: Option<BoundingBox> = bbox.map(str::parse).transpose()?;
    Ok(filter_events(events, &allow, bbox.as_ref()))
}

fn load_state(inputs: &Inputs, config: &NetworkConfig) -> Result<NetworkState> {
    let (observers, _) = load_observers_csv(&inputs.observers)?;
    let (events, _) = load_events_csv(&inputs.events)?;
    let events = apply_filters(events, inputs.types.as_deref(), inputs.bbox.as_deref())?;
    init_stroobnet(observers, events, config)
}
