//! Command-line interface: generate, simulate, sweep, report.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error, 3 partial sweep
//! failure. Settings resolve as defaults, then `--config` file entries,
//! then flags.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::config::{ConfigError, ExperimentSpec, Location, NetworkSource};
use crate::engine::{self, ExclusionTable, IterationRecord, RecLogEntry};
use crate::graph::LabeledDigraph;
use crate::io;
use crate::metrics::exposure_ratio;
use crate::netgen::NetworkStats;
use crate::sweep::{run_sweep, SweepGrid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_PARTIAL_SWEEP: i32 = 3;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
    PartialSweep { failed: usize, total: usize },
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
            CliError::PartialSweep { .. } => EXIT_PARTIAL_SWEEP,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Runtime(msg) => write!(f, "{msg}"),
            CliError::PartialSweep { failed, total } => {
                write!(f, "{failed} of {total} sweep cells failed")
            }
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

macro_rules! runtime_from {
    ($($ty:ty),*) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Runtime(e.to_string())
            }
        })*
    };
}
runtime_from!(
    crate::io::IoError,
    crate::engine::EngineError,
    crate::netgen::NetgenError,
    crate::config::BuildError,
    crate::sweep::SweepError,
    crate::graph::GraphError,
    std::io::Error
);

#[derive(Parser, Debug)]
#[command(
    name = "linkloop",
    version,
    about = "Feedback-loop simulator for people recommenders in bi-populated social networks"
)]
struct Cli {
    /// key=value configuration file applied before flags
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Single seed (shorthand for --seeds with one entry)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a network with target minority share and homophily
    Generate(GenerateArgs),
    /// Run the recommendation feedback loop and emit per-iteration metrics
    Simulate(SimulateArgs),
    /// Run a parameter grid and summarize exposure growth per cell
    Sweep(SweepArgs),
    /// Derive plot-ready tables from existing metrics CSVs
    Report(ReportArgs),
}

#[derive(Args, Debug, Default)]
struct NetArgs {
    /// Named configuration G0..G4
    #[arg(long)]
    preset: Option<String>,
    /// Node count for generated networks
    #[arg(long)]
    n: Option<usize>,
    /// Average out-degree of the seed graph
    #[arg(long = "avg-out-degree")]
    avg_out_degree: Option<f64>,
    /// Minority share target
    #[arg(long = "s-m")]
    s_m: Option<f64>,
    /// Minority homophily target
    #[arg(long = "h-m")]
    h_m: Option<f64>,
    /// Majority homophily target
    #[arg(long = "h-maj")]
    h_maj: Option<f64>,
    /// Tolerance on achieved homophily
    #[arg(long)]
    tolerance: Option<f64>,
    /// Edge-list file to load instead of generating
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Label file to load instead of generating
    #[arg(long)]
    labels: Option<PathBuf>,
}

impl NetArgs {
    fn apply(&self, spec: &mut ExperimentSpec) -> Result<(), CliError> {
        let entries: [(&'static str, Option<String>); 7] = [
            ("preset", self.preset.clone()),
            ("n", self.n.map(|v| v.to_string())),
            ("avg_out_degree", self.avg_out_degree.map(|v| v.to_string())),
            ("s_m", self.s_m.map(|v| v.to_string())),
            ("h_m", self.h_m.map(|v| v.to_string())),
            ("h_M", self.h_maj.map(|v| v.to_string())),
            ("tolerance", self.tolerance.map(|v| v.to_string())),
        ];
        for (key, value) in entries {
            if let Some(value) = value {
                spec.apply(key, &value, &Location::Flag(key))?;
            }
        }
        if let Some(edges) = &self.edges {
            spec.edges = Some(edges.clone());
        }
        if let Some(labels) = &self.labels {
            spec.labels = Some(labels.clone());
        }
        Ok(())
    }
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Iterations of the feedback loop
    #[arg(long = "T", value_name = "T")]
    iterations: Option<usize>,
    /// Fraction of users sampled per iteration
    #[arg(long)]
    alpha: Option<f64>,
    /// Recommendation list length
    #[arg(long)]
    k: Option<usize>,
    /// ada, sls, als, or rnd
    #[arg(long)]
    recommender: Option<String>,
    /// lzy, rnd, psb, or mix
    #[arg(long)]
    behavior: Option<String>,
    /// Comma-separated replicate seeds
    #[arg(long)]
    seeds: Option<String>,
    /// ALS latent dimension
    #[arg(long = "als-d")]
    als_d: Option<usize>,
    /// ALS regularization weight
    #[arg(long = "als-lambda")]
    als_lambda: Option<f64>,
    /// ALS confidence scale
    #[arg(long = "als-conf-alpha")]
    als_conf_alpha: Option<f64>,
    /// ALS sweeps per training round
    #[arg(long = "als-sweeps")]
    als_sweeps: Option<usize>,
    /// SALSA power-iteration cap
    #[arg(long = "sls-max-iters")]
    sls_max_iters: Option<usize>,
    /// SALSA convergence tolerance
    #[arg(long = "sls-tol")]
    sls_tol: Option<f64>,
    /// Exposure-concentration thresholds, in percent
    #[arg(long)]
    percentiles: Option<String>,
}

impl RunArgs {
    fn apply(&self, spec: &mut ExperimentSpec) -> Result<(), CliError> {
        let entries: [(&'static str, Option<String>); 13] = [
            ("T", self.iterations.map(|v| v.to_string())),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("k", self.k.map(|v| v.to_string())),
            ("recommender", self.recommender.clone()),
            ("behavior", self.behavior.clone()),
            ("seeds", self.seeds.clone()),
            ("als.d", self.als_d.map(|v| v.to_string())),
            ("als.lambda", self.als_lambda.map(|v| v.to_string())),
            ("als.conf_alpha", self.als_conf_alpha.map(|v| v.to_string())),
            ("als.sweeps", self.als_sweeps.map(|v| v.to_string())),
            ("sls.max_iters", self.sls_max_iters.map(|v| v.to_string())),
            ("sls.tol", self.sls_tol.map(|v| v.to_string())),
            ("percentiles", self.percentiles.clone()),
        ];
        for (key, value) in entries {
            if let Some(value) = value {
                spec.apply(key, &value, &Location::Flag(key))?;
            }
        }
        Ok(())
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    net: NetArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    net: NetArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Write the per-user recommendation log as JSONL
    #[arg(long = "emit-recs")]
    emit_recs: bool,
    /// Iterations at which to write graph snapshots
    #[arg(long = "snapshot-at")]
    snapshot_at: Option<String>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    net: NetArgs,
    #[command(flatten)]
    run: RunArgs,
    /// e_mm axis (comma-separated)
    #[arg(long = "emm", default_value = "0.05,0.5,0.95")]
    emm_axis: String,
    /// s_m axis (comma-separated)
    #[arg(long = "sm", default_value = "0.1,0.3,0.45")]
    sm_axis: String,
    /// Recommender axis
    #[arg(long)]
    recommenders: Option<String>,
    /// Behavior axis
    #[arg(long)]
    behaviors: Option<String>,
    /// Alpha axis
    #[arg(long)]
    alphas: Option<String>,
    /// k axis
    #[arg(long)]
    ks: Option<String>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Per-seed metrics CSVs produced by `simulate`
    #[arg(required = true, value_name = "CSV")]
    inputs: Vec<PathBuf>,
}

fn parse_axis<T: std::str::FromStr>(name: &str, raw: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| CliError::Usage(format!("--{name}: bad value '{s}': {e}")))
        })
        .collect()
}

/// Entry point used by `main`; parses real process arguments.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Testable entry point. Returns the process exit code.
pub fn run_from<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: {err}");
            if matches!(err, CliError::Usage(_)) {
                let _ = Cli::command().print_help();
            }
            err.exit_code()
        }
    }
}

fn base_spec(
    config: &Option<PathBuf>,
    seed: Option<u64>,
    out: &Option<PathBuf>,
) -> Result<ExperimentSpec, CliError> {
    let mut spec = ExperimentSpec::default();
    if let Some(path) = config {
        if !path.exists() {
            return Err(CliError::Usage(format!(
                "config file {} does not exist",
                path.display()
            )));
        }
        spec.apply_file(path)?;
    }
    if let Some(seed) = seed {
        spec.apply("seed", &seed.to_string(), &Location::Flag("--seed"))?;
    }
    if let Some(out) = out {
        spec.out_dir = Some(out.clone());
    }
    Ok(spec)
}

fn out_dir(spec: &ExperimentSpec) -> Result<PathBuf, CliError> {
    let dir = spec.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let mut spec = base_spec(&cli.config, cli.seed, &cli.out)?;
    match cli.command {
        Command::Generate(args) => {
            args.net.apply(&mut spec)?;
            cmd_generate(&spec)
        }
        Command::Simulate(args) => {
            args.net.apply(&mut spec)?;
            args.run.apply(&mut spec)?;
            if args.emit_recs {
                spec.emit_recs = true;
            }
            if let Some(at) = &args.snapshot_at {
                spec.apply("snapshot_at", at, &Location::Flag("--snapshot-at"))?;
            }
            // --seed must beat --seeds coming from the same command line
            if let Some(seed) = cli.seed {
                spec.seeds = Some(vec![seed]);
            }
            cmd_simulate(&spec)
        }
        Command::Sweep(args) => {
            args.net.apply(&mut spec)?;
            args.run.apply(&mut spec)?;
            let grid = SweepGrid {
                e_mm: parse_axis("emm", &args.emm_axis)?,
                s_m: parse_axis("sm", &args.sm_axis)?,
                recommenders: match &args.recommenders {
                    Some(raw) => parse_axis("recommenders", raw)?,
                    None => vec![spec.sim.recommender],
                },
                behaviors: match &args.behaviors {
                    Some(raw) => parse_axis("behaviors", raw)?,
                    None => vec![spec.sim.behavior],
                },
                alphas: match &args.alphas {
                    Some(raw) => parse_axis("alphas", raw)?,
                    None => vec![spec.sim.alpha],
                },
                ks: match &args.ks {
                    Some(raw) => parse_axis("ks", raw)?,
                    None => vec![spec.sim.k],
                },
                base: spec,
            };
            cmd_sweep(grid)
        }
        Command::Report(args) => cmd_report(&spec, &args.inputs),
    }
}

fn cmd_generate(spec: &ExperimentSpec) -> Result<(), CliError> {
    let source = spec.network_source()?;
    if matches!(source, NetworkSource::Files { .. }) {
        return Err(CliError::Usage(
            "generate needs a preset or explicit targets, not input files".into(),
        ));
    }
    let dir = out_dir(spec)?;
    let prefix = spec
        .preset
        .map(|p| p.name().to_ascii_lowercase())
        .unwrap_or_else(|| "custom".into());
    for seed in spec.generate_seeds() {
        let config = source.net_config(seed).expect("generated source");
        let graph = source.materialize(seed)?;
        let achieved = NetworkStats::measure(&graph)?;
        let edges_file = format!("{prefix}_seed{seed}.edges");
        let labels_file = format!("{prefix}_seed{seed}.labels");
        io::write_edge_list(&dir.join(&edges_file), &graph)?;
        io::write_labels(&dir.join(&labels_file), &graph)?;
        io::write_provenance(
            &dir.join(format!("{prefix}_seed{seed}.json")),
            &io::Provenance {
                preset: spec.preset.map(|p| p.name().to_string()),
                config,
                achieved,
                edges_file,
                labels_file,
            },
        )?;
        println!(
            "{prefix} seed {seed}: n={} edges={} s_m={:.4} h_m={:.4} h_M={:.4}",
            achieved.n_nodes, achieved.n_edges, achieved.s_m, achieved.h_m, achieved.h_maj
        );
    }
    Ok(())
}

/// Stepwise run that can write intermediate snapshots and the rec log.
fn simulate_one_seed(
    spec: &ExperimentSpec,
    seed: u64,
    dir: &Path,
) -> Result<Vec<IterationRecord>, CliError> {
    let source = spec.network_source()?;
    let mut graph = source.materialize(seed)?;
    let mut sim = spec.sim.clone();
    sim.seed = seed;
    sim.validate()?;

    let initial = engine::initial_state(&graph)?;
    let mut exclusions = ExclusionTable::new(graph.node_count());
    let mut records = Vec::with_capacity(sim.iterations);
    let mut rec_log: Vec<RecLogEntry> = Vec::new();
    for t in 1..=sim.iterations {
        let (record, _, log) =
            engine::run_iteration(&mut graph, t, &sim, &mut exclusions, initial.edge_count)?;
        records.push(record);
        rec_log.extend(log);
        if spec.snapshot_at.contains(&t) {
            write_snapshot(dir, seed, t, &graph)?;
        }
    }
    io::write_metrics_csv(
        &dir.join(format!("metrics_seed{seed}.csv")),
        &records,
        &sim.percentiles,
    )?;
    if spec.emit_recs {
        io::write_rec_log(&dir.join(format!("recs_seed{seed}.jsonl")), &rec_log)?;
    }
    Ok(records)
}

fn write_snapshot(dir: &Path, seed: u64, t: usize, graph: &LabeledDigraph) -> Result<(), CliError> {
    io::write_edge_list(&dir.join(format!("snapshot_seed{seed}_t{t}.edges")), graph)?;
    io::write_labels(&dir.join(format!("snapshot_seed{seed}_t{t}.labels")), graph)?;
    Ok(())
}

fn cmd_simulate(spec: &ExperimentSpec) -> Result<(), CliError> {
    let dir = out_dir(spec)?;
    let seeds = spec.replicate_seeds();
    let mut runs: Vec<(u64, Vec<IterationRecord>)> = Vec::with_capacity(seeds.len());
    for &seed in &seeds {
        let records = simulate_one_seed(spec, seed, &dir)?;
        if let Some(last) = records.last() {
            let e_min = last
                .exposure
                .as_ref()
                .map(|e| e.e_min.to_string())
                .unwrap_or_else(|| "n/a".into());
            println!(
                "seed {seed}: T={} recs={} edges_added_total={} final_e_min={}",
                records.len(),
                last.recs_issued,
                records.iter().map(|r| r.edges_added).sum::<usize>(),
                e_min
            );
        }
        runs.push((seed, records));
    }
    let refs: Vec<(u64, &[IterationRecord])> =
        runs.iter().map(|(s, r)| (*s, r.as_slice())).collect();
    io::write_combined_csv(&dir.join("combined.csv"), &refs, &spec.sim.percentiles)?;
    println!("wrote {}", dir.join("combined.csv").display());
    Ok(())
}

fn cmd_sweep(grid: SweepGrid) -> Result<(), CliError> {
    let dir = out_dir(&grid.base)?;
    let report = run_sweep(&grid, &dir)?;
    let failed = report.failed_cells();
    let total = report.outcomes.len();
    println!(
        "sweep: {} cells, {} failed; summary at {}",
        total,
        failed,
        dir.join("summary.csv").display()
    );
    if failed == total && total > 0 {
        return Err(CliError::Runtime("every sweep cell failed".into()));
    }
    if failed > 0 {
        return Err(CliError::PartialSweep { failed, total });
    }
    Ok(())
}

struct SeedTable {
    t: Vec<usize>,
    e_min: Vec<Option<f64>>,
    gini_min: Vec<Option<f64>>,
    gini_maj: Vec<Option<f64>>,
    pexp: Vec<(String, Vec<Option<f64>>)>,
}

fn load_seed_table(path: &Path) -> Result<SeedTable, CliError> {
    let table = io::read_csv_table(path)?;
    let t_col = table
        .column("t")
        .ok_or_else(|| CliError::Runtime(format!("{}: missing 't' column", path.display())))?;
    let t: Vec<usize> = t_col
        .iter()
        .map(|v| v.map(|x| x as usize))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| CliError::Runtime(format!("{}: empty iteration cell", path.display())))?;
    let want = |name: &str| {
        table.column(name).ok_or_else(|| {
            CliError::Runtime(format!("{}: missing '{name}' column", path.display()))
        })
    };
    let pexp = table
        .columns
        .iter()
        .filter(|c| c.starts_with("pexp_"))
        .map(|c| (c.clone(), table.column(c).unwrap()))
        .collect();
    Ok(SeedTable {
        t,
        e_min: want("e_min")?,
        gini_min: want("gini_min")?,
        gini_maj: want("gini_maj")?,
        pexp,
    })
}

fn spread(values: &[f64]) -> (f64, f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (mean, min, max)
}

/// Exposure-ratio, Gini-trend, and percentile-exposure tables with
/// mean/min/max across the input seeds.
fn cmd_report(spec: &ExperimentSpec, inputs: &[PathBuf]) -> Result<(), CliError> {
    let dir = out_dir(spec)?;
    let tables: Vec<SeedTable> = inputs
        .iter()
        .map(|p| load_seed_table(p))
        .collect::<Result<_, _>>()?;
    let iterations = tables[0].t.clone();
    if iterations.first() != Some(&1) {
        return Err(CliError::Runtime(
            "report needs the iteration-1 baseline row".into(),
        ));
    }
    for table in &tables {
        if table.t != iterations {
            return Err(CliError::Runtime(
                "input CSVs cover different iteration ranges".into(),
            ));
        }
    }

    let mut ratio_rows = Vec::new();
    for (idx, &t) in iterations.iter().enumerate().skip(1) {
        let mut ratios = Vec::new();
        for table in &tables {
            let ratio = exposure_ratio(&table.e_min, idx + 1)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            ratios.push(ratio);
        }
        let (mean, min, max) = spread(&ratios);
        ratio_rows.push(format!("{t},{mean},{min},{max}"));
    }
    let mut ratio_csv = String::from("# schema=linkloop-report-ratio-v1\n");
    ratio_csv.push_str("t,ratio_mean,ratio_min,ratio_max\n");
    ratio_csv.push_str(&ratio_rows.join("\n"));
    ratio_csv.push('\n');
    fs::write(dir.join("ratio.csv"), ratio_csv)?;

    let mut gini_csv = String::from("# schema=linkloop-report-gini-v1\n");
    gini_csv.push_str(
        "t,gini_min_mean,gini_min_lo,gini_min_hi,gini_maj_mean,gini_maj_lo,gini_maj_hi\n",
    );
    for (idx, &t) in iterations.iter().enumerate() {
        let collect = |pick: fn(&SeedTable) -> &Vec<Option<f64>>| -> Vec<f64> {
            tables.iter().filter_map(|tb| pick(tb)[idx]).collect()
        };
        let minority = collect(|tb| &tb.gini_min);
        let majority = collect(|tb| &tb.gini_maj);
        if minority.is_empty() || majority.is_empty() {
            continue;
        }
        let (m_mean, m_lo, m_hi) = spread(&minority);
        let (j_mean, j_lo, j_hi) = spread(&majority);
        gini_csv.push_str(&format!(
            "{t},{m_mean},{m_lo},{m_hi},{j_mean},{j_lo},{j_hi}\n"
        ));
    }
    fs::write(dir.join("gini.csv"), gini_csv)?;

    let mut pexp_csv = String::from("# schema=linkloop-report-percentile-v1\n");
    pexp_csv.push_str("t,column,share_mean,share_min,share_max\n");
    for (idx, &t) in iterations.iter().enumerate() {
        for (name, _) in &tables[0].pexp {
            let values: Vec<f64> = tables
                .iter()
                .filter_map(|tb| {
                    tb.pexp
                        .iter()
                        .find(|(n, _)| n == name)
                        .and_then(|(_, col)| col[idx])
                })
                .collect();
            if values.is_empty() {
                continue;
            }
            let (mean, min, max) = spread(&values);
            pexp_csv.push_str(&format!("{t},{name},{mean},{min},{max}\n"));
        }
    }
    fs::write(dir.join("percentile.csv"), pexp_csv)?;

    println!(
        "wrote {}, {}, {}",
        dir.join("ratio.csv").display(),
        dir.join("gini.csv").display(),
        dir.join("percentile.csv").display()
    );
    Ok(())
}
