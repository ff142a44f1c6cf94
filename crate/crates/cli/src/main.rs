use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use rpdist::dynet::{
    aggregate_events, bench, distance_series, harden, linspace, run_experiment, write_aggregated, write_bench_csv,
    AggregateOptions, BenchConfig, ExperimentConfig, HardenMode, HardenOptions, Metric, MetricParams, SweepTemplate,
};
use rpdist::fast::FastRp2Options;
use rpdist::perturbation::{CandidatePolicy, GreedyOptions};
use rpdist::randgraph::{generate, generate_connected, GeneratorSpec, Model, DEFAULT_CONNECT_TRIES};
use rpdist::{load_edgelist, load_manifest, renormalized_resistance, resistance_matrix, save_edgelist, Error, Graph, RpOrder};

#[derive(Parser)]
#[command(name = "rpdist", version, about = "Resistance-perturbation distances for dynamic graphs")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distances between consecutive snapshots listed in a manifest.
    Dist(DistArgs),
    /// Sweep a random-model parameter and summarize distances to a fixed baseline.
    Experiment(ExperimentArgs),
    /// Find the edge whose addition most reduces the Kirchhoff index.
    Harden(HardenArgs),
    /// Sample a random graph.
    Gen(GenArgs),
    /// Turn an event log into windowed snapshots.
    Aggregate(AggregateArgs),
    /// Time the sketched RP-2 distance over growing latent-path graphs.
    Bench(BenchArgs),
    /// Dump the exact effective-resistance matrix as CSV.
    Resist(ResistArgs),
}

#[derive(Args)]
struct MetricArgs {
    /// Comma-separated metrics: rp1, rp2, rp, rp2fast, deltacon, cad, edit, lambda.
    #[arg(long, default_value = "rp1")]
    metric: String,

    /// Order of the `rp` metric (a number >= 1 or `inf`).
    #[arg(long, default_value = "1")]
    p: RpOrder,

    /// Accuracy of rp2fast.
    #[arg(long, default_value_t = 0.3)]
    epsilon: f64,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Use renormalized resistances for every RP metric.
    #[arg(long)]
    renormalized: bool,

    /// Report `inf` for disconnected snapshots instead of renormalizing.
    #[arg(long)]
    strict: bool,

    /// Sketch even when the sketch is no smaller than the graph.
    #[arg(long)]
    always_sketch: bool,
}

impl MetricArgs {
    fn params(&self) -> MetricParams {
        MetricParams {
            p: self.p,
            fast: FastRp2Options {
                epsilon: self.epsilon,
                seed: self.seed,
                exact_fallback: !self.always_sketch,
                ..FastRp2Options::default()
            },
            renormalized: self.renormalized,
            auto_renormalize: !self.strict,
            ..MetricParams::default()
        }
    }
}

#[derive(Args)]
struct DistArgs {
    /// Manifest of `label<TAB>path` lines.
    manifest: PathBuf,

    #[command(flatten)]
    metrics: MetricArgs,

    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepFamily {
    Sbm,
    LatentCircle,
    WattsStrogatz,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    model: SweepFamily,

    #[arg(long, default_value_t = 400)]
    n: usize,

    #[arg(long, default_value_t = 0.9)]
    p_in: f64,

    /// Baseline between-community probability; the sweep adds to it.
    #[arg(long, default_value_t = 0.005)]
    p_out: f64,

    /// Ring degree of the small-world model.
    #[arg(long, default_value_t = 40)]
    k: usize,

    /// Baseline rewiring probability; the sweep adds to it.
    #[arg(long, default_value_t = 0.01)]
    beta: f64,

    /// Latent-circle kernel scale (default 20/√π).
    #[arg(long)]
    scale: Option<f64>,

    #[arg(long, default_value_t = 400.0)]
    bandwidth: f64,

    #[arg(long, default_value_t = 0.0)]
    sweep_min: f64,

    #[arg(long)]
    sweep_max: f64,

    /// Number of grid values, both ends included.
    #[arg(long, default_value_t = 10)]
    steps: usize,

    #[arg(long, default_value_t = 20)]
    realizations: usize,

    #[arg(long, default_value_t = DEFAULT_CONNECT_TRIES)]
    connect_tries: usize,

    #[command(flatten)]
    metrics: MetricArgs,

    /// Per-cell CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Per-metric Spearman CSV (default: stderr).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct HardenArgs {
    graph: PathBuf,

    #[arg(long, value_enum, default_value = "greedy")]
    mode: Mode,

    /// Eigenpairs for the greedy estimate (default: full spectrum).
    #[arg(long)]
    p_eigs: Option<usize>,

    #[arg(long, default_value_t = 1)]
    restarts: usize,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Weight of the added edge.
    #[arg(long, default_value_t = 1.0)]
    dw: f64,

    /// Also consider raising the weight of existing edges.
    #[arg(long)]
    all_pairs: bool,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Greedy,
    Exhaustive,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenModel {
    Er,
    Sbm,
    Ws,
    Ba,
    LatentCircle,
    LatentPath,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: GenModel,

    #[arg(long)]
    n: usize,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Edge probability (er).
    #[arg(long, default_value_t = 0.1)]
    p: f64,

    #[arg(long, default_value_t = 0.9)]
    p_in: f64,

    #[arg(long, default_value_t = 0.005)]
    p_out: f64,

    /// Ring degree (ws).
    #[arg(long, default_value_t = 4)]
    k: usize,

    #[arg(long, default_value_t = 0.1)]
    beta: f64,

    /// Edges per new vertex (ba).
    #[arg(long, default_value_t = 2)]
    m: usize,

    /// Kernel scale (latent models; defaults 20/√π and 100).
    #[arg(long)]
    scale: Option<f64>,

    #[arg(long, default_value_t = 400.0)]
    bandwidth: f64,

    /// Resample until connected.
    #[arg(long)]
    connected: bool,

    /// Edge-list path; a JSON sidecar with the sampling state is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AggregateArgs {
    /// Lines `src dst timestamp [message_id]`.
    events: PathBuf,

    /// Window length in timestamp units.
    #[arg(long, default_value_t = 604_800)]
    window: i64,

    /// Drop messages with more recipients than this.
    #[arg(long)]
    max_recipients: Option<usize>,

    /// Output directory for snapshots, manifest.tsv and names.tsv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Vertex counts.
    #[arg(long, value_delimiter = ',', conflicts_with = "edges", required_unless_present = "edges")]
    sizes: Vec<usize>,

    /// Target expected edge counts, converted to vertex counts.
    #[arg(long, value_delimiter = ',')]
    edges: Vec<f64>,

    #[arg(long, default_value_t = 0.3)]
    epsilon: f64,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    #[arg(long, default_value_t = 1)]
    repeats: usize,

    #[arg(long, default_value_t = 100.0)]
    scale: f64,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ResistArgs {
    graph: PathBuf,

    /// Write R/(1+R), which is defined on disconnected graphs.
    #[arg(long)]
    renormalized: bool,

    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoConvergence { .. } => 3,
        Error::Disconnected { .. } => 4,
        _ => 2,
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_err(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(path: &Path, source: io::Error) -> Error {
    Error::Io {
        context: path.display().to_string(),
        source,
    }
}

fn write_err(source: io::Error) -> Error {
    Error::Io {
        context: "writing output".into(),
        source,
    }
}

fn run_dist(a: &DistArgs) -> Result<(), Error> {
    let metrics = Metric::parse_list(&a.metrics.metric)?;
    let seq = load_manifest::<f64>(&a.manifest)?;
    info!("loaded {} snapshots on {} vertices", seq.len(), seq.n());
    let series = distance_series(&seq, &metrics, &a.metrics.params())?;
    let mut out = open_out(a.out.as_deref())?;
    series.write_csv(&mut out).and_then(|_| out.flush()).map_err(write_err)
}

fn run_experiment_cmd(a: &ExperimentArgs) -> Result<(), Error> {
    let template = match a.model {
        SweepFamily::Sbm => SweepTemplate::Sbm {
            n: a.n,
            p_in: a.p_in,
            p_out: a.p_out,
        },
        SweepFamily::LatentCircle => SweepTemplate::LatentCircle {
            n: a.n,
            scale: a.scale.unwrap_or(20.0 / std::f64::consts::PI.sqrt()),
            bandwidth: a.bandwidth,
        },
        SweepFamily::WattsStrogatz => SweepTemplate::WattsStrogatz {
            n: a.n,
            k: a.k,
            beta: a.beta,
        },
    };
    let cfg = ExperimentConfig {
        template,
        sweep: linspace(a.sweep_min, a.sweep_max, a.steps),
        realizations: a.realizations,
        metrics: Metric::parse_list(&a.metrics.metric)?,
        params: a.metrics.params(),
        seed: a.metrics.seed,
        connect_tries: a.connect_tries,
    };
    let report = run_experiment(&cfg)?;
    let failures: usize = report.cells.iter().map(|c| c.failures).sum();
    if failures > 0 {
        log::warn!("{failures} realization/metric evaluations failed");
    }
    let mut out = open_out(a.out.as_deref())?;
    report.write_cells_csv(&mut out).and_then(|_| out.flush()).map_err(write_err)?;
    match &a.summary {
        Some(p) => {
            let f = File::create(p).map_err(|e| io_err(p, e))?;
            report.write_summary_csv(BufWriter::new(f)).map_err(write_err)
        }
        None => report.write_summary_csv(io::stderr().lock()).map_err(write_err),
    }
}

fn run_harden(a: &HardenArgs) -> Result<(), Error> {
    let g: Graph = load_edgelist(&a.graph)?;
    let opts = HardenOptions {
        mode: match a.mode {
            Mode::Greedy => HardenMode::Greedy,
            Mode::Exhaustive => HardenMode::Exhaustive,
        },
        p_eigs: a.p_eigs,
        greedy: GreedyOptions {
            seed: a.seed,
            restarts: a.restarts,
            dw: a.dw,
            policy: if a.all_pairs {
                CandidatePolicy::AllPairs
            } else {
                CandidatePolicy::NonNeighbors
            },
        },
        ..HardenOptions::default()
    };
    let report = harden(&g, &opts)?;
    let mut out = open_out(a.out.as_deref())?;
    write!(out, "{report}").and_then(|_| out.flush()).map_err(write_err)
}

fn run_gen(a: &GenArgs) -> Result<(), Error> {
    let model = match a.model {
        GenModel::Er => Model::ErdosRenyi { p: a.p },
        GenModel::Sbm => Model::Sbm2 {
            p_in: a.p_in,
            p_out: a.p_out,
        },
        GenModel::Ws => Model::WattsStrogatz { k: a.k, beta: a.beta },
        GenModel::Ba => Model::BarabasiAlbert { m: a.m },
        GenModel::LatentCircle => Model::LatentCircle {
            scale: a.scale.unwrap_or(20.0 / std::f64::consts::PI.sqrt()),
            bandwidth: a.bandwidth,
        },
        GenModel::LatentPath => Model::LatentPath {
            scale: a.scale.unwrap_or(100.0),
        },
    };
    let spec = GeneratorSpec {
        model,
        n: a.n,
        seed: a.seed,
    };
    let generated = if a.connected {
        generate_connected::<f64>(&spec, DEFAULT_CONNECT_TRIES)?
    } else {
        generate::<f64>(&spec)?
    };
    save_edgelist(&generated.graph, &a.out)?;
    let sidecar = a.out.with_extension("json");
    let state = generated.latent_state(spec);
    let json = serde_json::to_string_pretty(&state).expect("latent state serializes");
    std::fs::write(&sidecar, json + "\n").map_err(|e| io_err(&sidecar, e))?;
    info!("wrote n={} m={} to {}", generated.graph.n(), generated.graph.m(), a.out.display());
    Ok(())
}

fn run_aggregate(a: &AggregateArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&a.events).map_err(|e| io_err(&a.events, e))?;
    let agg = aggregate_events(
        &text,
        &AggregateOptions {
            window: a.window,
            max_recipients: a.max_recipients,
        },
    )?;
    info!(
        "{} snapshots over {} vertices; {} messages excluded",
        agg.snapshots.len(),
        agg.universe.len(),
        agg.excluded_messages
    );
    write_aggregated(&agg, &a.out)
}

fn run_bench(a: &BenchArgs) -> Result<(), Error> {
    let sizes = if a.edges.is_empty() {
        a.sizes.clone()
    } else {
        BenchConfig::sizes_for_edges(&a.edges, a.scale)
    };
    let rows = bench(&BenchConfig {
        sizes,
        scale: a.scale,
        epsilon: a.epsilon,
        seed: a.seed,
        repeats: a.repeats,
        ..BenchConfig::default()
    })?;
    let mut out = open_out(a.out.as_deref())?;
    write_bench_csv(&rows, &mut out).and_then(|_| out.flush()).map_err(write_err)
}

fn run_resist(a: &ResistArgs) -> Result<(), Error> {
    let g: Graph = load_edgelist(&a.graph)?;
    let mut out = open_out(a.out.as_deref())?;
    if a.renormalized {
        let rhat = renormalized_resistance(&g).rhat;
        for i in 0..rhat.nrows() {
            let row: Vec<String> = rhat.row(i).iter().map(|x| format!("{x:e}")).collect();
            writeln!(out, "{}", row.join(",")).map_err(write_err)?;
        }
    } else {
        resistance_matrix(&g)?.write_csv(&mut out).map_err(write_err)?;
    }
    out.flush().map_err(write_err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Dist(a) => run_dist(a),
        Command::Experiment(a) => run_experiment_cmd(a),
        Command::Harden(a) => run_harden(a),
        Command::Gen(a) => run_gen(a),
        Command::Aggregate(a) => run_aggregate(a),
        Command::Bench(a) => run_bench(a),
        Command::Resist(a) => run_resist(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
