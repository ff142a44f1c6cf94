//! Driver layer for dynamic networks: distance time series over snapshot
//! sequences, random-model sweep experiments, edge hardening, scaling
//! benchmarks and aggregation of raw event logs into snapshots.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use log::{info, warn};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{cad_from_resistance, edit_distance, rooted_distance, sorted_spectrum, CadScope, FbpMatrix, SpectrumKind};
use crate::error::{Error, Result};
use crate::fast::{build_embedding, fast_frobenius_distance, fast_rp2_report, sketch_rows, FastRp2Options};
use crate::graph::GraphSnapshot;
use crate::io::{DynamicSequence, VertexUniverse};
use crate::perturbation::{
    exact_kirchhoff_drop, exhaustive_best_edge, greedy_best_edge, EdgePerturbation, GreedyOptions,
    DEFAULT_EXHAUSTIVE_CAP,
};
use crate::randgraph::{generate, generate_connected, latent_path_size_for_edges, perturb_latent_circle, GeneratorSpec, Model};
use crate::resistance::{componentwise_resistance, resistance_matrix, ResistanceMatrix};
use crate::rp::{entrywise_distance, RpOrder};
use crate::spectral::{full_spectrum, partial_spectrum};
use crate::{Embedding, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Rp1,
    Rp2,
    /// RP distance of order `MetricParams::p`.
    Rp,
    Rp2Fast,
    DeltaCon,
    Cad,
    Edit,
    Lambda,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::Rp1,
        Metric::Rp2,
        Metric::Rp,
        Metric::Rp2Fast,
        Metric::DeltaCon,
        Metric::Cad,
        Metric::Edit,
        Metric::Lambda,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Rp1 => "rp1",
            Metric::Rp2 => "rp2",
            Metric::Rp => "rp",
            Metric::Rp2Fast => "rp2fast",
            Metric::DeltaCon => "deltacon",
            Metric::Cad => "cad",
            Metric::Edit => "edit",
            Metric::Lambda => "lambda",
        }
    }

    /// Parses a comma-separated list such as `rp1,deltacon`.
    pub fn parse_list(s: &str) -> Result<Vec<Metric>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let m: Metric = part.parse()?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        if out.is_empty() {
            return Err(Error::param("empty metric list"));
        }
        Ok(out)
    }

    fn uses_resistance(self) -> bool {
        matches!(self, Metric::Rp1 | Metric::Rp2 | Metric::Rp | Metric::Rp2Fast)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<&str> = Metric::ALL.iter().map(|m| m.name()).collect();
                Error::param(format!("unknown metric '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricParams {
    /// Order used by [`Metric::Rp`].
    pub p: RpOrder,
    pub fast: FastRp2Options,
    /// Always use renormalized resistances for RP metrics.
    pub renormalized: bool,
    /// Switch RP metrics to renormalized resistances when a snapshot is
    /// disconnected; otherwise such pairs score `inf`.
    pub auto_renormalize: bool,
    pub cad_scope: CadScope,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams {
            p: RpOrder::ONE,
            fast: FastRp2Options::default(),
            renormalized: false,
            auto_renormalize: true,
            cad_scope: CadScope::EdgeUnion,
        }
    }
}

impl MetricParams {
    fn validate(&self) -> Result<()> {
        let eps = self.fast.epsilon;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::param(format!("epsilon must lie in (0, 1), got {eps}")));
        }
        Ok(())
    }

    fn order(&self, metric: Metric) -> RpOrder {
        match metric {
            Metric::Rp1 => RpOrder::ONE,
            Metric::Rp => self.p,
            _ => RpOrder::TWO,
        }
    }
}

/// A snapshot with lazily computed per-graph quantities, so that each is
/// built once however many pairs the snapshot takes part in.
pub struct PreparedGraph<'g> {
    graph: &'g Graph,
    params: MetricParams,
    connected: bool,
    resistance: OnceLock<Option<ResistanceMatrix<f64>>>,
    renormalized: OnceLock<DMatrix<f64>>,
    fbp: OnceLock<DMatrix<f64>>,
    spectrum: OnceLock<Vec<f64>>,
    embedding: OnceLock<std::result::Result<Embedding, (usize, f64)>>,
}

impl<'g> PreparedGraph<'g> {
    pub fn new(graph: &'g Graph, params: &MetricParams) -> Result<Self> {
        params.validate()?;
        Ok(PreparedGraph {
            graph,
            params: params.clone(),
            connected: graph.is_connected(),
            resistance: OnceLock::new(),
            renormalized: OnceLock::new(),
            fbp: OnceLock::new(),
            spectrum: OnceLock::new(),
            embedding: OnceLock::new(),
        })
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    fn label(&self) -> &str {
        self.graph.label().unwrap_or("?")
    }

    fn resistance(&self) -> Option<&ResistanceMatrix<f64>> {
        self.resistance
            .get_or_init(|| self.connected.then(|| resistance_matrix(self.graph).expect("connected graph")))
            .as_ref()
    }

    fn renormalized(&self) -> &DMatrix<f64> {
        self.renormalized.get_or_init(|| match self.resistance() {
            Some(r) => r.r.map(|x| x / (1.0 + x)),
            None => componentwise_resistance(self.graph).map(|x| if x.is_finite() { x / (1.0 + x) } else { 1.0 }),
        })
    }

    fn fbp(&self) -> &DMatrix<f64> {
        self.fbp.get_or_init(|| FbpMatrix::new(self.graph).s)
    }

    fn spectrum(&self) -> &[f64] {
        self.spectrum.get_or_init(|| sorted_spectrum(self.graph, SpectrumKind::Laplacian))
    }

    fn embedding(&self) -> Result<&Embedding> {
        let f = &self.params.fast;
        let cached = self.embedding.get_or_init(|| {
            build_embedding(self.graph, f.epsilon, f.seed, &f.solver).map_err(|e| match e {
                Error::NoConvergence { iterations, residual } => (iterations, residual),
                other => panic!("embedding of a validated connected graph failed: {other}"),
            })
        });
        cached
            .as_ref()
            .map_err(|&(iterations, residual)| Error::NoConvergence { iterations, residual })
    }
}

/// Distance between two prepared snapshots under `metric`, using the
/// parameters of `a`.
pub fn compare_prepared(a: &PreparedGraph<'_>, b: &PreparedGraph<'_>, metric: Metric) -> Result<f64> {
    let (g1, g2) = (a.graph, b.graph);
    if g1.n() != g2.n() {
        return Err(Error::SizeMismatch {
            left: g1.n(),
            right: g2.n(),
        });
    }
    let params = &a.params;
    let both = a.connected && b.connected;
    if metric.uses_resistance() && (params.renormalized || !both) {
        if !params.renormalized && !params.auto_renormalize {
            return Ok(f64::INFINITY);
        }
        if !params.renormalized {
            warn!(
                "{metric}: switching to renormalized resistance for disconnected snapshot(s) {} -> {}",
                a.label(),
                b.label()
            );
        }
        return Ok(entrywise_distance(a.renormalized(), b.renormalized(), params.order(metric)));
    }
    let value = match metric {
        Metric::Rp1 | Metric::Rp2 | Metric::Rp => {
            let (r1, r2) = (a.resistance().expect("connected"), b.resistance().expect("connected"));
            entrywise_distance(&r1.r, &r2.r, params.order(metric))
        }
        Metric::Rp2Fast => {
            if params.fast.exact_fallback && sketch_rows(g1.n(), params.fast.epsilon) >= g1.n() {
                let (r1, r2) = (a.resistance().expect("connected"), b.resistance().expect("connected"));
                entrywise_distance(&r1.r, &r2.r, RpOrder::TWO)
            } else {
                fast_frobenius_distance(a.embedding()?, b.embedding()?)?
            }
        }
        Metric::DeltaCon => rooted_distance(a.fbp(), b.fbp(), 0.0),
        Metric::Cad => match (a.resistance(), b.resistance()) {
            (Some(r1), Some(r2)) => cad_from_resistance(g1, r1, g2, r2, &params.cad_scope)?,
            _ => f64::INFINITY,
        },
        Metric::Edit => edit_distance(g1, g2)?,
        Metric::Lambda => {
            let (x, y) = (a.spectrum(), b.spectrum());
            x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
        }
    };
    Ok(value)
}

/// Distance between two graphs under `metric`.
pub fn compute_metric(g1: &Graph, g2: &Graph, metric: Metric, params: &MetricParams) -> Result<f64> {
    compare_prepared(&PreparedGraph::new(g1, params)?, &PreparedGraph::new(g2, params)?, metric)
}

/// Writes `inf`, `-inf` and `NaN` literally and finite values in shortest
/// round-trip form.
pub fn format_value(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub t_from: String,
    pub t_to: String,
    pub metric: Metric,
    pub value: f64,
    pub elapsed_ms: f64,
}

/// Consecutive-snapshot distances, one row per pair and metric.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSeries {
    pub rows: Vec<SeriesRow>,
    pub params: MetricParams,
}

impl DistanceSeries {
    pub fn values(&self, metric: Metric) -> Vec<f64> {
        self.rows.iter().filter(|r| r.metric == metric).map(|r| r.value).collect()
    }

    /// CSV with columns `t_from,t_to,metric,value,elapsed_ms`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t_from,t_to,metric,value,elapsed_ms")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{:.3}",
                r.t_from,
                r.t_to,
                r.metric,
                format_value(r.value),
                r.elapsed_ms
            )?;
        }
        Ok(())
    }
}

/// Distances between consecutive snapshots. The elapsed time of a row
/// includes any per-snapshot work first needed by that row.
pub fn distance_series(seq: &DynamicSequence<f64>, metrics: &[Metric], params: &MetricParams) -> Result<DistanceSeries> {
    let snaps = seq.snapshots();
    let prepared: Vec<PreparedGraph<'_>> = snaps.iter().map(|g| PreparedGraph::new(g, params)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(snaps.len().saturating_sub(1) * metrics.len());
    for pair in prepared.windows(2) {
        for &metric in metrics {
            let start = Instant::now();
            let value = compare_prepared(&pair[0], &pair[1], metric)?;
            rows.push(SeriesRow {
                t_from: pair[0].label().to_string(),
                t_to: pair[1].label().to_string(),
                metric,
                value,
                elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
    }
    Ok(DistanceSeries {
        rows,
        params: params.clone(),
    })
}

/// Model family and the parameter swept in an experiment. `G¹` uses the
/// base parameters; `G²` shifts one of them by the sweep value `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SweepTemplate {
    /// `G²` uses `p_out + x`.
    Sbm { n: usize, p_in: f64, p_out: f64 },
    /// `G²` jitters the angles of `G¹` by `N(0, x²)` and resamples edges.
    LatentCircle { n: usize, scale: f64, bandwidth: f64 },
    /// `G²` uses `beta + x`.
    WattsStrogatz { n: usize, k: usize, beta: f64 },
}

impl SweepTemplate {
    pub fn n(&self) -> usize {
        match *self {
            SweepTemplate::Sbm { n, .. } | SweepTemplate::LatentCircle { n, .. } | SweepTemplate::WattsStrogatz { n, .. } => n,
        }
    }

    fn base_model(&self) -> Model {
        match *self {
            SweepTemplate::Sbm { p_in, p_out, .. } => Model::Sbm2 { p_in, p_out },
            SweepTemplate::LatentCircle { scale, bandwidth, .. } => Model::LatentCircle { scale, bandwidth },
            SweepTemplate::WattsStrogatz { k, beta, .. } => Model::WattsStrogatz { k, beta },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub template: SweepTemplate,
    pub sweep: Vec<f64>,
    pub realizations: usize,
    pub metrics: Vec<Metric>,
    pub params: MetricParams,
    pub seed: u64,
    pub connect_tries: usize,
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentCell {
    pub x: f64,
    pub metric: Metric,
    pub mean: f64,
    /// Sample standard deviation; 0 for fewer than two values.
    pub std: f64,
    pub count: usize,
    pub failures: usize,
}

impl ExperimentCell {
    pub fn coefficient_of_variation(&self) -> f64 {
        self.std / self.mean.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub grid: Vec<f64>,
    pub metrics: Vec<Metric>,
    /// Grid-major: all metrics for `grid[0]`, then `grid[1]`, ...
    pub cells: Vec<ExperimentCell>,
    /// Spearman correlation between sweep value and cell mean, per metric.
    pub spearman: Vec<(Metric, f64)>,
}

impl ExperimentReport {
    pub fn cells_for(&self, metric: Metric) -> Vec<&ExperimentCell> {
        self.cells.iter().filter(|c| c.metric == metric).collect()
    }

    pub fn spearman_for(&self, metric: Metric) -> Option<f64> {
        self.spearman.iter().find(|(m, _)| *m == metric).map(|&(_, r)| r)
    }

    pub fn write_cells_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,metric,mean,std,count,failures")?;
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                c.x,
                c.metric,
                format_value(c.mean),
                format_value(c.std),
                c.count,
                c.failures
            )?;
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "metric,spearman")?;
        for (m, rho) in &self.spearman {
            writeln!(out, "{m},{}", format_value(*rho))?;
        }
        Ok(())
    }
}

/// Mixes `parts` into `seed` with the SplitMix64 finalizer.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    let mut h = seed;
    for &p in parts {
        h ^= p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h ^= h >> 31;
    }
    h
}

/// Ranks with ties given their average rank (1-based).
fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return f64::NAN;
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation; `NaN` when either input is constant or has
/// fewer than two entries, or contains a `NaN`.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|v| v.is_nan()) {
        return f64::NAN;
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn sample_second(cfg: &ExperimentConfig, g1_angles: Option<&[f64]>, x: f64, seed: u64) -> Result<Graph> {
    let tries = cfg.connect_tries.max(1);
    let n = cfg.template.n();
    let model = match cfg.template {
        SweepTemplate::Sbm { p_in, p_out, .. } => Model::Sbm2 { p_in, p_out: p_out + x },
        SweepTemplate::WattsStrogatz { k, beta, .. } => Model::WattsStrogatz { k, beta: beta + x },
        SweepTemplate::LatentCircle { .. } => {
            let angles = g1_angles.expect("latent circle baseline keeps its angles");
            for attempt in 0..tries {
                let g = perturb_latent_circle::<f64>(angles, x, derive_seed(seed, &[attempt as u64]), cfg.template.base_model())?;
                if g.graph.is_connected() {
                    return Ok(g.graph);
                }
            }
            return Err(Error::GenerationFailed { tries });
        }
    };
    Ok(generate_connected::<f64>(&GeneratorSpec { model, n, seed }, tries)?.graph)
}

/// Runs the sweep: one fixed `G¹`, then `realizations` independent `G²`
/// per grid value, compared under every metric. Realizations run in
/// parallel; a failed sample or metric is counted in `failures`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.sweep.is_empty() || cfg.realizations == 0 || cfg.metrics.is_empty() {
        return Err(Error::param("experiment needs a non-empty sweep, metric list and realization count"));
    }
    let spec = GeneratorSpec {
        model: cfg.template.base_model(),
        n: cfg.template.n(),
        seed: derive_seed(cfg.seed, &[0]),
    };
    let base = generate_connected::<f64>(&spec, cfg.connect_tries)?;
    let g1 = base.graph;
    let reference = PreparedGraph::new(&g1, &cfg.params)?;
    let jobs: Vec<(usize, usize)> = (0..cfg.sweep.len())
        .flat_map(|c| (0..cfg.realizations).map(move |r| (c, r)))
        .collect();
    let outcomes: Vec<(usize, Vec<Option<f64>>)> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let seed = derive_seed(cfg.seed, &[1 + c as u64, r as u64]);
            let values = match sample_second(cfg, base.angles.as_deref(), cfg.sweep[c], seed) {
                Ok(g2) => match PreparedGraph::new(&g2, &cfg.params) {
                    Ok(other) => cfg
                        .metrics
                        .iter()
                        .map(|&m| match compare_prepared(&reference, &other, m) {
                            Ok(v) => Some(v),
                            Err(e) => {
                                warn!("cell {c} realization {r}, {m}: {e}");
                                None
                            }
                        })
                        .collect(),
                    Err(e) => {
                        warn!("cell {c} realization {r}: {e}");
                        vec![None; cfg.metrics.len()]
                    }
                },
                Err(e) => {
                    warn!("cell {c} realization {r}: {e}");
                    vec![None; cfg.metrics.len()]
                }
            };
            (c, values)
        })
        .collect();

    let mut cells = Vec::with_capacity(cfg.sweep.len() * cfg.metrics.len());
    for (c, &x) in cfg.sweep.iter().enumerate() {
        for (k, &metric) in cfg.metrics.iter().enumerate() {
            let all: Vec<Option<f64>> = outcomes.iter().filter(|(cc, _)| *cc == c).map(|(_, v)| v[k]).collect();
            let ok: Vec<f64> = all.iter().flatten().copied().collect();
            let (mean, std) = mean_std(&ok);
            cells.push(ExperimentCell {
                x,
                metric,
                mean,
                std,
                count: ok.len(),
                failures: all.len() - ok.len(),
            });
        }
    }
    let spearman = cfg
        .metrics
        .iter()
        .map(|&m| {
            let means: Vec<f64> = cells.iter().filter(|c| c.metric == m).map(|c| c.mean).collect();
            (m, spearman(&cfg.sweep, &means))
        })
        .collect();
    Ok(ExperimentReport {
        grid: cfg.sweep.clone(),
        metrics: cfg.metrics.clone(),
        cells,
        spearman,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HardenMode {
    Greedy,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardenOptions {
    pub mode: HardenMode,
    /// Eigenpairs used by the greedy search; `None` for the full spectrum.
    pub p_eigs: Option<usize>,
    pub greedy: GreedyOptions,
    /// Largest `n` for which exact values and the optimum are computed.
    pub exact_cap: usize,
}

impl Default for HardenOptions {
    fn default() -> Self {
        HardenOptions {
            mode: HardenMode::Greedy,
            p_eigs: None,
            greedy: GreedyOptions::default(),
            exact_cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardenReport {
    pub mode: HardenMode,
    pub edge: (usize, usize),
    pub dw: f64,
    /// Estimated Kirchhoff-index drop (exact in exhaustive mode).
    pub predicted: f64,
    pub exact: Option<f64>,
    pub optimal_edge: Option<(usize, usize)>,
    pub optimal: Option<f64>,
    /// `exact / optimal`.
    pub ratio: Option<f64>,
}

impl fmt::Display for HardenReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "edge\t{} {}", self.edge.0, self.edge.1)?;
        writeln!(f, "predicted_drop\t{}", format_value(self.predicted))?;
        if let Some(x) = self.exact {
            writeln!(f, "exact_drop\t{}", format_value(x))?;
        }
        if let (Some((i, j)), Some(opt)) = (self.optimal_edge, self.optimal) {
            writeln!(f, "optimal_edge\t{i} {j}")?;
            writeln!(f, "optimal_drop\t{}", format_value(opt))?;
        }
        if let Some(r) = self.ratio {
            writeln!(f, "ratio\t{}", format_value(r))?;
        }
        Ok(())
    }
}

/// Chooses one pair to join so that the Kirchhoff index drops as much as
/// possible.
pub fn harden(g: &Graph, opts: &HardenOptions) -> Result<HardenReport> {
    g.require_connected()?;
    let dw = opts.greedy.dw;
    let n = g.n();
    match opts.mode {
        HardenMode::Exhaustive => {
            let (pert, drop) = exhaustive_best_edge(g, dw, opts.exact_cap)?;
            let edge = (pert.i0, pert.j0);
            Ok(HardenReport {
                mode: opts.mode,
                edge,
                dw,
                predicted: drop,
                exact: Some(drop),
                optimal_edge: Some(edge),
                optimal: Some(drop),
                ratio: Some(1.0),
            })
        }
        HardenMode::Greedy => {
            let spec = match opts.p_eigs {
                Some(p) if p < n => partial_spectrum(g, p.max(2), opts.greedy.seed)?,
                _ => full_spectrum(g)?,
            };
            let found = greedy_best_edge(g, &spec, &opts.greedy)?;
            let edge = (found.edge.i0, found.edge.j0);
            let mut report = HardenReport {
                mode: opts.mode,
                edge,
                dw,
                predicted: found.predicted,
                exact: None,
                optimal_edge: None,
                optimal: None,
                ratio: None,
            };
            if n <= opts.exact_cap {
                let exact = exact_kirchhoff_drop(g, &EdgePerturbation::new(edge.0, edge.1, dw)?)?;
                let (best, opt) = exhaustive_best_edge(g, dw, opts.exact_cap)?;
                report.exact = Some(exact);
                report.optimal_edge = Some((best.i0, best.j0));
                report.optimal = Some(opt);
                report.ratio = Some(exact / opt);
            }
            Ok(report)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// Vertex counts of the latent-path graphs, in increasing order.
    pub sizes: Vec<usize>,
    pub scale: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Timings are the minimum over this many runs.
    pub repeats: usize,
    /// Non-path edges removed to form the second graph.
    pub removed: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: Vec::new(),
            scale: 100.0,
            epsilon: 0.3,
            seed: 42,
            repeats: 1,
            removed: 5,
        }
    }
}

impl BenchConfig {
    /// Sizes whose expected edge counts are the given targets.
    pub fn sizes_for_edges(edges: &[f64], scale: f64) -> Vec<usize> {
        edges.iter().map(|&m| latent_path_size_for_edges(m, scale)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub seconds: f64,
    pub sketch_seconds: f64,
    pub solve_seconds: f64,
    /// `seconds` over the previous row's; absent on the first row.
    pub ratio: Option<f64>,
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,m,s,seconds,sketch_seconds,solve_seconds,ratio")?;
    for r in rows {
        let ratio = r.ratio.map(format_value).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6},{}",
            r.n, r.m, r.s, r.seconds, r.sketch_seconds, r.solve_seconds, ratio
        )?;
    }
    Ok(())
}

/// Removes `count` random edges joining vertices at least two apart, which
/// keeps the spanning path and hence connectivity.
fn drop_chords(g: &Graph, count: usize, seed: u64) -> Result<Graph> {
    let chords: Vec<(usize, usize)> = g.edges().iter().filter(|e| e.v - e.u >= 2).map(|e| (e.u, e.v)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = g.clone();
    let mut taken = Vec::new();
    for _ in 0..count.min(chords.len()) {
        let mut k = rng.random_range(0..chords.len());
        while taken.contains(&k) {
            k = (k + 1) % chords.len();
        }
        taken.push(k);
        let (u, v) = chords[k];
        out = out.with_weight_delta(u, v, -g.weight(u, v).expect("chord present"))?;
    }
    Ok(out)
}

/// Times the sketched RP-2 distance on latent-path graphs of each size.
pub fn bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let opts = FastRp2Options {
        epsilon: cfg.epsilon,
        seed: cfg.seed,
        exact_fallback: false,
        ..FastRp2Options::default()
    };
    let mut rows: Vec<BenchRow> = Vec::with_capacity(cfg.sizes.len());
    for &n in &cfg.sizes {
        let spec = GeneratorSpec {
            model: Model::LatentPath { scale: cfg.scale },
            n,
            seed: derive_seed(cfg.seed, &[n as u64]),
        };
        let g1: Graph = generate(&spec)?.graph;
        let g2 = drop_chords(&g1, cfg.removed, derive_seed(cfg.seed, &[n as u64, 1]))?;
        let mut best: Option<(Duration, Duration, Duration)> = None;
        let mut s = 0;
        for _ in 0..cfg.repeats.max(1) {
            let start = Instant::now();
            let report = fast_rp2_report(&g1, &g2, &opts)?;
            let total = start.elapsed();
            s = report.sketch_rows;
            if best.is_none_or(|b| total < b.0) {
                best = Some((total, report.timings.sketch, report.timings.solves));
            }
        }
        let (total, sketch, solves) = best.expect("at least one repeat");
        let seconds = total.as_secs_f64();
        let ratio = rows.last().map(|prev| seconds / prev.seconds);
        info!("bench n={n} m={} s={s}: {seconds:.3}s", g1.m());
        rows.push(BenchRow {
            n,
            m: g1.m(),
            s,
            seconds,
            sketch_seconds: sketch.as_secs_f64(),
            solve_seconds: solves.as_secs_f64(),
            ratio,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggregateOptions {
    /// Window length in timestamp units (default one week of seconds).
    pub window: i64,
    /// Messages with more recipients than this are dropped.
    pub max_recipients: Option<usize>,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        AggregateOptions {
            window: 604_800,
            max_recipients: None,
        }
    }
}

/// Snapshots built from an event log, one per window.
#[derive(Debug, Clone)]
pub struct Aggregated {
    pub universe: VertexUniverse,
    /// Labelled by the window start timestamp.
    pub snapshots: Vec<Graph>,
    pub excluded_messages: usize,
}

/// Aggregates lines `src dst timestamp [message_id]` into per-window
/// graphs weighted by event counts. Events sharing a message id (or, when
/// absent, a sender and timestamp) form one message; its recipient count
/// is the number of distinct destinations. Windows start at the earliest
/// timestamp, and empty windows yield edgeless snapshots.
pub fn aggregate_events(text: &str, opts: &AggregateOptions) -> Result<Aggregated> {
    if opts.window <= 0 {
        return Err(Error::param(format!("window must be positive, got {}", opts.window)));
    }
    struct Event {
        src: usize,
        dst: usize,
        t: i64,
        key: (String, i64),
    }
    let mut universe = VertexUniverse::new();
    let mut events = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(Error::Parse {
                line: k + 1,
                msg: format!("expected 'src dst timestamp [message_id]', got '{line}'"),
            });
        }
        let t: i64 = fields[2].parse().map_err(|_| Error::Parse {
            line: k + 1,
            msg: format!("bad timestamp '{}'", fields[2]),
        })?;
        let src = universe.intern(fields[0]);
        let dst = universe.intern(fields[1]);
        let key = match fields.get(3) {
            Some(id) => (format!("#{id}"), 0),
            None => (format!("@{}", fields[0]), t),
        };
        events.push(Event { src, dst, t, key });
    }

    let mut recipients: HashMap<&(String, i64), Vec<usize>> = HashMap::new();
    for e in &events {
        recipients.entry(&e.key).or_default().push(e.dst);
    }
    let mut too_many: HashMap<&(String, i64), bool> = HashMap::new();
    for (key, dsts) in recipients.iter_mut() {
        dsts.sort_unstable();
        dsts.dedup();
        too_many.insert(key, opts.max_recipients.is_some_and(|k| dsts.len() > k));
    }
    let excluded_messages = too_many.values().filter(|&&x| x).count();

    let n = universe.len();
    let Some(t0) = events.iter().map(|e| e.t).min() else {
        return Ok(Aggregated {
            universe,
            snapshots: Vec::new(),
            excluded_messages,
        });
    };
    let t1 = events.iter().map(|e| e.t).max().expect("non-empty");
    let windows = ((t1 - t0) / opts.window + 1) as usize;
    let mut counts: Vec<BTreeMap<(usize, usize), f64>> = vec![BTreeMap::new(); windows];
    for e in &events {
        if e.src == e.dst || too_many[&e.key] {
            continue;
        }
        let w = ((e.t - t0) / opts.window) as usize;
        *counts[w].entry((e.src.min(e.dst), e.src.max(e.dst))).or_insert(0.0) += 1.0;
    }
    let snapshots = counts
        .into_iter()
        .enumerate()
        .map(|(w, c)| {
            let label = (t0 + w as i64 * opts.window).to_string();
            GraphSnapshot::new(n, c.into_iter().map(|((u, v), x)| (u, v, x))).map(|g| g.with_label(label))
        })
        .collect::<Result<_>>()?;
    Ok(Aggregated {
        universe,
        snapshots,
        excluded_messages,
    })
}

/// Writes `snapshot_NNNN.txt` edge lists, `manifest.tsv` and `names.tsv`
/// (vertex id, name) into `dir`.
pub fn write_aggregated(agg: &Aggregated, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut manifest = String::new();
    for (k, g) in agg.snapshots.iter().enumerate() {
        let file = format!("snapshot_{k:04}.txt");
        crate::io::save_edgelist(g, dir.join(&file))?;
        manifest.push_str(&format!("{}\t{file}\n", g.label().unwrap_or_default()));
    }
    let write = |name: &str, body: String| {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(path.display().to_string(), e))
    };
    write("manifest.tsv", manifest)?;
    let names: String = (0..agg.universe.len())
        .map(|id| format!("{id}\t{}\n", agg.universe.name(id).unwrap_or_default()))
        .collect();
    write("names.tsv", names)
}
