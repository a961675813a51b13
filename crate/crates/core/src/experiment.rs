//! Config-driven experiment sweeps: every (size, instance, realization)
//! scenario is run under every variant with shared seeds, and results are
//! written as per-flow and aggregate CSVs plus a manifest that reproduces
//! the run.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{
    run, FlowGroup, FlowMetrics, FlowSpec, MetricSummary, RadioConfig, Scenario, SimulationParams, TrafficConfig,
    Variant,
};
use crate::scheduler::DEFAULT_MAX_ITERATIONS;
use crate::{derive_seed, Error, Result};

pub const FLOWS_FILE: &str = "flows.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const TRACE_DIR: &str = "traces";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sizes: Vec<usize>,
    #[serde(default = "default_ten")]
    pub instances_per_size: usize,
    #[serde(default = "default_ten")]
    pub realizations_per_instance: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub seed: u64,
    /// Arrival rates to sweep; each overrides every flow's rate. Empty keeps
    /// the rates drawn per flow (or `traffic.lambda`).
    #[serde(default)]
    pub lambdas: Vec<f64>,
    /// Default output directory, overridden on the command line.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub traffic: TrafficConfig,
    #[serde(default)]
    pub radio: RadioConfig,
    #[serde(default)]
    pub debug: DebugConfig,
    pub variants: Vec<Variant>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DebugConfig {
    /// Check every slot's assignment against all scheduling constraints.
    pub check_feasibility: bool,
    /// Write scheduler decision traces as JSON lines.
    pub trace: bool,
}

impl Default for DebugConfig {
    fn default() -> Self {
        Self {
            check_feasibility: true,
            trace: false,
        }
    }
}

fn default_ten() -> usize {
    10
}

fn default_horizon() -> usize {
    1000
}

fn default_iterations() -> usize {
    DEFAULT_MAX_ITERATIONS
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::MissingFile(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.sizes.is_empty() {
            return fail("sizes must not be empty".into());
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 2) {
            return fail(format!("network size {n} is below 2"));
        }
        if self.instances_per_size == 0 || self.realizations_per_instance == 0 {
            return fail("instances_per_size and realizations_per_instance must be at least 1".into());
        }
        if self.horizon == 0 || self.max_iterations == 0 {
            return fail("horizon and max_iterations must be at least 1".into());
        }
        if self.variants.is_empty() {
            return fail("at least one variant is required".into());
        }
        let t = &self.traffic;
        if !(0.0..=1.0).contains(&t.streaming_fraction) {
            return fail(format!("traffic.streaming_fraction {} is outside [0, 1]", t.streaming_fraction));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return fail(format!("lambda {l} must be positive"));
        }
        if t.lambda.is_some_and(|l| !(l > 0.0 && l.is_finite())) || !(0.0 < t.rate_min && t.rate_min <= t.rate_max) {
            return fail("traffic rates must be positive and rate_min <= rate_max".into());
        }
        let r = &self.radio;
        if !(r.comm_radius > 0.0 && r.interference_range >= 0.0 && r.target_degree > 0.0) {
            return fail("radio ranges and target_degree must be positive".into());
        }
        let mut labels = BTreeSet::new();
        for v in &self.variants {
            if !labels.insert(v.label()) {
                return fail(format!("duplicate variant label {:?}", v.label()));
            }
        }
        Ok(())
    }

    /// Short horizon and two instances, for smoke runs.
    pub fn quick(&mut self) {
        self.horizon = 200;
        self.instances_per_size = 2;
    }

    fn params(&self) -> SimulationParams {
        SimulationParams {
            horizon: self.horizon,
            max_iterations: self.max_iterations,
            check_feasibility: self.debug.check_feasibility,
            trace: self.debug.trace,
        }
    }
}

/// Identifies one scenario of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RunKey {
    pub size: usize,
    /// Index into the λ sweep, if any.
    pub lambda: Option<usize>,
    pub instance: usize,
    pub realization: usize,
}

impl RunKey {
    pub fn instance_seed(&self, master: u64) -> u64 {
        derive_seed(master, &[self.size as u64, self.instance as u64])
    }

    pub fn realization_seed(&self, master: u64) -> u64 {
        derive_seed(self.instance_seed(master), &[self.realization as u64])
    }

    pub fn instance_id(&self) -> String {
        format!("{}-{}-{}", self.size, self.instance, self.realization)
    }

    /// Unique within a sweep, unlike the instance id which repeats per λ.
    pub fn tag(&self) -> String {
        match self.lambda {
            Some(l) => format!("{}-l{l}", self.instance_id()),
            None => self.instance_id(),
        }
    }
}

/// Results of all variants on one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub key: RunKey,
    /// The swept arrival rate, if any.
    pub lambda: Option<f64>,
    pub realization_seed: u64,
    pub flows: Vec<FlowSpec>,
    /// Per variant, in config order.
    pub metrics: Vec<Vec<FlowMetrics>>,
    pub traces: Vec<Option<String>>,
}

pub fn run_keys(config: &ExperimentConfig) -> Vec<RunKey> {
    let mut keys = Vec::new();
    for &size in &config.sizes {
        let lambdas: Vec<Option<usize>> = if config.lambdas.is_empty() {
            vec![None]
        } else {
            (0..config.lambdas.len()).map(Some).collect()
        };
        for &lambda in &lambdas {
            for instance in 0..config.instances_per_size {
                for realization in 0..config.realizations_per_instance {
                    keys.push(RunKey {
                        size,
                        lambda,
                        instance,
                        realization,
                    });
                }
            }
        }
    }
    keys
}

pub fn run_scenario(config: &ExperimentConfig, key: RunKey) -> Result<ScenarioResult> {
    let realization_seed = key.realization_seed(config.seed);
    let mut traffic = config.traffic.clone();
    if let Some(i) = key.lambda {
        traffic.lambda = Some(config.lambdas[i]);
    }
    let scenario = Scenario::generate(
        key.size,
        key.instance_seed(config.seed),
        realization_seed,
        &config.radio,
        &traffic,
        config.horizon,
    )?;
    let mut metrics = Vec::with_capacity(config.variants.len());
    let mut traces = Vec::with_capacity(config.variants.len());
    for variant in &config.variants {
        let out = run(&scenario, variant, &config.radio, config.params()).map_err(|e| match e {
            Error::InfeasibleAssignment { slot, reason, trace } => Error::InfeasibleAssignment {
                slot,
                reason: format!("{} on {}: {reason}", variant.label(), key.tag()),
                trace,
            },
            other => other,
        })?;
        metrics.push(out.metrics);
        traces.push(out.trace);
    }
    Ok(ScenarioResult {
        key,
        lambda: traffic.lambda,
        realization_seed,
        flows: scenario.flows,
        metrics,
        traces,
    })
}

/// Runs every scenario of the sweep on `jobs` threads (all cores when
/// `None`). Results come back in sweep order whatever the completion order.
pub fn run_sweep(config: &ExperimentConfig, jobs: Option<usize>) -> Result<Vec<ScenarioResult>> {
    config.validate()?;
    let keys = run_keys(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| keys.par_iter().map(|&k| run_scenario(config, k)).collect())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_flows_csv<W: Write>(config: &ExperimentConfig, results: &[ScenarioResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "instance_id",
        "seed",
        "variant",
        "scheduler",
        "flow_src",
        "flow_dst",
        "kind",
        "lambda",
        "throughput",
        "mean_latency",
        "delivery_ratio",
        "trip_length",
        "composite_latency",
    ])?;
    for r in results {
        for (variant, metrics) in config.variants.iter().zip(&r.metrics) {
            for (f, m) in r.flows.iter().zip(metrics) {
                w.write_record([
                    r.key.instance_id(),
                    r.realization_seed.to_string(),
                    variant.label(),
                    variant.scheduler.as_str().to_string(),
                    f.src.to_string(),
                    f.dst.to_string(),
                    f.kind.as_str().to_string(),
                    f.rate.to_string(),
                    m.throughput.to_string(),
                    opt(m.mean_latency),
                    opt(m.delivery_ratio),
                    opt(m.trip_length),
                    opt(m.composite_latency),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub const AGGREGATE_HEADER: [&str; 12] = [
    "size",
    "lambda",
    "variant",
    "instance_id",
    "group",
    "stat",
    "flows",
    "throughput",
    "mean_latency",
    "delivery_ratio",
    "trip_length",
    "composite_latency",
];

/// One row per (scenario, variant, flow group, statistic): the mean and the
/// 95th percentile of every metric over the scenario's flows.
pub fn write_aggregate_csv<W: Write>(config: &ExperimentConfig, results: &[ScenarioResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    for r in results {
        for (variant, metrics) in config.variants.iter().zip(&r.metrics) {
            for group in FlowGroup::ALL {
                let stats = [
                    ("mean", MetricSummary::mean(&r.flows, metrics, group)),
                    ("p95", MetricSummary::p95(&r.flows, metrics, group)),
                ];
                for (stat, s) in stats {
                    if s.flows == 0 {
                        continue;
                    }
                    w.write_record([
                        r.key.size.to_string(),
                        opt(r.lambda),
                        variant.label(),
                        r.key.instance_id(),
                        group.as_str().to_string(),
                        stat.to_string(),
                        s.flows.to_string(),
                        opt(s.throughput),
                        opt(s.mean_latency),
                        opt(s.delivery_ratio),
                        opt(s.trip_length),
                        opt(s.composite_latency),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: String,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::MissingFile(format!("{}: {e}", path.display())))?;
        let m: Self = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        m.config.validate()?;
        Ok(m)
    }
}

/// Runs the sweep and writes the CSVs, the manifest and (if enabled) the
/// decision traces into `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path, jobs: Option<usize>) -> Result<Vec<ScenarioResult>> {
    let results = run_sweep(config, jobs)?;
    fs::create_dir_all(out_dir)?;
    write_flows_csv(config, &results, fs::File::create(out_dir.join(FLOWS_FILE))?)?;
    write_aggregate_csv(config, &results, fs::File::create(out_dir.join(AGGREGATE_FILE))?)?;
    fs::write(out_dir.join(MANIFEST_FILE), Manifest::new(config).to_toml()?)?;
    if config.debug.trace {
        let dir = out_dir.join(TRACE_DIR);
        fs::create_dir_all(&dir)?;
        for r in &results {
            for (variant, trace) in config.variants.iter().zip(&r.traces) {
                if let Some(t) = trace {
                    fs::write(trace_path(&dir, r.key, &variant.label()), t)?;
                }
            }
        }
    }
    Ok(results)
}

pub fn trace_path(dir: &Path, key: RunKey, label: &str) -> PathBuf {
    dir.join(format!("{}_{label}.jsonl", key.tag()))
}

/// Mean and 95% confidence half-width (`1.96 · s / √n`) of a sample; the
/// half-width is `None` for fewer than two values.
pub fn mean_ci(values: &[f64]) -> Option<(f64, Option<f64>)> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Some((mean, None));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Some((mean, Some(1.96 * (var / n as f64).sqrt())))
}

const SUMMARY_METRICS: [&str; 5] = [
    "throughput",
    "mean_latency",
    "delivery_ratio",
    "trip_length",
    "composite_latency",
];

/// A console table of per-(size, λ, variant, group, stat) means with 95%
/// confidence intervals across the rows of an aggregate CSV.
pub fn summarize(dir: &Path) -> Result<String> {
    let path = dir.join(AGGREGATE_FILE);
    if !path.is_file() {
        return Err(Error::MissingFile(path.display().to_string()));
    }
    let mut reader = csv::Reader::from_path(&path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("{} lacks column {name}", path.display())))
    };
    let key_cols = [col("size")?, col("lambda")?, col("variant")?, col("group")?, col("stat")?];
    let metric_cols: Vec<usize> = SUMMARY_METRICS.iter().map(|m| col(m)).collect::<Result<_>>()?;

    let mut groups: Vec<([String; 5], Vec<Vec<f64>>)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let key = key_cols.map(|c| record[c].to_string());
        let idx = match groups.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                groups.push((key, vec![Vec::new(); metric_cols.len()]));
                groups.len() - 1
            }
        };
        for (slot, &c) in metric_cols.iter().enumerate() {
            if let Ok(v) = record[c].parse::<f64>() {
                groups[idx].1[slot].push(v);
            }
        }
    }

    let mut out = String::new();
    let mut header = format!(
        "{:>5} {:>7}  {:<36} {:<9} {:<4} {:>4}",
        "size", "lambda", "variant", "group", "stat", "n"
    );
    for m in SUMMARY_METRICS {
        header.push_str(&format!("  {m:>22}"));
    }
    out.push_str(header.trim_end());
    out.push('\n');
    for (key, cols) in &groups {
        let n = cols.iter().map(Vec::len).max().unwrap_or(0);
        let mut line = format!(
            "{:>5} {:>7}  {:<36} {:<9} {:<4} {:>4}",
            key[0], key[1], key[2], key[3], key[4], n
        );
        for values in cols {
            let cell = match mean_ci(values) {
                None => "—".to_string(),
                Some((m, None)) => format!("{m:.3} ± —"),
                Some((m, Some(ci))) => format!("{m:.3} ± {ci:.3}"),
            };
            line.push_str(&format!("  {cell:>22}"));
        }
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}
