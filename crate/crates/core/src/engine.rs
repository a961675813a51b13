//! Traffic generation, the time-slotted simulation loop and per-flow metrics.
//!
//! Each slot samples real-time link rates, computes backpressures, runs
//! commodity selection and scheduling, checks the result, then moves
//! packets and injects new arrivals. Arrivals join at the end of every slot
//! except the last, so the final slot only drains.

use std::collections::BTreeSet;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::bias::{compute_bias, edge_weights, BiasScheme};
use crate::commodity::{CommoditySelection, CommoditySelector, RateAssignment, SlotView};
use crate::conflicts::{build_ach, build_siso_conflict_graph, ConflictStructure};
use crate::queueing::NetworkState;
use crate::scheduler::{
    check_feasibility, resolve_shared_packets, schedule, DecisionTrace, SchedulerConfig, SchedulerKind,
    DEFAULT_MAX_ITERATIONS,
};
use crate::topology::{
    assign_link_rates, generate_network, sample_antennas, sample_realtime_rates, AntennaMode, ConnectivityGraph,
    GenerationParams, LinkRates, NodeId, TransceiverSpec,
};
use crate::{seeded_rng, Error, Result};

const FLOW_STREAM: u64 = 0xf10e;
const ARRIVAL_STREAM: u64 = 0xa551;
const RESOLVER_STREAM: u64 = 0xdec0;

pub const FLOWS_PER_NODE: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowKind {
    Streaming,
    Bursty,
}

impl FlowKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FlowKind::Streaming => "streaming",
            FlowKind::Bursty => "bursty",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub src: NodeId,
    pub dst: NodeId,
    /// Mean arrivals per slot.
    pub rate: f64,
    pub kind: FlowKind,
    /// First active slot (0 for streaming flows).
    pub start_slot: usize,
    /// Active slots; `None` means the whole horizon.
    pub duration: Option<usize>,
}

impl FlowSpec {
    pub fn is_active(&self, t: usize) -> bool {
        match self.duration {
            None => t >= self.start_slot,
            Some(d) => t >= self.start_slot && t < self.start_slot + d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficConfig {
    /// Probability that a flow is streaming rather than bursty.
    pub streaming_fraction: f64,
    /// Overrides every flow's arrival rate.
    pub lambda: Option<f64>,
    pub rate_min: f64,
    pub rate_max: f64,
    pub burst_duration: usize,
    /// Bursty flows start uniformly in `[0, horizon - burst_start_margin]`.
    pub burst_start_margin: usize,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            streaming_fraction: 0.5,
            lambda: None,
            rate_min: 0.1,
            rate_max: 1.0,
            burst_duration: 30,
            burst_start_margin: 100,
        }
    }
}

/// `⌊0.4·|V|⌋` flows between distinct, uniformly drawn source-destination
/// pairs.
pub fn generate_flows(graph: &ConnectivityGraph, seed: u64, horizon: usize, traffic: &TrafficConfig) -> Vec<FlowSpec> {
    let n = graph.node_count();
    let count = ((FLOWS_PER_NODE * n as f64).floor() as usize).min(n * n.saturating_sub(1));
    let mut rng = seeded_rng(seed, &[FLOW_STREAM]);
    let mut pairs = BTreeSet::new();
    let mut flows = Vec::with_capacity(count);
    while flows.len() < count {
        let src = rng.random_range(0..n);
        let dst = rng.random_range(0..n);
        if src == dst || !pairs.insert((src, dst)) {
            continue;
        }
        let drawn = rng.random_range(traffic.rate_min..=traffic.rate_max);
        let rate = traffic.lambda.unwrap_or(drawn);
        let streaming = rng.random::<f64>() < traffic.streaming_fraction;
        let latest_start = horizon.saturating_sub(traffic.burst_start_margin);
        let start = rng.random_range(0..=latest_start);
        flows.push(if streaming {
            FlowSpec {
                src,
                dst,
                rate,
                kind: FlowKind::Streaming,
                start_slot: 0,
                duration: None,
            }
        } else {
            FlowSpec {
                src,
                dst,
                rate,
                kind: FlowKind::Bursty,
                start_slot: start,
                duration: Some(traffic.burst_duration),
            }
        });
    }
    flows
}

/// Sorted distinct flow destinations; the position of a destination is its
/// commodity index.
pub fn commodities_of(flows: &[FlowSpec]) -> Vec<NodeId> {
    flows.iter().map(|f| f.dst).collect::<BTreeSet<_>>().into_iter().collect()
}

/// Poisson arrivals of every active flow in slot `t`, as a nodes ×
/// commodities count matrix. Deterministic in `(seed, flow, t)`.
pub fn arrivals(flows: &[FlowSpec], commodities: &[NodeId], node_count: usize, t: usize, seed: u64) -> Array2<u32> {
    let mut a = Array2::zeros((node_count, commodities.len()));
    for (k, f) in flows.iter().enumerate() {
        if !f.is_active(t) || f.rate <= 0.0 {
            continue;
        }
        let c = commodities
            .binary_search(&f.dst)
            .expect("flow destination is a commodity");
        let mut rng = seeded_rng(seed, &[ARRIVAL_STREAM, k as u64, t as u64]);
        let poisson = Poisson::new(f.rate).expect("positive finite rate");
        a[[f.src, c]] += poisson.sample(&mut rng) as u32;
    }
    a
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioConfig {
    pub comm_radius: f64,
    pub interference_range: f64,
    /// Mean node degree the deployment area is sized for.
    pub target_degree: f64,
    /// Multi-antenna receivers cancel interference from other transmitters.
    pub nullification: bool,
    /// Single-antenna transmitters may split a slot across outgoing links.
    pub tdma: bool,
    /// Antenna model used by the hypergraph schedulers.
    pub antennas: AntennaMode,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            comm_radius: 1.0,
            interference_range: 1.5,
            target_degree: 6.0,
            nullification: true,
            tdma: true,
            antennas: AntennaMode::Mimo,
        }
    }
}

/// One algorithm configuration under comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    #[serde(default)]
    pub name: Option<String>,
    pub selection: CommoditySelection,
    #[serde(default = "default_bias")]
    pub bias: BiasScheme,
    pub scheduler: SchedulerKind,
    #[serde(default)]
    pub decouple: bool,
    /// Overrides the radio's antenna model.
    #[serde(default)]
    pub antennas: Option<AntennaMode>,
}

fn default_bias() -> BiasScheme {
    BiasScheme::SpRbar
}

impl Variant {
    pub fn new(selection: CommoditySelection, scheduler: SchedulerKind) -> Self {
        Self {
            name: None,
            selection,
            bias: BiasScheme::SpRbar,
            scheduler,
            decouple: false,
            antennas: None,
        }
    }

    /// The explicit name, or one derived from the settings.
    pub fn label(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        let mut s = format!("{}-{}-{}", self.selection.as_str(), self.bias.as_str(), self.scheduler.as_str());
        if self.decouple {
            s.push_str("-decouple");
        }
        match self.antennas {
            Some(AntennaMode::Siso) => s.push_str("-siso"),
            Some(AntennaMode::Mimo) => s.push_str("-mimo"),
            None => {}
        }
        s
    }
}

/// A network instance plus one realization of link rates and flows.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub graph: ConnectivityGraph,
    /// Antenna counts drawn for the instance, used in MIMO mode.
    pub antennas: Vec<u32>,
    pub rates: LinkRates,
    pub flows: Vec<FlowSpec>,
    /// Seeds real-time rates, arrivals and the transmit-time resolver.
    pub realization_seed: u64,
}

impl Scenario {
    /// Draws the network and antennas from `instance_seed` and the rates and
    /// flows from `realization_seed`.
    pub fn generate(
        n: usize,
        instance_seed: u64,
        realization_seed: u64,
        radio: &RadioConfig,
        traffic: &TrafficConfig,
        horizon: usize,
    ) -> Result<Self> {
        let params = GenerationParams::with_target_degree(n, radio.comm_radius, radio.target_degree);
        let graph = generate_network(n, instance_seed, &params)?;
        let antennas = sample_antennas(n, instance_seed);
        let rates = assign_link_rates(&graph, realization_seed);
        let flows = generate_flows(&graph, realization_seed, horizon, traffic);
        Ok(Self {
            graph,
            antennas,
            rates,
            flows,
            realization_seed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationParams {
    pub horizon: usize,
    pub max_iterations: usize,
    pub check_feasibility: bool,
    /// Keep the decision trace of every slot.
    pub trace: bool,
}

impl Default for SimulationParams {
    fn default() -> Self {
        Self {
            horizon: 1000,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            check_feasibility: true,
            trace: false,
        }
    }
}

/// What happened in one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotOutcome {
    pub slot: usize,
    pub assignment: RateAssignment,
    pub backpressure: Array2<f64>,
    pub rates: Vec<f64>,
}

/// A running simulation of one variant on one scenario.
pub struct Simulation<'a> {
    scenario: &'a Scenario,
    variant: Variant,
    params: SimulationParams,
    spec: TransceiverSpec,
    conflicts: ConflictStructure,
    commodities: Vec<NodeId>,
    state: NetworkState,
    scheduler: SchedulerConfig,
    trace: DecisionTrace,
    trace_log: Option<String>,
}

impl<'a> Simulation<'a> {
    pub fn new(scenario: &'a Scenario, variant: &Variant, radio: &RadioConfig, params: SimulationParams) -> Result<Self> {
        let graph = &scenario.graph;
        let n = graph.node_count();
        let (spec, conflicts) = match variant.scheduler {
            SchedulerKind::Lgs => (
                TransceiverSpec::siso(n, false),
                build_siso_conflict_graph(graph, radio.interference_range),
            ),
            SchedulerKind::LgsAch | SchedulerKind::LgsMimo => {
                let spec = match variant.antennas.unwrap_or(radio.antennas) {
                    AntennaMode::Siso => TransceiverSpec::siso(n, radio.tdma),
                    AntennaMode::Mimo => TransceiverSpec::from_antennas(scenario.antennas.clone(), radio.tdma),
                };
                let conflicts = build_ach(graph, &spec, radio.interference_range, radio.nullification);
                (spec, conflicts)
            }
        };
        let commodities = commodities_of(&scenario.flows);
        let weights = edge_weights(&scenario.rates, variant.bias);
        let bias = compute_bias(graph, &weights, &commodities)?;
        let scheduler = SchedulerConfig {
            kind: variant.scheduler,
            max_iterations: params.max_iterations,
            decouple: variant.decouple,
        };
        Ok(Self {
            scenario,
            variant: variant.clone(),
            params,
            spec,
            conflicts,
            commodities,
            state: NetworkState::new(bias),
            scheduler,
            trace: DecisionTrace::new(params.trace || params.check_feasibility),
            trace_log: params.trace.then(String::new),
        })
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    pub fn spec(&self) -> &TransceiverSpec {
        &self.spec
    }

    pub fn conflicts(&self) -> &ConflictStructure {
        &self.conflicts
    }

    pub fn commodities(&self) -> &[NodeId] {
        &self.commodities
    }

    pub fn is_done(&self) -> bool {
        self.state.slot() >= self.params.horizon
    }

    /// Decision traces of all slots so far, as JSON lines, when tracing.
    pub fn trace_log(&self) -> Option<&str> {
        self.trace_log.as_deref()
    }

    /// The preliminary assignment a selection rule would make in the current
    /// state at the given rates, without advancing.
    pub fn preliminary(&self, selection: CommoditySelection, rates: &[f64]) -> RateAssignment {
        let u = self.state.backpressure_matrix(&self.scenario.graph);
        selection.assign(&SlotView {
            graph: &self.scenario.graph,
            queues: self.state.queues(),
            backpressure: &u,
            rates,
        })
    }

    /// Real-time rates of the current slot.
    pub fn current_rates(&self) -> Vec<f64> {
        sample_realtime_rates(&self.scenario.rates, self.state.slot(), self.scenario.realization_seed)
    }

    pub fn step(&mut self) -> Result<SlotOutcome> {
        let graph = &self.scenario.graph;
        let t = self.state.slot();
        let seed = self.scenario.realization_seed;
        let rates = self.current_rates();
        let u = self.state.backpressure_matrix(graph);
        let view = SlotView {
            graph,
            queues: self.state.queues(),
            backpressure: &u,
            rates: &rates,
        };
        self.trace.begin_slot(t);
        let preliminary = self.variant.selection.assign(&view);
        let mut a = schedule(&self.scheduler, view, &self.conflicts, &self.spec, preliminary, &mut self.trace);
        if self.variant.decouple {
            resolve_shared_packets(&view, &mut a, &mut seeded_rng(seed, &[RESOLVER_STREAM, t as u64]));
        }
        if let Some(log) = &mut self.trace_log {
            log.push_str(&self.trace.to_jsonl());
        }
        if self.params.check_feasibility {
            if let Err(reason) = check_feasibility(&view, &self.conflicts, &self.spec, &a) {
                return Err(Error::InfeasibleAssignment {
                    slot: t,
                    reason,
                    trace: Some(self.trace.to_jsonl()),
                });
            }
        }
        let arrivals = if t + 1 < self.params.horizon {
            arrivals(&self.scenario.flows, &self.commodities, graph.node_count(), t, seed)
        } else {
            Array2::zeros(self.state.queues().dim())
        };
        self.state.apply_transition(graph, &a.mu, Some(&rates), &arrivals)?;
        assert_eq!(
            self.state.injected(),
            self.state.in_flight() + self.state.delivered(),
            "packet conservation"
        );
        Ok(SlotOutcome {
            slot: t,
            assignment: a,
            backpressure: u,
            rates,
        })
    }

    /// Runs the remaining slots and computes per-flow metrics.
    pub fn run(mut self) -> Result<RunOutput> {
        while !self.is_done() {
            self.step()?;
        }
        let metrics = flow_metrics(&self.scenario.flows, &self.state, self.params.horizon);
        Ok(RunOutput {
            metrics,
            injected: self.state.injected(),
            delivered: self.state.delivered(),
            trace: self.trace_log,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// One entry per scenario flow, in flow order.
    pub metrics: Vec<FlowMetrics>,
    pub injected: usize,
    pub delivered: usize,
    pub trace: Option<String>,
}

/// Per-flow results. Latency and trip length average over delivered packets
/// only and are `None` when nothing was delivered; ratios are `None` when
/// nothing was injected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowMetrics {
    pub injected: usize,
    pub delivered: usize,
    /// Delivered packets per slot.
    pub throughput: f64,
    pub mean_latency: Option<f64>,
    pub delivery_ratio: Option<f64>,
    pub trip_length: Option<f64>,
    /// `latency · ratio + horizon · (1 − ratio)`, counting undelivered
    /// packets at the full horizon.
    pub composite_latency: Option<f64>,
}

pub fn composite_latency(mean_latency: f64, delivery_ratio: f64, horizon: usize) -> f64 {
    mean_latency * delivery_ratio + horizon as f64 * (1.0 - delivery_ratio)
}

pub fn flow_metrics(flows: &[FlowSpec], state: &NetworkState, horizon: usize) -> Vec<FlowMetrics> {
    let commodities = state.commodities();
    let mut injected = vec![0usize; flows.len()];
    let mut delivered = vec![0usize; flows.len()];
    let mut latency = vec![0u64; flows.len()];
    let mut hops = vec![0u64; flows.len()];
    for p in state.packets() {
        let dst = commodities[p.commodity];
        let Some(k) = flows.iter().position(|f| f.src == p.src && f.dst == dst) else {
            continue;
        };
        injected[k] += 1;
        if let Some(l) = p.latency() {
            delivered[k] += 1;
            latency[k] += l as u64;
            hops[k] += p.hops as u64;
        }
    }
    (0..flows.len())
        .map(|k| {
            let (inj, del) = (injected[k], delivered[k]);
            let mean = |sum: u64| (del > 0).then(|| sum as f64 / del as f64);
            let mean_latency = mean(latency[k]);
            let delivery_ratio = (inj > 0).then(|| del as f64 / inj as f64);
            FlowMetrics {
                injected: inj,
                delivered: del,
                throughput: del as f64 / horizon as f64,
                mean_latency,
                delivery_ratio,
                trip_length: mean(hops[k]),
                composite_latency: delivery_ratio.map(|r| composite_latency(mean_latency.unwrap_or(0.0), r, horizon)),
            }
        })
        .collect()
}

/// Linear-interpolation percentile (`q` in `[0, 1]`) of unsorted values.
pub fn percentile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowGroup {
    All,
    Streaming,
    Bursty,
}

impl FlowGroup {
    pub const ALL: [FlowGroup; 3] = [FlowGroup::All, FlowGroup::Streaming, FlowGroup::Bursty];

    pub fn as_str(self) -> &'static str {
        match self {
            FlowGroup::All => "all",
            FlowGroup::Streaming => "streaming",
            FlowGroup::Bursty => "bursty",
        }
    }

    pub fn contains(self, kind: FlowKind) -> bool {
        match self {
            FlowGroup::All => true,
            FlowGroup::Streaming => kind == FlowKind::Streaming,
            FlowGroup::Bursty => kind == FlowKind::Bursty,
        }
    }
}

/// Mean or 95th percentile of each metric over a group of flows, every
/// metric taken independently over the flows where it is defined.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricSummary {
    pub flows: usize,
    pub throughput: Option<f64>,
    pub mean_latency: Option<f64>,
    pub delivery_ratio: Option<f64>,
    pub trip_length: Option<f64>,
    pub composite_latency: Option<f64>,
}

impl MetricSummary {
    pub fn over(flows: &[FlowSpec], metrics: &[FlowMetrics], group: FlowGroup, stat: impl Fn(&[f64]) -> Option<f64>) -> Self {
        let chosen: Vec<&FlowMetrics> = flows
            .iter()
            .zip(metrics)
            .filter(|(f, m)| group.contains(f.kind) && m.injected > 0)
            .map(|(_, m)| m)
            .collect();
        let col = |get: fn(&FlowMetrics) -> Option<f64>| {
            let v: Vec<f64> = chosen.iter().filter_map(|m| get(m)).collect();
            stat(&v)
        };
        Self {
            flows: chosen.len(),
            throughput: col(|m| Some(m.throughput)),
            mean_latency: col(|m| m.mean_latency),
            delivery_ratio: col(|m| m.delivery_ratio),
            trip_length: col(|m| m.trip_length),
            composite_latency: col(|m| m.composite_latency),
        }
    }

    pub fn mean(flows: &[FlowSpec], metrics: &[FlowMetrics], group: FlowGroup) -> Self {
        Self::over(flows, metrics, group, mean)
    }

    pub fn p95(flows: &[FlowSpec], metrics: &[FlowMetrics], group: FlowGroup) -> Self {
        Self::over(flows, metrics, group, |v| percentile(v, 0.95))
    }
}

/// Runs one variant on one scenario to completion.
pub fn run(scenario: &Scenario, variant: &Variant, radio: &RadioConfig, params: SimulationParams) -> Result<RunOutput> {
    Simulation::new(scenario, variant, radio, params)?.run()
}
