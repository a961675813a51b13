//! Random wireless multi-hop topologies, stochastic link rates and per-node
//! antenna counts.

use std::collections::VecDeque;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::seed::seeded_rng;
use crate::{Error, Result};

pub type NodeId = usize;
pub type LinkId = usize;

/// Bounds of the long-term link rate distribution, in packets per slot.
pub const LONG_TERM_RATE_MIN: f64 = 10.0;
pub const LONG_TERM_RATE_MAX: f64 = 42.0;
/// Standard deviation of the per-slot rate around its long-term mean.
pub const REALTIME_RATE_SIGMA: f64 = 3.0;
/// Per-slot rates are truncated to `r_e ± REALTIME_RATE_SPREAD`.
pub const REALTIME_RATE_SPREAD: f64 = 9.0;
/// Categorical antenna-count distribution: P(1), P(2), P(3), P(4).
pub const ANTENNA_DISTRIBUTION: [f64; 4] = [0.2, 0.5, 0.2, 0.1];

const REJECTION_RETRIES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Link {
    pub id: LinkId,
    pub src: NodeId,
    pub dst: NodeId,
}

/// Directed link topology of a wireless network. Link ids are dense
/// (`0..link_count()`) and follow `(src, dst)` lexicographic order for
/// generated graphs.
#[derive(Debug, Clone)]
pub struct ConnectivityGraph {
    positions: Vec<Point>,
    links: Vec<Link>,
    comm_radius: f64,
    out_links: Vec<Vec<LinkId>>,
    in_links: Vec<Vec<LinkId>>,
}

impl ConnectivityGraph {
    /// Builds a graph from explicit positions and directed `(src, dst)` pairs.
    /// Link ids are assigned in the order given.
    pub fn from_links(positions: Vec<Point>, pairs: &[(NodeId, NodeId)], comm_radius: f64) -> Self {
        let n = positions.len();
        let mut out_links = vec![Vec::new(); n];
        let mut in_links = vec![Vec::new(); n];
        let links = pairs
            .iter()
            .enumerate()
            .map(|(id, &(src, dst))| {
                assert!(src < n && dst < n && src != dst, "bad link ({src}, {dst})");
                out_links[src].push(id);
                in_links[dst].push(id);
                Link { id, src, dst }
            })
            .collect();
        Self {
            positions,
            links,
            comm_radius,
            out_links,
            in_links,
        }
    }

    /// Links every ordered node pair within `comm_radius` of each other.
    pub fn unit_disk(positions: Vec<Point>, comm_radius: f64) -> Self {
        let n = positions.len();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && positions[i].distance(&positions[j]) <= comm_radius {
                    pairs.push((i, j));
                }
            }
        }
        Self::from_links(positions, &pairs, comm_radius)
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> Link {
        self.links[id]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, node: NodeId) -> Point {
        self.positions[node]
    }

    pub fn comm_radius(&self) -> f64 {
        self.comm_radius
    }

    pub fn out_links(&self, node: NodeId) -> &[LinkId] {
        &self.out_links[node]
    }

    pub fn in_links(&self, node: NodeId) -> &[LinkId] {
        &self.in_links[node]
    }

    pub fn find_link(&self, src: NodeId, dst: NodeId) -> Option<LinkId> {
        self.out_links[src]
            .iter()
            .copied()
            .find(|&e| self.links[e].dst == dst)
    }

    /// Unweighted hop counts from `src` to every node (`None` if unreachable).
    pub fn hop_distances(&self, src: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        let mut queue = VecDeque::from([src]);
        dist[src] = Some(0);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &e in &self.out_links[u] {
                let v = self.links[e].dst;
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_strongly_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return false;
        }
        let forward = self.hop_distances(0).iter().all(Option::is_some);
        if !forward {
            return false;
        }
        // reverse reachability to node 0
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &e in &self.in_links[u] {
                let v = self.links[e].src;
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Writes one `link_id src dst r_e` line per link.
    pub fn write_edge_list<W: Write>(&self, rates: &LinkRates, mut out: W) -> std::io::Result<()> {
        for link in &self.links {
            writeln!(out, "{} {} {} {}", link.id, link.src, link.dst, rates.long_term[link.id])?;
        }
        Ok(())
    }
}

/// Placement area and radio range for [`generate_network`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationParams {
    /// Side length of the square the nodes are dropped into.
    pub side: f64,
    pub comm_radius: f64,
    /// Number of reseeded samples tried at each radius.
    pub max_resamples: u32,
    /// Number of 10% radius increases tried after resampling fails.
    pub max_radius_steps: u32,
}

impl GenerationParams {
    /// Sizes the square so that the expected node degree, ignoring border
    /// effects, is `target_degree`.
    pub fn with_target_degree(n: usize, comm_radius: f64, target_degree: f64) -> Self {
        let area = n as f64 * std::f64::consts::PI * comm_radius * comm_radius / target_degree;
        Self {
            side: area.sqrt(),
            comm_radius,
            max_resamples: 50,
            max_radius_steps: 10,
        }
    }
}

/// Drops `n` nodes uniformly in a square and links every pair within range in
/// both directions. Samples that are not strongly connected are redrawn with
/// an incremented seed; if that keeps failing the radius grows in 10% steps.
pub fn generate_network(n: usize, seed: u64, params: &GenerationParams) -> Result<ConnectivityGraph> {
    if n < 2 {
        return Err(Error::GenerationFailure(format!("need at least 2 nodes, got {n}")));
    }
    let coord = Uniform::new(0.0, params.side)
        .map_err(|e| Error::GenerationFailure(format!("bad area side {}: {e}", params.side)))?;
    let mut radius = params.comm_radius;
    for step in 0..=params.max_radius_steps {
        for attempt in 0..params.max_resamples.max(1) {
            let mut rng = seeded_rng(seed.wrapping_add(attempt as u64), &[0x70_70, step as u64]);
            let positions = (0..n)
                .map(|_| Point::new(coord.sample(&mut rng), coord.sample(&mut rng)))
                .collect();
            let graph = ConnectivityGraph::unit_disk(positions, radius);
            if graph.is_strongly_connected() {
                return Ok(graph);
            }
        }
        radius *= 1.1;
    }
    Err(Error::GenerationFailure(format!(
        "no strongly connected sample for n={n} within retry budget (final radius {radius:.3})"
    )))
}

/// Long-term mean rate of every link, packets per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRates {
    pub long_term: Vec<f64>,
}

impl LinkRates {
    pub fn mean(&self) -> f64 {
        self.long_term.iter().sum::<f64>() / self.long_term.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.long_term.iter().copied().fold(f64::MIN, f64::max)
    }
}

pub fn assign_link_rates(graph: &ConnectivityGraph, seed: u64) -> LinkRates {
    let mut rng = seeded_rng(seed, &[0x7a7e]);
    let dist = Uniform::new_inclusive(LONG_TERM_RATE_MIN, LONG_TERM_RATE_MAX).unwrap();
    LinkRates {
        long_term: (0..graph.link_count()).map(|_| dist.sample(&mut rng)).collect(),
    }
}

/// Draws one per-slot rate around `mean`: normal with standard deviation
/// [`REALTIME_RATE_SIGMA`], rejection-truncated to `mean ± REALTIME_RATE_SPREAD`
/// and clamped at zero.
pub fn sample_realtime_rate<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    let normal = Normal::new(mean, REALTIME_RATE_SIGMA).unwrap();
    let (lo, hi) = (mean - REALTIME_RATE_SPREAD, mean + REALTIME_RATE_SPREAD);
    let mut draw = mean;
    for _ in 0..REJECTION_RETRIES {
        draw = normal.sample(rng);
        if (lo..=hi).contains(&draw) {
            break;
        }
    }
    draw.clamp(lo, hi).max(0.0)
}

/// Real-time rates of all links at slot `t`. Deterministic in `(seed, t)`;
/// links draw from the slot's stream in id order.
pub fn sample_realtime_rates(rates: &LinkRates, t: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed, &[0x5107, t as u64]);
    rates
        .long_term
        .iter()
        .map(|&mean| sample_realtime_rate(mean, &mut rng))
        .collect()
}

pub fn sample_antennas(n: usize, seed: u64) -> Vec<u32> {
    let mut rng = seeded_rng(seed, &[0xa47e]);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (k, p) in ANTENNA_DISTRIBUTION.iter().enumerate() {
                acc += p;
                if u < acc {
                    return k as u32 + 1;
                }
            }
            ANTENNA_DISTRIBUTION.len() as u32
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AntennaMode {
    /// Every device has a single antenna.
    Siso,
    /// Antenna counts drawn from [`ANTENNA_DISTRIBUTION`].
    Mimo,
}

/// Per-device stream capacities. A device with two or more antennas serves
/// that many concurrent streams in each direction (SDMA). A single-antenna
/// device receives one stream; with `tdma` enabled it may split its slot
/// across several outgoing links, paying air-time fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct TransceiverSpec {
    pub antennas: Vec<u32>,
    pub eta_tx: Vec<u32>,
    pub eta_rx: Vec<u32>,
    pub tdma: bool,
}

impl TransceiverSpec {
    pub fn from_antennas(antennas: Vec<u32>, tdma: bool) -> Self {
        assert!(antennas.iter().all(|&a| a >= 1), "antenna counts must be >= 1");
        Self {
            eta_tx: antennas.clone(),
            eta_rx: antennas.clone(),
            antennas,
            tdma,
        }
    }

    pub fn siso(n: usize, tdma: bool) -> Self {
        Self::from_antennas(vec![1; n], tdma)
    }

    pub fn generate(mode: AntennaMode, n: usize, seed: u64, tdma: bool) -> Self {
        match mode {
            AntennaMode::Siso => Self::siso(n, tdma),
            AntennaMode::Mimo => Self::from_antennas(sample_antennas(n, seed), tdma),
        }
    }

    pub fn node_count(&self) -> usize {
        self.antennas.len()
    }

    /// Transmission cost of a link leaving `src` that carries `gamma_sum`
    /// packets over a link of rate `realtime_rate`.
    pub fn tx_cost(&self, src: NodeId, gamma_sum: f64, realtime_rate: f64) -> f64 {
        if self.tdma {
            crate::conflicts::tx_cost(gamma_sum, realtime_rate, self.antennas[src])
        } else {
            1.0
        }
    }
}
