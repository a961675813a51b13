//! Link conflict models.
//!
//! Vertices are directed links. Pairwise edges forbid two links from being
//! active together. Every device additionally owns a transmission hyperedge
//! over its outgoing links and a reception hyperedge over its incoming links;
//! the total cost of active links in a hyperedge may not exceed its capacity.
//! The SISO conflict graph is the special case where all capacities are 1.

use std::collections::BTreeSet;
use std::io::Write;

use crate::topology::{ConnectivityGraph, LinkId, NodeId, TransceiverSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyperedgeKind {
    Tx,
    Rx,
}

impl HyperedgeKind {
    fn as_str(self) -> &'static str {
        match self {
            HyperedgeKind::Tx => "tx",
            HyperedgeKind::Rx => "rx",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperedge {
    pub kind: HyperedgeKind,
    pub owner: NodeId,
    pub capacity: u32,
    pub members: Vec<LinkId>,
}

/// Pairwise edges plus per-device capacity hyperedges over the links of a
/// [`ConnectivityGraph`]. Immutable once built.
#[derive(Debug, Clone)]
pub struct ConflictStructure {
    pair_neighbors: Vec<Vec<LinkId>>,
    pair_count: usize,
    hyperedges: Vec<Hyperedge>,
    tx_edge: Vec<usize>,
    rx_edge: Vec<usize>,
    nearby: Vec<Vec<NodeId>>,
}

impl ConflictStructure {
    /// Assembles a structure from pair edges and per-node capacities.
    /// Duplicate or reversed pairs are merged; self-pairs are rejected.
    pub fn new(
        graph: &ConnectivityGraph,
        pairs: impl IntoIterator<Item = (LinkId, LinkId)>,
        eta_tx: &[u32],
        eta_rx: &[u32],
    ) -> Self {
        let m = graph.link_count();
        let mut set = BTreeSet::new();
        for (a, b) in pairs {
            assert!(a != b, "pair edge must join distinct links");
            assert!(a < m && b < m, "pair edge ({a}, {b}) out of range");
            set.insert((a.min(b), a.max(b)));
        }
        let mut pair_neighbors = vec![Vec::new(); m];
        for &(a, b) in &set {
            pair_neighbors[a].push(b);
            pair_neighbors[b].push(a);
        }
        for list in &mut pair_neighbors {
            list.sort_unstable();
        }

        let n = graph.node_count();
        let mut hyperedges = Vec::with_capacity(2 * n);
        let mut tx_edge = Vec::with_capacity(n);
        let mut rx_edge = Vec::with_capacity(n);
        for node in 0..n {
            tx_edge.push(hyperedges.len());
            hyperedges.push(Hyperedge {
                kind: HyperedgeKind::Tx,
                owner: node,
                capacity: eta_tx[node],
                members: graph.out_links(node).to_vec(),
            });
            rx_edge.push(hyperedges.len());
            hyperedges.push(Hyperedge {
                kind: HyperedgeKind::Rx,
                owner: node,
                capacity: eta_rx[node],
                members: graph.in_links(node).to_vec(),
            });
        }

        let mut s = Self {
            pair_neighbors,
            pair_count: set.len(),
            hyperedges,
            tx_edge,
            rx_edge,
            nearby: Vec::new(),
        };
        s.nearby = s.compute_nearby(graph);
        s
    }

    /// Devices incident to any link that shares a pair edge or a hyperedge
    /// with one of `node`'s links. These are the devices whose control
    /// messages `node` hears in distributed scheduling.
    fn compute_nearby(&self, graph: &ConnectivityGraph) -> Vec<Vec<NodeId>> {
        let n = graph.node_count();
        let mut nearby = vec![Vec::new(); n];
        let mut mark = vec![usize::MAX; n];
        for (node, out) in nearby.iter_mut().enumerate() {
            mark[node] = node;
            let incident = graph.out_links(node).iter().chain(graph.in_links(node));
            for &e in incident {
                let l = graph.link(e);
                let related = self.pair_neighbors[e]
                    .iter()
                    .chain(graph.out_links(l.src))
                    .chain(graph.in_links(l.dst));
                for &f in std::iter::once(&e).chain(related) {
                    let lf = graph.link(f);
                    for v in [lf.src, lf.dst] {
                        if mark[v] != node {
                            mark[v] = node;
                            out.push(v);
                        }
                    }
                }
            }
            out.sort_unstable();
        }
        nearby
    }

    pub fn link_count(&self) -> usize {
        self.pair_neighbors.len()
    }

    pub fn pair_neighbors(&self, link: LinkId) -> &[LinkId] {
        &self.pair_neighbors[link]
    }

    pub fn conflicts(&self, a: LinkId, b: LinkId) -> bool {
        self.pair_neighbors[a].binary_search(&b).is_ok()
    }

    pub fn pair_edge_count(&self) -> usize {
        self.pair_count
    }

    /// Pair edges as `(a, b)` with `a < b`, in ascending order.
    pub fn pair_edges(&self) -> impl Iterator<Item = (LinkId, LinkId)> + '_ {
        self.pair_neighbors
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    pub fn hyperedges(&self) -> &[Hyperedge] {
        &self.hyperedges
    }

    pub fn tx_hyperedge(&self, node: NodeId) -> &Hyperedge {
        &self.hyperedges[self.tx_edge[node]]
    }

    pub fn rx_hyperedge(&self, node: NodeId) -> &Hyperedge {
        &self.hyperedges[self.rx_edge[node]]
    }

    pub fn nearby_devices(&self, node: NodeId) -> &[NodeId] {
        &self.nearby[node]
    }

    /// Text export: `P e1 e2` per pair edge, then
    /// `H kind owner capacity e1 e2 ...` per hyperedge.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (a, b) in self.pair_edges() {
            writeln!(out, "P {a} {b}")?;
        }
        for h in &self.hyperedges {
            write!(out, "H {} {} {}", h.kind.as_str(), h.owner, h.capacity)?;
            for e in &h.members {
                write!(out, " {e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Conflict graph for single-antenna networks: two links conflict when they
/// share a device, or when the transmitter of either is within
/// `interference_range` of the other's receiver.
pub fn build_siso_conflict_graph(graph: &ConnectivityGraph, interference_range: f64) -> ConflictStructure {
    let links = graph.links();
    let pos = graph.positions();
    let mut pairs = Vec::new();
    for (ia, a) in links.iter().enumerate() {
        for b in &links[ia + 1..] {
            let shared = a.src == b.src || a.src == b.dst || a.dst == b.src || a.dst == b.dst;
            let interferes = pos[a.src].distance(&pos[b.dst]) <= interference_range
                || pos[b.src].distance(&pos[a.dst]) <= interference_range;
            if shared || interferes {
                pairs.push((a.id, b.id));
            }
        }
    }
    let ones = vec![1; graph.node_count()];
    ConflictStructure::new(graph, pairs, &ones, &ones)
}

/// Attributed capacity hypergraph for devices with heterogeneous antennas.
///
/// Pair edges cover:
/// - half-duplex conflicts (a device transmitting on one link and receiving
///   on another),
/// - interference between links with distinct transmitters and receivers,
///   added when either receiver is within `interference_range` of the other
///   link's transmitter and cannot nullify it (a receiver with two or more
///   antennas nullifies external interference when `nullification` is on),
/// - links into a single-receive-stream device, pairwise,
/// - links out of a single-antenna device when TDMA is disabled, pairwise.
///
/// Stream capacities enter through the per-device hyperedges.
pub fn build_ach(
    graph: &ConnectivityGraph,
    spec: &TransceiverSpec,
    interference_range: f64,
    nullification: bool,
) -> ConflictStructure {
    let links = graph.links();
    let pos = graph.positions();
    let vulnerable = |receiver: NodeId, transmitter: NodeId| {
        pos[transmitter].distance(&pos[receiver]) <= interference_range
            && !(nullification && spec.antennas[receiver] >= 2)
    };
    let mut pairs = Vec::new();
    for (ia, a) in links.iter().enumerate() {
        for b in &links[ia + 1..] {
            let conflict = if a.dst == b.src || b.dst == a.src {
                true
            } else if a.src == b.src {
                spec.antennas[a.src] == 1 && !spec.tdma
            } else if a.dst == b.dst {
                spec.eta_rx[a.dst] == 1
            } else {
                vulnerable(a.dst, b.src) || vulnerable(b.dst, a.src)
            };
            if conflict {
                pairs.push((a.id, b.id));
            }
        }
    }
    ConflictStructure::new(graph, pairs, &spec.eta_tx, &spec.eta_rx)
}

/// Transmission cost of a link: the air-time fraction `gamma_sum / rate`
/// (capped at 1) for a single-antenna transmitter, 1 for a multi-antenna one.
/// A zero rate on a single-antenna link costs a full slot.
pub fn tx_cost(gamma_sum: f64, realtime_rate: f64, eta_src: u32) -> f64 {
    if eta_src > 1 || realtime_rate <= 0.0 {
        1.0
    } else {
        (gamma_sum / realtime_rate).min(1.0)
    }
}

/// Per-link transmission and reception costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVector {
    pub tau: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl CostVector {
    /// Costs of carrying `loads[e]` packets on every link `e` at the given rates.
    pub fn compute(graph: &ConnectivityGraph, spec: &TransceiverSpec, loads: &[f64], rates: &[f64]) -> Self {
        let tau = graph
            .links()
            .iter()
            .map(|l| spec.tx_cost(l.src, loads[l.id], rates[l.id]))
            .collect();
        Self {
            tau,
            sigma: vec![1.0; graph.link_count()],
        }
    }
}
