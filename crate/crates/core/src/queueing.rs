//! Per-node, per-commodity FIFO queues and the synchronous queue update.

use std::collections::VecDeque;

use ndarray::Array2;

use crate::bias::BiasMatrix;
use crate::topology::{ConnectivityGraph, Link, NodeId};
use crate::{Error, Result};

pub type PacketId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketRecord {
    pub id: PacketId,
    /// Commodity index (column of the queue matrix).
    pub commodity: usize,
    pub destination: NodeId,
    pub src: NodeId,
    pub inject_slot: usize,
    pub hops: u32,
    pub deliver_slot: Option<usize>,
}

impl PacketRecord {
    pub fn latency(&self) -> Option<usize> {
        self.deliver_slot.map(|d| d - self.inject_slot)
    }
}

/// Queue state of the whole network at the start of slot [`slot`](Self::slot).
#[derive(Debug, Clone)]
pub struct NetworkState {
    queues: Array2<u32>,
    fifo: Vec<VecDeque<PacketId>>,
    bias: BiasMatrix,
    packets: Vec<PacketRecord>,
    delivered: usize,
    slot: usize,
}

impl NetworkState {
    pub fn new(bias: BiasMatrix) -> Self {
        let shape = (bias.node_count(), bias.commodities().len());
        Self {
            queues: Array2::zeros(shape),
            fifo: vec![VecDeque::new(); shape.0 * shape.1],
            bias,
            packets: Vec::new(),
            delivered: 0,
            slot: 0,
        }
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn node_count(&self) -> usize {
        self.queues.nrows()
    }

    pub fn commodity_count(&self) -> usize {
        self.queues.ncols()
    }

    pub fn commodities(&self) -> &[NodeId] {
        self.bias.commodities()
    }

    pub fn bias(&self) -> &BiasMatrix {
        &self.bias
    }

    pub fn queues(&self) -> &Array2<u32> {
        &self.queues
    }

    pub fn queue(&self, node: NodeId, commodity: usize) -> u32 {
        self.queues[[node, commodity]]
    }

    /// Packets waiting at `node` for `commodity`, head first.
    pub fn fifo(&self, node: NodeId, commodity: usize) -> &VecDeque<PacketId> {
        &self.fifo[node * self.commodity_count() + commodity]
    }

    pub fn packets(&self) -> &[PacketRecord] {
        &self.packets
    }

    pub fn injected(&self) -> usize {
        self.packets.len()
    }

    pub fn delivered(&self) -> usize {
        self.delivered
    }

    pub fn in_flight(&self) -> usize {
        self.queues.iter().map(|&q| q as usize).sum()
    }

    /// Biased backlog `Q + B` of `commodity` at `node`.
    pub fn biased_backlog(&self, node: NodeId, commodity: usize) -> f64 {
        self.queues[[node, commodity]] as f64 + self.bias.get(node, commodity)
    }

    /// Backlog differential of `commodity` across `link`.
    pub fn backpressure(&self, link: Link, commodity: usize) -> f64 {
        self.biased_backlog(link.src, commodity) - self.biased_backlog(link.dst, commodity)
    }

    /// Backpressure of every `(link, commodity)` pair.
    pub fn backpressure_matrix(&self, graph: &ConnectivityGraph) -> Array2<f64> {
        let nc = self.commodity_count();
        let mut u = Array2::zeros((graph.link_count(), nc));
        for link in graph.links() {
            for c in 0..nc {
                u[[link.id, c]] = self.backpressure(*link, c);
            }
        }
        u
    }

    /// Overwrites queue lengths with placeholder packets. For building test
    /// states; not meant to be mixed with traffic injected via transitions.
    pub fn set_queues(&mut self, queues: Array2<u32>) {
        assert_eq!(queues.dim(), self.queues.dim());
        let nc = self.commodity_count();
        self.fifo.iter_mut().for_each(VecDeque::clear);
        self.packets.clear();
        self.delivered = 0;
        for ((node, c), &q) in queues.indexed_iter() {
            for _ in 0..q {
                let id = self.packets.len();
                self.packets.push(PacketRecord {
                    id,
                    commodity: c,
                    destination: self.bias.commodities()[c],
                    src: node,
                    inject_slot: self.slot,
                    hops: 0,
                    deliver_slot: None,
                });
                self.fifo[node * nc + c].push_back(id);
            }
        }
        self.queues = queues;
    }

    /// Advances one slot. `mu[link, commodity]` packets leave the head of
    /// each source queue; all departures are taken against the slot-start
    /// queues, so no packet moves twice. Packets reaching their destination
    /// are delivered at the current slot. `arrivals[node, commodity]` new
    /// packets join the tail afterwards.
    ///
    /// With `rates` given, per-link totals are also checked against them.
    pub fn apply_transition(
        &mut self,
        graph: &ConnectivityGraph,
        mu: &Array2<u32>,
        rates: Option<&[f64]>,
        arrivals: &Array2<u32>,
    ) -> Result<()> {
        let nc = self.commodity_count();
        assert_eq!(mu.dim(), (graph.link_count(), nc), "mu shape");
        assert_eq!(arrivals.dim(), self.queues.dim(), "arrival shape");
        let infeasible = |reason: String| Error::InfeasibleAssignment {
            slot: self.slot,
            reason,
            trace: None,
        };

        let mut outgoing = Array2::<u32>::zeros(self.queues.dim());
        for link in graph.links() {
            let row = mu.row(link.id);
            if let Some(rates) = rates {
                let total: u32 = row.sum();
                if total as f64 > rates[link.id] {
                    return Err(infeasible(format!(
                        "link {} carries {total} packets above rate {}",
                        link.id, rates[link.id]
                    )));
                }
            }
            for (c, &m) in row.iter().enumerate() {
                outgoing[[link.src, c]] += m;
            }
        }
        for ((node, c), &out) in outgoing.indexed_iter() {
            if out > self.queues[[node, c]] {
                return Err(infeasible(format!(
                    "node {node} sends {out} packets of commodity {c} but holds {}",
                    self.queues[[node, c]]
                )));
            }
        }

        // Departures against slot-start queues, links in id order.
        let mut moved: Vec<(NodeId, usize, PacketId)> = Vec::new();
        for link in graph.links() {
            for (c, &m) in mu.row(link.id).iter().enumerate() {
                let q = &mut self.fifo[link.src * nc + c];
                for _ in 0..m {
                    let id = q.pop_front().expect("queue length checked above");
                    moved.push((link.dst, c, id));
                }
            }
        }
        for (node, c) in outgoing.indexed_iter().filter(|(_, &o)| o > 0).map(|(ix, _)| ix) {
            self.queues[[node, c]] -= outgoing[[node, c]];
        }
        for (node, c, id) in moved {
            let p = &mut self.packets[id];
            p.hops += 1;
            if p.destination == node {
                p.deliver_slot = Some(self.slot);
                self.delivered += 1;
            } else {
                self.fifo[node * nc + c].push_back(id);
                self.queues[[node, c]] += 1;
            }
        }

        for ((node, c), &a) in arrivals.indexed_iter() {
            let destination = self.bias.commodities()[c];
            for _ in 0..a {
                let id = self.packets.len();
                let delivered = destination == node;
                self.packets.push(PacketRecord {
                    id,
                    commodity: c,
                    destination,
                    src: node,
                    inject_slot: self.slot,
                    hops: 0,
                    deliver_slot: delivered.then_some(self.slot),
                });
                if delivered {
                    self.delivered += 1;
                } else {
                    self.fifo[node * nc + c].push_back(id);
                    self.queues[[node, c]] += 1;
                }
            }
        }

        debug_assert_eq!(self.injected(), self.in_flight() + self.delivered);
        self.slot += 1;
        Ok(())
    }
}
