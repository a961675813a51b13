//! Shortest-path bias: the weighted distance from every node to every
//! commodity destination, added to queue lengths to form biased backlogs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::topology::{ConnectivityGraph, LinkRates, NodeId};
use crate::{Error, Result};

/// How link weights for the bias are derived from long-term rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BiasScheme {
    /// Every link weighs the network-wide mean rate `r̄`.
    #[serde(rename = "sp_rbar")]
    SpRbar,
    /// Link `e` weighs `r̄ · r_max / r_e`, penalizing slow links.
    #[serde(rename = "sp_rbar_rmax_over_r")]
    SpRbarRmaxOverR,
}

impl BiasScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            BiasScheme::SpRbar => "sp_rbar",
            BiasScheme::SpRbarRmaxOverR => "sp_rbar_rmax_over_r",
        }
    }
}

pub fn edge_weights(rates: &LinkRates, scheme: BiasScheme) -> Vec<f64> {
    let mean = rates.mean();
    match scheme {
        BiasScheme::SpRbar => vec![mean; rates.long_term.len()],
        BiasScheme::SpRbarRmaxOverR => {
            let max = rates.max();
            rates.long_term.iter().map(|&r| mean * max / r).collect()
        }
    }
}

/// Bias `B[node, k]`: shortest weighted distance from `node` to the
/// destination of commodity `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasMatrix {
    values: Array2<f64>,
    commodities: Vec<NodeId>,
}

impl BiasMatrix {
    /// A bias of zero everywhere (plain backpressure).
    pub fn zeros(node_count: usize, commodities: Vec<NodeId>) -> Self {
        Self {
            values: Array2::zeros((node_count, commodities.len())),
            commodities,
        }
    }

    pub fn from_values(values: Array2<f64>, commodities: Vec<NodeId>) -> Self {
        assert_eq!(values.ncols(), commodities.len());
        Self { values, commodities }
    }

    pub fn get(&self, node: NodeId, commodity: usize) -> f64 {
        self.values[[node, commodity]]
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Destination node of each commodity index.
    pub fn commodities(&self) -> &[NodeId] {
        &self.commodities
    }

    pub fn node_count(&self) -> usize {
        self.values.nrows()
    }

    /// CSV with one row per node and one column per commodity destination.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["node".to_string()];
        header.extend(self.commodities.iter().map(|c| format!("c{c}")));
        w.write_record(&header)?;
        for (node, row) in self.values.rows().into_iter().enumerate() {
            let mut rec = vec![node.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    node: NodeId,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other.dist.total_cmp(&self.dist).then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from `dest` over reversed links: distances *to* `dest`.
fn distances_to(graph: &ConnectivityGraph, weights: &[f64], dest: NodeId) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.node_count()];
    let mut heap = BinaryHeap::new();
    dist[dest] = 0.0;
    heap.push(Entry { dist: 0.0, node: dest });
    while let Some(Entry { dist: d, node: v }) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &e in graph.in_links(v) {
            let u = graph.link(e).src;
            let cand = d + weights[e];
            if cand < dist[u] {
                dist[u] = cand;
                heap.push(Entry { dist: cand, node: u });
            }
        }
    }
    dist
}

pub fn compute_bias(graph: &ConnectivityGraph, weights: &[f64], commodities: &[NodeId]) -> Result<BiasMatrix> {
    assert_eq!(weights.len(), graph.link_count());
    debug_assert!(weights.iter().all(|&w| w > 0.0));
    let n = graph.node_count();
    let mut values = Array2::zeros((n, commodities.len()));
    for (k, &dest) in commodities.iter().enumerate() {
        let dist = distances_to(graph, weights, dest);
        for (node, d) in dist.into_iter().enumerate() {
            if !d.is_finite() {
                return Err(Error::UnreachableDestination { node, destination: dest });
            }
            values[[node, k]] = d;
        }
    }
    Ok(BiasMatrix {
        values,
        commodities: commodities.to_vec(),
    })
}
