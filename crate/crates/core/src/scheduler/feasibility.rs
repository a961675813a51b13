use crate::commodity::{Decision, RateAssignment, SlotView};
use crate::conflicts::ConflictStructure;
use crate::topology::TransceiverSpec;

use super::state::CAPACITY_EPS;

/// Checks a final assignment against every per-slot constraint: decided
/// links only, packets only on scheduled links and every scheduled link
/// carrying some, link rates, transmitter backlogs, pairwise conflicts and
/// per-device transmit/receive capacities. Returns the first violation.
pub fn check_feasibility(
    view: &SlotView,
    conflicts: &ConflictStructure,
    spec: &TransceiverSpec,
    a: &RateAssignment,
) -> Result<(), String> {
    let graph = view.graph;
    let nc = view.commodity_count();
    let active = |e: usize| a.x[e] == Decision::Scheduled;

    for link in graph.links() {
        let e = link.id;
        let total = a.mu_total(e);
        match a.x[e] {
            Decision::Undecided => return Err(format!("link {e} left undecided")),
            Decision::Muted if total > 0 => {
                return Err(format!("muted link {e} carries {total} packets"))
            }
            Decision::Scheduled if total == 0 => {
                return Err(format!("scheduled link {e} carries nothing"))
            }
            _ => {}
        }
        if total as f64 > view.rates[e] {
            return Err(format!("link {e} carries {total} packets above rate {}", view.rates[e]));
        }
    }

    for node in 0..graph.node_count() {
        for c in 0..nc {
            let out: u32 = graph.out_links(node).iter().map(|&e| a.mu[[e, c]]).sum();
            let q = view.queues[[node, c]];
            if out > q {
                return Err(format!("node {node} sends {out} packets of commodity {c} but holds {q}"));
            }
        }
        let tx_load: f64 = graph
            .out_links(node)
            .iter()
            .filter(|&&e| active(e))
            .map(|&e| spec.tx_cost(node, a.mu_total(e) as f64, view.rates[e]))
            .sum();
        if tx_load > spec.eta_tx[node] as f64 + CAPACITY_EPS {
            return Err(format!(
                "node {node} transmit cost {tx_load} exceeds capacity {}",
                spec.eta_tx[node]
            ));
        }
        let rx_load = graph.in_links(node).iter().filter(|&&e| active(e)).count();
        if rx_load > spec.eta_rx[node] as usize {
            return Err(format!(
                "node {node} receives {rx_load} streams above capacity {}",
                spec.eta_rx[node]
            ));
        }
    }

    for (p, q) in conflicts.pair_edges() {
        if active(p) && active(q) {
            return Err(format!("conflicting links {p} and {q} both scheduled"));
        }
    }
    Ok(())
}
