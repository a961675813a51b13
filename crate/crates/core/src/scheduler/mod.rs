//! MaxWeight link scheduling: LGS on pairwise conflict graphs, LGS-ACH on
//! capacity hypergraphs and the RTS/CTS-style LGS-MIMO, plus the feasibility
//! checker and the transmit-time resolver used when rate reassignment is
//! switched off.

mod ach;
mod feasibility;
mod lgs;
mod local;
mod mimo;
mod state;
mod trace;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::commodity::{Decision, RateAssignment, SlotView};
use crate::conflicts::ConflictStructure;
use crate::topology::TransceiverSpec;

pub use ach::lgs_ach;
pub use feasibility::check_feasibility;
pub use lgs::lgs_siso;
pub use local::{build_local_conflict_graph, greedy_mwis, LocalConflictGraph};
pub use mimo::lgs_mimo;
pub use state::SchedulerState;
pub use trace::{Action, DecisionTrace, TraceEvent};

pub const DEFAULT_MAX_ITERATIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerKind {
    Lgs,
    LgsAch,
    LgsMimo,
}

impl SchedulerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchedulerKind::Lgs => "lgs",
            SchedulerKind::LgsAch => "lgs-ach",
            SchedulerKind::LgsMimo => "lgs-mimo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchedulerConfig {
    pub kind: SchedulerKind,
    pub max_iterations: usize,
    /// Skip in-loop rate reassignment; duplicated claims on the same packets
    /// are then settled by [`resolve_shared_packets`].
    pub decouple: bool,
}

impl SchedulerConfig {
    pub fn new(kind: SchedulerKind) -> Self {
        Self {
            kind,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            decouple: false,
        }
    }
}

/// Turns a preliminary assignment into a final one with the configured
/// scheduler. The plain LGS ignores `spec` and `max_iterations`; it expects
/// a pairwise conflict graph in which a device's links all conflict, so no
/// packet is ever claimed twice.
pub fn schedule(
    cfg: &SchedulerConfig,
    view: SlotView,
    conflicts: &ConflictStructure,
    spec: &TransceiverSpec,
    assignment: RateAssignment,
    trace: &mut DecisionTrace,
) -> RateAssignment {
    match cfg.kind {
        SchedulerKind::Lgs => {
            let mut a = assignment;
            a.x = lgs_siso(&a.w, conflicts, trace);
            for e in 0..a.x.len() {
                if a.x[e] == Decision::Scheduled {
                    let g = a.gamma.row(e).to_owned();
                    a.mu.row_mut(e).assign(&g);
                } else {
                    a.mu.row_mut(e).fill(0);
                }
            }
            a
        }
        SchedulerKind::LgsAch => {
            let state = SchedulerState::new(view, spec, assignment, !cfg.decouple);
            lgs_ach(state, conflicts, cfg.max_iterations, trace)
        }
        SchedulerKind::LgsMimo => {
            let state = SchedulerState::new(view, spec, assignment, !cfg.decouple);
            lgs_mimo(state, conflicts, cfg.max_iterations, trace)
        }
    }
}

/// Settles packets claimed by several scheduled outgoing links of the same
/// device. Every link claims the head of the queue, so the `k`-th packet is
/// wanted by each link whose rate exceeds `k`; it goes to one of them chosen
/// uniformly at random. Links left without packets are muted.
pub fn resolve_shared_packets<R: Rng + ?Sized>(view: &SlotView, a: &mut RateAssignment, rng: &mut R) {
    let graph = view.graph;
    let mut claimants = Vec::new();
    for node in 0..graph.node_count() {
        let out: Vec<usize> = graph
            .out_links(node)
            .iter()
            .copied()
            .filter(|&e| a.x[e] == Decision::Scheduled)
            .collect();
        if out.len() < 2 {
            continue;
        }
        for c in 0..view.commodity_count() {
            let claimed: u32 = out.iter().map(|&e| a.mu[[e, c]]).sum();
            let q = view.queues[[node, c]];
            if claimed <= q {
                continue;
            }
            let wanted: Vec<u32> = out.iter().map(|&e| a.mu[[e, c]]).collect();
            let deepest = wanted.iter().copied().max().unwrap_or(0).min(q);
            let mut got = vec![0u32; out.len()];
            for k in 0..deepest {
                claimants.clear();
                claimants.extend((0..out.len()).filter(|&l| wanted[l] > k));
                let pick = claimants[rng.random_range(0..claimants.len())];
                got[pick] += 1;
            }
            for (l, &e) in out.iter().enumerate() {
                a.mu[[e, c]] = got[l];
            }
        }
    }
    for e in 0..a.x.len() {
        if a.x[e] == Decision::Scheduled && a.mu_total(e) == 0 {
            a.x[e] = Decision::Muted;
        }
    }
}
