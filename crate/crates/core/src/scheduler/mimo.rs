use std::collections::BTreeSet;

use crate::commodity::RateAssignment;
use crate::conflicts::ConflictStructure;
use crate::topology::{LinkId, NodeId};

use super::local::{build_local_conflict_graph, greedy_mwis};
use super::state::{beats, SchedulerState};
use super::trace::{Action, DecisionTrace};

/// Transceiver-level local greedy scheduling with request/grant rounds,
/// simulated synchronously.
///
/// Each round has three phases:
///
/// 1. Every transmitting device refreshes its undecided outgoing links,
///    mutes those it can no longer afford, that carry nothing, or that a
///    nearby device has rejected, and requests its heaviest remaining link.
/// 2. Every device builds its local conflict graph from the requests it
///    hears, finds a greedy independent set in it and, unless its own
///    request survives there, grants the heaviest links in the set that are
///    destined to it, up to its residual stream count. Local conflict
///    neighbors of the granted links go to the device's rejection list.
///    A device that lost its own request this way mutes it.
/// 3. Every transmitter mutes its request if a nearby device rejected it,
///    and schedules it if its receiver granted it. A device that starts
///    transmitting rejects its incoming links and every conflict neighbor of
///    the scheduled link, so later rounds cannot activate them.
///
/// Rejection lists live for the whole call. Rounds stop when no device is
/// active or after `max_iterations`; undecided links are then muted.
pub fn lgs_mimo(
    mut state: SchedulerState,
    conflicts: &ConflictStructure,
    max_iterations: usize,
    trace: &mut DecisionTrace,
) -> RateAssignment {
    let graph = state.view.graph;
    let n = graph.node_count();
    let m = graph.link_count();
    let mut v_tx = vec![true; n];
    let mut v_rx = vec![true; n];
    let mut phi: Vec<BTreeSet<LinkId>> = vec![BTreeSet::new(); n];

    let rejected_near = |phi: &[BTreeSet<LinkId>], i: NodeId, e: LinkId| {
        phi[i].contains(&e) || conflicts.nearby_devices(i).iter().any(|&j| phi[j].contains(&e))
    };

    for k in 1..=max_iterations {
        if !v_tx.iter().chain(&v_rx).any(|&v| v) {
            break;
        }

        // Requests.
        let mut candidate: Vec<Option<LinkId>> = vec![None; n];
        for i in 0..n {
            if !v_tx[i] {
                continue;
            }
            let mut best: Option<LinkId> = None;
            for &e in graph.out_links(i) {
                if !state.is_undecided(e) {
                    continue;
                }
                state.refresh(e);
                if state.w[e] <= 0.0 || !state.fits_capacity(e) || rejected_near(&phi, i, e) {
                    state.mute(e);
                    trace.record(k, e, Action::Mute, state.w[e]);
                    continue;
                }
                if best.is_none_or(|b| beats(&state.w, e, b)) {
                    best = Some(e);
                }
            }
            match best {
                Some(e) => {
                    candidate[i] = Some(e);
                    trace.record(k, e, Action::Request, state.w[e]);
                }
                None => v_tx[i] = false,
            }
        }

        // Grants.
        let mut granted = vec![false; m];
        let mut self_muted = Vec::new();
        for i in 0..n {
            if !v_tx[i] && !v_rx[i] {
                continue;
            }
            let own = candidate[i].map(|e| (e, state.w[e]));
            let requests: Vec<(LinkId, f64)> = conflicts
                .nearby_devices(i)
                .iter()
                .filter_map(|&j| candidate[j])
                .filter(|e| !phi[i].contains(e))
                .map(|e| (e, state.w[e]))
                .collect();
            let lcg = build_local_conflict_graph(i, own, &requests, graph, conflicts);
            let independent = greedy_mwis(&lcg);
            let own_wins = candidate[i].is_some_and(|e| independent.contains(&e));
            if state.residual_eta_rx[i] > 0 && !own_wins {
                let mut theta: Vec<LinkId> = independent
                    .iter()
                    .copied()
                    .filter(|&e| graph.link(e).dst == i)
                    .collect();
                theta.sort_by(|&a, &b| {
                    if beats(&state.w, a, b) {
                        std::cmp::Ordering::Less
                    } else {
                        std::cmp::Ordering::Greater
                    }
                });
                theta.truncate(state.residual_eta_rx[i] as usize);
                for &e in &theta {
                    granted[e] = true;
                    trace.record(k, e, Action::Grant, state.w[e]);
                    phi[i].extend(lcg.neighbors(e));
                }
                state.residual_eta_rx[i] -= theta.len() as u32;
                if let Some(e) = candidate[i] {
                    self_muted.push(e);
                }
            }
            if v_rx[i] {
                let waiting: Vec<LinkId> = graph
                    .in_links(i)
                    .iter()
                    .copied()
                    .filter(|&e| state.is_undecided(e) && !granted[e])
                    .collect();
                if state.residual_eta_rx[i] == 0 || waiting.is_empty() {
                    v_rx[i] = false;
                    phi[i].extend(waiting);
                }
            }
        }
        for e in self_muted {
            candidate[graph.link(e).src] = None;
            state.mute(e);
            trace.record(k, e, Action::Mute, state.w[e]);
        }

        // Confirmations. Rejection lists are read as broadcast at the end of
        // the grant phase; additions here reach neighbors next round.
        let mut additions: Vec<(NodeId, Vec<LinkId>)> = Vec::new();
        for i in 0..n {
            if !v_tx[i] {
                continue;
            }
            let mut add = Vec::new();
            if let Some(e) = candidate[i] {
                if rejected_near(&phi, i, e) {
                    state.mute(e);
                    trace.record(k, e, Action::Reject, state.w[e]);
                } else if granted[e] {
                    state.schedule(e);
                    trace.record(k, e, Action::Schedule, state.w[e]);
                    add.extend_from_slice(graph.in_links(i));
                    add.extend_from_slice(conflicts.pair_neighbors(e));
                    v_rx[i] = false;
                }
            }
            add.extend(
                graph
                    .in_links(i)
                    .iter()
                    .copied()
                    .filter(|&f| rejected_near(&phi, i, f)),
            );
            if !add.is_empty() {
                additions.push((i, add));
            }
        }
        for (i, add) in additions {
            phi[i].extend(add);
        }
    }
    state.finish()
}
