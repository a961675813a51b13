use crate::commodity::RateAssignment;
use crate::conflicts::ConflictStructure;

use super::state::{beats, SchedulerState};
use super::trace::{Action, DecisionTrace};

/// Link-level local greedy scheduling on a capacity hypergraph.
///
/// Each wave first refreshes undecided links against the residual backlog
/// and mutes those that no longer fit their transmitter's or receiver's
/// residual capacity (or carry nothing). A remaining link is scheduled when,
/// measured against the undecided links at the start of the wave, it is the
/// heaviest outgoing link of its transmitter, beats all its pairwise
/// conflict neighbors, and ranks within the receiver's residual stream count
/// among the receiver's incoming links. At most `max_iterations` waves run;
/// links still undecided afterwards are muted.
pub fn lgs_ach(
    mut state: SchedulerState,
    conflicts: &ConflictStructure,
    max_iterations: usize,
    trace: &mut DecisionTrace,
) -> RateAssignment {
    let graph = state.view.graph;
    for k in 1..=max_iterations {
        let undecided = state.undecided();
        if undecided.is_empty() {
            break;
        }
        for &e in &undecided {
            state.refresh(e);
        }
        for &e in &undecided {
            if state.w[e] <= 0.0 || !state.fits_capacity(e) {
                state.mute(e);
                trace.record(k, e, Action::Mute, state.w[e]);
            }
        }

        let xi = state.undecided();
        let w = &state.w;
        let open = |f: usize| state.is_undecided(f);
        let winners: Vec<usize> = xi
            .iter()
            .copied()
            .filter(|&e| {
                let l = graph.link(e);
                let wins_tx = conflicts
                    .tx_hyperedge(l.src)
                    .members
                    .iter()
                    .all(|&f| f == e || !open(f) || beats(w, e, f));
                let wins_pairs = || {
                    conflicts
                        .pair_neighbors(e)
                        .iter()
                        .all(|&f| !open(f) || beats(w, e, f))
                };
                let wins_rx = || {
                    let ahead = conflicts
                        .rx_hyperedge(l.dst)
                        .members
                        .iter()
                        .filter(|&&f| f != e && open(f) && beats(w, f, e))
                        .count();
                    ahead < state.residual_eta_rx[l.dst] as usize
                };
                wins_tx && wins_pairs() && wins_rx()
            })
            .collect();

        for &e in &winners {
            state.schedule(e);
            trace.record(k, e, Action::Schedule, state.w[e]);
        }
        for &e in &winners {
            for &f in conflicts.pair_neighbors(e) {
                if state.is_undecided(f) {
                    state.mute(f);
                    trace.record(k, f, Action::Mute, state.w[f]);
                }
            }
        }
    }
    state.finish()
}
