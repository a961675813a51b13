use crate::commodity::Decision;
use crate::conflicts::ConflictStructure;

use super::state::beats;
use super::trace::{Action, DecisionTrace};

/// Local greedy scheduling on a pairwise conflict graph.
///
/// Links without positive utility are muted up front. Then, in waves, every
/// undecided link that beats all of its undecided neighbors is scheduled and
/// its neighbors are muted, until nothing is left undecided.
pub fn lgs_siso(w: &[f64], conflicts: &ConflictStructure, trace: &mut DecisionTrace) -> Vec<Decision> {
    assert_eq!(w.len(), conflicts.link_count());
    let mut x: Vec<Decision> = w
        .iter()
        .enumerate()
        .map(|(e, &we)| {
            if we > 0.0 {
                Decision::Undecided
            } else {
                trace.record(0, e, Action::Mute, we);
                Decision::Muted
            }
        })
        .collect();

    let mut wave = 0;
    loop {
        let undecided: Vec<usize> = (0..x.len()).filter(|&e| x[e] == Decision::Undecided).collect();
        if undecided.is_empty() {
            break;
        }
        wave += 1;
        let winners: Vec<usize> = undecided
            .iter()
            .copied()
            .filter(|&e| {
                conflicts
                    .pair_neighbors(e)
                    .iter()
                    .all(|&f| x[f] != Decision::Undecided || beats(w, e, f))
            })
            .collect();
        debug_assert!(!winners.is_empty(), "the heaviest undecided link always wins");
        for &e in &winners {
            x[e] = Decision::Scheduled;
            trace.record(wave, e, Action::Schedule, w[e]);
        }
        for &e in &winners {
            for &f in conflicts.pair_neighbors(e) {
                if x[f] == Decision::Undecided {
                    x[f] = Decision::Muted;
                    trace.record(wave, f, Action::Mute, w[f]);
                }
            }
        }
    }
    x
}
