mod common;

use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;
use spbp::commodity::{exclusive_assign, maxu_assign, Decision, SlotView};
use spbp::conflicts::{build_ach, build_siso_conflict_graph};
use spbp::scheduler::{
    check_feasibility, resolve_shared_packets, schedule, DecisionTrace, SchedulerConfig, SchedulerKind,
};
use spbp::seeded_rng;
use spbp::topology::{assign_link_rates, sample_realtime_rates, AntennaMode, ConnectivityGraph, TransceiverSpec};

use common::network;

struct Draw {
    graph: ConnectivityGraph,
    queues: Array2<u32>,
    u: Array2<f64>,
    rates: Vec<f64>,
}

fn draw(n: usize, nc: usize, depth: u32, seed: u64) -> Draw {
    let graph = network(n, seed);
    let mut rng = seeded_rng(seed, &[1]);
    let queues = Array2::from_shape_fn((n, nc), |_| if rng.random_bool(0.3) { 0 } else { rng.random_range(0..=depth) });
    let bias = Array2::from_shape_fn((n, nc), |_| rng.random_range(0.0..30.0));
    let u = Array2::from_shape_fn((graph.link_count(), nc), |(e, c)| {
        let l = graph.link(e);
        queues[[l.src, c]] as f64 + bias[[l.src, c]] - queues[[l.dst, c]] as f64 - bias[[l.dst, c]]
    });
    let rates = sample_realtime_rates(&assign_link_rates(&graph, seed), 0, seed);
    Draw {
        graph,
        queues,
        u,
        rates,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn maxu_utility_dominates_exclusive(n in 8usize..24, nc in 1usize..6, depth in 1u32..120, seed in any::<u64>()) {
        let d = draw(n, nc, depth, seed);
        let view = SlotView { graph: &d.graph, queues: &d.queues, backpressure: &d.u, rates: &d.rates };
        let excl = exclusive_assign(&view);
        let maxu = maxu_assign(&view);
        for e in 0..d.graph.link_count() {
            prop_assert!(maxu.w[e] >= excl.w[e]);
            let src = d.graph.link(e).src;
            let carried: u32 = maxu.gamma.row(e).sum();
            prop_assert!(carried <= view.budget(e));
            for c in 0..nc {
                prop_assert!(maxu.gamma[[e, c]] <= d.queues[[src, c]]);
            }
        }
    }

    #[test]
    fn every_scheduler_emits_feasible_schedules(
        n in 6usize..20,
        nc in 1usize..5,
        depth in 1u32..60,
        seed in any::<u64>(),
        maxu in any::<bool>(),
        siso in any::<bool>(),
    ) {
        let d = draw(n, nc, depth, seed);
        let view = SlotView { graph: &d.graph, queues: &d.queues, backpressure: &d.u, rates: &d.rates };
        let mode = if siso { AntennaMode::Siso } else { AntennaMode::Mimo };
        for kind in [SchedulerKind::Lgs, SchedulerKind::LgsAch, SchedulerKind::LgsMimo] {
            for decouple in [false, true] {
                if kind == SchedulerKind::Lgs && decouple {
                    continue;
                }
                let (spec, conflicts) = match kind {
                    SchedulerKind::Lgs => (TransceiverSpec::siso(n, false), build_siso_conflict_graph(&d.graph, 1.5)),
                    _ => {
                        let spec = TransceiverSpec::generate(mode, n, seed, true);
                        let conflicts = build_ach(&d.graph, &spec, 1.5, true);
                        (spec, conflicts)
                    }
                };
                let pre = if maxu { maxu_assign(&view) } else { exclusive_assign(&view) };
                let cfg = SchedulerConfig { decouple, ..SchedulerConfig::new(kind) };
                let mut a = schedule(&cfg, view, &conflicts, &spec, pre, &mut DecisionTrace::disabled());
                if decouple {
                    resolve_shared_packets(&view, &mut a, &mut seeded_rng(seed, &[2]));
                }
                prop_assert!(a.x.iter().all(|&x| x != Decision::Undecided));
                let verdict = check_feasibility(&view, &conflicts, &spec, &a);
                prop_assert!(verdict.is_ok(), "{:?} decouple={}: {:?}", kind, decouple, verdict);
            }
        }
    }
}

#[test]
fn empty_queues_schedule_nothing() {
    let d = draw(12, 2, 0, 5);
    let zero = Array2::zeros(d.queues.dim());
    let u = Array2::zeros(d.u.dim());
    let view = SlotView {
        graph: &d.graph,
        queues: &zero,
        backpressure: &u,
        rates: &d.rates,
    };
    let spec = TransceiverSpec::generate(AntennaMode::Mimo, 12, 5, true);
    let conflicts = build_ach(&d.graph, &spec, 1.5, true);
    for kind in [SchedulerKind::LgsAch, SchedulerKind::LgsMimo] {
        let a = schedule(
            &SchedulerConfig::new(kind),
            view,
            &conflicts,
            &spec,
            maxu_assign(&view),
            &mut DecisionTrace::disabled(),
        );
        assert!(a.x.iter().all(|&x| x == Decision::Muted));
        assert_eq!(a.mu.sum(), 0);
    }
}
